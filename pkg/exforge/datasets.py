# -*- coding: utf-8 -*-
"""
Datasets retrieves the fixtures shipped with exforge and generates
synthetic data. The fixtures describe a small slice of the Azure CLI:
a command surface, telemetry, a document corpus, existing reference
pages, human examples, labeled parameters and a pipeline configuration.

"""

import os
import logging
from datetime import datetime, timedelta, timezone

import numpy as np
import pandas as pd

from .classifier import LabeledParam
from .exceptions import ValidationError
from .paramtype import ParamType
from .surface import (CommandSpec, CommandSurface, ParameterSpec,
                      load_surface)
from .telemetry import TelemetryRecord

logger = logging.getLogger(__name__)

FIXTURES = {
    'surface': 'surface.json',
    'telemetry': 'telemetry.jsonl',
    'corpus': 'corpus',
    'docs': 'docs',
    'human_examples': 'human_examples.json',
    'labeled': 'labeled_params.csv',
    'config': 'exforge.yaml',
}

_MODULES = ('vm', 'network', 'storage', 'webapp', 'keyvault', 'aks', 'sql',
            'ad', 'monitor', 'acr')
_VERBS = ('create', 'update', 'show', 'list', 'delete')
_NOISE = ('resource', 'group', 'azure', 'service', 'value', 'option',
          'configuration', 'account', 'default', 'new', 'existing', 'given',
          'server', 'cluster')


def fixture_path(name):
    """
    Path of a shipped fixture.

    Parameters
    ----------
    name : str {'surface', 'telemetry', 'corpus', 'docs', 'human_examples',
                'labeled', 'config'}

    Returns
    -------
    str

    Raises
    ------
    ValidationError
        If name is not a fixture

    Example
    -------
    >>> import exforge as exf
    >>> path = exf.fixture_path('telemetry')

    """

    if name not in FIXTURES:
        raise ValidationError('%s is not a valid fixture' % name)
    file_dir = os.path.dirname(__file__)
    return os.path.join(file_dir, 'data', 'fixtures', FIXTURES[name])


def surface_data(source = 'az'):
    """
    Retrieves a shipped command surface.

    Parameters
    ----------
    source : str {'az'}

    Returns
    -------
    :class:`exforge.CommandSurface`

    Raises
    ------
    ValidationError
        If source is not a shipped surface

    Example
    -------
    >>> import exforge as exf
    >>> surface = exf.surface_data('az')
    >>> surface.lookup('vm create').parameter_names[:2]
    ('image', 'admin-username')

    """

    paths = {'az': fixture_path('surface')}
    if source not in paths:
        raise ValidationError('%s is not valid source' % source)
    return load_surface(paths[source])


def type_frequencies(csv_path = None):
    """
    Type frequencies of the labeled Azure CLI parameters.

    Note
    -----
    Format for csv:
    ::

        type,frequency,tokens,names
        Integer,273,count number size limit,count instance-count

    ``tokens`` are description words typical of the type and ``names``
    are typical parameter names; both drive the synthetic generator.

    Returns
    -------
    pandas.DataFrame
        indexed by type

    """

    if csv_path is None:
        local_path = os.path.dirname(__file__)
        csv_path = os.path.join(local_path, 'data', 'type_frequencies.csv')
    df = pd.read_csv(csv_path, dtype = {'type': str, 'tokens': str,
                                        'names': str})
    return df.set_index('type')


def synthetic_labeled_params(n_rows = None, seed = 0):
    """
    Labeled parameters shaped like the Azure CLI type frequencies.

    Every description holds two words typical of its type and every
    parameter name is a typical name of the type; command names and the
    remaining words are shared by all types.

    Parameters
    ----------
    n_rows : int (default None)
        approximate size; the frequencies are scaled to it with at least
        three rows per type. None keeps the 7613 rows of the table.
    seed : int (default 0)

    Returns
    -------
    list of :class:`exforge.LabeledParam`
        shuffled

    Example
    -------
    >>> import exforge as exf
    >>> data = exf.synthetic_labeled_params(seed = 0)
    >>> len(data)
    7613

    """

    table = type_frequencies()
    total = float(table['frequency'].sum())
    rng = np.random.default_rng(seed)

    rows = []
    for name, row in table.iterrows():
        label = ParamType.parse(name)
        count = int(row['frequency'])
        if n_rows is not None:
            count = max(3, int(round(count * n_rows / total)))
        tokens = row['tokens'].split()
        names = row['names'].split()
        for _ in range(count):
            module = _MODULES[rng.integers(len(_MODULES))]
            verb = _VERBS[rng.integers(len(_VERBS))]
            first, second = rng.choice(tokens, size = 2, replace = False)
            noise = rng.choice(_NOISE, size = 2, replace = False)
            rows.append(LabeledParam(
                parameter_name = names[rng.integers(len(names))],
                command_name = '%s %s' % (module, verb),
                module_name = module,
                parameter_description = 'The %s %s of the %s %s.'
                                        % (first, second, noise[0], noise[1]),
                command_description = '%s a %s %s.'
                                      % (verb.capitalize(), module,
                                         rng.choice(_NOISE)),
                label = label))

    order = rng.permutation(len(rows))
    return [rows[i] for i in order]


def synthetic_surface(n_commands = 50, n_parameters = 6, prefix = 'az'):
    """
    Surface of generated commands ``mod00 create`` .. with parameters
    ``param-0`` .. of which the first is required.
    """

    commands = []
    for i in range(n_commands):
        module = 'mod%02d' % (i // len(_VERBS))
        verb = _VERBS[i % len(_VERBS)]
        parameters = tuple(ParameterSpec('param-%i' % j,
                                         description = 'Parameter %i.' % j,
                                         required = j == 0)
                           for j in range(n_parameters))
        commands.append(CommandSpec(module, '%s %s' % (module, verb),
                                    '%s a %s.' % (verb.capitalize(), module),
                                    parameters))
    return CommandSurface(prefix, '1.0', tuple(commands))


def synthetic_telemetry(surface = None, n_records = 10000, n_users = 500,
                        seed = 0):
    """
    Successful current release calls over the commands of a surface.

    Commands follow a Zipf like popularity and every optional parameter
    is passed with probability 0.3.

    Parameters
    ----------
    surface : :class:`exforge.CommandSurface` (default None)
        :func:`synthetic_surface` when None
    n_records : int (default 10000)
    n_users : int (default 500)
    seed : int (default 0)

    Returns
    -------
    list of :class:`exforge.TelemetryRecord`

    """

    if surface is None:
        surface = synthetic_surface()
    rng = np.random.default_rng(seed)
    commands = surface.commands
    weights = 1.0 / np.arange(1, len(commands) + 1)
    weights /= weights.sum()
    start = datetime(2022, 1, 1, tzinfo = timezone.utc)

    records = []
    picks = rng.choice(len(commands), size = n_records, p = weights)
    users = rng.integers(n_users, size = n_records)
    for i, (c, u) in enumerate(zip(picks, users)):
        spec = commands[c]
        names = frozenset(p.name for p in spec.parameters
                          if p.required or rng.random() < 0.3)
        records.append(TelemetryRecord(
            timestamp = start + timedelta(seconds = i),
            user_id = 'user%04d' % u, command = spec.name,
            parameters = names, version = surface.version))
    return records
