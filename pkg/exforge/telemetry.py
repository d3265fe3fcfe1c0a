# -*- coding: utf-8 -*-
"""
Telemetry turns success telemetry into ranked example templates.

Records carry the command and the *names* of the parameters a user
passed, never their values. Records are filtered to successful, non help
calls of the current release, aggregated per (command, parameter set)
with exact unique user counts, and the most used parameter sets of every
command become placeholder templates.

"""

import os
import json
import zlib
import logging
from collections import Counter
from dataclasses import dataclass
from datetime import datetime

import pandas as pd

from .artifacts import read_jsonl, write_jsonl
from .exceptions import InputError, ValidationError
from .surface import normalize_command, strip_flag

logger = logging.getLogger(__name__)

RECORD_FIELDS = ('timestamp', 'user_id', 'command', 'parameters', 'success',
                 'version', 'is_help')


@dataclass(frozen = True)
class TelemetryRecord:
    """
    TelemetryRecord

    One successful or failed invocation of a command.

    Attributes
    ----------
    timestamp : datetime
        instant of the call
    user_id : str
        opaque, upstream hashed user identifier
    command : str
        command path
    parameters : frozenset of str
        parameter names, never values
    success : bool
    version : str
        product release the call was made with
    is_help : bool
        whether the call asked for help

    """

    timestamp: datetime
    user_id: str
    command: str
    parameters: frozenset
    success: bool = True
    version: str = ''
    is_help: bool = False


@dataclass(frozen = True)
class UsageAggregate:
    """Usage of one (command, parameter set) pair."""

    command: str
    parameter_set: tuple
    unique_users: int
    total_calls: int

    @property
    def key(self):
        return (self.command, self.parameter_set)


@dataclass(frozen = True)
class ExampleTemplate:
    """
    ExampleTemplate

    A ranked example with a placeholder for every parameter value.

    Attributes
    ----------
    command : str
    parameters : tuple of (str, str)
        (name, placeholder) pairs in display order
    rank : int
        1 for the most used parameter set of the command
    support_users : int
        unique users of the parameter set

    """

    command: str
    parameters: tuple
    rank: int
    support_users: int

    @property
    def parameter_names(self):
        return tuple(name for name, _ in self.parameters)

    def render(self, prefix):
        """Placeholder command line, e.g. ``az vm create --image <image>``."""
        parts = [prefix, self.command]
        for name, placeholder in self.parameters:
            parts.append('--%s %s' % (name, placeholder))
        return ' '.join(parts)


@dataclass
class IngestResult:
    """
    IngestResult

    Attributes
    ----------
    records : list of :class:`TelemetryRecord`
        records kept
    malformed : int
        lines that were not valid records
    privacy_violations : int
        records rejected for carrying parameter values
    filtered : collections.Counter
        records dropped by the release filter, keyed by reason
        (``failure``, ``help``, ``old-version``)

    """

    records: list
    malformed: int = 0
    privacy_violations: int = 0
    filtered: Counter = None

    def __post_init__(self):
        if self.filtered is None:
            self.filtered = Counter()


def placeholder(name):
    """Placeholder text for a parameter name."""
    return '<%s>' % name


### record parsing ###

class _Malformed(Exception):
    pass


class _PrivacyViolation(Exception):
    pass


def _parse_timestamp(value):
    if not isinstance(value, str):
        raise _Malformed()
    text = value.strip()
    if text.endswith('Z'):
        text = text[:-1] + '+00:00'
    try:
        return datetime.fromisoformat(text)
    except ValueError:
        raise _Malformed()


def record_from_dict(data):
    """
    Validates one decoded telemetry line.

    Parameters
    ----------
    data : dict
        decoded record

    Returns
    -------
    :class:`TelemetryRecord`

    Raises
    ------
    ValidationError
        If data is not a valid record. Records holding parameter values
        are reported as privacy violations in the message.

    """

    try:
        return _record_from_dict(data)
    except _PrivacyViolation:
        raise ValidationError('record carries parameter values')
    except _Malformed:
        raise ValidationError('malformed telemetry record')


def _record_from_dict(data):

    if not isinstance(data, dict):
        raise _Malformed()

    extra = set(data) - set(RECORD_FIELDS)
    if any('value' in key.lower() for key in extra):
        raise _PrivacyViolation()

    parameters = data.get('parameters')
    if isinstance(parameters, dict):
        raise _PrivacyViolation()
    if not isinstance(parameters, list):
        raise _Malformed()
    for p in parameters:
        if not isinstance(p, str):
            raise _Malformed()
        if '=' in p:
            raise _PrivacyViolation()
        if any(ch.isspace() for ch in p):
            raise _Malformed()

    if extra:
        raise _Malformed()

    user_id = data.get('user_id')
    command = data.get('command')
    if not isinstance(user_id, str) or not user_id.strip():
        raise _Malformed()
    if not isinstance(command, str) or not command.strip():
        raise _Malformed()

    flags = {}
    for key in ('success', 'is_help'):
        value = data.get(key)
        if not isinstance(value, bool):
            raise _Malformed()
        flags[key] = value

    version = data.get('version')
    if not isinstance(version, str):
        raise _Malformed()

    names = frozenset(strip_flag(p) for p in parameters if strip_flag(p))
    return TelemetryRecord(timestamp = _parse_timestamp(data.get('timestamp')),
                           user_id = user_id,
                           command = normalize_command(command),
                           parameters = names, success = flags['success'],
                           version = version, is_help = flags['is_help'])


def _lines(source):
    if isinstance(source, (str, os.PathLike)):
        try:
            with open(source, 'r', encoding = 'utf-8') as f:
                return f.read().splitlines()
        except OSError as e:
            raise InputError('cannot read telemetry %s: %s' % (source, e))
    return [line.rstrip('\n') for line in source]


def read_records(source):
    """
    Parses every telemetry record without filtering.

    Parameters
    ----------
    source : str or iterable of str
        path to a JSON-lines file or an iterable of lines

    Returns
    -------
    :class:`IngestResult`
        all valid records, help calls and failures included

    Raises
    ------
    InputError
        If source is a path that cannot be read

    """

    result = IngestResult(records = [])
    for line in _lines(source):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
            result.records.append(_record_from_dict(data))
        except _PrivacyViolation:
            result.privacy_violations += 1
        except (_Malformed, ValueError):
            result.malformed += 1
    return result


def ingest(source, current_version):
    """
    Reads telemetry and keeps successful non help calls of one release.

    Parameters
    ----------
    source : str or iterable of str
        path to a JSON-lines file or an iterable of lines
    current_version : str
        release whose calls are kept

    Returns
    -------
    :class:`IngestResult`

    Example
    -------
    >>> import exforge as exf
    >>> result = exf.ingest(exf.fixture_path('telemetry'), '2.40.0')
    >>> result.records[0].command
    'vm create'

    """

    parsed = read_records(source)
    kept = []
    for r in parsed.records:
        if not r.success:
            parsed.filtered['failure'] += 1
        elif r.is_help:
            parsed.filtered['help'] += 1
        elif r.version != current_version:
            parsed.filtered['old-version'] += 1
        else:
            kept.append(r)
    parsed.records = kept

    logger.info('ingested %i records (%i malformed, %i privacy violations, '
                '%i filtered)', len(kept), parsed.malformed,
                parsed.privacy_violations, sum(parsed.filtered.values()))
    if parsed.privacy_violations:
        logger.warning('rejected %i records carrying parameter values',
                       parsed.privacy_violations)
    return parsed


### aggregation ###

def _records_frame(records):
    return pd.DataFrame({
        'command': [r.command for r in records],
        'parameter_set': [' '.join(sorted(r.parameters)) for r in records],
        'user_id': [r.user_id for r in records],
    }, columns = ['command', 'parameter_set', 'user_id'])


def aggregate(records):
    """
    Aggregates records per (command, parameter set).

    Parameters
    ----------
    records : list of :class:`TelemetryRecord`
        records returned by :func:`ingest`

    Returns
    -------
    list of :class:`UsageAggregate`
        sorted by command then parameter set

    Example
    -------
    >>> import exforge as exf
    >>> result = exf.ingest(exf.fixture_path('telemetry'), '2.40.0')
    >>> aggregates = exf.aggregate(result.records)

    """

    if len(records) == 0:
        return []

    df = _records_frame(records)
    grouped = df.groupby(['command', 'parameter_set'], sort = True)
    stats = grouped['user_id'].agg(unique_users = 'nunique',
                                   total_calls = 'size').reset_index()

    aggregates = []
    for row in stats.itertuples(index = False):
        names = tuple(row.parameter_set.split()) if row.parameter_set else ()
        aggregates.append(UsageAggregate(command = row.command,
                                         parameter_set = names,
                                         unique_users = int(row.unique_users),
                                         total_calls = int(row.total_calls)))
    return aggregates


def shard_records(records, n_shards):
    """
    Splits records into shards so that a command lives in one shard.

    Parameters
    ----------
    records : list of :class:`TelemetryRecord`
    n_shards : int
        number of shards, at least 1

    Returns
    -------
    list of list of :class:`TelemetryRecord`

    """

    if n_shards < 1:
        raise ValidationError('n_shards must be at least 1, got %s'
                              % n_shards)
    shards = [[] for _ in range(n_shards)]
    for r in records:
        shards[zlib.crc32(r.command.encode('utf-8')) % n_shards].append(r)
    return shards


def merge_aggregates(*parts):
    """
    Merges aggregates of disjoint shards.

    The merge is associative and commutative: the result is sorted by
    command then parameter set whatever the order of the parts.

    Raises
    ------
    ValidationError
        If a (command, parameter set) key appears in more than one part,
        since unique users cannot be added across shards.

    """

    merged = {}
    for part in parts:
        for a in part:
            if a.key in merged:
                raise ValidationError('aggregate for "%s" %s appears in more '
                                      'than one shard'
                                      % (a.command, list(a.parameter_set)))
            merged[a.key] = a
    return [merged[key] for key in sorted(merged)]


### templates ###

def order_parameters(names, command_spec):
    """
    Display order of a parameter set: required parameters in surface
    order, then the rest alphabetically.
    """

    names = set(names)
    required = [p.name for p in command_spec.parameters
                if p.required and p.name in names]
    rest = sorted(names - set(required))
    return required + rest


def build_templates(aggregates, surface, k = 3):
    """
    Builds the top k templates of every command.

    Parameter sets of a command are ranked by unique users, then total
    calls (both descending), then by the sorted parameter names.

    Parameters
    ----------
    aggregates : list of :class:`UsageAggregate`
    surface : :class:`exforge.CommandSurface`
    k : int (default 3)
        templates per command

    Returns
    -------
    list of :class:`ExampleTemplate`
        sorted by command then rank

    Raises
    ------
    ValidationError
        If k is less than 1

    Example
    -------
    >>> import exforge as exf
    >>> surface = exf.surface_data('az')
    >>> result = exf.ingest(exf.fixture_path('telemetry'), '2.40.0')
    >>> templates = exf.build_templates(exf.aggregate(result.records),
    ...                                 surface, k = 3)
    >>> print(templates[0].render('az'))

    """

    if k < 1:
        raise ValidationError('k must be at least 1, got %s' % k)

    by_command = {}
    excluded = set()
    for a in aggregates:
        if a.command not in surface:
            excluded.add(a.command)
            continue
        by_command.setdefault(a.command, []).append(a)

    if excluded:
        logger.warning('excluded aggregates of %i commands absent from the '
                       'surface: %s', len(excluded),
                       ', '.join(sorted(excluded)))

    templates = []
    for command in sorted(by_command):
        spec = surface.lookup(command)
        ranked = sorted(by_command[command],
                        key = lambda a: (-a.unique_users, -a.total_calls,
                                         a.parameter_set))
        for rank, a in enumerate(ranked[:k], 1):
            names = order_parameters(a.parameter_set, spec)
            templates.append(ExampleTemplate(
                command = command,
                parameters = tuple((n, placeholder(n)) for n in names),
                rank = rank, support_users = a.unique_users))

    logger.info('built %i templates for %i commands', len(templates),
                len(by_command))
    return templates


def template_to_dict(template, prefix):
    return {'command': template.command, 'rank': template.rank,
            'support_users': template.support_users,
            'parameters': [name for name, _ in template.parameters],
            'rendered': template.render(prefix)}


def template_from_dict(data):
    names = data['parameters']
    return ExampleTemplate(command = data['command'],
                           parameters = tuple((n, placeholder(n))
                                              for n in names),
                           rank = int(data['rank']),
                           support_users = int(data['support_users']))


def write_templates(templates, path, prefix, meta = None):
    """Writes templates as JSON lines with a ``rendered`` field."""
    write_jsonl(path, [template_to_dict(t, prefix) for t in templates],
                meta = meta)


def read_templates(path):
    """Reads templates written by :func:`write_templates`."""
    try:
        return [template_from_dict(row) for row in read_jsonl(path)]
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError('%s is not a template file: %s' % (path, e))
