# -*- coding: utf-8 -*-
"""
Pipeline configuration.

Settings come from four layers, each overriding the previous one: the
defaults below, a YAML file, ``EXFORGE_<KEY>`` environment variables and
command line flags. Relative paths in the YAML file are resolved
against the directory of the file.

"""

import os
import logging
from dataclasses import asdict, dataclass, fields

import yaml

from .exceptions import ConfigError, InputError
from .forest import hyperparameters_from_csv

logger = logging.getLogger(__name__)

ENV_PREFIX = 'EXFORGE_'

BACKENDS = ('typed-lookup', 'cooccurrence', 'hybrid')
NAME_STYLES = ('pascal', 'kebab', 'snake')

PATH_KEYS = ('surface', 'telemetry', 'corpus', 'manifest', 'docs',
             'human_examples', 'labeled', 'output')
INT_KEYS = ('k', 'seed', 'session_gap_minutes', 'cv_folds', 'n_jobs', 'cap')
FLOAT_KEYS = ('min_confidence', 'holdout_fraction', 'mask_fraction',
              'mean_span')


@dataclass
class PipelineConfig:
    """
    PipelineConfig

    Attributes
    ----------
    surface : str
        command surface JSON file
    telemetry : str
        telemetry JSON-lines file
    corpus : str
        directory of mined documents
    manifest : str
        corpus manifest csv, ``<corpus>/manifest.csv`` when None
    docs : str
        directory of existing ``<group>.md`` reference pages
    human_examples : str
        JSON list of human examples
    labeled : str
        extra labeled parameters csv for the type predictor
    output : str
        output directory
    current_version : str
        release kept by telemetry ingestion, the surface version when
        empty
    k : int
        templates per command
    min_confidence : float
        type predictions below this keep placeholders
    seed : int
        seed of every random step, recorded in every artifact
    hyperparameters : str or dict
        preset name from ``hyperparameters.csv`` or a mapping with an
        optional ``preset`` key and field overrides
    backend : str
        ``typed-lookup``, ``cooccurrence`` or ``hybrid``
    name_style : str
        ``pascal``, ``kebab`` or ``snake``
    session_gap_minutes : int
    cv_folds : int
    n_jobs : int
    holdout_fraction : float
        share of the mined corpus held out by ``evaluate``
    mask_fraction : float
    mean_span : float
    cap : int
        description tokens kept per type

    """

    surface: str = None
    telemetry: str = None
    corpus: str = None
    manifest: str = None
    docs: str = None
    human_examples: str = None
    labeled: str = None
    output: str = 'exforge-out'
    current_version: str = ''
    k: int = 3
    min_confidence: float = 0.5
    seed: int = 0
    hyperparameters: object = 'default'
    backend: str = 'typed-lookup'
    name_style: str = 'pascal'
    session_gap_minutes: int = 30
    cv_folds: int = 3
    n_jobs: int = 1
    holdout_fraction: float = 0.2
    mask_fraction: float = 0.15
    mean_span: float = 3.0
    cap: int = 75

    def validate(self):
        """Raises ConfigError on an out of range or unknown setting."""

        if self.backend not in BACKENDS:
            raise ConfigError('%s is not a valid backend. Choose one of %s'
                              % (self.backend, ', '.join(BACKENDS)))
        if self.name_style not in NAME_STYLES:
            raise ConfigError('%s is not a valid name_style. Choose one of %s'
                              % (self.name_style, ', '.join(NAME_STYLES)))
        if self.k < 1:
            raise ConfigError('k must be at least 1, got %s' % self.k)
        if not 0 <= self.min_confidence <= 1:
            raise ConfigError('min_confidence must be in [0, 1], got %s'
                              % self.min_confidence)
        if not 0 < self.holdout_fraction < 1:
            raise ConfigError('holdout_fraction must be in (0, 1), got %s'
                              % self.holdout_fraction)
        if not 0 < self.mask_fraction < 1:
            raise ConfigError('mask_fraction must be in (0, 1), got %s'
                              % self.mask_fraction)
        if self.cv_folds < 2:
            raise ConfigError('cv_folds must be at least 2, got %s'
                              % self.cv_folds)
        if self.session_gap_minutes < 1:
            raise ConfigError('session_gap_minutes must be positive')
        if not isinstance(self.hyperparameters, (str, dict)):
            raise ConfigError('hyperparameters must be a preset name or a '
                              'mapping')
        return self

    def require(self, *keys):
        """
        Checks that path settings are given and exist.

        Raises
        ------
        ConfigError
            If a setting is missing
        InputError
            If a path does not exist

        """

        for key in keys:
            path = getattr(self, key)
            if path is None:
                raise ConfigError('%s is not configured; set it in the '
                                  'config file, %s%s or --%s'
                                  % (key, ENV_PREFIX, key.upper(),
                                     key.replace('_', '-')))
            if not os.path.exists(path):
                raise InputError('%s %s does not exist' % (key, path))

    def forest_hyperparameters(self):
        """Forest hyperparameters of the configured preset."""

        if isinstance(self.hyperparameters, str):
            return hyperparameters_from_csv(self.hyperparameters,
                                            n_jobs = self.n_jobs)
        values = dict(self.hyperparameters)
        preset = values.pop('preset', 'default')
        values.setdefault('n_jobs', self.n_jobs)
        try:
            return hyperparameters_from_csv(preset, **values)
        except TypeError as e:
            raise ConfigError('invalid hyperparameters: %s' % e)

    def to_dict(self):
        return asdict(self)


def _coerce(key, value):
    if value is None:
        return None
    try:
        if key in INT_KEYS:
            if isinstance(value, bool) or float(value) != int(float(value)):
                raise ValueError()
            return int(float(value))
        if key in FLOAT_KEYS:
            return float(value)
    except (TypeError, ValueError):
        raise ConfigError('%s must be a number, got %r' % (key, value))
    if key == 'hyperparameters':
        if isinstance(value, dict):
            return value
        return str(value)
    return str(value)


def read_config_file(path):
    """
    Settings of a YAML file with relative paths resolved.

    Raises
    ------
    InputError
        If the file cannot be read
    ConfigError
        If the file is not a YAML mapping or holds unknown keys

    """

    try:
        with open(path, 'r', encoding = 'utf-8') as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise InputError('cannot read config %s: %s' % (path, e))
    except yaml.YAMLError as e:
        raise ConfigError('config %s is not valid YAML: %s' % (path, e))

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError('config %s must be a mapping' % path)

    known = {f.name for f in fields(PipelineConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError('config %s has unknown keys: %s'
                          % (path, ', '.join(unknown)))

    base = os.path.dirname(os.path.abspath(path))
    settings = {}
    for key, value in data.items():
        if key in PATH_KEYS and value is not None:
            value = os.path.normpath(os.path.join(base, str(value)))
        settings[key] = value
    return settings


def load_config(path = None, env = None, overrides = None):
    """
    Builds the configuration of a run.

    Parameters
    ----------
    path : str (default None)
        YAML file
    env : dict (default None)
        environment, ``os.environ`` when None
    overrides : dict (default None)
        command line values; None values are ignored

    Returns
    -------
    :class:`PipelineConfig`

    Example
    -------
    >>> import exforge as exf
    >>> config = exf.load_config(exf.fixture_path('config'),
    ...                          overrides = {'k': 2})

    """

    if env is None:
        env = os.environ

    settings = {}
    if path is not None:
        settings.update(read_config_file(path))

    for f in fields(PipelineConfig):
        name = ENV_PREFIX + f.name.upper()
        if name in env:
            settings[f.name] = env[name]

    for key, value in (overrides or {}).items():
        if value is not None:
            settings[key] = value

    values = {key: _coerce(key, value) for key, value in settings.items()}
    config = PipelineConfig(**values).validate()
    logger.debug('configuration: %s', config.to_dict())
    return config
