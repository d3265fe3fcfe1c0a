# -*- coding: utf-8 -*-
"""
Surface holds the command surface of a command line product: its
commands, their parameters and the documentation strings of both.

The surface is read from a single JSON file and is immutable once
loaded, so every pipeline stage can share it.

"""

import json
import logging
from dataclasses import dataclass, field
from functools import cached_property

from .artifacts import write_text_atomic
from .exceptions import InputError, ValidationError
from .paramtype import ParamType

logger = logging.getLogger(__name__)


def normalize_command(name):
    """Collapses runs of whitespace in a command path."""
    return ' '.join(str(name).split())


def strip_flag(token):
    """Removes leading dashes from a parameter token."""
    return str(token).lstrip('-')


@dataclass(frozen = True)
class ParameterSpec:
    """
    ParameterSpec

    One parameter of a command.

    Attributes
    ----------
    name : str
        canonical kebab-case name without the leading ``--``
    aliases : tuple of str
        alternative spellings without leading dashes, e.g. ``g``
    description : str
        documentation string
    required : bool
        whether the product requires the parameter
    labeled_type : :class:`exforge.ParamType` or None
        hand label, present in training surfaces only

    """

    name: str
    aliases: tuple = ()
    description: str = ''
    required: bool = False
    labeled_type: ParamType = None

    @property
    def names(self):
        """Canonical name followed by every alias."""
        return (self.name,) + tuple(self.aliases)


@dataclass(frozen = True)
class CommandSpec:
    """
    CommandSpec

    One command of the surface.

    Attributes
    ----------
    module : str
        product module owning the command
    name : str
        space separated command path, e.g. ``vm create``
    description : str
        documentation string
    parameters : tuple of :class:`ParameterSpec`
        parameters in documentation order

    """

    module: str
    name: str
    description: str = ''
    parameters: tuple = ()

    @cached_property
    def _index(self):
        index = {}
        for p in self.parameters:
            for n in p.names:
                index[n] = p
        return index

    @property
    def group(self):
        """First token of the command path, e.g. ``vm``."""
        return self.name.split(' ', 1)[0]

    @property
    def parameter_names(self):
        return tuple(p.name for p in self.parameters)

    def parameter(self, name):
        """
        Returns the parameter for a canonical name or alias.

        Parameters
        ----------
        name : str
            name or alias, leading dashes allowed

        Returns
        -------
        :class:`ParameterSpec` or None

        """

        return self._index.get(strip_flag(name))

    def resolve_parameter(self, token):
        """Canonical name for a flag token, None when unknown."""
        p = self.parameter(token)
        return None if p is None else p.name


@dataclass(frozen = True)
class CommandSurface:
    """
    CommandSurface

    The full command tree of a product.

    Attributes
    ----------
    prefix : str
        executable name, e.g. ``az``
    version : str
        product version the surface describes
    commands : tuple of :class:`CommandSpec`
        commands in declaration order

    Example
    -------
    >>> import exforge as exf
    >>> surface = exf.surface_data('az')
    >>> surface.lookup('vm  create').parameter_names[:2]
    ('image', 'admin-username')

    """

    prefix: str
    version: str = ''
    commands: tuple = field(default = ())

    @cached_property
    def _index(self):
        return {c.name: c for c in self.commands}

    def __contains__(self, name):
        return normalize_command(name) in self._index

    def __len__(self):
        return len(self.commands)

    @property
    def command_names(self):
        return tuple(c.name for c in self.commands)

    def lookup(self, name):
        """See :func:`lookup_command`."""
        return self._index.get(normalize_command(name))


def _parameter_from_dict(data, command):

    if not isinstance(data, dict):
        raise ValidationError('command "%s": parameter entry must be an '
                              'object' % command)

    name = strip_flag(data.get('name', ''))
    if not name or any(c.isspace() for c in name):
        raise ValidationError('command "%s": invalid parameter name "%s"'
                              % (command, data.get('name', '')))

    aliases = tuple(strip_flag(a) for a in data.get('aliases', []) or [])
    for a in aliases:
        if not a or any(c.isspace() for c in a):
            raise ValidationError('command "%s": invalid alias "%s" for '
                                  'parameter "%s"' % (command, a, name))

    labeled_type = data.get('labeled_type')
    if labeled_type is not None:
        try:
            labeled_type = ParamType.parse(labeled_type)
        except ValueError as e:
            raise ValidationError('command "%s" parameter "%s": %s'
                                  % (command, name, e))

    return ParameterSpec(name = name, aliases = aliases,
                         description = str(data.get('description') or ''),
                         required = bool(data.get('required', False)),
                         labeled_type = labeled_type)


def surface_from_dict(data):
    """
    Builds and validates a surface from its JSON-compatible mapping.

    Parameters
    ----------
    data : dict
        mapping with ``prefix``, ``version`` and ``commands``

    Returns
    -------
    :class:`CommandSurface`

    Raises
    ------
    ValidationError
        On an empty prefix, a duplicate command or a duplicate parameter
        name or alias within a command. The message names the entity.

    """

    if not isinstance(data, dict):
        raise ValidationError('surface must be an object')

    prefix = str(data.get('prefix') or '').strip()
    if not prefix:
        raise ValidationError('surface prefix is empty')

    commands = []
    seen = set()
    for entry in data.get('commands', []) or []:
        if not isinstance(entry, dict):
            raise ValidationError('command entry must be an object')
        name = normalize_command(entry.get('name', ''))
        if not name:
            raise ValidationError('command with empty name')
        if name in seen:
            raise ValidationError('duplicate command "%s"' % name)
        seen.add(name)

        parameters = []
        names = set()
        for p_data in entry.get('parameters', []) or []:
            p = _parameter_from_dict(p_data, name)
            for n in p.names:
                if n in names:
                    raise ValidationError('command "%s": duplicate parameter '
                                          '"%s"' % (name, n))
                names.add(n)
            parameters.append(p)

        commands.append(CommandSpec(module = str(entry.get('module') or ''),
                                    name = name,
                                    description = str(entry.get('description')
                                                      or ''),
                                    parameters = tuple(parameters)))

    return CommandSurface(prefix = prefix,
                          version = str(data.get('version') or ''),
                          commands = tuple(commands))


def load_surface(path):
    """
    Loads and validates a command surface file.

    Parameters
    ----------
    path : str
        path to a JSON file with top level ``prefix``, ``version`` and
        ``commands``. Each command has ``module``, ``name``,
        ``description`` and ``parameters``; each parameter has ``name``,
        ``aliases``, ``description``, ``required`` and an optional
        ``labeled_type``.

    Returns
    -------
    :class:`CommandSurface`

    Raises
    ------
    InputError
        If the file cannot be read
    ValidationError
        If the file is not JSON or breaks a surface invariant

    Example
    -------
    >>> import exforge as exf
    >>> surface = exf.load_surface('path/to/surface.json')
    >>> print(len(surface))
    20

    """

    try:
        with open(path, 'r', encoding = 'utf-8') as f:
            text = f.read()
    except OSError as e:
        raise InputError('cannot read surface %s: %s' % (path, e))

    try:
        data = json.loads(text)
    except ValueError as e:
        raise ValidationError('surface %s is malformed: %s' % (path, e))

    surface = surface_from_dict(data)
    logger.info('loaded surface %s %s with %i commands', surface.prefix,
                surface.version, len(surface))
    return surface


def lookup_command(surface, name):
    """
    Finds a command by name after whitespace normalization.

    Parameters
    ----------
    surface : :class:`CommandSurface`
        surface to search
    name : str
        command path, e.g. ``vm create``

    Returns
    -------
    :class:`CommandSpec` or None
        None when the surface has no such command

    """

    return surface.lookup(name)


def serialize_surface(surface):
    """
    Converts a surface back to its JSON-compatible mapping.

    The output of this function loads back into an equal surface.

    """

    commands = []
    for c in surface.commands:
        parameters = []
        for p in c.parameters:
            p_data = {'name': p.name, 'aliases': list(p.aliases),
                      'description': p.description,
                      'required': p.required}
            if p.labeled_type is not None:
                p_data['labeled_type'] = p.labeled_type.value
            parameters.append(p_data)
        commands.append({'module': c.module, 'name': c.name,
                         'description': c.description,
                         'parameters': parameters})

    return {'prefix': surface.prefix, 'version': surface.version,
            'commands': commands}


def write_surface(surface, path):
    """Writes a surface file readable by :func:`load_surface`."""
    write_text_atomic(path, json.dumps(serialize_surface(surface),
                                       indent = 2) + '\n')
