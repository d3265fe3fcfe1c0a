# -*- coding: utf-8 -*-
"""
Filler replaces template placeholders with concrete values.

For every parameter of a template the type predictor names the kind of
value expected. The most frequent mined value that has the right syntax
for that type is used, first among values seen with the same command,
then among values seen with any command. String parameters whose
description reads "Name of the X" get a synthesized name such as
``MyWebApp``. Anything else, and every low confidence prediction, keeps
its placeholder.

"""

import re
import logging
from dataclasses import dataclass
from enum import Enum

from .artifacts import read_jsonl, write_jsonl
from .classifier import param_context, predict_types, stop_words
from .exceptions import ValidationError
from .miner import FLAG_VALUE, placeholder_value
from .paramtype import ParamType
from .telemetry import placeholder

logger = logging.getLogger(__name__)

NAME_STYLES = ('pascal', 'kebab', 'snake')


class Provenance(Enum):
    lookup = 'lookup'
    synthesized = 'synthesized'
    placeholder = 'placeholder'


### recognizers ###

def _pattern(regex):
    compiled = re.compile(regex)
    return lambda value: compiled.fullmatch(value) is not None


def _ip_address(value):
    match = re.fullmatch(r'(\d{1,3})\.(\d{1,3})\.(\d{1,3})\.(\d{1,3})'
                         r'(?:/(\d{1,2}))?', value)
    if match is None:
        return False
    octets = [int(g) for g in match.groups()[:4]]
    prefix = match.group(5)
    return (all(o <= 255 for o in octets)
            and (prefix is None or int(prefix) <= 32))


def _folder_file_path(value):
    return ('/' in value or '\\' in value or value.startswith('~')
            or re.match(r'[A-Za-z]:', value) is not None)


def _time_duration(value):
    return (re.match(r'\d{4}-\d{2}-\d{2}', value) is not None
            or re.fullmatch(r'\d+[smhd]', value) is not None)


def _build_info(value):
    return (re.fullmatch(r'[A-Za-z0-9][A-Za-z0-9._-]*', value) is not None
            and any(c.isdigit() for c in value))


def _printable(value):
    return len(value) > 0 and value.isprintable()


RECOGNIZERS = {
    ParamType.String: _printable,
    ParamType.Enum: _pattern(r'[A-Za-z][A-Za-z0-9_-]*'),
    ParamType.Integer: _pattern(r'-?[0-9]+'),
    ParamType.GUID: _pattern(r'[0-9a-fA-F]+(-[0-9a-fA-F]+){2,}'),
    ParamType.FolderFilePath: _folder_file_path,
    ParamType.CommandSpecificUnknown: lambda value: False,
    ParamType.IPAddress: _ip_address,
    ParamType.UrlEmail: _pattern(r'(https?://\S+|\S+@\S+\.\S+)'),
    ParamType.BuildInfo: _build_info,
    ParamType.QuotedStrings: _printable,
    ParamType.Version: _pattern(r'v?[0-9]+(\.[0-9]+){1,3}'),
    ParamType.TimeDuration: _time_duration,
    ParamType.KeysTokens: _pattern(r'[A-Za-z0-9+/=_-]{8,}'),
    ParamType.IntWithSpecificFormat: _pattern(r'[0-9]+([-:,./][0-9]+)+'),
    ParamType.PermissionFormats: _pattern(r'[rwxdlcap]+'),
}


def validate_value(value, t):
    """
    Whether a value has the syntax of a type.

    Never raises: anything that is not a string is invalid.

    Parameters
    ----------
    value : str
    t : :class:`exforge.ParamType` or str

    Returns
    -------
    bool

    Example
    -------
    >>> import exforge as exf
    >>> exf.validate_value('10.0.0.1', exf.ParamType.IPAddress)
    True
    >>> exf.validate_value('300.1.1.1', 'IPAddress')
    False

    """

    if not isinstance(value, str):
        return False
    try:
        t = ParamType.parse(t)
    except ValueError:
        return False
    return bool(RECOGNIZERS[t](value))


### name synthesis ###

_NAME_OF = re.compile(r'\s*name of\s+(?:the\s+)?([^.]+?)\s*(?:\.|$)',
                      re.IGNORECASE)


def synthesize_string_name(description, name_style = 'pascal'):
    """
    Synthesizes a value from a "Name of the X" description.

    Parameters
    ----------
    description : str
    name_style : str (default 'pascal')
        ``pascal`` gives ``MyWebApp``, ``kebab`` gives ``my-web-app`` and
        ``snake`` gives ``my_web_app``

    Returns
    -------
    str or None
        None when the description does not start with "Name of"

    Example
    -------
    >>> import exforge as exf
    >>> exf.synthesize_string_name('Name of the web app.')
    'MyWebApp'
    >>> exf.synthesize_string_name('Resource group name.') is None
    True

    """

    if name_style not in NAME_STYLES:
        raise ValidationError('%s is not a valid name style. Choose one of '
                              '%s' % (name_style, ', '.join(NAME_STYLES)))
    if not description:
        return None
    match = _NAME_OF.match(description)
    if match is None:
        return None

    stops = stop_words()
    words = [w.lower() for w in re.split(r'[^A-Za-z0-9]+', match.group(1))
             if w and w.lower() not in stops]
    if not words:
        return None

    words = ['my'] + words
    if name_style == 'kebab':
        return '-'.join(words)
    if name_style == 'snake':
        return '_'.join(words)
    return ''.join(w[:1].upper() + w[1:] for w in words)


### filled examples ###

_NEEDS_QUOTES = re.compile(r'[\s|&;<>()$`\\"\'*?\[\]#!{}]')


def _is_placeholder(name, value):
    return value == placeholder(name)


def shell_quote(value):
    """Double quotes a value holding shell metacharacters."""

    if len(value) >= 2 and value[0] == value[-1] and value[0] in '"\'':
        return value
    if _NEEDS_QUOTES.search(value) is None:
        return value
    return '"%s"' % value.replace('\\', '\\\\').replace('"', '\\"')


@dataclass(frozen = True)
class FilledArgument:
    """
    FilledArgument

    Attributes
    ----------
    name : str
    value : str
        ``<name>`` when provenance is placeholder
    provenance : :class:`Provenance`
    param_type : :class:`exforge.ParamType` or None
        predicted type, None when no prediction was made

    """

    name: str
    value: str
    provenance: Provenance
    param_type: ParamType = None


@dataclass(frozen = True)
class FilledExample:
    """A template with values, in template parameter order."""

    command: str
    arguments: tuple
    rank: int = 1

    @property
    def parameter_names(self):
        return tuple(a.name for a in self.arguments)

    @property
    def placeholders(self):
        return sum(1 for a in self.arguments
                   if a.provenance is Provenance.placeholder)

    def render(self, prefix):
        """
        Command line of the example.

        Placeholders and quoted values are written as they are, values
        holding shell metacharacters are double quoted.
        """

        parts = [prefix, self.command]
        for a in self.arguments:
            if a.value == FLAG_VALUE:
                parts.append('--%s' % a.name)
            elif a.provenance is Provenance.placeholder:
                parts.append('--%s %s' % (a.name, a.value))
            else:
                parts.append('--%s %s' % (a.name, shell_quote(a.value)))
        return ' '.join(parts)


def placeholder_argument(name, param_type = None):
    return FilledArgument(name, placeholder(name), Provenance.placeholder,
                          param_type)


def check_filled(example):
    """
    Raises ValidationError if an argument breaks the provenance contract.

    Placeholders hold exactly ``<name>``, no value is empty and every
    lookup value has the syntax of its predicted type.
    """

    for a in example.arguments:
        if not a.value:
            raise ValidationError('%s: empty value for "%s"'
                                  % (example.command, a.name))
        if (a.provenance is Provenance.placeholder) != _is_placeholder(a.name,
                                                                       a.value):
            raise ValidationError('%s: placeholder mismatch for "%s"'
                                  % (example.command, a.name))
        if (a.provenance is Provenance.lookup and a.param_type is not None
                and not validate_value(a.value, a.param_type)):
            raise ValidationError('%s: value %s is not a valid %s'
                                  % (example.command, a.value,
                                     a.param_type.value))


### fillers ###

class TypedLookupFiller(object):
    """
    TypedLookupFiller

    Fills templates from a value lookup guided by predicted types.
    Predictions are cached per (command, parameter).

    Parameters
    ----------
    surface : :class:`exforge.CommandSurface`
    predictor : :class:`exforge.TypePredictor`
    lookup : :class:`exforge.ValueLookup`
    min_confidence : float (default 0.5)
        predictions below this confidence keep the placeholder
    name_style : str (default 'pascal')
        style of synthesized names

    Example
    -------
    >>> import exforge as exf
    >>> filler = exf.TypedLookupFiller(surface, tp, lookup)
    >>> example = filler.fill(templates[0])
    >>> print(example.render('az'))

    """

    def __init__(self, surface, predictor, lookup, min_confidence = 0.5,
                 name_style = 'pascal'):
        if not 0 <= min_confidence <= 1:
            raise ValidationError('min_confidence must be in [0, 1], got %s'
                                  % min_confidence)
        if name_style not in NAME_STYLES:
            raise ValidationError('%s is not a valid name style' % name_style)
        self.surface = surface
        self.predictor = predictor
        self.lookup = lookup
        self.min_confidence = min_confidence
        self.name_style = name_style
        self._types = {}

    def command_spec(self, command):
        spec = self.surface.lookup(command)
        if spec is None:
            raise ValidationError('unknown command "%s"' % command)
        return spec

    def types(self, command, names):
        """Predicted (type, confidence) of parameters, None if unknown."""

        spec = self.command_spec(command)
        missing = [n for n in names
                   if (spec.name, n) not in self._types
                   and spec.parameter(n) is not None]
        if missing:
            contexts = [param_context(spec, spec.parameter(n))
                        for n in missing]
            for n, prediction in zip(missing,
                                     predict_types(self.predictor, contexts)):
                self._types[(spec.name, n)] = prediction
        return [self._types.get((spec.name, n)) for n in names]

    def fill_argument(self, command, name, prediction):
        """Value of one parameter given its (type, confidence)."""

        if prediction is None:
            return placeholder_argument(name)
        t, confidence = prediction
        if confidence < self.min_confidence:
            return placeholder_argument(name, t)

        candidates = (self.lookup.candidates(command, name)
                      + self.lookup.global_candidates(name))
        for value, _ in candidates:
            if (value != FLAG_VALUE and not placeholder_value(value)
                    and validate_value(value, t)):
                if t is ParamType.QuotedStrings and value[:1] not in '"\'':
                    value = '"%s"' % value.replace('"', '\\"')
                return FilledArgument(name, value, Provenance.lookup, t)

        if t is ParamType.String:
            spec = self.command_spec(command).parameter(name)
            value = synthesize_string_name(spec.description,
                                           name_style = self.name_style)
            if value is not None:
                return FilledArgument(name, value, Provenance.synthesized, t)
        return placeholder_argument(name, t)

    def fill(self, template):
        """
        Fills a template.

        Parameters
        ----------
        template : :class:`exforge.ExampleTemplate`

        Returns
        -------
        :class:`FilledExample`

        Raises
        ------
        ValidationError
            If the template command is not in the surface

        """

        spec = self.command_spec(template.command)
        names = template.parameter_names
        arguments = [self.fill_argument(spec.name, n, p)
                     for n, p in zip(names, self.types(spec.name, names))]
        return FilledExample(spec.name, tuple(arguments), template.rank)


class HybridFiller(object):
    """
    HybridFiller

    Context aware values first, typed lookup values for the parameters
    the context model leaves open. A context value is dropped when a
    confident type prediction rejects its syntax.

    Parameters
    ----------
    cooccurrence : :class:`exforge.CooccurrenceModel`
    typed : :class:`TypedLookupFiller`

    """

    def __init__(self, cooccurrence, typed):
        self.cooccurrence = cooccurrence
        self.typed = typed

    def fill(self, template):
        context = self.cooccurrence.fill(template)
        spec = self.typed.command_spec(template.command)
        names = template.parameter_names
        arguments = []
        for a, prediction in zip(context.arguments,
                                 self.typed.types(spec.name, names)):
            if a.provenance is not Provenance.placeholder:
                if prediction is None:
                    arguments.append(a)
                    continue
                t, confidence = prediction
                if (confidence >= self.typed.min_confidence
                        and validate_value(a.value, t)):
                    arguments.append(FilledArgument(a.name, a.value,
                                                    a.provenance, t))
                    continue
                if confidence < self.typed.min_confidence:
                    arguments.append(FilledArgument(a.name, a.value,
                                                    a.provenance))
                    continue
            arguments.append(self.typed.fill_argument(spec.name, a.name,
                                                      prediction))
        return FilledExample(spec.name, tuple(arguments), template.rank)


def fill_template(template, surface, predictor, lookup, min_confidence = 0.5,
                  name_style = 'pascal'):
    """
    Fills one template from a lookup, see :class:`TypedLookupFiller`.

    Parameters
    ----------
    template : :class:`exforge.ExampleTemplate`
    surface : :class:`exforge.CommandSurface`
    predictor : :class:`exforge.TypePredictor`
    lookup : :class:`exforge.ValueLookup`
    min_confidence : float (default 0.5)
    name_style : str (default 'pascal')

    Returns
    -------
    :class:`FilledExample`

    """

    filler = TypedLookupFiller(surface, predictor, lookup,
                               min_confidence = min_confidence,
                               name_style = name_style)
    return filler.fill(template)


def fill_all(templates, filler):
    """Fills templates with any object exposing ``fill(template)``."""

    filled = [filler.fill(t) for t in templates]
    for example in filled:
        check_filled(example)
    counts = {p: sum(1 for ex in filled for a in ex.arguments
                     if a.provenance is p) for p in Provenance}
    logger.info('filled %i templates: %s', len(filled),
                ', '.join('%s %i' % (p.value, n) for p, n in counts.items()))
    return filled


### persistence ###

def filled_to_dict(example, prefix):
    return {'command': example.command, 'rank': example.rank,
            'arguments': [[a.name, a.value, a.provenance.value,
                           None if a.param_type is None
                           else a.param_type.value]
                          for a in example.arguments],
            'rendered': example.render(prefix)}


def filled_from_dict(data):
    arguments = tuple(FilledArgument(n, v, Provenance(p),
                                     None if t is None else ParamType.parse(t))
                      for n, v, p, t in data['arguments'])
    return FilledExample(data['command'], arguments, int(data['rank']))


def write_filled(examples, path, prefix, meta = None):
    """Writes filled examples as JSON lines with a ``rendered`` field."""
    write_jsonl(path, [filled_to_dict(ex, prefix) for ex in examples],
                meta = meta)


def read_filled(path):
    """Reads examples written by :func:`write_filled`."""
    try:
        return [filled_from_dict(row) for row in read_jsonl(path)]
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError('%s is not a filled example file: %s'
                              % (path, e))
