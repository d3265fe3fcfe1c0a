# -*- coding: utf-8 -*-
"""
Augment builds masked training datasets and a context aware value model.

Two datasets are exported for external sequence to sequence trainers:
span masked command lines for pretraining and, for fine tuning, every
non empty subset of an example's parameter values masked. The
co-occurrence model is a frequency based generator that picks a value
for a parameter knowing the command and the other parameters of the
example.

"""

import logging
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .artifacts import read_json, write_json, write_jsonl
from .exceptions import ValidationError
from .filler import FilledArgument, FilledExample, Provenance, \
    placeholder_argument
from .miner import FLAG_VALUE, POSITIONAL, placeholder_value

logger = logging.getLogger(__name__)

MASK = '<MASK>'
MAX_PERMUTED_PARAMETERS = 20


@dataclass(frozen = True)
class MaskedPair:
    """
    MaskedPair

    Attributes
    ----------
    input : tuple of str
        tokens with every masked span replaced by :data:`MASK`
    target : tuple of str
        masked spans in order, separated by :data:`MASK`

    """

    input: tuple
    target: tuple

    @property
    def spans(self):
        spans = [[]]
        for token in self.target:
            if token == MASK:
                spans.append([])
            else:
                spans[-1].append(token)
        return spans

    def to_dict(self):
        return {'input': ' '.join(self.input),
                'target': ' '.join(self.target)}


def _pair(tokens, spans):
    """Pair masking the given (start, end) token spans."""

    masked = []
    target = []
    position = 0
    for start, end in spans:
        masked.extend(tokens[position:start])
        masked.append(MASK)
        if target:
            target.append(MASK)
        target.extend(tokens[start:end])
        position = end
    masked.extend(tokens[position:])
    return MaskedPair(tuple(masked), tuple(target))


def reconstruct(pair):
    """
    Original token sequence of a pair.

    Raises
    ------
    ValidationError
        If the sentinel count of the input differs from the span count of
        the target

    """

    spans = pair.spans if pair.target else []
    if sum(1 for t in pair.input if t == MASK) != len(spans):
        raise ValidationError('pair has %i sentinels but %i spans'
                              % (sum(1 for t in pair.input if t == MASK),
                                 len(spans)))
    tokens = []
    remaining = iter(spans)
    for token in pair.input:
        if token == MASK:
            tokens.extend(next(remaining))
        else:
            tokens.append(token)
    return tuple(tokens)


### fine tuning permutations ###

def example_tokens(example, prefix):
    """
    Tokens of a mined example and the positions of its values.

    Quoted values keep their quotes and form one token each.

    Returns
    -------
    tokens : list of str
    value_positions : list of int
        token index of every value bearing argument in argument order

    """

    tokens = [prefix] + example.command.split()
    positions = []
    for a in example.arguments:
        value = '"%s"' % a.value if a.quoted else a.value
        if a.name == POSITIONAL:
            tokens.append(value)
            continue
        tokens.append('--%s' % a.name)
        if a.value == FLAG_VALUE:
            continue
        positions.append(len(tokens))
        tokens.append(value)
    return tokens, positions


def finetune_permutations(example, prefix = 'az'):
    """
    All 2^n - 1 ways to mask the n parameter values of an example.

    Subset k masks the values whose bit is set in k, bit 0 being the
    first value, for k = 1 .. 2^n - 1. Parameter names stay visible.

    Parameters
    ----------
    example : :class:`exforge.MinedExample`
    prefix : str (default 'az')

    Returns
    -------
    list of :class:`MaskedPair`

    Raises
    ------
    ValidationError
        If the example has no value or more than 20 values

    Example
    -------
    >>> import exforge as exf
    >>> ex = exf.parse_invocation('az vm create --name MyVM --image '
    ...                           'UbuntuLTS', surface)
    >>> len(exf.finetune_permutations(ex))
    3

    """

    tokens, positions = example_tokens(example, prefix)
    n = len(positions)
    if n == 0:
        raise ValidationError('%s example has no parameter value to mask'
                              % example.command)
    if n > MAX_PERMUTED_PARAMETERS:
        raise ValidationError('%s example has %i values, 2^%i - 1 pairs is '
                              'too many; sample subsets of at most %i values '
                              'instead' % (example.command, n, n,
                                           MAX_PERMUTED_PARAMETERS))

    pairs = []
    for subset in range(1, 2 ** n):
        spans = [(positions[i], positions[i] + 1) for i in range(n)
                 if subset >> i & 1]
        pairs.append(_pair(tokens, spans))
    return pairs


def build_finetune_dataset(corpus, prefix = 'az'):
    """
    Permutation pairs of a corpus.

    Examples without values are skipped, examples with more than 20 are
    refused with a warning.
    """

    pairs = []
    refused = 0
    for example in corpus:
        _, positions = example_tokens(example, prefix)
        if not positions:
            continue
        if len(positions) > MAX_PERMUTED_PARAMETERS:
            refused += 1
            continue
        pairs.extend(finetune_permutations(example, prefix))
    if refused:
        logger.warning('refused %i examples with more than %i values',
                       refused, MAX_PERMUTED_PARAMETERS)
    logger.info('built %i fine tuning pairs from %i examples', len(pairs),
                len(corpus))
    return pairs


### span masking ###

def _span_lengths(num_noise, mean_span, rng):
    lengths = []
    while sum(lengths) < num_noise:
        lengths.append(int(rng.geometric(1.0 / mean_span)))
    lengths[-1] -= sum(lengths) - num_noise
    return lengths


def span_mask(tokens, mask_fraction = 0.15, mean_span = 3.0, seed = 0):
    """
    Masks random spans of a token sequence.

    round(n * mask_fraction) tokens, at least one, are masked. Span
    lengths are geometric with mean ``mean_span``, cut so they add up to
    the masked count, and spans are placed between distinct unmasked
    tokens. The result depends only on the tokens, the settings and the
    seed.

    Parameters
    ----------
    tokens : list of str
        non empty token sequence
    mask_fraction : float (default 0.15)
        strictly between 0 and 1
    mean_span : float (default 3.0)
        at least 1
    seed : int (default 0)

    Returns
    -------
    :class:`MaskedPair`

    Example
    -------
    >>> import exforge as exf
    >>> pair = exf.span_mask('az group create --name MyGroup'.split(),
    ...                      mask_fraction = 0.1, seed = 3)
    >>> exf.reconstruct(pair)
    ('az', 'group', 'create', '--name', 'MyGroup')

    """

    tokens = list(tokens)
    if not tokens:
        raise ValidationError('cannot mask an empty token sequence')
    if not 0 < mask_fraction < 1:
        raise ValidationError('mask_fraction must be strictly between 0 and '
                              '1, got %s' % mask_fraction)
    if mean_span < 1:
        raise ValidationError('mean_span must be at least 1, got %s'
                              % mean_span)

    rng = np.random.default_rng(seed)
    n = len(tokens)
    num_noise = min(max(int(n * mask_fraction + 0.5), 1), n)
    lengths = _span_lengths(num_noise, mean_span, rng)

    unmasked = n - num_noise
    while len(lengths) > unmasked + 1:
        lengths[-2] += lengths.pop()

    gaps = set(rng.choice(unmasked + 1, size = len(lengths),
                          replace = False).tolist())

    spans = []
    position = 0
    remaining = iter(lengths)
    for gap in range(unmasked + 1):
        if gap in gaps:
            length = next(remaining)
            spans.append((position, position + length))
            position += length
        position += 1
    return _pair(tokens, spans)


def build_pretraining_dataset(lines, mask_fraction = 0.15, mean_span = 3.0,
                              seed = 0):
    """
    Span masked pairs of command lines; line i is masked with seed + i.

    Blank lines are skipped.
    """

    pairs = []
    for i, line in enumerate(lines):
        tokens = line.split()
        if tokens:
            pairs.append(span_mask(tokens, mask_fraction, mean_span,
                                   seed + i))
    logger.info('built %i pretraining pairs', len(pairs))
    return pairs


def write_dataset(pairs, path, meta = None):
    """Writes pairs as JSON lines with ``input`` and ``target`` fields."""
    write_jsonl(path, [p.to_dict() for p in pairs], meta = meta)


### co-occurrence model ###

def _ranked(counter):
    return sorted(counter.items(), key = lambda item: (-item[1], item[0]))


class CooccurrenceModel(object):
    """
    CooccurrenceModel

    Value counts at three levels: (command, parameter, other parameter
    names), (command, parameter) and parameter alone. Counts of a coarse
    level are the sums of the finer level.

    Parameters
    ----------
    context : dict
        (command, parameter, frozenset) -> Counter
    command : dict
        (command, parameter) -> Counter
    parameter : dict
        parameter -> Counter

    """

    def __init__(self, context = None, command = None, parameter = None):
        self.context = dict(context or {})
        self.command = dict(command or {})
        self.parameter = dict(parameter or {})
        self.commands = frozenset(c for c, _ in self.command)

    def __eq__(self, other):
        return (isinstance(other, CooccurrenceModel)
                and self.context == other.context
                and self.command == other.command
                and self.parameter == other.parameter)

    def candidates(self, command, parameter, context = None):
        """
        Ranked (value, count) pairs from the most specific level with data.

        Parameters
        ----------
        command : str
        parameter : str
        context : iterable of str (default None)
            other parameter names of the example. When empty, the
            (command, parameter) level answers.

        The parameter level is only used for commands seen in training;
        an unseen command has no candidates.

        """

        if context:
            key = (command, parameter, frozenset(context) - {parameter})
            if key in self.context:
                return _ranked(self.context[key])
        if (command, parameter) in self.command:
            return _ranked(self.command[(command, parameter)])
        if command in self.commands and parameter in self.parameter:
            return _ranked(self.parameter[parameter])
        return []

    def fill(self, template):
        """
        Fills a template with the top candidate of every parameter.

        Parameters absent from every level keep their placeholder.

        Returns
        -------
        :class:`exforge.FilledExample`

        """

        names = template.parameter_names
        arguments = []
        for name in names:
            ranked = self.candidates(template.command, name,
                                     [n for n in names if n != name])
            ranked = [(v, c) for v, c in ranked if not placeholder_value(v)]
            if ranked:
                arguments.append(FilledArgument(name, ranked[0][0],
                                                Provenance.lookup))
            else:
                arguments.append(placeholder_argument(name))
        return FilledExample(template.command, tuple(arguments),
                             template.rank)

    def to_dict(self):
        def counts(counter):
            return [[v, c] for v, c in _ranked(counter)]
        return {
            'context': [[c, p, sorted(ctx), counts(v)] for (c, p, ctx), v
                        in sorted(self.context.items(),
                                  key = lambda item: (item[0][0], item[0][1],
                                                      sorted(item[0][2])))],
            'command': [[c, p, counts(v)] for (c, p), v
                        in sorted(self.command.items())],
            'parameter': [[p, counts(v)] for p, v
                          in sorted(self.parameter.items())]}

    @classmethod
    def from_dict(cls, data):
        def counter(rows):
            return Counter({v: int(c) for v, c in rows})
        return cls(
            {(c, p, frozenset(ctx)): counter(v)
             for c, p, ctx, v in data['context']},
            {(c, p): counter(v) for c, p, v in data['command']},
            {p: counter(v) for p, v in data['parameter']})


def train_cooccurrence(corpus):
    """
    Counts the values of a corpus at three back-off levels.

    Parameters
    ----------
    corpus : list of :class:`exforge.MinedExample`
        non empty filtered corpus

    Returns
    -------
    :class:`CooccurrenceModel`

    Example
    -------
    >>> import exforge as exf
    >>> model = exf.train_cooccurrence(corpus)
    >>> model.candidates('vm create', 'name', ['image'])[0]
    ('MyVM', 4)

    """

    if len(corpus) == 0:
        raise ValidationError('cannot train a co-occurrence model on an '
                              'empty corpus')

    context, command, parameter = {}, {}, {}
    for example in corpus:
        names = frozenset(example.parameter_names)
        for a in example.arguments:
            if (a.name == POSITIONAL or a.value == FLAG_VALUE
                    or placeholder_value(a.value)):
                continue
            keys = ((context, (example.command, a.name, names - {a.name})),
                    (command, (example.command, a.name)),
                    (parameter, a.name))
            for table, key in keys:
                table.setdefault(key, Counter())[a.value] += 1

    model = CooccurrenceModel(context, command, parameter)
    logger.info('co-occurrence model with %i contexts over %i examples',
                len(model.context), len(corpus))
    return model


def generate_values(model, template):
    """Context aware filling, see :meth:`CooccurrenceModel.fill`."""
    return model.fill(template)


def write_cooccurrence(model, path, meta = None):
    write_json(path, model.to_dict(), meta = meta)


def read_cooccurrence(path):
    try:
        return CooccurrenceModel.from_dict(read_json(path))
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError('%s is not a co-occurrence model: %s'
                              % (path, e))
