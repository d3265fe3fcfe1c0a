# -*- coding: utf-8 -*-
"""
Metrics evaluates generated examples.

ROUGE scores compare generated command lines with reference lines.
Coverage measures how many used commands, and how many of their
parameters, the human and the machine examples document. Help success
follows every help call to the next use of the same command in the same
session and compares how often usages matching machine examples and
usages matching human examples succeed.

"""

import logging
from collections import Counter
from dataclasses import dataclass
from datetime import timedelta, timezone

import pandas as pd
from scipy.stats import fisher_exact

from .filler import Provenance

logger = logging.getLogger(__name__)

HUMAN = 'human'
MACHINE = 'machine'
SOURCES = (HUMAN, MACHINE)


### ROUGE ###

@dataclass(frozen = True)
class Score:
    precision: float
    recall: float
    f1: float


@dataclass(frozen = True)
class RougeScore:
    """
    RougeScore

    Attributes
    ----------
    r1, r2, rl : :class:`Score`
        unigram, bigram and longest common subsequence scores
    empty_reference : bool
        recalls are 0 because the reference had no tokens

    """

    r1: Score
    r2: Score
    rl: Score
    empty_reference: bool = False


def _f1(p, r):
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def _score(overlap, n_candidate, n_reference):
    p = overlap / float(n_candidate) if n_candidate else 0.0
    r = overlap / float(n_reference) if n_reference else 0.0
    return Score(p, r, _f1(p, r))


def _tokens(sequence):
    if isinstance(sequence, str):
        return sequence.split()
    return list(sequence)


def _ngrams(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def lcs_length(a, b):
    """Length of the longest common subsequence of two sequences."""

    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for x in a:
        current = [0]
        for j, y in enumerate(b, 1):
            current.append(previous[j - 1] + 1 if x == y
                           else max(previous[j], current[j - 1]))
        previous = current
    return previous[-1]


def rouge(candidate, reference):
    """
    ROUGE-1, ROUGE-2 and ROUGE-L of a candidate against a reference.

    Strings are split on whitespace. Precision divides by the candidate
    size, recall by the reference size and ROUGE-L uses the plain F1 of
    the longest common subsequence.

    Parameters
    ----------
    candidate : str or list of str
    reference : str or list of str

    Returns
    -------
    :class:`RougeScore`

    Example
    -------
    >>> import exforge as exf
    >>> exf.rouge('the cat', 'the cat sat').r1.f1
    0.8

    """

    c = _tokens(candidate)
    r = _tokens(reference)
    scores = []
    for n in (1, 2):
        cn, rn = _ngrams(c, n), _ngrams(r, n)
        overlap = sum((cn & rn).values())
        scores.append(_score(overlap, sum(cn.values()), sum(rn.values())))
    scores.append(_score(lcs_length(c, r), len(c), len(r)))
    return RougeScore(scores[0], scores[1], scores[2],
                      empty_reference = len(r) == 0)


def rouge_corpus(pairs):
    """
    Mean ROUGE over (candidate, reference) pairs.

    Returns
    -------
    pandas.DataFrame
        rows Prec., Rec. and F1; columns R1, R2 and RL

    """

    rows = {'Prec.': {}, 'Rec.': {}, 'F1': {}}
    scores = [rouge(c, r) for c, r in pairs]
    empty = sum(1 for s in scores if s.empty_reference)
    if empty:
        logger.warning('%i references are empty, their recall is 0', empty)
    for name in ('r1', 'r2', 'rl'):
        column = name.upper()
        values = [getattr(s, name) for s in scores]
        n = float(len(values)) if values else 1.0
        rows['Prec.'][column] = sum(v.precision for v in values) / n
        rows['Rec.'][column] = sum(v.recall for v in values) / n
        rows['F1'][column] = sum(v.f1 for v in values) / n
    return pd.DataFrame.from_dict(rows, orient = 'index')[['R1', 'R2', 'RL']]


### coverage ###

@dataclass(frozen = True)
class SourceCoverage:
    """
    SourceCoverage

    Attributes
    ----------
    command_coverage : float
        used commands with an example over used commands
    mean_parameter_coverage : float
        mean, over used commands with an example, of documented
        parameters over surface parameters
    commands : int
        used commands with an example

    """

    command_coverage: float
    mean_parameter_coverage: float
    commands: int


@dataclass(frozen = True)
class CoverageReport:
    """Coverage of human and machine examples over used commands."""

    used_commands: int
    human: SourceCoverage
    machine: SourceCoverage

    @property
    def improvement(self):
        """
        Relative gain of machine over human coverage.

        Returns
        -------
        dict
            ``command`` and ``parameter`` gains, None when the human
            coverage is 0
        """

        def gain(h, m):
            return None if h == 0 else (m - h) / h
        return {'command': gain(self.human.command_coverage,
                                self.machine.command_coverage),
                'parameter': gain(self.human.mean_parameter_coverage,
                                  self.machine.mean_parameter_coverage)}

    def to_frame(self):
        return pd.DataFrame(
            {HUMAN: [self.human.command_coverage,
                     self.human.mean_parameter_coverage, self.human.commands],
             MACHINE: [self.machine.command_coverage,
                       self.machine.mean_parameter_coverage,
                       self.machine.commands]},
            index = ['command_coverage', 'mean_parameter_coverage',
                     'commands'])


def _source_coverage(surface, used, examples):
    documented = {}
    for ex in examples:
        if ex.command in used:
            documented.setdefault(ex.command, set()).update(
                ex.parameter_names)

    ratios = []
    for command, names in sorted(documented.items()):
        spec = surface.lookup(command)
        if spec.parameters:
            ratios.append(len(names & set(spec.parameter_names))
                          / float(len(spec.parameters)))

    return SourceCoverage(
        command_coverage = len(documented) / float(len(used)) if used else 0.0,
        mean_parameter_coverage = sum(ratios) / len(ratios) if ratios else 0.0,
        commands = len(documented))


def coverage(surface, aggregates, human_examples, machine_examples):
    """
    Command and parameter coverage of both example sources.

    Only commands of the surface that appear in telemetry count.

    Parameters
    ----------
    surface : :class:`exforge.CommandSurface`
    aggregates : list of :class:`exforge.UsageAggregate`
    human_examples : list
        examples with ``command`` and ``parameter_names``
    machine_examples : list
        examples with ``command`` and ``parameter_names``

    Returns
    -------
    :class:`CoverageReport`

    """

    used = {a.command for a in aggregates if a.command in surface}
    return CoverageReport(len(used),
                          _source_coverage(surface, used, human_examples),
                          _source_coverage(surface, used, machine_examples))


def format_coverage(report):
    """Human against machine coverage, e.g. ``55% vs 100%``."""

    lines = ['Coverage over %i used commands (human vs machine)'
             % report.used_commands,
             '  commands:   %.0f%% vs %.0f%%'
             % (100 * report.human.command_coverage,
                100 * report.machine.command_coverage),
             '  parameters: %.0f%% vs %.0f%%'
             % (100 * report.human.mean_parameter_coverage,
                100 * report.machine.mean_parameter_coverage)]
    return '\n'.join(lines) + '\n'


### sessions ###

@dataclass(frozen = True)
class Session:
    user_id: str
    records: tuple

    @property
    def start(self):
        return self.records[0].timestamp


def _utc(timestamp):
    if timestamp.tzinfo is None:
        return timestamp.replace(tzinfo = timezone.utc)
    return timestamp


def sessionize(records, gap = timedelta(minutes = 30)):
    """
    Splits each user's records into sessions.

    A new session starts where two consecutive records of a user are
    more than ``gap`` apart. The result does not depend on the order of
    the records.

    Parameters
    ----------
    records : list of :class:`exforge.TelemetryRecord`
        help calls included
    gap : datetime.timedelta (default 30 minutes)

    Returns
    -------
    list of :class:`Session`
        ordered by user, then start

    """

    if len(records) == 0:
        return []

    df = pd.DataFrame({
        'user_id': [r.user_id for r in records],
        'timestamp': pd.to_datetime([_utc(r.timestamp) for r in records],
                                    utc = True),
        'command': [r.command for r in records],
        'parameters': [' '.join(sorted(r.parameters)) for r in records],
        'is_help': [r.is_help for r in records],
        'success': [r.success for r in records],
        'version': [r.version for r in records],
        'position': range(len(records)),
    })
    df = df.sort_values(['user_id', 'timestamp', 'command', 'parameters',
                         'is_help', 'success', 'version'], kind = 'mergesort')
    new_session = df.groupby('user_id')['timestamp'].diff() > pd.Timedelta(gap)
    first = ~df['user_id'].duplicated()
    df['session'] = (new_session | first).cumsum()

    sessions = []
    for (_, user_id), part in df.groupby(['session', 'user_id'], sort = True):
        sessions.append(Session(user_id, tuple(records[i]
                                               for i in part['position'])))
    return sessions


### help success ###

@dataclass(frozen = True)
class HelpSuccessStat:
    """
    HelpSuccessStat

    Attributes
    ----------
    group : str
    machine_rate, human_rate : float
        success fraction of attributed usages, 0 when there are none
    machine_n, human_n : int
        attributed usages
    usage_count : int
        distinct usages attributed to either source
    p_value : float
        two sided Fisher exact test of the 2x2 success table

    """

    group: str
    machine_rate: float
    human_rate: float
    machine_n: int
    human_n: int
    usage_count: int
    p_value: float


def default_group(command):
    """First command path token, e.g. ``vm`` for ``vm create``."""
    return command.split(' ', 1)[0]


def fisher_p_value(table):
    """Two sided Fisher exact p-value of a 2x2 table, within [0, 1]."""
    _, p = fisher_exact(table, alternative = 'two-sided')
    return min(max(float(p), 0.0), 1.0)


def help_followups(sessions):
    """
    Usages answering help calls.

    Within a session, the first non help record of a command after a help
    call on it is that call's usage. A later help call on the same
    command before the usage replaces the earlier one.

    Returns
    -------
    list of :class:`exforge.TelemetryRecord`

    """

    usages = []
    for session in sessions:
        pending = set()
        for r in session.records:
            if r.is_help:
                pending.add(r.command)
            elif r.command in pending:
                pending.discard(r.command)
                usages.append(r)
    return usages


def help_success(sessions, examples_by_source, grouping = None,
                 attribute_both = True):
    """
    Success of usages following help calls, per command group and source.

    A usage is attributed to a source when its parameter set equals the
    parameter set of one of that source's examples for the command.

    Parameters
    ----------
    sessions : list of :class:`Session`
    examples_by_source : dict
        ``human`` and ``machine`` -> examples with ``command`` and
        ``parameter_names``
    grouping : callable or dict (default None)
        command -> group; the first command token when None
    attribute_both : bool (default True)
        whether a usage matching both sources counts for both, otherwise
        it counts for neither

    Returns
    -------
    list of :class:`HelpSuccessStat`
        sorted by group

    Example
    -------
    >>> import exforge as exf
    >>> records = exf.read_records(exf.fixture_path('telemetry')).records
    >>> stats = exf.help_success(exf.sessionize(records),
    ...                          {'human': human, 'machine': filled})

    """

    if grouping is None:
        grouping = default_group
    elif isinstance(grouping, dict):
        mapping = grouping
        grouping = lambda command: mapping.get(command,
                                               default_group(command))

    known = {}
    for source in SOURCES:
        for ex in examples_by_source.get(source, []):
            known.setdefault((source, ex.command), set()).add(
                frozenset(ex.parameter_names))

    tables = {}
    groups_seen = set()
    for usage in help_followups(sessions):
        group = grouping(usage.command)
        groups_seen.add(group)
        matched = [s for s in SOURCES
                   if usage.parameters in known.get((s, usage.command), ())]
        if len(matched) == 2 and not attribute_both:
            continue
        if not matched:
            continue
        table = tables.setdefault(group, {'usages': 0, HUMAN: [0, 0],
                                          MACHINE: [0, 0]})
        table['usages'] += 1
        for source in matched:
            table[source][0] += int(usage.success)
            table[source][1] += 1

    omitted = sorted(groups_seen - set(tables))
    if omitted:
        logger.info('omitted groups without attributed usages: %s',
                    ', '.join(omitted))

    stats = []
    for group in sorted(tables):
        table = tables[group]
        m_success, m_n = table[MACHINE]
        h_success, h_n = table[HUMAN]
        p = fisher_p_value([[m_success, m_n - m_success],
                            [h_success, h_n - h_success]])
        stats.append(HelpSuccessStat(
            group = group,
            machine_rate = m_success / float(m_n) if m_n else 0.0,
            human_rate = h_success / float(h_n) if h_n else 0.0,
            machine_n = m_n, human_n = h_n,
            usage_count = table['usages'], p_value = p))
    return stats


def help_success_frame(stats):
    """Bubble rows: group, human_rate, machine_rate, usage_count, p_value."""

    columns = ['group', 'human_rate', 'machine_rate', 'usage_count',
               'p_value', 'human_n', 'machine_n']
    return pd.DataFrame([{c: getattr(s, c) for c in columns} for s in stats],
                        columns = columns)


def placeholder_summary(filled):
    """
    Placeholder statistics of filled examples.

    Returns
    -------
    dict
        ``examples``, ``complete`` (examples without placeholders) and
        the number of arguments per provenance

    """

    summary = {'examples': len(filled),
               'complete': sum(1 for ex in filled if ex.placeholders == 0)}
    for p in Provenance:
        summary[p.value] = sum(1 for ex in filled for a in ex.arguments
                               if a.provenance is p)
    return summary
