# -*- coding: utf-8 -*-

from datetime import datetime, timedelta, timezone
from math import comb

import numpy as np
import pytest

import exforge as exf
from exforge.metrics import help_followups, lcs_length

START = datetime(2022, 3, 1, 9, tzinfo = timezone.utc)


def _record(user, minutes, command = 'vm show', parameters = ('name',),
            success = True, is_help = False):
    return exf.TelemetryRecord(START + timedelta(minutes = minutes), user,
                               command, frozenset(parameters), success,
                               '2.40.0', is_help)


def _hypergeometric_p(table):
    """Two sided Fisher p-value by enumerating every table with the same
    margins."""
    (a, b), (c, d) = table
    n, row, col = a + b + c + d, a + b, a + c
    weights = {k: comb(col, k) * comb(n - col, row - k)
               for k in range(max(0, row + col - n), min(row, col) + 1)}
    observed = weights[a]
    extreme = sum(w for w in weights.values()
                  if w <= observed * (1 + 1e-7))
    return min(extreme / comb(n, row), 1.0)


### ROUGE ###

@pytest.mark.parametrize('candidate, reference, r1, r2, rl', [
    ('the cat', 'the cat sat', (1.0, 2 / 3, 0.8), (1.0, 0.5, 2 / 3),
     (1.0, 2 / 3, 0.8)),
    ('az vm create', 'az vm create', (1, 1, 1), (1, 1, 1), (1, 1, 1)),
    ('a b c d', 'd c b a', (1, 1, 1), (0, 0, 0), (0.25, 0.25, 0.25)),
    ('a a b', 'a b b', (2 / 3, 2 / 3, 2 / 3), (0.5, 0.5, 0.5),
     (2 / 3, 2 / 3, 2 / 3)),
    ('az vm show --name MyVm', 'az vm show --name <name>',
     (0.8, 0.8, 0.8), (0.75, 0.75, 0.75), (0.8, 0.8, 0.8)),
])
def test_rouge_hand_computed(candidate, reference, r1, r2, rl):
    score = exf.rouge(candidate, reference)
    for got, expected in ((score.r1, r1), (score.r2, r2), (score.rl, rl)):
        assert (got.precision, got.recall, got.f1) == pytest.approx(
            expected, abs = 1e-9)


def test_rouge_is_symmetric_in_f1():
    rng = np.random.default_rng(0)
    vocabulary = ['az', 'vm', 'create', '--name', 'MyVm', '-g', 'rg']
    for _ in range(200):
        a = list(rng.choice(vocabulary, size = rng.integers(1, 8)))
        b = list(rng.choice(vocabulary, size = rng.integers(1, 8)))
        ab, ba = exf.rouge(a, b), exf.rouge(b, a)
        for name in ('r1', 'r2', 'rl'):
            x, y = getattr(ab, name), getattr(ba, name)
            assert x.f1 == pytest.approx(y.f1)
            assert x.precision == pytest.approx(y.recall)


def test_rouge_of_empty_sequences():
    score = exf.rouge('az vm', '')
    assert score.empty_reference
    assert score.r1.recall == 0.0 and score.r1.f1 == 0.0
    score = exf.rouge('', 'az vm')
    assert not score.empty_reference
    assert score.rl.precision == 0.0


def test_lcs_length():
    assert lcs_length('abcbdab', 'bdcaba') == 4
    assert lcs_length([], ['a']) == 0


def test_rouge_corpus(caplog):
    frame = exf.rouge_corpus([('the cat', 'the cat sat'),
                              ('az vm create', 'az vm create'),
                              ('az', '')])
    assert list(frame.columns) == ['R1', 'R2', 'RL']
    assert list(frame.index) == ['Prec.', 'Rec.', 'F1']
    assert frame.loc['F1', 'R1'] == pytest.approx((0.8 + 1.0 + 0.0) / 3)
    assert frame.loc['Prec.', 'R1'] == pytest.approx(2 / 3)
    assert '1 references are empty' in caplog.text


### coverage ###

def test_fixture_coverage(surface, ingested, human, templates):
    aggregates = exf.aggregate(ingested.records)
    report = exf.coverage(surface, aggregates, human, templates)
    assert report.used_commands == 20
    assert report.human.command_coverage == pytest.approx(0.55, abs = 0.01)
    assert report.human.mean_parameter_coverage == pytest.approx(0.20,
                                                                abs = 0.01)
    assert report.machine.command_coverage == 1.0
    assert report.improvement['command'] == pytest.approx(0.45 / 0.55)

    frame = report.to_frame()
    assert list(frame.columns) == ['human', 'machine']
    text = exf.format_coverage(report)
    assert 'commands:   55% vs 100%' in text
    assert 'parameters: 20% vs' in text


def test_coverage_ignores_unused_and_unknown_commands(surface):
    aggregates = [exf.UsageAggregate('vm show', ('name',), 3, 4),
                  exf.UsageAggregate('vm frobnicate', ('name',), 1, 1)]
    machine = [exf.ExampleTemplate('vm show', (('name', '<name>'),
                                               ('ids', '<ids>')), 1, 3),
               exf.ExampleTemplate('vm list', (('vmss', '<vmss>'),), 1, 1)]
    report = exf.coverage(surface, aggregates, [], machine)
    assert report.used_commands == 1
    assert report.machine.commands == 1
    assert report.machine.mean_parameter_coverage == pytest.approx(2 / 5)
    assert report.human.command_coverage == 0.0
    assert report.improvement == {'command': None, 'parameter': None}


def test_coverage_without_usage(surface):
    report = exf.coverage(surface, [], [], [])
    assert report.used_commands == 0
    assert report.machine.command_coverage == 0.0


### sessions ###

def test_sessions_split_on_gaps():
    records = [_record('u1', 0), _record('u1', 5), _record('u1', 45),
               _record('u1', 50)]
    sessions = exf.sessionize(records)
    assert [len(s.records) for s in sessions] == [2, 2]
    assert sessions[1].start == START + timedelta(minutes = 45)


def test_sessions_are_order_free_and_per_user():
    records = [_record('u%i' % (i % 3), i * 7) for i in range(30)]
    rng = np.random.default_rng(2)
    shuffled = [records[i] for i in rng.permutation(len(records))]
    assert exf.sessionize(shuffled) == exf.sessionize(records)
    for session in exf.sessionize(records):
        assert len({r.user_id for r in session.records}) == 1


def test_single_record_and_empty_input():
    assert len(exf.sessionize([_record('u1', 0)])) == 1
    assert exf.sessionize([]) == []


def test_custom_gap():
    records = [_record('u1', 0), _record('u1', 10)]
    assert len(exf.sessionize(records, timedelta(minutes = 5))) == 2


def test_help_followups():
    records = [_record('u1', 0, is_help = True),
               _record('u1', 1, command = 'vm list'),
               _record('u1', 2, is_help = True),
               _record('u1', 3, success = False),
               _record('u1', 4),
               _record('u2', 0)]
    usages = help_followups(exf.sessionize(records))
    assert len(usages) == 1
    assert usages[0].timestamp == START + timedelta(minutes = 3)


### help success ###

def _help_sessions(command, parameters, successes, prefix):
    records = []
    for i, ok in enumerate(successes):
        user = '%s%02d' % (prefix, i)
        records.append(_record(user, 0, command, parameters, is_help = True))
        records.append(_record(user, 1, command, parameters, success = ok))
    return records


def test_help_success_rates_and_fisher():
    records = (_help_sessions('vm create', ('image', 'name'),
                              [True] * 8 + [False] * 2, 'm')
               + _help_sessions('vm show', ('name',),
                                [True] * 4 + [False] * 6, 'h'))
    machine = [exf.ExampleTemplate('vm create', (('image', '<image>'),
                                                 ('name', '<name>')), 1, 1)]
    human = [exf.HumanExample('vm show', 's', 'az vm show --name x',
                              ('name',))]
    [stat] = exf.help_success(exf.sessionize(records),
                              {'human': human, 'machine': machine})
    assert stat.group == 'vm'
    assert (stat.machine_rate, stat.human_rate) == (0.8, 0.4)
    assert (stat.machine_n, stat.human_n, stat.usage_count) == (10, 10, 20)
    assert stat.p_value == pytest.approx(
        _hypergeometric_p([[8, 2], [4, 6]]), abs = 1e-9)

    frame = exf.help_success_frame([stat])
    assert list(frame.columns[:5]) == ['group', 'human_rate', 'machine_rate',
                                       'usage_count', 'p_value']


def test_both_match_attribution():
    records = _help_sessions('vm show', ('name',), [True, False], 'u')
    example = exf.HumanExample('vm show', 's', 'az vm show --name x',
                               ('name',))
    sources = {'human': [example], 'machine': [example]}
    [stat] = exf.help_success(exf.sessionize(records), sources)
    assert (stat.machine_n, stat.human_n, stat.usage_count) == (2, 2, 2)
    assert exf.help_success(exf.sessionize(records), sources,
                            attribute_both = False) == []


def test_grouping_and_unattributed_usages():
    records = (_help_sessions('vm create', ('image',), [True], 'a')
               + _help_sessions('vm show', ('ids',), [True], 'b'))
    machine = [exf.ExampleTemplate('vm create', (('image', '<image>'),), 1,
                                   1)]
    stats = exf.help_success(exf.sessionize(records), {'machine': machine},
                             grouping = {'vm create': 'compute'})
    assert [s.group for s in stats] == ['compute']
    assert stats[0].human_rate == 0.0 and stats[0].human_n == 0


def test_fixture_help_success(human, templates):
    records = exf.read_records(exf.fixture_path('telemetry')).records
    stats = exf.help_success(exf.sessionize(records),
                             {'human': human, 'machine': templates})
    assert stats
    for s in stats:
        assert 0.0 <= s.machine_rate <= 1.0
        assert 0.0 <= s.human_rate <= 1.0
        assert 0.0 <= s.p_value <= 1.0
        assert s.usage_count <= s.machine_n + s.human_n


### Fisher exact test ###

def _tables(n):
    for a in range(n + 1):
        for b in range(n + 1 - a):
            for c in range(n + 1 - a - b):
                yield [[a, b], [c, n - a - b - c]]


def test_fisher_matches_enumeration_for_small_tables():
    for n in range(0, 21):
        for table in _tables(n):
            assert exf.fisher_p_value(table) == pytest.approx(
                _hypergeometric_p(table), abs = 1e-9), table


def test_fisher_matches_enumeration_up_to_fifty():
    rng = np.random.default_rng(0)
    for _ in range(3000):
        n = int(rng.integers(21, 51))
        cuts = np.sort(rng.integers(0, n + 1, size = 3))
        a, b, c = cuts[0], cuts[1] - cuts[0], cuts[2] - cuts[1]
        table = [[int(a), int(b)], [int(c), int(n - cuts[2])]]
        assert exf.fisher_p_value(table) == pytest.approx(
            _hypergeometric_p(table), abs = 1e-9), table


def test_placeholder_summary():
    P = exf.Provenance
    filled = [exf.FilledExample('vm show', (
                  exf.FilledArgument('name', 'MyVm', P.lookup),
                  exf.FilledArgument('ids', '<ids>', P.placeholder))),
              exf.FilledExample('vm list', (
                  exf.FilledArgument('vmss', 'MyScaleSet', P.synthesized),))]
    assert exf.placeholder_summary(filled) == {
        'examples': 2, 'complete': 1, 'lookup': 1, 'synthesized': 1,
        'placeholder': 1}
