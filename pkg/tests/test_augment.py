# -*- coding: utf-8 -*-

import json
from collections import Counter

import pytest

import exforge as exf
from exforge.augment import MASK, example_tokens
from exforge.miner import FLAG_VALUE, POSITIONAL


def _example(n, command = 'mod00 create'):
    arguments = tuple(exf.Argument('param-%i' % i, 'value%i' % i)
                      for i in range(n))
    return exf.MinedExample('doc', command, arguments)


@pytest.mark.parametrize('n', range(1, 11))
def test_finetune_permutations(n):
    example = _example(n)
    tokens, positions = example_tokens(example, 'az')
    pairs = exf.finetune_permutations(example)

    assert len(pairs) == 2 ** n - 1
    assert len({p.input for p in pairs}) == len(pairs)
    for subset, pair in enumerate(pairs, 1):
        assert exf.reconstruct(pair) == tuple(tokens)
        masked = [i for i in range(n) if subset >> i & 1]
        assert pair.input.count(MASK) == len(masked)
        assert [s[0] for s in pair.spans] == ['value%i' % i for i in masked]
        assert all('--param-%i' % i in pair.input for i in range(n))


def test_first_pair_masks_the_first_value():
    pairs = exf.finetune_permutations(_example(3))
    assert pairs[0].to_dict() == {
        'input': 'az mod00 create --param-0 <MASK> --param-1 value1 '
                 '--param-2 value2',
        'target': 'value0'}
    assert pairs[-1].to_dict()['target'] == ('value0 <MASK> value1 <MASK> '
                                             'value2')


def test_flags_and_positionals_are_never_masked():
    example = exf.MinedExample('doc', 'group create', (
        exf.Argument(POSITIONAL, 'MyGroup'),
        exf.Argument('location', 'westus'),
        exf.Argument('no-wait', FLAG_VALUE),
        exf.Argument('tags', 'a b', quoted = True)))
    tokens, positions = example_tokens(example, 'az')
    assert tokens == ['az', 'group', 'create', 'MyGroup', '--location',
                      'westus', '--no-wait', '--tags', '"a b"']
    assert positions == [5, 8]
    assert len(exf.finetune_permutations(example)) == 3


def test_permutation_limits():
    with pytest.raises(exf.ValidationError, match = 'no parameter value'):
        exf.finetune_permutations(_example(0))
    with pytest.raises(exf.ValidationError, match = 'too many'):
        exf.finetune_permutations(_example(21))


def test_finetune_dataset_skips_and_refuses(caplog):
    corpus = [_example(0), _example(2), _example(21)]
    pairs = exf.build_finetune_dataset(corpus)
    assert len(pairs) == 3
    assert 'refused 1 examples' in caplog.text


def test_finetune_dataset_of_fixture_corpus(mined):
    pairs = exf.build_finetune_dataset(mined.examples)
    expected = sum(2 ** len(example_tokens(ex, 'az')[1]) - 1
                   for ex in mined.examples
                   if example_tokens(ex, 'az')[1])
    assert len(pairs) == expected


def test_span_mask_is_deterministic():
    tokens = ('az vm create --resource-group MyResourceGroup --name MyVm '
              '--image UbuntuLTS --admin-username azureuser '
              '--generate-ssh-keys').split()
    first = exf.span_mask(tokens, seed = 7)
    assert first == exf.span_mask(tokens, seed = 7)
    assert exf.reconstruct(first) == tuple(tokens)
    masked = [t for t in first.target if t != MASK]
    assert len(masked) == round(len(tokens) * 0.15)


@pytest.mark.parametrize('seed', range(50))
def test_span_mask_shape(seed):
    tokens = ['t%i' % i for i in range(40)]
    pair = exf.span_mask(tokens, mask_fraction = 0.3, mean_span = 2.0,
                         seed = seed)
    assert exf.reconstruct(pair) == tuple(tokens)
    assert len([t for t in pair.target if t != MASK]) == 12
    assert pair.input.count(MASK) == len(pair.spans)
    assert all(span for span in pair.spans)
    for a, b in zip(pair.input, pair.input[1:]):
        assert not (a == MASK and b == MASK)


def test_span_mask_of_short_sequences():
    pair = exf.span_mask(['az'], seed = 0)
    assert pair.input == (MASK,)
    assert pair.target == ('az',)
    pair = exf.span_mask(['az', 'vm'], mask_fraction = 0.1, seed = 1)
    assert len([t for t in pair.target if t != MASK]) == 1


@pytest.mark.parametrize('kwargs, match', [
    ({'tokens': []}, 'empty'),
    ({'tokens': ['a'], 'mask_fraction': 1.0}, 'mask_fraction'),
    ({'tokens': ['a'], 'mask_fraction': 0.0}, 'mask_fraction'),
    ({'tokens': ['a'], 'mean_span': 0.5}, 'mean_span'),
])
def test_span_mask_errors(kwargs, match):
    with pytest.raises(exf.ValidationError, match = match):
        exf.span_mask(**kwargs)


def test_pretraining_dataset_seeds_by_line():
    lines = ['az vm show --name MyVm --resource-group MyGroup', '',
             'az group delete --name MyGroup --yes']
    pairs = exf.build_pretraining_dataset(lines, seed = 3)
    assert len(pairs) == 2
    assert pairs[0] == exf.span_mask(lines[0].split(), seed = 3)
    assert pairs[1] == exf.span_mask(lines[2].split(), seed = 5)


def test_reconstruct_rejects_mismatched_pairs():
    pair = exf.MaskedPair(('az', MASK, MASK), ('vm',))
    with pytest.raises(exf.ValidationError, match = 'sentinels'):
        exf.reconstruct(pair)


def test_write_dataset(tmp_path):
    pairs = exf.finetune_permutations(_example(2))
    path = tmp_path / 'finetune.jsonl'
    exf.write_dataset(pairs, str(path), meta = {'seed': 0})
    rows = [json.loads(line) for line in path.read_text().splitlines()]
    data = [r for r in rows if 'input' in r]
    assert len(data) == 3
    assert set(data[0]) == {'input', 'target'}


### co-occurrence ###

def _cooccurrence_corpus():
    def ex(command, **values):
        return exf.MinedExample('doc', command, tuple(
            exf.Argument(k.replace('_', '-'), v) for k, v in values.items()))
    return [ex('vm create', name = 'MyVm', image = 'UbuntuLTS'),
            ex('vm create', name = 'MyVm', image = 'UbuntuLTS'),
            ex('vm create', name = 'WinVm', image = 'Win2019Datacenter',
               admin_password = 'secret'),
            ex('vm show', name = 'ShownVm'),
            ex('group create', name = 'MyGroup', location = 'westus')]


def test_cooccurrence_back_off():
    model = exf.train_cooccurrence(_cooccurrence_corpus())
    assert model.candidates('vm create', 'name', ['image']) == [('MyVm', 2)]
    assert model.candidates('vm create', 'name',
                            ['image', 'admin-password']) == [('WinVm', 1)]
    # unseen context backs off to the command level
    assert model.candidates('vm create', 'name', ['size']) == [
        ('MyVm', 2), ('WinVm', 1)]
    assert model.candidates('vm create', 'name') == [('MyVm', 2),
                                                     ('WinVm', 1)]
    # unseen parameter of a known command backs off to the parameter name
    assert model.candidates('vm show', 'image') == [
        ('UbuntuLTS', 2), ('Win2019Datacenter', 1)]
    assert model.candidates('vm show', 'size') == []
    # unseen command has no candidates
    assert model.candidates('vm delete', 'name') == []
    assert model.candidates('network vnet create', 'name', ['image']) == []


def test_coarse_levels_sum_finer_levels():
    model = exf.train_cooccurrence(_cooccurrence_corpus())
    for (command, parameter), counts in model.command.items():
        total = sum((v for (c, p, _), v in model.context.items()
                     if (c, p) == (command, parameter)), Counter())
        assert total == counts
    for parameter, counts in model.parameter.items():
        total = sum((v for (_, p), v in model.command.items()
                     if p == parameter), Counter())
        assert total == counts


def test_cooccurrence_fill():
    model = exf.train_cooccurrence(_cooccurrence_corpus())
    template = exf.ExampleTemplate('vm create', (('name', '<name>'),
                                                 ('image', '<image>'),
                                                 ('size', '<size>')), 2, 4)
    example = exf.generate_values(model, template)
    assert example.rank == 2
    assert [a.value for a in example.arguments] == ['MyVm', 'UbuntuLTS',
                                                    '<size>']
    assert example.arguments[2].provenance is exf.Provenance.placeholder


def test_cooccurrence_fill_unseen_command():
    model = exf.train_cooccurrence(_cooccurrence_corpus()[:3])
    template = exf.ExampleTemplate('network vnet create',
                                   (('name', '<name>'),
                                    ('resource-group', '<resource-group>')),
                                   1, 1)
    example = exf.generate_values(model, template)
    assert [a.value for a in example.arguments] == ['<name>',
                                                    '<resource-group>']
    assert example.placeholders == 2


def test_cooccurrence_skips_placeholder_values():
    corpus = [exf.MinedExample('doc', 'vm create',
                               (exf.Argument('name', '<vm-name>'),
                                exf.Argument('image', 'UbuntuLTS')))]
    model = exf.train_cooccurrence(corpus)
    assert model.candidates('vm create', 'name') == []
    assert model.candidates('vm create', 'image') == [('UbuntuLTS', 1)]


def test_cooccurrence_file(tmp_path):
    model = exf.train_cooccurrence(_cooccurrence_corpus())
    path = str(tmp_path / 'cooccurrence.json')
    exf.write_cooccurrence(model, path)
    assert exf.read_cooccurrence(path) == model


def test_cooccurrence_errors(tmp_path):
    with pytest.raises(exf.ValidationError, match = 'empty corpus'):
        exf.train_cooccurrence([])
    path = tmp_path / 'broken.json'
    path.write_text('{"context": []}')
    with pytest.raises(exf.ValidationError, match = 'co-occurrence'):
        exf.read_cooccurrence(str(path))
