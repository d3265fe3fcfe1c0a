# -*- coding: utf-8 -*-

import time
import random
from collections import Counter

import pytest

import exforge as exf
from exforge.miner import (DUPLICATE, FLAG_VALUE, INVALID_VALUE, MALFORMED,
                           POSITIONAL, UNKNOWN_COMMAND, UNKNOWN_PARAMETER)


def _doc(body, kind = 'qa-post', id = 'd1'):
    return exf.SourceDocument(id, kind, body)


### extraction ###

def test_tagged_fence_and_continuations():
    body = ('text\n```azurecli\naz vm create \\\n    --name MyVm \\\n'
            '    --image UbuntuLTS\n```\n')
    assert exf.extract_blocks(_doc(body), 'az') == [
        'az vm create --name MyVm --image UbuntuLTS']


def test_untagged_fence_needs_prefix():
    body = '```\nls -la\n```\n```\n$ az vm list\n```\n'
    assert exf.extract_blocks(_doc(body), 'az') == ['$ az vm list']


def test_indented_block_and_unterminated_fence():
    body = ('intro\n\n    az vm list\n    az vm show --name a\n\nafter\n'
            '```azure-cli\naz group list\n')
    blocks = exf.extract_blocks(_doc(body), 'az')
    assert blocks == ['az vm list\naz vm show --name a', 'az group list']


def test_candidate_lines_strip_prompts():
    block = '$ az vm list\n> az vm show --name a\necho done\nPS> az group list'
    assert exf.candidate_lines(block, 'az') == [
        'az vm list', 'az vm show --name a', 'az group list']


### parsing ###

def test_parse_flags_aliases_and_quotes(surface):
    ex = exf.parse_invocation('az vm create -g MyRG -n MyVm --image '
                              '"Ubuntu LTS" --location=westus', surface,
                              source_id = 'doc')
    assert ex.command == 'vm create'
    assert ex.source_id == 'doc'
    assert ex.values == {'resource-group': 'MyRG', 'name': 'MyVm',
                         'image': 'Ubuntu LTS', 'location': 'westus'}
    assert [a.quoted for a in ex.arguments] == [False, False, True, False]


def test_parse_flag_without_value_and_positional(surface):
    ex = exf.parse_invocation('az vm delete --yes --name MyVm', surface)
    assert ex.values == {'yes': FLAG_VALUE, 'name': 'MyVm'}
    ex = exf.parse_invocation('az group create MyGroup --location westus',
                              surface)
    assert ex.arguments[0] == exf.Argument(POSITIONAL, 'MyGroup')
    assert ex.parameter_names == ('location',)


def test_parse_trailing_comment(surface):
    ex = exf.parse_invocation('az vm list --resource-group rg # all vms',
                              surface)
    assert ex.values == {'resource-group': 'rg'}


def test_longest_command_match(surface):
    ex = exf.parse_invocation('az keyvault secret set --vault-name kv '
                              '--name s --value v', surface)
    assert ex.command == 'keyvault secret set'


@pytest.mark.parametrize('line, reason', [
    ('az vm frobnicate --name a', UNKNOWN_COMMAND),
    ('az vm show --nope a', UNKNOWN_PARAMETER),
    ('az vm show --name a --name b', MALFORMED),
    ('az vm show --name a -n b', MALFORMED),
    ('az vm show --name a b', MALFORMED),
    ('az vm show --name "unclosed', MALFORMED),
    ('az vm show --name ""', MALFORMED),
    ('gcloud compute list', MALFORMED),
    ('', MALFORMED),
])
def test_parse_rejections(surface, line, reason):
    assert exf.parse_invocation(line, surface) == reason


### filtering ###

def test_filter_normalizes_and_drops(surface):
    examples = [
        exf.MinedExample('a', 'vm show', (exf.Argument('n', 'MyVm'),)),
        exf.MinedExample('b', 'vm show', (exf.Argument('name', 'MyVm'),)),
        exf.MinedExample('c', 'vm gone', (exf.Argument('name', 'x'),)),
        exf.MinedExample('d', 'vm show', (exf.Argument('nope', 'x'),)),
        exf.MinedExample('e', 'vm show', (exf.Argument('name', 'x' * 257),)),
        exf.MinedExample('f', 'vm show', (exf.Argument('name', 'a\x07'),)),
    ]
    result = exf.filter_corpus(examples, surface)
    assert [ex.source_id for ex in result.examples] == ['a']
    assert result.examples[0].arguments[0].name == 'name'
    assert result.dropped == Counter({DUPLICATE: 1, UNKNOWN_COMMAND: 1,
                                      UNKNOWN_PARAMETER: 1,
                                      INVALID_VALUE: 2})
    again = exf.filter_corpus(result.examples, surface)
    assert again.examples == result.examples
    assert not again.dropped


@pytest.mark.parametrize('value, shaped', [
    ('<vm-name>', True),
    ('$NAME', True),
    ('${RESOURCE_GROUP}', True),
    ('{name}', True),
    (' <name> ', True),
    ('{"a": 1}', False),
    ('MyVm', False),
    ('a<b>', False),
    ('$5', False),
])
def test_placeholder_value(value, shaped):
    assert exf.miner.placeholder_value(value) is shaped
    assert exf.miner.valid_value(value) is not shaped


def test_filter_drops_placeholder_values(surface):
    examples = [
        exf.MinedExample('a', 'vm show', (exf.Argument('name', '<vm-name>'),)),
        exf.MinedExample('b', 'vm show', (exf.Argument('name', '$VM'),)),
        exf.MinedExample('c', 'vm show', (exf.Argument('name', '{vm}'),)),
        exf.MinedExample('d', 'vm show', (exf.Argument('name', 'MyVm'),)),
    ]
    result = exf.filter_corpus(examples, surface)
    assert [ex.source_id for ex in result.examples] == ['d']
    assert result.dropped == Counter({INVALID_VALUE: 3})


def test_mined_placeholder_line_never_reaches_the_lookup(surface):
    body = ('```azurecli\n'
            'az vm create --name <vm-name> --image UbuntuLTS '
            '--resource-group <resource-group>\n'
            'az vm show --name MyVm --resource-group MyGroup\n'
            '```\n')
    result = exf.mine_corpus([_doc(body)], surface)
    assert [ex.command for ex in result.examples] == ['vm show']
    assert result.dropped[INVALID_VALUE] == 1
    lookup = exf.build_lookup(result.examples)
    assert lookup.candidates('vm create', 'image') == []


### fixture corpus ###

def test_fixture_corpus(mined):
    assert mined.blocks == 15
    assert len(mined.examples) == 25
    assert mined.rejected == Counter({UNKNOWN_COMMAND: 1,
                                      UNKNOWN_PARAMETER: 1})
    assert mined.dropped == Counter({DUPLICATE: 1})
    commands = {ex.command for ex in mined.examples}
    assert 'webapp config appsettings set' in commands
    secret = [ex for ex in mined.examples
              if ex.command == 'keyvault secret set'][0]
    assert secret.values['value'] == 'Pa55w0rd!'


def test_fixture_lookup(lookup):
    assert lookup.candidates('vm create', 'image') == [('UbuntuLTS', 2)]
    assert lookup.candidates('vm create', 'resource-group') == [
        ('MyResourceGroup', 2)]
    assert lookup.candidates('vm delete', 'yes') == []
    assert lookup.candidates('vm create', 'missing') == []
    top_value, _ = lookup.global_candidates('resource-group')[0]
    assert top_value == 'MyResourceGroup'


def test_lookup_and_mined_round_trip(mined, lookup, tmp_path):
    path = str(tmp_path / 'lookup.json')
    exf.write_lookup(lookup, path)
    assert exf.read_lookup(path) == lookup
    path = str(tmp_path / 'mined.jsonl')
    exf.write_mined(mined.examples, path)
    assert exf.read_mined(path) == mined.examples


def test_manifest_errors(tmp_path):
    (tmp_path / 'manifest.csv').write_text('file,id,kind\na.md,a,tweet\n')
    (tmp_path / 'a.md').write_text('az vm list')
    with pytest.raises(exf.ValidationError, match = 'tweet'):
        exf.load_corpus(str(tmp_path))
    (tmp_path / 'manifest.csv').write_text('file,id,kind\nb.md,b,blog\n')
    with pytest.raises(exf.InputError):
        exf.load_corpus(str(tmp_path))
    with pytest.raises(exf.InputError):
        exf.load_corpus(str(tmp_path / 'nowhere'))


### generated corpus ###

def _valid_line(i):
    variants = [
        'az vm show --name vm%i --resource-group rg%i' % (i, i),
        'az vm create \\\n    --name vm%i \\\n    --image UbuntuLTS' % i,
        'az keyvault secret set --vault-name kv%i --name s%i '
        '--value "p a s s %i"' % (i, i, i),
        'az storage blob upload --account-name sa%i -c c%i -n b%i '
        '-f ./f%i.txt' % (i, i, i, i),
        'az network vnet create --name net%i -g rg%i '
        '--address-prefix 10.%i.0.0/16' % (i, i, i),
    ]
    return variants[i % len(variants)], 1 + variants[i % 5].count('\\\n')


INVALID = (
    ['az vm frobnicate --name x%i' % i for i in range(4)]
    + ['az vm show --colour x%i' % i for i in range(4)]
    + ['az vm show --name a%i --name b%i' % (i, i) for i in range(4)]
    + ['az vm show --name %s%i' % ('x' * 300, i) for i in range(3)])
INVALID_REASONS = Counter({UNKNOWN_COMMAND: 4, UNKNOWN_PARAMETER: 4,
                           MALFORMED: 4, INVALID_VALUE: 3})


def _generated_corpus():
    lines = [_valid_line(i)[0] for i in range(85)] + INVALID
    random.Random(0).shuffle(lines)
    docs = []
    for j in range(30):
        own = lines[j::30]
        body = '# Question %i\n\nSome prose.\n\n```azurecli\n%s\n```\n' % (
            j, '\n'.join(own))
        kind = exf.miner.DOCUMENT_KINDS[j % 4]
        docs.append(exf.SourceDocument('doc-%02i' % j, kind, body))
    return docs


def test_generated_corpus_keeps_exactly_the_valid_lines(surface):
    result = exf.mine_corpus(_generated_corpus(), surface)
    assert len(result.examples) == 85
    assert result.rejected + result.dropped == INVALID_REASONS
    lines = {ex.line for ex in result.examples}
    assert 'az vm create --name vm1 --image UbuntuLTS' in lines


def test_fuzz_never_raises(surface):
    rng = random.Random(1)
    start = time.perf_counter()
    for i in range(100000):
        raw = bytes(rng.randrange(256) for _ in range(rng.randrange(1, 48)))
        text = raw.decode('latin-1')
        if i % 2:
            text = 'az ' + text
        parsed = exf.parse_invocation(text, surface)
        assert isinstance(parsed, (str, exf.MinedExample))
        if i % 10 == 0:
            exf.extract_blocks(exf.SourceDocument('f', 'blog',
                                                  '```\n%s\n```' % text),
                               'az')
    assert time.perf_counter() - start < 30
