# -*- coding: utf-8 -*-

import time

import pandas as pd
import pytest

import exforge as exf
from exforge.classifier import STRING, WEIGHTED_AVG, select_tokens, stop_words


@pytest.fixture(scope = 'module')
def synthetic():
    return exf.synthetic_labeled_params(n_rows = 7600, seed = 0)


@pytest.fixture(scope = 'module')
def cv_hp():
    return exf.Hyperparameters(tree_count = 10, max_depth = 12,
                               min_samples_leaf = 1)


@pytest.mark.parametrize('text, tokens', [
    ('Name of the Web App.', ['name', 'web', 'app']),
    ('Résumé files', ['resum', 'file']),
    ('', []),
    ('--resource-group', ['resourc', 'group']),
    ('the of and', []),
])
def test_preprocess(text, tokens):
    assert exf.preprocess(text) == tokens


def test_stop_words_are_shipped():
    words = stop_words()
    assert 'the' in words
    assert 'name' not in words


def test_select_tokens_caps_per_class():
    texts = ['alpha beta gamma', 'alpha delta', 'omega sigma', 'omega tau']
    labels = ['x', 'x', 'y', 'y']
    selected = select_tokens(texts, labels, cap = 1)
    assert selected == ['alpha', 'omega']
    assert select_tokens(['the', 'of'], ['x', 'y']) == []


def test_vocabulary_respects_cap(synthetic):
    vocabulary = exf.build_vocabulary(synthetic, cap = 2)
    n_types = len({p.label for p in synthetic})
    for f in ('parameter_description', 'command_description'):
        assert len(vocabulary.segments[f]) <= 2 * n_types
    assert 'ip' in vocabulary.segments['parameter_name']
    assert len(vocabulary) == sum(len(s) for s in
                                  vocabulary.segments.values())


def test_featurize_matches_matrix(labeled):
    vocabulary = exf.build_vocabulary(labeled)
    matrix = exf.featurize_matrix(labeled[:10], vocabulary).toarray()
    for row, p in enumerate(labeled[:10]):
        vector = exf.featurize(p, vocabulary)
        assert list(vector.indices) == sorted(vector.indices)
        assert all(c >= 1 for c in vector.counts)
        dense = [0] * len(vocabulary)
        for i, c in zip(vector.indices, vector.counts):
            dense[i] = c
        assert list(matrix[row]) == dense


def test_out_of_vocabulary_tokens_are_dropped(labeled):
    vocabulary = exf.build_vocabulary(labeled)
    p = exf.LabeledParam('zzqx', 'qqq www', 'qqq', 'Xylophone.', 'Yodel.')
    assert exf.featurize(p, vocabulary).indices == ()


def test_build_vocabulary_errors():
    with pytest.raises(exf.ValidationError, match = 'empty'):
        exf.build_vocabulary([])
    with pytest.raises(exf.ValidationError, match = 'label'):
        exf.build_vocabulary([exf.LabeledParam('name', 'vm show', 'vm')])


def test_predictor_on_shipped_labels(predictor, surface):
    spec = surface.lookup('vm create')
    params = [exf.classifier.param_context(spec, p) for p in spec.parameters]
    predictions = exf.predict_types(predictor, params)
    assert len(predictions) == len(params)
    for label, confidence in predictions:
        assert isinstance(label, exf.ParamType)
        assert 0.0 <= confidence <= 1.0
    assert exf.predict_types(predictor, []) == []


def test_confidence_of_non_string_is_a_product(predictor):
    p = exf.LabeledParam('ip-address', 'vm create', 'vm',
                         'The ip address of the subnet.', 'Create a vm.')
    label, confidence = exf.predict_type(predictor, p)
    X = exf.featurize_matrix([p], predictor.vocabulary)
    p1 = predictor.stage1.predict_proba(X)[0]
    p2 = predictor.stage2.predict_proba(X)[0]
    if label is exf.ParamType.String:
        assert confidence == pytest.approx(p1[0])
    else:
        assert confidence == pytest.approx(
            p1[1] * p2[predictor.stage2.classes.index(label.value)])


def test_forests_span_the_whole_vocabulary(predictor, labeled, fast_hp):
    width = len(predictor.vocabulary)
    assert predictor.stage1.n_features == width
    assert predictor.stage2.n_features == width
    vocabulary, forest = exf.train_single_stage(labeled, fast_hp)
    assert forest.n_features == len(vocabulary)


def test_two_stage_data_checks(labeled):
    strings = [p for p in labeled if p.label is exf.ParamType.String]
    with pytest.raises(exf.ValidationError, match = 'no String'):
        exf.train_two_stage([p for p in labeled
                             if p.label is not exf.ParamType.String])
    ints = [p for p in labeled if p.label is exf.ParamType.Integer]
    with pytest.raises(exf.ValidationError, match = 'at least 2'):
        exf.train_two_stage(strings + ints)


def test_training_is_deterministic(labeled, fast_hp):
    first = exf.train_two_stage(labeled, fast_hp, seed = 4)
    again = exf.train_two_stage(list(reversed(labeled)), fast_hp, seed = 4)
    assert first.vocabulary == again.vocabulary
    assert first.stage1.to_dict() == again.stage1.to_dict()
    assert first.stage2.to_dict() == again.stage2.to_dict()


def test_two_stage_cross_validation(synthetic, cv_hp):
    start = time.perf_counter()
    two = exf.cross_validate(synthetic, folds = 3, hp = cv_hp, seed = 0)
    assert two.pipeline.loc[WEIGHTED_AVG, 'F-1 Score'] >= 0.85
    assert two.stage1.loc[WEIGHTED_AVG, 'Support'] == len(synthetic)
    assert STRING not in two.stage2.index
    assert two.unsupported == []

    one = exf.cross_validate(synthetic, folds = 3, hp = cv_hp, seed = 0,
                             two_stage = False)
    assert one.stage1 is None and one.stage2 is None
    non_string = [t.value for t in exf.NON_STRING_TYPES]
    assert (exf.weighted_f1(two.pipeline, non_string)
            >= exf.weighted_f1(one.pipeline, non_string))
    assert time.perf_counter() - start < 60


def test_rare_types_are_excluded(labeled, fast_hp, caplog):
    data = labeled + [exf.LabeledParam('port', 'vm open-port', 'vm',
                                       'Port to open.', 'Open a port.',
                                       exf.ParamType.IntWithSpecificFormat)]
    data = [p for p in data
            if p.label is not exf.ParamType.IntWithSpecificFormat] + data[-1:]
    report = exf.cross_validate(data, folds = 3, hp = fast_hp)
    assert report.unsupported == ['IntWithSpecificFormat']
    assert 'IntWithSpecificFormat' not in report.pipeline.index
    assert 'excluded' in caplog.text


def test_cross_validation_errors(labeled):
    with pytest.raises(exf.ValidationError, match = 'folds'):
        exf.cross_validate(labeled, folds = 1)
    with pytest.raises(exf.ValidationError, match = 'too few'):
        exf.cross_validate(labeled[:2], folds = 3)


def test_write_cv_report(tmp_path, labeled, fast_hp):
    report = exf.cross_validate(labeled, folds = 2, hp = fast_hp)
    exf.write_cv_report(report, str(tmp_path / 'reports'))
    names = sorted(p.name for p in (tmp_path / 'reports').iterdir())
    assert names == ['cv_pipeline.csv', 'cv_stage1.csv', 'cv_stage2.csv']
    path = tmp_path / 'reports' / 'cv_pipeline.csv'
    assert path.read_text().splitlines()[0] == (
        '# generated by exforge %s, seed 0' % exf.__version__)
    table = pd.read_csv(str(path), comment = '#', index_col = 0)
    assert list(table.index) == list(report.pipeline.index)
    assert not list((tmp_path / 'reports').glob('.tmp-*'))


def test_weighted_f1_of_subset():
    table = exf.classifier.classification_table(
        ['a', 'a', 'b', 'c'], ['a', 'b', 'b', 'c'], ['a', 'b', 'c'])
    assert table.loc[WEIGHTED_AVG, 'Support'] == 4
    assert exf.weighted_f1(table, ['c']) == pytest.approx(1.0)
    assert exf.weighted_f1(table, ['z']) == 0.0


def test_predictor_round_trip(tmp_path, predictor, labeled):
    path = str(tmp_path / 'typer.json')
    exf.save_predictor(predictor, path)
    restored = exf.load_predictor(path)
    assert restored.vocabulary == predictor.vocabulary
    assert (exf.predict_types(restored, labeled[:20])
            == exf.predict_types(predictor, labeled[:20]))


def test_load_predictor_rejects_other_json(tmp_path):
    path = tmp_path / 'other.json'
    path.write_text('{"format": "something-else"}')
    with pytest.raises(exf.ValidationError, match = 'not a type predictor'):
        exf.load_predictor(str(path))


def test_labeled_params_csv(tmp_path, labeled):
    rows = exf.read_labeled_params(exf.fixture_path('labeled'))
    assert len(rows) == 60
    assert {p.label for p in rows} == set(exf.ParamType)

    path = str(tmp_path / 'labeled.csv')
    exf.write_labeled_params(rows, path)
    assert exf.read_labeled_params(path) == rows


def test_labeled_params_csv_errors(tmp_path):
    with pytest.raises(exf.InputError):
        exf.read_labeled_params(str(tmp_path / 'missing.csv'))

    path = tmp_path / 'short.csv'
    path.write_text('parameter_name,label\nname,String\n')
    with pytest.raises(exf.ValidationError, match = 'lacks columns'):
        exf.read_labeled_params(str(path))

    path = tmp_path / 'bad.csv'
    path.write_text('parameter_name,command_name,module_name,'
                    'parameter_description,command_description,label\n'
                    'name,vm show,vm,Name.,Show.,Colour\n')
    with pytest.raises(exf.ValidationError, match = 'line 2'):
        exf.read_labeled_params(str(path))


def test_surface_labels(surface):
    rows = exf.labeled_params_from_surface(surface)
    assert len(rows) == sum(len(c.parameters) for c in surface.commands)
    assert rows[0].command_name == surface.commands[0].name
