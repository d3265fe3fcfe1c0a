# -*- coding: utf-8 -*-

import os
from collections import Counter

import pytest

import exforge as exf


@pytest.mark.parametrize('name', ['surface', 'telemetry', 'corpus', 'docs',
                                  'human_examples', 'labeled', 'config'])
def test_fixtures_exist(name):
    assert os.path.exists(exf.fixture_path(name))


def test_unknown_fixture_and_source():
    with pytest.raises(exf.ValidationError):
        exf.fixture_path('wells')
    with pytest.raises(ValueError):
        exf.surface_data('gcloud')


def test_surface_data():
    surface = exf.surface_data('az')
    assert surface.prefix == 'az'
    assert surface.lookup('vm create') is not None


def test_type_frequencies():
    table = exf.type_frequencies()
    assert len(table) == 15
    assert table['frequency'].sum() == 7613
    assert table['frequency'].idxmax() == 'String'
    assert {exf.ParamType.parse(t) for t in table.index} == set(exf.ParamType)


def test_synthetic_labeled_params():
    data = exf.synthetic_labeled_params(seed = 0)
    assert len(data) == 7613
    counts = Counter(p.label for p in data)
    assert counts[exf.ParamType.parse('String')] == 5228

    small = exf.synthetic_labeled_params(n_rows = 300, seed = 1)
    assert min(Counter(p.label for p in small).values()) >= 3
    assert small == exf.synthetic_labeled_params(n_rows = 300, seed = 1)
    assert small != exf.synthetic_labeled_params(n_rows = 300, seed = 2)


def test_synthetic_surface_and_telemetry():
    surface = exf.synthetic_surface(n_commands = 12, n_parameters = 3)
    assert len(surface.commands) == 12
    assert surface.lookup('mod00 create').parameters[0].required

    records = exf.synthetic_telemetry(surface, n_records = 500, n_users = 20,
                                      seed = 3)
    assert len(records) == 500
    assert len({r.user_id for r in records}) <= 20
    for r in records:
        assert 'param-0' in r.parameters
        assert r.version == surface.version
    assert records == exf.synthetic_telemetry(surface, n_records = 500,
                                              n_users = 20, seed = 3)
