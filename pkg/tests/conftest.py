# -*- coding: utf-8 -*-
"""Shared fixtures: the shipped surface, a small predictor and the mined corpus."""

import pytest

import exforge as exf

CURRENT_VERSION = '2.40.0'


@pytest.fixture(scope = 'session')
def surface():
    return exf.surface_data('az')


@pytest.fixture(scope = 'session')
def fast_hp():
    return exf.Hyperparameters(tree_count = 10, max_depth = 10,
                               min_samples_leaf = 1)


@pytest.fixture(scope = 'session')
def labeled(surface):
    return (exf.labeled_params_from_surface(surface)
            + exf.read_labeled_params(exf.fixture_path('labeled')))


@pytest.fixture(scope = 'session')
def predictor(labeled, fast_hp):
    return exf.train_two_stage(labeled, fast_hp, seed = 0)


@pytest.fixture(scope = 'session')
def mined(surface):
    docs = exf.load_corpus(exf.fixture_path('corpus'))
    return exf.mine_corpus(docs, surface)


@pytest.fixture(scope = 'session')
def lookup(mined):
    return exf.build_lookup(mined.examples)


@pytest.fixture(scope = 'session')
def ingested():
    return exf.ingest(exf.fixture_path('telemetry'), CURRENT_VERSION)


@pytest.fixture(scope = 'session')
def templates(ingested, surface):
    return exf.build_templates(exf.aggregate(ingested.records), surface, k = 3)


@pytest.fixture(scope = 'session')
def human(surface):
    return exf.load_human_examples(exf.fixture_path('human_examples'),
                                   surface)
