# -*- coding: utf-8 -*-
"""
Forest is a random forest classifier written on numpy.

Trees are CART trees grown on bootstrap samples with Gini impurity
splits over a random subset of features at every node. A forest
predicts by majority vote and reports vote fractions as class
probabilities. Given the same data, hyperparameters and seed, training
returns the same forest whatever the order of the training rows.

"""

import os
import logging
from dataclasses import asdict, dataclass

import numpy as np
import pandas as pd
import scipy.sparse as sp
from joblib import Parallel, delayed

from .exceptions import ConfigError, ValidationError

logger = logging.getLogger(__name__)

LEAF = -1


@dataclass(frozen = True)
class Hyperparameters:
    """
    Hyperparameters

    Attributes
    ----------
    tree_count : int (default 100)
        number of trees
    max_depth : int (default 16)
        depth limit of every tree, the root has depth 0
    min_samples_leaf : int (default 2)
        smallest number of bootstrap rows in a leaf
    max_features : str or float (default 'sqrt')
        features examined per split: ``sqrt`` of the feature count or a
        fraction of it
    n_jobs : int (default 1)
        parallel tree builders, -1 for every core

    """

    tree_count: int = 100
    max_depth: int = 16
    min_samples_leaf: int = 2
    max_features: object = 'sqrt'
    n_jobs: int = 1

    def __post_init__(self):
        if self.tree_count < 1:
            raise ConfigError('tree_count must be at least 1')
        if self.max_depth < 0:
            raise ConfigError('max_depth must not be negative')
        if self.min_samples_leaf < 1:
            raise ConfigError('min_samples_leaf must be at least 1')
        if self.max_features != 'sqrt':
            try:
                fraction = float(self.max_features)
            except (TypeError, ValueError):
                raise ConfigError('%s is not a valid max_features'
                                  % self.max_features)
            if not 0 < fraction <= 1:
                raise ConfigError('max_features fraction must be in (0, 1]')
            object.__setattr__(self, 'max_features', fraction)

    def features_per_split(self, n_features):
        if self.max_features == 'sqrt':
            m = int(np.sqrt(n_features))
        else:
            m = int(round(self.max_features * n_features))
        return min(max(m, 1), max(n_features, 1))


def hyperparameters_from_csv(name = 'default', csv_path = None, **overrides):
    """
    Reads a hyperparameter preset from a csv file.

    Parameters
    ----------
    name : str (default 'default')
        preset name, the ``name`` column of the file
    csv_path : str (default None)
        path to csv file to read. Defaults to the presets shipped in
        ``exforge/data/hyperparameters.csv``.
    overrides : kwargs
        fields replacing preset values, e.g. ``n_jobs = 4``

    Note
    -----
    Format for csv:
    ::

        name,tree_count,max_depth,min_samples_leaf,max_features
        default,100,16,2,sqrt
        fast,20,12,1,sqrt

    Returns
    -------
    :class:`Hyperparameters`

    Example
    -------
    >>> import exforge as exf
    >>> hp = exf.hyperparameters_from_csv('fast', n_jobs = 2)

    """

    if csv_path is None:
        local_path = os.path.dirname(__file__)
        csv_path = os.path.join(local_path, 'data', 'hyperparameters.csv')

    param_df = pd.read_csv(csv_path, dtype = {'name': str,
                                              'max_features': str})
    param_df = param_df.set_index('name')
    presets = param_df.to_dict(orient = 'index')

    if name not in presets:
        raise ConfigError('%s is not a valid hyperparameter preset. '
                          'Choose one of %s' % (name, ', '.join(presets)))

    preset = presets[name]
    values = {'tree_count': int(preset['tree_count']),
              'max_depth': int(preset['max_depth']),
              'min_samples_leaf': int(preset['min_samples_leaf']),
              'max_features': preset['max_features']}
    values.update(overrides)
    return Hyperparameters(**values)


### matrix helpers ###

def as_matrix(X, n_features = None):
    """
    Dense float matrix from a matrix, sparse matrix or feature vectors.

    Feature vectors are objects with ``indices`` and ``counts``.

    """

    if sp.issparse(X):
        return np.ascontiguousarray(X.toarray(), dtype = np.float64)
    if isinstance(X, (list, tuple)) and X and hasattr(X[0], 'indices'):
        if n_features is None:
            raise ValidationError('n_features is required for feature '
                                  'vectors')
        dense = np.zeros((len(X), n_features), dtype = np.float64)
        for row, x in enumerate(X):
            dense[row, list(x.indices)] = list(x.counts)
        return dense
    if hasattr(X, 'indices') and hasattr(X, 'counts'):
        return as_matrix([X], n_features)
    dense = np.asarray(X, dtype = np.float64)
    if dense.ndim == 1:
        dense = dense.reshape(1, -1)
    return np.ascontiguousarray(dense)


### tree growing ###

def _best_split(X, Y, rows, features, min_leaf):
    """
    Best Gini split of rows over the given features.

    Returns (score, feature, threshold) with the largest score, or None.
    The score is the sum over both children of squared class counts
    divided by child size, which is maximal where weighted Gini impurity
    is minimal.
    """

    n = len(rows)
    values = X[np.ix_(rows, features)]
    order = np.argsort(values, axis = 0, kind = 'stable')
    sorted_values = np.take_along_axis(values, order, axis = 0)
    labels = Y[rows]

    # (n, f, C) class counts left of each cut
    left = np.cumsum(labels[order], axis = 0)
    total = left[-1]

    n_left = np.arange(1, n + 1, dtype = np.float64)[:, None]
    n_right = n - n_left

    valid = np.zeros((n, len(features)), dtype = bool)
    valid[:-1] = sorted_values[:-1] < sorted_values[1:]
    valid &= (n_left >= min_leaf) & (n_right >= min_leaf)
    if not valid.any():
        return None

    right = total[None, :, :] - left
    with np.errstate(divide = 'ignore', invalid = 'ignore'):
        score = ((left ** 2).sum(axis = 2) / n_left
                 + (right ** 2).sum(axis = 2) / np.where(n_right > 0,
                                                         n_right, 1))
    score = np.where(valid, score, -np.inf)

    cut, column = np.unravel_index(np.argmax(score), score.shape)
    threshold = (sorted_values[cut, column]
                 + sorted_values[cut + 1, column]) / 2.0
    return score[cut, column], int(features[column]), float(threshold)


def _candidate_features(X, rows, m, rng):
    """Up to m features that are not constant over rows."""

    n_features = X.shape[1]
    permutation = rng.permutation(n_features)
    chosen = []
    for start in range(0, n_features, m):
        chunk = permutation[start:start + m]
        block = X[np.ix_(rows, chunk)]
        varying = chunk[block.max(axis = 0) > block.min(axis = 0)]
        chosen.extend(varying[:m - len(chosen)].tolist())
        if len(chosen) >= m:
            break
    return np.array(chosen, dtype = np.int64)


def grow_tree(X, y, n_classes, hp, seed):
    """
    Grows one tree on a bootstrap sample drawn with ``seed``.

    Returns
    -------
    dict
        flat node arrays ``feature``, ``threshold``, ``left``, ``right``
        and ``counts``; leaves have feature -1

    """

    rng = np.random.default_rng(seed)
    n = X.shape[0]
    sample = rng.integers(0, n, size = n)
    Y = np.eye(n_classes, dtype = np.int64)[y]
    m = hp.features_per_split(X.shape[1])

    feature, threshold, left, right, counts = [], [], [], [], []

    def new_node(rows):
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        counts.append(Y[rows].sum(axis = 0))
        return len(feature) - 1

    stack = [(new_node(sample), sample, 0)]
    while stack:
        node, rows, depth = stack.pop()
        if (depth >= hp.max_depth or len(rows) < 2 * hp.min_samples_leaf
                or np.count_nonzero(counts[node]) < 2):
            continue
        features = _candidate_features(X, rows, m, rng)
        if len(features) == 0:
            continue
        split = _best_split(X, Y, rows, features, hp.min_samples_leaf)
        if split is None:
            continue
        _, f, t = split
        goes_left = X[rows, f] <= t
        feature[node] = f
        threshold[node] = t
        left[node] = new_node(rows[goes_left])
        right[node] = new_node(rows[~goes_left])
        stack.append((right[node], rows[~goes_left], depth + 1))
        stack.append((left[node], rows[goes_left], depth + 1))

    return {'feature': np.array(feature, dtype = np.int64),
            'threshold': np.array(threshold, dtype = np.float64),
            'left': np.array(left, dtype = np.int64),
            'right': np.array(right, dtype = np.int64),
            'counts': np.array(counts, dtype = np.int64).reshape(-1,
                                                                 n_classes)}


def _leaves(tree, X):
    node = np.zeros(X.shape[0], dtype = np.int64)
    active = tree['feature'][node] != LEAF
    while active.any():
        rows = np.nonzero(active)[0]
        current = node[rows]
        f = tree['feature'][current]
        go_left = X[rows, f] <= tree['threshold'][current]
        node[rows] = np.where(go_left, tree['left'][current],
                              tree['right'][current])
        active = tree['feature'][node] != LEAF
    return node


class Forest(object):
    """
    Forest

    A trained ensemble. Built by :func:`train_forest`.

    Parameters
    ----------
    classes : list of str
        labels in tie-breaking order
    trees : list of dict
        node arrays, see :func:`grow_tree`
    hyperparameters : :class:`Hyperparameters`
    seed : int
    n_features : int
        width of the training matrix

    """

    def __init__(self, classes, trees, hyperparameters, seed, n_features):
        self.classes = list(classes)
        self.trees = trees
        self.hyperparameters = hyperparameters
        self.seed = seed
        self.n_features = n_features

    def __repr__(self):
        return 'Forest(%i trees, classes=%s)' % (len(self.trees),
                                                 self.classes)

    def votes(self, X):
        """Votes per class, shape (rows, classes)."""

        X = as_matrix(X, self.n_features)
        if X.shape[1] != self.n_features:
            raise ValidationError('expected %i features, got %i'
                                  % (self.n_features, X.shape[1]))
        votes = np.zeros((X.shape[0], len(self.classes)), dtype = np.int64)
        rows = np.arange(X.shape[0])
        for tree in self.trees:
            leaf_counts = tree['counts'][_leaves(tree, X)]
            votes[rows, np.argmax(leaf_counts, axis = 1)] += 1
        return votes

    def predict_proba(self, X):
        """Vote fractions, shape (rows, classes); rows sum to 1."""
        return self.votes(X) / float(len(self.trees))

    def predict_labels(self, X):
        """Majority label per row; ties go to the earlier class."""
        votes = self.votes(X)
        return [self.classes[i] for i in np.argmax(votes, axis = 1)]

    def predict(self, x):
        """
        Label and probability distribution of one feature vector.

        Returns
        -------
        label : str
        probabilities : dict
            class -> vote fraction

        """

        proba = self.predict_proba(x)[0]
        label = self.classes[int(np.argmax(proba))]
        return label, {c: float(p) for c, p in zip(self.classes, proba)}

    def to_dict(self):
        return {'classes': self.classes,
                'hyperparameters': asdict(self.hyperparameters),
                'seed': self.seed,
                'n_features': self.n_features,
                'trees': [{key: value.tolist() for key, value in t.items()}
                          for t in self.trees]}

    @classmethod
    def from_dict(cls, data):
        n_classes = len(data['classes'])
        trees = []
        for t in data['trees']:
            trees.append({
                'feature': np.array(t['feature'], dtype = np.int64),
                'threshold': np.array(t['threshold'], dtype = np.float64),
                'left': np.array(t['left'], dtype = np.int64),
                'right': np.array(t['right'], dtype = np.int64),
                'counts': np.array(t['counts'],
                                   dtype = np.int64).reshape(-1, n_classes)})
        return cls(data['classes'], trees,
                   Hyperparameters(**data['hyperparameters']),
                   data['seed'], int(data['n_features']))


def canonical_order(X, y):
    """Row permutation sorting rows by their bytes, then label."""
    keys = [(X[i].tobytes(), str(y[i])) for i in range(X.shape[0])]
    return sorted(range(X.shape[0]), key = lambda i: keys[i])


def train_forest(X, y, hp = None, seed = 0, classes = None,
                 n_features = None):
    """
    Trains a random forest.

    Rows are sorted canonically before bootstrapping, so permuting the
    training rows does not change the forest. Tree i is grown with seed
    ``seed + i`` and trees are grown in parallel with joblib.

    Parameters
    ----------
    X : array-like, sparse matrix or list of feature vectors
        training features
    y : list of str
        labels
    hp : :class:`Hyperparameters` (default None)
        defaults to ``Hyperparameters()``
    seed : int (default 0)
    classes : list of str (default None)
        class order used to break ties; defaults to the sorted labels
    n_features : int (default None)
        feature width; defaults to the width of X, or one past the largest
        index of feature vectors

    Returns
    -------
    :class:`Forest`

    Raises
    ------
    ValidationError
        If X and y differ in length, fewer than two rows are given, a
        label is not in classes or X does not fit n_features

    Example
    -------
    >>> import exforge as exf
    >>> forest = exf.train_forest([[0.], [1.], [5.], [6.]],
    ...                           ['a', 'a', 'b', 'b'])
    >>> forest.predict([5.5])[0]
    'b'

    """

    if hp is None:
        hp = Hyperparameters()
    y = [str(label) for label in y]
    if classes is None:
        classes = sorted(set(y))
    classes = [str(c) for c in classes]
    if isinstance(X, (list, tuple)) and X and hasattr(X[0], 'indices'):
        widest = 1 + max([max(x.indices, default = -1) for x in X])
        if n_features is None:
            n_features = widest
        elif widest > n_features:
            raise ValidationError('feature index %i is out of range for %i '
                                  'features' % (widest - 1, n_features))
    X = as_matrix(X, n_features)
    if n_features is not None and X.shape[1] != n_features:
        raise ValidationError('expected %i features, got %i'
                              % (n_features, X.shape[1]))

    if X.shape[0] != len(y):
        raise ValidationError('%i feature rows but %i labels'
                              % (X.shape[0], len(y)))
    if len(y) < 2:
        raise ValidationError('at least 2 training rows are required, got %i'
                              % len(y))
    unknown = set(y) - set(classes)
    if unknown:
        raise ValidationError('labels %s are not in classes'
                              % ', '.join(sorted(unknown)))
    if len(set(y)) < 2:
        logger.warning('training data holds the single class %s; the forest '
                       'always predicts it', y[0])

    order = canonical_order(X, y)
    X = X[order]
    codes = np.array([classes.index(y[i]) for i in order], dtype = np.int64)

    trees = Parallel(n_jobs = hp.n_jobs)(
        delayed(grow_tree)(X, codes, len(classes), hp, seed + i)
        for i in range(hp.tree_count))

    logger.debug('trained %i trees on %i rows x %i features',
                 len(trees), X.shape[0], X.shape[1])
    return Forest(classes, trees, hp, seed, X.shape[1])


def predict(forest, x):
    """
    Predicts one feature vector.

    Returns
    -------
    label : str
        class with most votes, ties broken by class order
    probabilities : dict
        vote fraction per class

    """

    return forest.predict(x)


def predict_proba(forest, X):
    """Vote fractions for every row of X, see :meth:`Forest.predict_proba`."""
    return forest.predict_proba(X)
