# -*- coding: utf-8 -*-
"""
Classifier predicts the value type of a command parameter from text.

Five raw text features describe a parameter: its name, the command
name, the module name and the descriptions of the parameter and of the
command. Text is normalized, stemmed and turned into bag-of-words
counts over a vocabulary in which the description features keep only
the tokens most associated with each type. A two-stage forest pipeline
first separates String parameters from the rest, then assigns one of
the fourteen remaining types.

"""

import os
import re
import logging
import unicodedata
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import pandas as pd
import scipy.sparse as sp
from nltk.stem.porter import PorterStemmer
from sklearn.feature_extraction.text import CountVectorizer
from sklearn.feature_selection import chi2
from sklearn.metrics import precision_recall_fscore_support
from sklearn.model_selection import StratifiedKFold

from .artifacts import read_json, write_json, write_report
from .exceptions import InputError, ValidationError
from .forest import Forest, Hyperparameters, train_forest
from .paramtype import NON_STRING_TYPES, ParamType

logger = logging.getLogger(__name__)

FEATURES = ('parameter_name', 'command_name', 'module_name',
            'parameter_description', 'command_description')
DESCRIPTION_FEATURES = ('parameter_description', 'command_description')

STRING = ParamType.String.value
NON_STRING = 'Non-String'
STAGE1_CLASSES = (STRING, NON_STRING)

REPORT_COLUMNS = ['Precision', 'Recall', 'F-1 Score', 'Support']
WEIGHTED_AVG = 'Weighted Avg.'

MODEL_FORMAT = 'exforge-type-predictor'
MODEL_VERSION = 1

_PUNCTUATION = re.compile(r'[^a-z0-9]+')
_stemmer = PorterStemmer()


@dataclass(frozen = True)
class LabeledParam:
    """
    LabeledParam

    Raw features of a parameter. ``label`` is None for parameters whose
    type is to be predicted.

    """

    parameter_name: str
    command_name: str
    module_name: str
    parameter_description: str = ''
    command_description: str = ''
    label: ParamType = None


@dataclass(frozen = True)
class FeatureVector:
    """Sparse counts: strictly increasing column indices, counts >= 1."""

    indices: tuple
    counts: tuple


### preprocessing ###

@lru_cache(maxsize = None)
def stop_words(csv_path = None):
    """
    Reads the stop word list.

    Parameters
    ----------
    csv_path : str (default None)
        csv with a ``word`` column. Defaults to the list shipped in
        ``exforge/data/stop_words.csv``.

    Returns
    -------
    frozenset of str

    """

    if csv_path is None:
        local_path = os.path.dirname(__file__)
        csv_path = os.path.join(local_path, 'data', 'stop_words.csv')
    words = pd.read_csv(csv_path, dtype = {'word': str})['word']
    return frozenset(w.strip().lower() for w in words)


@lru_cache(maxsize = 65536)
def _preprocess(text):
    text = unicodedata.normalize('NFKD', text)
    text = text.encode('ascii', 'ignore').decode('ascii').lower()
    stops = stop_words()
    return tuple(_stemmer.stem(t) for t in _PUNCTUATION.sub(' ', text).split()
                 if t not in stops)


def preprocess(text):
    """
    Tokens of a text.

    Text is lower cased, non ASCII characters and punctuation are
    removed, stop words are dropped and the Porter stemmer is applied.

    Parameters
    ----------
    text : str

    Returns
    -------
    list of str

    Example
    -------
    >>> import exforge as exf
    >>> exf.preprocess('Name of the Web App.')
    ['name', 'web', 'app']
    >>> exf.preprocess('Résumé files')
    ['resum', 'file']

    """

    if not text:
        return []
    return list(_preprocess(str(text)))


### vocabulary ###

class Vocabulary(object):
    """
    Vocabulary

    Token lists of the five feature segments. Columns are numbered
    segment after segment in :data:`FEATURES` order.

    Parameters
    ----------
    segments : dict
        feature name -> list of tokens

    """

    def __init__(self, segments):
        self.segments = {f: list(segments.get(f, [])) for f in FEATURES}
        self.offsets = {}
        self.index = {}
        offset = 0
        for f in FEATURES:
            self.offsets[f] = offset
            self.index[f] = {t: offset + i
                             for i, t in enumerate(self.segments[f])}
            offset += len(self.segments[f])
        self.width = offset

    def __len__(self):
        return self.width

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.segments == other.segments

    def to_dict(self):
        return dict(self.segments)

    @classmethod
    def from_dict(cls, data):
        return cls(data)


def _presence_matrix(texts):
    try:
        vectorizer = CountVectorizer(analyzer = preprocess, binary = True)
        matrix = vectorizer.fit_transform(texts)
    except ValueError:
        # no text holds a single token
        return None, []
    return matrix, list(vectorizer.get_feature_names_out())


def select_tokens(texts, labels, cap = 75):
    """
    Per class selection of the tokens most associated with the class.

    For every class, tokens are ranked by the chi-squared statistic of
    token presence against class membership. Tokens occurring more often
    in the class than expected rank before the others, ties are broken
    lexicographically and the first ``cap`` tokens are kept. The result is
    the union over classes.

    Parameters
    ----------
    texts : list of str
    labels : list of str
    cap : int (default 75)
        tokens kept per class

    Returns
    -------
    list of str
        sorted selected tokens

    """

    presence, tokens = _presence_matrix(texts)
    if presence is None:
        return []

    labels = np.asarray(labels)
    n = len(labels)
    total = np.asarray(presence.sum(axis = 0)).ravel()
    selected = set()
    for label in sorted(set(labels)):
        member = labels == label
        scores, _ = chi2(presence, member)
        scores = np.nan_to_num(scores, nan = 0.0)
        observed = np.asarray(presence[member].sum(axis = 0)).ravel()
        expected = total * member.sum() / float(n)
        positive = observed > expected
        ranked = sorted(range(len(tokens)),
                        key = lambda i: (not positive[i], -scores[i],
                                         tokens[i]))
        selected.update(tokens[i] for i in ranked[:cap])
    return sorted(selected)


def build_vocabulary(train, cap = 75):
    """
    Builds the vocabulary of a training set.

    Name features keep every token seen. Description features keep, per
    type, the ``cap`` tokens with the strongest chi-squared association
    with that type.

    Parameters
    ----------
    train : list of :class:`LabeledParam`
    cap : int (default 75)

    Returns
    -------
    :class:`Vocabulary`

    Raises
    ------
    ValidationError
        If train is empty or holds an unlabeled row

    """

    if len(train) == 0:
        raise ValidationError('cannot build a vocabulary from an empty '
                              'training set')
    if any(p.label is None for p in train):
        raise ValidationError('every training row needs a label')

    labels = [p.label.value for p in train]
    segments = {}
    for f in FEATURES:
        texts = [getattr(p, f) for p in train]
        if f in DESCRIPTION_FEATURES:
            segments[f] = select_tokens(texts, labels, cap = cap)
        else:
            segments[f] = sorted({t for text in texts
                                  for t in preprocess(text)})
    vocabulary = Vocabulary(segments)
    logger.info('vocabulary of %i tokens (%s)', len(vocabulary),
                ', '.join('%s %i' % (f, len(segments[f])) for f in FEATURES))
    return vocabulary


### featurization ###

def featurize(p, vocabulary):
    """
    Bag-of-words vector of a parameter.

    Out of vocabulary tokens are dropped.

    Parameters
    ----------
    p : :class:`LabeledParam`
    vocabulary : :class:`Vocabulary`

    Returns
    -------
    :class:`FeatureVector`

    """

    counts = Counter()
    for f in FEATURES:
        index = vocabulary.index[f]
        for token in preprocess(getattr(p, f)):
            if token in index:
                counts[index[token]] += 1
    indices = tuple(sorted(counts))
    return FeatureVector(indices = indices,
                         counts = tuple(counts[i] for i in indices))


def featurize_matrix(params, vocabulary):
    """Sparse count matrix of many parameters, one row each."""

    blocks = []
    for f in FEATURES:
        tokens = vocabulary.segments[f]
        if not tokens:
            blocks.append(sp.csr_matrix((len(params), 0), dtype = np.int64))
            continue
        vectorizer = CountVectorizer(analyzer = preprocess,
                                     vocabulary = tokens)
        blocks.append(vectorizer.transform([getattr(p, f) for p in params]))
    return sp.hstack(blocks, format = 'csr')


### two-stage predictor ###

@dataclass
class TypePredictor:
    """
    TypePredictor

    Attributes
    ----------
    vocabulary : :class:`Vocabulary`
    stage1 : :class:`exforge.forest.Forest`
        String against Non-String
    stage2 : :class:`exforge.forest.Forest`
        the fourteen non string types
    seed : int
    cap : int

    """

    vocabulary: Vocabulary
    stage1: Forest
    stage2: Forest
    seed: int = 0
    cap: int = 75

    @property
    def hyperparameters(self):
        return self.stage1.hyperparameters


def _stage1_label(label):
    return STRING if label is ParamType.String else NON_STRING


def check_two_stage_data(train):
    """
    Raises ValidationError unless train holds String rows and at least two
    non string types.
    """

    labels = {p.label for p in train}
    if None in labels:
        raise ValidationError('every training row needs a label')
    if ParamType.String not in labels:
        raise ValidationError('training data holds no String parameters')
    non_string = labels - {ParamType.String}
    if len(non_string) < 2:
        raise ValidationError('training data needs at least 2 non string '
                              'types, got %s'
                              % ', '.join(t.value for t in non_string))


def train_two_stage(train, hp = None, seed = 0, cap = 75):
    """
    Trains the two-stage type predictor.

    Parameters
    ----------
    train : list of :class:`LabeledParam`
        labeled parameters
    hp : :class:`exforge.Hyperparameters` (default None)
        forest hyperparameters of both stages
    seed : int (default 0)
    cap : int (default 75)
        description tokens kept per type

    Returns
    -------
    :class:`TypePredictor`

    Raises
    ------
    ValidationError
        If train has no String row or fewer than two non string types

    Example
    -------
    >>> import exforge as exf
    >>> train = exf.synthetic_labeled_params(seed = 0)
    >>> tp = exf.train_two_stage(train, exf.hyperparameters_from_csv('fast'))
    >>> label, confidence = exf.predict_type(tp, exf.LabeledParam(
    ...     'ip-address', 'vm create', 'vm', 'IP address of the host'))

    """

    check_two_stage_data(train)
    if hp is None:
        hp = Hyperparameters()

    vocabulary = build_vocabulary(train, cap = cap)
    X = featurize_matrix(train, vocabulary)

    stage1 = train_forest(X, [_stage1_label(p.label) for p in train], hp,
                          seed = seed, classes = STAGE1_CLASSES,
                          n_features = len(vocabulary))

    rows = [i for i, p in enumerate(train) if p.label is not ParamType.String]
    stage2 = train_forest(X[rows], [train[i].label.value for i in rows], hp,
                          seed = seed,
                          classes = [t.value for t in NON_STRING_TYPES],
                          n_features = len(vocabulary))

    logger.info('trained two-stage predictor: stage1 on %i rows, stage2 on '
                '%i rows', len(train), len(rows))
    return TypePredictor(vocabulary, stage1, stage2, seed = seed, cap = cap)


def predict_types(tp, params):
    """
    Predicts many parameters.

    Returns
    -------
    list of (:class:`exforge.ParamType`, float)

    """

    if len(params) == 0:
        return []
    X = featurize_matrix(params, tp.vocabulary)
    p1 = tp.stage1.predict_proba(X)
    p2 = tp.stage2.predict_proba(X)
    string_column = tp.stage1.classes.index(STRING)

    predictions = []
    for row in range(len(params)):
        choice = int(np.argmax(p1[row]))
        if tp.stage1.classes[choice] == STRING:
            predictions.append((ParamType.String,
                                float(p1[row, string_column])))
            continue
        fine = int(np.argmax(p2[row]))
        label = ParamType.parse(tp.stage2.classes[fine])
        assert label is not ParamType.String
        predictions.append((label, float(p1[row, choice] * p2[row, fine])))
    return predictions


def predict_type(tp, p):
    """
    Predicts the type of one parameter.

    Parameters
    ----------
    tp : :class:`TypePredictor`
    p : :class:`LabeledParam`
        label is ignored

    Returns
    -------
    type : :class:`exforge.ParamType`
    confidence : float
        P(String) for String, otherwise P(Non-String) times the stage2
        probability of the type

    """

    return predict_types(tp, [p])[0]


def train_single_stage(train, hp = None, seed = 0, cap = 75):
    """
    Trains one forest over all fifteen types.

    Returns
    -------
    vocabulary : :class:`Vocabulary`
    forest : :class:`exforge.forest.Forest`

    """

    if hp is None:
        hp = Hyperparameters()
    vocabulary = build_vocabulary(train, cap = cap)
    X = featurize_matrix(train, vocabulary)
    forest = train_forest(X, [p.label.value for p in train], hp, seed = seed,
                          classes = [t.value for t in ParamType],
                          n_features = len(vocabulary))
    return vocabulary, forest


### cross validation ###

@dataclass
class CVReport:
    """
    CVReport

    Attributes
    ----------
    stage1 : pandas.DataFrame or None
        String against Non-String
    stage2 : pandas.DataFrame or None
        non string types, over rows whose true type is not String
    pipeline : pandas.DataFrame
        end to end types
    unsupported : list of str
        types with fewer rows than folds, excluded from the evaluation
    seed : int
        seed of the fold assignment and the forests

    """

    stage1: pd.DataFrame
    stage2: pd.DataFrame
    pipeline: pd.DataFrame
    unsupported: list
    seed: int = 0


def classification_table(y_true, y_pred, labels):
    """
    Per class precision, recall, F-1 score and support.

    Returns
    -------
    pandas.DataFrame
        indexed by class with a final ``Weighted Avg.`` row

    """

    precision, recall, f1, support = precision_recall_fscore_support(
        y_true, y_pred, labels = labels, zero_division = 0)
    table = pd.DataFrame({'Precision': precision, 'Recall': recall,
                          'F-1 Score': f1, 'Support': support},
                         index = list(labels), columns = REPORT_COLUMNS)

    avg = precision_recall_fscore_support(y_true, y_pred, labels = labels,
                                          average = 'weighted',
                                          zero_division = 0)
    table.loc[WEIGHTED_AVG] = [avg[0], avg[1], avg[2], int(support.sum())]
    table['Support'] = table['Support'].astype(int)
    return table


def weighted_f1(table, labels = None):
    """
    Support weighted F-1 score over some classes of a report table.

    Parameters
    ----------
    table : pandas.DataFrame
        table from :func:`classification_table`
    labels : list of str (default None)
        classes to average, all classes when None

    """

    rows = table.drop(index = WEIGHTED_AVG, errors = 'ignore')
    if labels is not None:
        rows = rows.loc[[l for l in labels if l in rows.index]]
    total = rows['Support'].sum()
    if total == 0:
        return 0.0
    return float((rows['F-1 Score'] * rows['Support']).sum() / total)


def _ordered(labels):
    return sorted(set(labels), key = ParamType.order)


def cross_validate(data, folds = 3, hp = None, seed = 0, cap = 75,
                   two_stage = True):
    """
    Stratified cross validation of the type predictor.

    Predictions of every held out fold are pooled before the metrics are
    computed.

    Parameters
    ----------
    data : list of :class:`LabeledParam`
    folds : int (default 3)
    hp : :class:`exforge.Hyperparameters` (default None)
    seed : int (default 0)
        seeds the fold assignment and every forest
    cap : int (default 75)
    two_stage : bool (default True)
        False evaluates a single forest over all fifteen types; the
        report then has no stage tables

    Returns
    -------
    :class:`CVReport`

    Raises
    ------
    ValidationError
        If too few rows remain once unsupported types are excluded

    Example
    -------
    >>> import exforge as exf
    >>> data = exf.synthetic_labeled_params(seed = 0)
    >>> report = exf.cross_validate(data, hp = exf.hyperparameters_from_csv(
    ...                             'fast'))
    >>> report.stage1.loc['Weighted Avg.', 'F-1 Score']

    """

    if folds < 2:
        raise ValidationError('folds must be at least 2, got %s' % folds)
    if any(p.label is None for p in data):
        raise ValidationError('every row needs a label')

    counts = Counter(p.label.value for p in data)
    unsupported = _ordered(l for l, c in counts.items() if c < folds)
    if unsupported:
        logger.warning('types with fewer than %i rows are excluded: %s',
                       folds, ', '.join(unsupported))
    data = [p for p in data if p.label.value not in unsupported]
    if len(data) < folds or len({p.label for p in data}) < 2:
        raise ValidationError('too few rows for %i-fold cross validation'
                              % folds)
    if two_stage:
        check_two_stage_data(data)

    y = np.array([p.label.value for p in data])
    splitter = StratifiedKFold(n_splits = folds, shuffle = True,
                               random_state = seed)
    predicted = np.empty(len(data), dtype = object)
    routed = np.empty(len(data), dtype = object)
    fine = np.empty(len(data), dtype = object)

    for number, (train_idx, test_idx) in enumerate(splitter.split(y, y), 1):
        train = [data[i] for i in train_idx]
        test = [data[i] for i in test_idx]
        if two_stage:
            tp = train_two_stage(train, hp, seed = seed, cap = cap)
            X = featurize_matrix(test, tp.vocabulary)
            routed[test_idx] = tp.stage1.predict_labels(X)
            fine[test_idx] = tp.stage2.predict_labels(X)
            predicted[test_idx] = [t.value for t, _ in predict_types(tp,
                                                                     test)]
        else:
            vocabulary, forest = train_single_stage(train, hp, seed = seed,
                                                    cap = cap)
            X = featurize_matrix(test, vocabulary)
            predicted[test_idx] = forest.predict_labels(X)
        logger.info('fold %i of %i done', number, folds)

    labels = _ordered(y)
    pipeline = classification_table(y, list(predicted), labels)
    if not two_stage:
        return CVReport(None, None, pipeline, unsupported, seed)

    y1 = [STRING if label == STRING else NON_STRING for label in y]
    stage1 = classification_table(y1, list(routed), list(STAGE1_CLASSES))

    non_string = y != STRING
    stage2 = classification_table(y[non_string], list(fine[non_string]),
                                  [l for l in labels if l != STRING])
    return CVReport(stage1, stage2, pipeline, unsupported, seed)


def write_cv_report(report, directory):
    """Writes the report tables as csv files into directory."""

    tables = {'cv_stage1': report.stage1, 'cv_stage2': report.stage2,
              'cv_pipeline': report.pipeline}
    for name, table in tables.items():
        if table is not None:
            write_report(os.path.join(directory, '%s.csv' % name),
                         table.to_csv(float_format = '%.4f'),
                         report.seed)


### labeled data ###

def labeled_params_from_surface(surface):
    """Training rows of every surface parameter with a labeled type."""

    rows = []
    for c in surface.commands:
        for p in c.parameters:
            if p.labeled_type is not None:
                rows.append(param_context(c, p, label = p.labeled_type))
    return rows


def param_context(command, parameter, label = None):
    """Raw features of a surface parameter."""
    return LabeledParam(parameter_name = parameter.name,
                        command_name = command.name,
                        module_name = command.module,
                        parameter_description = parameter.description,
                        command_description = command.description,
                        label = label)


def read_labeled_params(csv_path):
    """
    Reads labeled parameters from a csv file.

    Note
    -----
    Format for csv:
    ::

        parameter_name,command_name,module_name,parameter_description,command_description,label
        ip-address,vm create,vm,IP address of the host.,Create a VM.,IPAddress

    Raises
    ------
    InputError
        If the file cannot be read
    ValidationError
        On missing columns or an invalid label

    """

    try:
        df = pd.read_csv(csv_path, dtype = str, keep_default_na = False)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise InputError('cannot read labeled parameters %s: %s'
                         % (csv_path, e))

    missing = (set(FEATURES) | {'label'}) - set(df.columns)
    if missing:
        raise ValidationError('%s lacks columns %s'
                              % (csv_path, ', '.join(sorted(missing))))

    rows = []
    for number, row in enumerate(df.itertuples(index = False), 2):
        try:
            label = ParamType.parse(row.label)
        except ValueError as e:
            raise ValidationError('%s line %i: %s' % (csv_path, number, e))
        rows.append(LabeledParam(**{f: getattr(row, f) for f in FEATURES},
                                 label = label))
    return rows


def write_labeled_params(params, csv_path):
    df = pd.DataFrame([{**{f: getattr(p, f) for f in FEATURES},
                        'label': p.label.value} for p in params],
                      columns = list(FEATURES) + ['label'])
    df.to_csv(csv_path, index = False)


### persistence ###

def save_predictor(tp, path, meta = None):
    """Writes a predictor as a versioned JSON document."""

    write_json(path, {'format': MODEL_FORMAT, 'format_version': MODEL_VERSION,
                      'seed': tp.seed, 'cap': tp.cap,
                      'vocabulary': tp.vocabulary.to_dict(),
                      'stage1': tp.stage1.to_dict(),
                      'stage2': tp.stage2.to_dict()}, meta = meta)


def load_predictor(path):
    """
    Reads a predictor written by :func:`save_predictor`.

    Raises
    ------
    ValidationError
        If the file is not a predictor of a supported version

    """

    data = read_json(path)
    if not isinstance(data, dict) or data.get('format') != MODEL_FORMAT:
        raise ValidationError('%s is not a type predictor' % path)
    if data.get('format_version') != MODEL_VERSION:
        raise ValidationError('%s has unsupported predictor version %s'
                              % (path, data.get('format_version')))
    return TypePredictor(Vocabulary.from_dict(data['vocabulary']),
                         Forest.from_dict(data['stage1']),
                         Forest.from_dict(data['stage2']),
                         seed = data['seed'], cap = data['cap'])
