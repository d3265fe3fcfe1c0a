# -*- coding: utf-8 -*-
"""
Command line interface.

Every subcommand reads its inputs from the configuration and from the
output directory and writes its results into the output directory.
``pipeline`` runs templates, mine, train-typer, fill and render in order
and writes ``manifest.json``, the only file holding a timestamp.

"""

import os
import sys
import hashlib
import logging
import argparse
import platform
from datetime import datetime, timedelta, timezone

import numpy as np

from . import __version__
from .artifacts import (artifact_header, artifact_meta, write_json,
                        write_report, write_text_atomic)
from .augment import (build_finetune_dataset, build_pretraining_dataset,
                      example_tokens, train_cooccurrence, write_cooccurrence,
                      write_dataset)
from .classifier import (cross_validate, labeled_params_from_surface,
                         load_predictor, read_labeled_params, save_predictor,
                         train_two_stage, write_cv_report)
from .config import load_config
from .emit import (diff_documents, load_human_examples, render_group_doc,
                   render_help, update_doc)
from .exceptions import ExforgeError, InputError
from .filler import (HybridFiller, TypedLookupFiller, fill_all, read_filled,
                     write_filled)
from .metrics import (coverage, format_coverage, help_success,
                      help_success_frame, placeholder_summary, rouge_corpus,
                      sessionize)
from .miner import (FLAG_VALUE, POSITIONAL, MinedExample, build_lookup,
                    load_corpus, mine_corpus, read_lookup, read_mined,
                    write_lookup, write_mined)
from .surface import load_surface
from .telemetry import (ExampleTemplate, aggregate, build_templates, ingest,
                        placeholder, read_records, read_templates,
                        write_templates)

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'

SUBCOMMANDS = ('templates', 'mine', 'train-typer', 'fill', 'datasets',
               'render', 'evaluate', 'pipeline')
PIPELINE_STAGES = ('templates', 'mine', 'train-typer', 'fill', 'render')

TEMPLATES = 'templates.jsonl'
MINED = 'mined.jsonl'
LOOKUP = 'lookup.json'
TYPER = 'typer.json'
COOCCURRENCE = 'cooccurrence.json'
FILLED = 'filled.jsonl'
MANIFEST = 'manifest.json'

INPUT_KEYS = ('surface', 'telemetry', 'corpus', 'manifest', 'docs',
              'human_examples', 'labeled')


class ArgumentParser(argparse.ArgumentParser):
    """Parser whose usage errors exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, '%s: error: %s\n' % (self.prog, message))


### helpers ###

def _out(config, *parts):
    return os.path.join(config.output, *parts)


def _meta(config, **extra):
    return artifact_meta(config.seed, **extra)


def _surface(config):
    config.require('surface')
    return load_surface(config.surface)


def _human_examples(config, surface):
    if config.human_examples is None:
        logger.info('no human examples configured')
        return []
    config.require('human_examples')
    return load_human_examples(config.human_examples, surface)


def _training_rows(config, surface):
    rows = labeled_params_from_surface(surface)
    if config.labeled is not None:
        config.require('labeled')
        rows += read_labeled_params(config.labeled)
    return rows


def _make_filler(config, surface, lookup = None, model = None,
                 predictor = None):
    if config.backend == 'cooccurrence':
        return model
    typed = TypedLookupFiller(surface, predictor, lookup,
                              min_confidence = config.min_confidence,
                              name_style = config.name_style)
    if config.backend == 'hybrid':
        return HybridFiller(model, typed)
    return typed


def _help_file(command):
    return '%s.txt' % command.replace(' ', '-')


def _write_frame(config, path, frame, **kwargs):
    write_report(path, frame.to_csv(**kwargs), config.seed)


### subcommands ###

def run_templates(config):
    """Telemetry to ranked templates."""

    config.require('telemetry')
    surface = _surface(config)
    version = config.current_version or surface.version
    result = ingest(config.telemetry, version)
    templates = build_templates(aggregate(result.records), surface,
                                k = config.k)
    write_templates(templates, _out(config, TEMPLATES), surface.prefix,
                    meta = _meta(config, k = config.k,
                                 current_version = version))
    return {'records': len(result.records), 'malformed': result.malformed,
            'privacy_violations': result.privacy_violations,
            'templates': len(templates)}


def run_mine(config):
    """Corpus to mined examples and value lookup."""

    config.require('corpus')
    surface = _surface(config)
    docs = load_corpus(config.corpus, config.manifest)
    result = mine_corpus(docs, surface)
    write_mined(result.examples, _out(config, MINED), meta = _meta(config))
    lookup = build_lookup(result.examples)
    write_lookup(lookup, _out(config, LOOKUP), meta = _meta(config))
    return {'documents': len(docs), 'blocks': result.blocks,
            'mined': len(result.examples),
            'rejected': sum(result.rejected.values()),
            'dropped': sum(result.dropped.values())}


def run_train_typer(config):
    """Labeled parameters to the two-stage type predictor."""

    surface = _surface(config)
    rows = _training_rows(config, surface)
    predictor = train_two_stage(rows, config.forest_hyperparameters(),
                                seed = config.seed, cap = config.cap)
    save_predictor(predictor, _out(config, TYPER), meta = _meta(config))
    return {'labeled': len(rows), 'vocabulary': len(predictor.vocabulary)}


def run_fill(config):
    """Templates to filled examples with the configured backend."""

    surface = _surface(config)
    templates = read_templates(_out(config, TEMPLATES))

    lookup = model = predictor = None
    if config.backend != 'typed-lookup':
        model = train_cooccurrence(read_mined(_out(config, MINED)))
        write_cooccurrence(model, _out(config, COOCCURRENCE),
                           meta = _meta(config))
    if config.backend != 'cooccurrence':
        lookup = read_lookup(_out(config, LOOKUP))
        predictor = load_predictor(_out(config, TYPER))

    filler = _make_filler(config, surface, lookup, model, predictor)
    filled = fill_all(templates, filler)
    write_filled(filled, _out(config, FILLED), surface.prefix,
                 meta = _meta(config, backend = config.backend))
    summary = placeholder_summary(filled)
    write_json(_out(config, 'reports', 'placeholders.json'), summary,
               meta = _meta(config, backend = config.backend))
    return {'filled': len(filled), 'complete': summary['complete']}


def run_datasets(config):
    """Mined corpus to fine tuning and pretraining datasets."""

    surface = _surface(config)
    corpus = read_mined(_out(config, MINED))
    finetune = build_finetune_dataset(corpus, prefix = surface.prefix)
    lines = [' '.join(example_tokens(ex, surface.prefix)[0]) for ex in corpus]
    pretrain = build_pretraining_dataset(lines, config.mask_fraction,
                                         config.mean_span, config.seed)
    write_dataset(finetune, _out(config, 'datasets', 'finetune.jsonl'),
                  meta = _meta(config))
    write_dataset(pretrain, _out(config, 'datasets', 'pretrain.jsonl'),
                  meta = _meta(config, mask_fraction = config.mask_fraction,
                               mean_span = config.mean_span))
    return {'finetune_pairs': len(finetune), 'pretrain_pairs': len(pretrain)}


def run_render(config):
    """Filled examples to group docs, help texts and doc patches."""

    surface = _surface(config)
    filled = read_filled(_out(config, FILLED))
    human = _human_examples(config, surface)
    header = artifact_header(config.seed)

    groups = sorted({c.group for c in surface.commands})
    for group in groups:
        write_text_atomic(_out(config, 'docs', '%s.md' % group),
                          render_group_doc(surface, group, filled, human,
                                           header = header))

    for spec in surface.commands:
        text = render_help(spec, [e for e in filled if e.command == spec.name],
                           [h for h in human if h.command == spec.name],
                           prefix = surface.prefix)
        write_text_atomic(_out(config, 'help', _help_file(spec.name)),
                          '# %s\n%s' % (header, text))

    patches = 0
    if config.docs is not None:
        config.require('docs')
        for group in groups:
            name = '%s.md' % group
            path = os.path.join(config.docs, name)
            if not os.path.isfile(path):
                continue
            try:
                with open(path, 'r', encoding = 'utf-8', newline = '') as f:
                    existing = f.read()
            except OSError as e:
                raise InputError('cannot read doc %s: %s' % (path, e))
            patch = diff_documents(existing,
                                   update_doc(existing, surface, group,
                                              filled),
                                   name, header = header)
            if patch:
                write_text_atomic(_out(config, 'patches', '%s.patch' % group),
                                  patch)
                patches += 1
    return {'docs': len(groups), 'help': len(surface.commands),
            'patches': patches}


def holdout_split(corpus, fraction, seed):
    """
    Seeded split of a corpus into kept and held out examples.

    Only examples with at least one value are held out; at least one is
    held out when the corpus has two or more of them.
    """

    candidates = [i for i, ex in enumerate(corpus)
                  if example_tokens(ex, '')[1]]
    n = int(round(fraction * len(candidates)))
    if len(candidates) >= 2:
        n = min(max(n, 1), len(candidates) - 1)
    rng = np.random.default_rng(seed)
    held = set(rng.choice(candidates, size = n, replace = False).tolist()
               if n else [])
    kept = [ex for i, ex in enumerate(corpus) if i not in held]
    return kept, [corpus[i] for i in sorted(held)]


def blank_example(example):
    """Template and reference line of a held out example."""

    arguments = tuple(a for a in example.arguments
                      if a.name != POSITIONAL and a.value != FLAG_VALUE)
    template = ExampleTemplate(example.command,
                               tuple((a.name, placeholder(a.name))
                                     for a in arguments),
                               rank = 1, support_users = 0)
    return template, MinedExample(example.source_id, example.command,
                                  arguments, example.line)


def run_evaluate(config):
    """Coverage, help success, held out ROUGE and cross validation."""

    config.require('telemetry')
    surface = _surface(config)
    reports = _out(config, 'reports')
    filled = read_filled(_out(config, FILLED))
    human = _human_examples(config, surface)

    version = config.current_version or surface.version
    aggregates = aggregate(ingest(config.telemetry, version).records)
    report = coverage(surface, aggregates, human, filled)
    _write_frame(config, os.path.join(reports, 'coverage.csv'),
                 report.to_frame(), float_format = '%.4f')
    write_report(os.path.join(reports, 'coverage.txt'),
                 format_coverage(report), config.seed)

    sessions = sessionize(read_records(config.telemetry).records,
                          timedelta(minutes = config.session_gap_minutes))
    stats = help_success(sessions, {'human': human, 'machine': filled})
    _write_frame(config, os.path.join(reports, 'help_success.csv'),
                 help_success_frame(stats), index = False,
                 float_format = '%.6g')

    kept, held = holdout_split(read_mined(_out(config, MINED)),
                               config.holdout_fraction, config.seed)
    model = predictor = None
    if config.backend != 'typed-lookup':
        model = train_cooccurrence(kept)
    if config.backend != 'cooccurrence':
        predictor = load_predictor(_out(config, TYPER))
    filler = _make_filler(config, surface, build_lookup(kept), model,
                          predictor)
    pairs = []
    for example in held:
        template, reference = blank_example(example)
        candidate = filler.fill(template).render(surface.prefix)
        pairs.append((candidate,
                      ' '.join(example_tokens(reference, surface.prefix)[0])))
    _write_frame(config, os.path.join(reports, 'rouge.csv'),
                 rouge_corpus(pairs), float_format = '%.4f')

    cv = cross_validate(_training_rows(config, surface),
                        folds = config.cv_folds,
                        hp = config.forest_hyperparameters(),
                        seed = config.seed, cap = config.cap)
    write_cv_report(cv, reports)
    return {'used_commands': report.used_commands,
            'help_groups': len(stats), 'held_out': len(held)}


def _sha256(path):
    digest = hashlib.sha256()
    if os.path.isdir(path):
        for root, dirs, files in os.walk(path):
            dirs.sort()
            for name in sorted(files):
                full = os.path.join(root, name)
                digest.update(os.path.relpath(full, path).encode('utf-8'))
                with open(full, 'rb') as f:
                    digest.update(f.read())
    else:
        with open(path, 'rb') as f:
            digest.update(f.read())
    return digest.hexdigest()


def _versions():
    import joblib
    import nltk
    import pandas
    import scipy
    import sklearn
    import yaml
    return {'exforge': __version__, 'python': platform.python_version(),
            'numpy': np.__version__, 'pandas': pandas.__version__,
            'scipy': scipy.__version__, 'scikit-learn': sklearn.__version__,
            'joblib': joblib.__version__, 'nltk': nltk.__version__,
            'pyyaml': yaml.__version__}


def write_manifest(config, counts):
    """Writes the run manifest: inputs, outputs, versions, seed and counts."""

    inputs = {}
    for key in INPUT_KEYS:
        path = getattr(config, key)
        if path is not None and os.path.exists(path):
            inputs[key] = {'path': path, 'sha256': _sha256(path)}

    outputs = {}
    for root, dirs, files in os.walk(config.output):
        dirs.sort()
        for name in sorted(files):
            full = os.path.join(root, name)
            relative = os.path.relpath(full, config.output)
            if relative != MANIFEST:
                outputs[relative.replace(os.sep, '/')] = _sha256(full)

    write_json(_out(config, MANIFEST),
               {'inputs': inputs, 'outputs': outputs,
                'versions': _versions(), 'seed': config.seed,
                'config': config.to_dict(), 'counts': counts,
                'created': datetime.now(timezone.utc).isoformat()},
               meta = _meta(config))


def run_pipeline(config):
    """Runs every generation stage and writes the manifest."""

    counts = {}
    for stage in PIPELINE_STAGES:
        logger.info('stage %s', stage)
        counts[stage] = COMMANDS[stage](config)
    write_manifest(config, counts)
    return counts


COMMANDS = {'templates': run_templates, 'mine': run_mine,
            'train-typer': run_train_typer, 'fill': run_fill,
            'datasets': run_datasets, 'render': run_render,
            'evaluate': run_evaluate, 'pipeline': run_pipeline}


### parser ###

def _common_options():
    parser = ArgumentParser(add_help = False)
    parser.add_argument('-v', '--verbose', action = 'store_true',
                        help = 'log debug messages')
    parser.add_argument('-q', '--quiet', action = 'store_true',
                        help = 'log warnings and errors only')
    parser.add_argument('--config', help = 'YAML configuration file')
    parser.add_argument('--output', help = 'output directory')
    parser.add_argument('--surface', help = 'command surface JSON file')
    parser.add_argument('--telemetry', help = 'telemetry JSON-lines file')
    parser.add_argument('--corpus', help = 'directory of documents to mine')
    parser.add_argument('--docs', help = 'directory of existing group docs')
    parser.add_argument('--human-examples', help = 'human examples JSON')
    parser.add_argument('--labeled', help = 'labeled parameters csv')
    parser.add_argument('--current-version',
                        help = 'release kept from telemetry')
    parser.add_argument('--k', type = int, help = 'templates per command')
    parser.add_argument('--seed', type = int, help = 'run seed')
    parser.add_argument('--min-confidence', type = float,
                        help = 'lowest type confidence used for filling')
    parser.add_argument('--backend',
                        help = 'typed-lookup, cooccurrence or hybrid')
    parser.add_argument('--name-style', help = 'pascal, kebab or snake')
    parser.add_argument('--hyperparameters', help = 'forest preset name')
    return parser


OVERRIDES = ('output', 'surface', 'telemetry', 'corpus', 'docs',
             'human_examples', 'labeled', 'current_version', 'k', 'seed',
             'min_confidence', 'backend', 'name_style', 'hyperparameters')


def build_parser():
    """Parser of the ``exforge`` command."""

    common = _common_options()
    parser = ArgumentParser(prog = 'exforge',
                            description = 'Generate CLI usage examples '
                                          'from telemetry and mined docs.')
    parser.add_argument('--version', action = 'version',
                        version = '%(prog)s ' + __version__)
    subparsers = parser.add_subparsers(dest = 'command', metavar = 'command',
                                       parser_class = ArgumentParser)
    subparsers.required = True
    helps = {'templates': 'build ranked templates from telemetry',
             'mine': 'mine examples and value lookups from documents',
             'train-typer': 'train the parameter type predictor',
             'fill': 'fill templates with parameter values',
             'datasets': 'build fine tuning and pretraining datasets',
             'render': 'render docs, help texts and doc patches',
             'evaluate': 'write coverage, help success, ROUGE and CV reports',
             'pipeline': 'run every generation stage and write a manifest'}
    for name in SUBCOMMANDS:
        subparsers.add_parser(name, parents = [common], help = helps[name])
    return parser


def main(argv = None):
    """
    Runs the command line tool.

    Returns
    -------
    int
        0 on success, 1 for usage or configuration errors, 2 for missing
        inputs and 3 for validation failures

    """

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 1

    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(format = LOG_FORMAT, level = level)
    logging.getLogger('exforge').setLevel(level)

    try:
        config = load_config(args.config, overrides = {
            key: getattr(args, key) for key in OVERRIDES})
        counts = COMMANDS[args.command](config)
    except ExforgeError as e:
        print('exforge %s: error: %s' % (args.command,
                                         (str(e).splitlines() or [''])[0]),
              file = sys.stderr)
        return e.exit_code

    logger.info('%s done: %s', args.command, counts)
    return 0
