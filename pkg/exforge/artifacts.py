# -*- coding: utf-8 -*-
"""
Artifacts reads and writes the files exchanged between pipeline stages.

Every file is written atomically through a temporary file in the target
directory. JSON-lines files open with a single ``_meta`` record and JSON
files carry a ``_meta`` key so the seed of a run travels with its
outputs; readers drop the meta record.

"""

import os
import json
import tempfile
import logging

from .exceptions import InputError

logger = logging.getLogger(__name__)

META_KEY = '_meta'


def artifact_meta(seed = None, **extra):
    """
    Header stored in every artifact.

    Parameters
    ----------
    seed : int (default None)
        run seed
    extra : kwargs
        additional deterministic header fields

    Returns
    -------
    dict
        header mapping; never contains timestamps

    """

    from . import __version__

    meta = {'tool': 'exforge', 'version': __version__, 'seed': seed}
    meta.update(extra)
    return meta


def artifact_header(seed = None):
    """One line header of text artifacts such as docs, help and patches."""

    meta = artifact_meta(seed)
    return 'generated by %s %s, seed %s' % (meta['tool'], meta['version'],
                                            meta['seed'])


def write_text_atomic(path, text):
    """
    Writes text to path by renaming a finished temporary file over it.

    Parameters
    ----------
    path : str
        destination file, parent directories are created
    text : str
        full file content

    """

    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok = True)
    fd, tmp_path = tempfile.mkstemp(dir = directory, prefix = '.tmp-',
                                    suffix = os.path.basename(path))
    try:
        with os.fdopen(fd, 'w', encoding = 'utf-8', newline = '') as f:
            f.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    logger.debug('wrote %s', path)


def write_report(path, text, seed = None):
    """
    Writes a report, csv or plain text, behind a ``# generated by ...``
    header line that names the seed. Read csv reports back with
    ``pandas.read_csv(path, comment = '#')``.

    """

    write_text_atomic(path, '# %s\n%s' % (artifact_header(seed), text))


def dumps(obj):
    """Canonical JSON text used for every artifact."""
    return json.dumps(obj, sort_keys = True, ensure_ascii = False)


def write_jsonl(path, rows, meta = None):
    """
    Writes dict rows as JSON lines, preceded by the meta record.

    Parameters
    ----------
    path : str
        destination file
    rows : iterable of dict
        records to write
    meta : dict (default None)
        header, see :func:`artifact_meta`

    """

    lines = []
    if meta is not None:
        lines.append(dumps({META_KEY: meta}))
    lines.extend(dumps(row) for row in rows)
    write_text_atomic(path, '\n'.join(lines) + '\n' if lines else '')


def read_jsonl(path):
    """
    Reads JSON lines written by :func:`write_jsonl`.

    Returns
    -------
    list of dict
        records without the meta record

    Raises
    ------
    InputError
        If path cannot be read or a line is not JSON

    """

    rows = []
    try:
        with open(path, 'r', encoding = 'utf-8') as f:
            for number, line in enumerate(f, 1):
                line = line.strip()
                if not line:
                    continue
                row = json.loads(line)
                if isinstance(row, dict) and META_KEY in row:
                    continue
                rows.append(row)
    except OSError as e:
        raise InputError('cannot read %s: %s' % (path, e))
    except ValueError as e:
        raise InputError('%s line %i is not JSON: %s' % (path, number, e))
    return rows


def write_json(path, obj, meta = None):
    """Writes one JSON document with an optional ``_meta`` key."""

    payload = dict(obj)
    if meta is not None:
        payload[META_KEY] = meta
    write_text_atomic(path, json.dumps(payload, sort_keys = True,
                                       indent = 1,
                                       ensure_ascii = False) + '\n')


def read_json(path):
    """Reads a JSON document and drops its ``_meta`` key."""

    try:
        with open(path, 'r', encoding = 'utf-8') as f:
            payload = json.load(f)
    except OSError as e:
        raise InputError('cannot read %s: %s' % (path, e))
    except ValueError as e:
        raise InputError('%s is not JSON: %s' % (path, e))
    if isinstance(payload, dict):
        payload.pop(META_KEY, None)
    return payload
