# -*- coding: utf-8 -*-
"""
Miner harvests command invocations from documents.

Code blocks are pulled from markdown-like documents, every logical line
that starts with the product prefix is parsed against the command
surface, invalid or duplicated invocations are dropped and the surviving
values are counted into a lookup table used to fill templates.

"""

import os
import re
import shlex
import logging
from collections import Counter
from dataclasses import dataclass, field, replace

import pandas as pd

from .artifacts import read_json, read_jsonl, write_json, write_jsonl
from .exceptions import InputError, ValidationError
from .surface import normalize_command

logger = logging.getLogger(__name__)

DOCUMENT_KINDS = ('qa-post', 'issue', 'doc-page', 'blog')
CLI_TAGS = ('azure-cli', 'azurecli')

POSITIONAL = '_positional'
FLAG_VALUE = '<flag>'

UNKNOWN_COMMAND = 'unknown-command'
UNKNOWN_PARAMETER = 'unknown-parameter'
MALFORMED = 'malformed'
INVALID_VALUE = 'invalid-value'
DUPLICATE = 'duplicate'

MAX_VALUE_LENGTH = 256

# <vm-name>, $NAME, ${NAME}, {name}
_PLACEHOLDER = re.compile(r'^(<[^<>]+>|\$\{?[A-Za-z_]\w*\}?|\{[^{}:"]*\})$')

_FENCES = ('```', '~~~')
_PROMPTS = ('$ ', '> ', 'PS> ')
_CONTINUATIONS = ('\\', '`')


@dataclass(frozen = True)
class SourceDocument:
    """A document of the corpus."""

    id: str
    kind: str
    body: str


@dataclass(frozen = True)
class Argument:
    """
    Argument

    Attributes
    ----------
    name : str
        canonical parameter name, :data:`POSITIONAL` for bare words after
        the command path
    value : str
        value without surrounding quotes, :data:`FLAG_VALUE` for a flag
        given without a value
    quoted : bool
        whether the value was quoted in the source line

    """

    name: str
    value: str
    quoted: bool = False


@dataclass(frozen = True)
class MinedExample:
    """
    MinedExample

    A validated invocation harvested from a document.

    Attributes
    ----------
    source_id : str
        id of the document the line came from
    command : str
        command path
    arguments : tuple of :class:`Argument`
        arguments in source order
    line : str
        logical source line

    """

    source_id: str
    command: str
    arguments: tuple
    line: str = ''

    @property
    def parameter_names(self):
        return tuple(a.name for a in self.arguments if a.name != POSITIONAL)

    @property
    def values(self):
        """Mapping of parameter name to value, positionals excluded."""
        return {a.name: a.value for a in self.arguments
                if a.name != POSITIONAL}

    @property
    def key(self):
        return (self.command, tuple((a.name, a.value)
                                    for a in self.arguments))


@dataclass
class FilterResult:
    """Examples kept by :func:`filter_corpus` and drop counts per reason."""

    examples: list
    dropped: Counter = field(default_factory = Counter)


@dataclass
class MiningResult:
    """
    MiningResult

    Attributes
    ----------
    examples : list of :class:`MinedExample`
        filtered corpus
    blocks : int
        code blocks extracted
    rejected : collections.Counter
        parse rejections per reason
    dropped : collections.Counter
        filter drops per reason

    """

    examples: list
    blocks: int = 0
    rejected: Counter = field(default_factory = Counter)
    dropped: Counter = field(default_factory = Counter)


### block extraction ###

def join_continuations(lines):
    """Joins lines ending in a backslash or backtick into logical lines."""

    logical = []
    pending = ''
    for line in lines:
        stripped = line.rstrip()
        if stripped.endswith(_CONTINUATIONS):
            pending += stripped[:-1].strip() + ' '
            continue
        logical.append((pending + line.strip()) if pending else line)
        pending = ''
    if pending:
        logical.append(pending.rstrip())
    return logical


def _strip_prompt(line):
    line = line.strip()
    for prompt in _PROMPTS:
        if line.startswith(prompt):
            return line[len(prompt):].lstrip()
    return line


def _first_token(block):
    for line in block.splitlines():
        line = _strip_prompt(line)
        if line:
            return line.split()[0]
    return None


def extract_blocks(doc, prefix, tags = CLI_TAGS):
    """
    Extracts the code blocks of a document that hold commands.

    A fenced block is kept when its language tag is one of ``tags`` or
    when its first non blank token is the prefix. An indented block is
    kept on the second condition only.

    Parameters
    ----------
    doc : :class:`SourceDocument`
        document to scan
    prefix : str
        executable name, e.g. ``az``
    tags : tuple of str
        fence language tags of the product

    Returns
    -------
    list of str
        blocks with continuation lines joined

    Example
    -------
    >>> import exforge as exf
    >>> doc = exf.SourceDocument('d1', 'blog',
    ...                          '```azure-cli\\naz vm list\\n```')
    >>> exf.extract_blocks(doc, 'az')
    ['az vm list']

    """

    tags = tuple(t.lower() for t in tags)
    blocks = []

    fence = None
    tag = ''
    current = []
    indented = []

    def close_indented():
        if indented:
            block = '\n'.join(join_continuations(indented))
            if _first_token(block) == prefix:
                blocks.append(block)
            del indented[:]

    for raw in doc.body.splitlines():
        stripped = raw.strip()
        if fence is not None:
            if stripped.startswith(fence) and not stripped[len(fence):].strip():
                block = '\n'.join(join_continuations(current))
                if tag in tags or _first_token(block) == prefix:
                    blocks.append(block)
                fence, current = None, []
            else:
                current.append(raw)
            continue

        opener = next((f for f in _FENCES if stripped.startswith(f)), None)
        if opener is not None:
            close_indented()
            fence = opener
            info = stripped[len(opener):].strip()
            tag = info.split()[0].lower() if info else ''
            continue

        if raw.startswith(('    ', '\t')) and stripped:
            indented.append(raw.strip())
        elif stripped or not indented:
            close_indented()

    # an unterminated fence runs to the end of the document
    if fence is not None and current:
        block = '\n'.join(join_continuations(current))
        if tag in tags or _first_token(block) == prefix:
            blocks.append(block)
    close_indented()
    return blocks


def candidate_lines(block, prefix):
    """Logical lines of a block that start with the prefix."""

    lines = []
    for line in join_continuations(block.splitlines()):
        line = _strip_prompt(line)
        if line.split(None, 1)[:1] == [prefix]:
            lines.append(line)
    return lines


### invocation parsing ###

def _tokenize(line):
    lexer = shlex.shlex(line, posix = False)
    lexer.whitespace_split = True
    lexer.commenters = ''
    tokens = []
    for token in lexer:
        if token.startswith('#'):
            break
        tokens.append(token)
    return tokens


def _unquote(token):
    if len(token) >= 2 and token[0] == token[-1] and token[0] in '"\'':
        return token[1:-1], True
    return token, False


def _is_flag(token):
    if token.startswith('--'):
        return len(token) > 2
    return len(token) > 1 and token[0] == '-' and token[1].isalpha()


def parse_invocation(line, surface, source_id = ''):
    """
    Parses one command line against the surface.

    Tokens are split on whitespace with quotes grouping. The longest run
    of leading words naming a command is the command path. Every flag
    binds the next token when it is a value; a flag followed by another
    flag or the end of line gets :data:`FLAG_VALUE`.

    Parameters
    ----------
    line : str
        logical line starting with the surface prefix
    surface : :class:`exforge.CommandSurface`
    source_id : str (default '')
        document id stored on the example

    Returns
    -------
    :class:`MinedExample` or str
        the example, or one of ``unknown-command``,
        ``unknown-parameter`` and ``malformed``. Never raises.

    Example
    -------
    >>> import exforge as exf
    >>> surface = exf.surface_data('az')
    >>> ex = exf.parse_invocation('az vm create --image UbuntuLTS', surface)
    >>> ex.values['image']
    'UbuntuLTS'

    """

    try:
        tokens = _tokenize(line)
    except ValueError:
        return MALFORMED
    if not tokens or tokens[0] != surface.prefix:
        return MALFORMED
    tokens = tokens[1:]

    words = []
    for token in tokens:
        if _is_flag(token) or token[0] in '"\'':
            break
        words.append(token)

    spec = None
    for size in range(len(words), 0, -1):
        spec = surface.lookup(' '.join(words[:size]))
        if spec is not None:
            break
    if spec is None:
        return UNKNOWN_COMMAND

    arguments = []
    seen = set()
    rest = tokens[size:]
    i = 0
    while i < len(rest) and not _is_flag(rest[i]):
        value, quoted = _unquote(rest[i])
        if not value:
            return MALFORMED
        arguments.append(Argument(POSITIONAL, value, quoted))
        i += 1

    while i < len(rest):
        token = rest[i]
        if not _is_flag(token):
            # a second value for one flag
            return MALFORMED
        inline = None
        if token.startswith('--') and '=' in token:
            token, inline = token.split('=', 1)
        name = spec.resolve_parameter(token)
        if name is None:
            return UNKNOWN_PARAMETER
        if name in seen:
            return MALFORMED
        seen.add(name)
        i += 1

        if inline is not None:
            value, quoted = _unquote(inline)
        elif i < len(rest) and not _is_flag(rest[i]):
            value, quoted = _unquote(rest[i])
            i += 1
        else:
            value, quoted = FLAG_VALUE, False
        if not value:
            return MALFORMED
        arguments.append(Argument(name, value, quoted))

    return MinedExample(source_id = source_id, command = spec.name,
                        arguments = tuple(arguments), line = line.strip())


### filtering ###

def placeholder_value(value):
    """Placeholder text such as ``<name>``, ``$NAME`` or ``{name}``."""
    return bool(_PLACEHOLDER.match(value.strip()))


def valid_value(value):
    """Printable, non empty, at most 256 characters and not a placeholder."""
    return (0 < len(value) <= MAX_VALUE_LENGTH and value.isprintable()
            and not placeholder_value(value))


def filter_corpus(examples, surface):
    """
    Keeps examples that are valid against the current surface.

    Parameter aliases are normalized to canonical names. Examples are
    dropped for an unknown command, an unknown parameter, an invalid
    value or an earlier identical (command, arguments) example. Filtering
    a filtered corpus returns it unchanged.

    Parameters
    ----------
    examples : list of :class:`MinedExample`
    surface : :class:`exforge.CommandSurface`

    Returns
    -------
    :class:`FilterResult`

    """

    result = FilterResult(examples = [])
    seen = set()
    for ex in examples:
        spec = surface.lookup(ex.command)
        if spec is None:
            result.dropped[UNKNOWN_COMMAND] += 1
            continue

        arguments = []
        reason = None
        for a in ex.arguments:
            name = a.name
            if name != POSITIONAL:
                name = spec.resolve_parameter(name)
                if name is None:
                    reason = UNKNOWN_PARAMETER
                    break
            if a.value != FLAG_VALUE and not valid_value(a.value):
                reason = INVALID_VALUE
                break
            arguments.append(replace(a, name = name))
        if reason is None:
            names = [a.name for a in arguments if a.name != POSITIONAL]
            if len(names) != len(set(names)):
                reason = MALFORMED
        if reason is not None:
            result.dropped[reason] += 1
            continue

        kept = replace(ex, command = spec.name, arguments = tuple(arguments))
        if kept.key in seen:
            result.dropped[DUPLICATE] += 1
            continue
        seen.add(kept.key)
        result.examples.append(kept)

    return result


### value lookup ###

def _ranked(counter):
    return [(v, c) for v, c in sorted(counter.items(),
                                      key = lambda item: (-item[1], item[0]))]


class ValueLookup(object):
    """
    ValueLookup

    Candidate values of every parameter with occurrence counts, per
    (command, parameter) and per parameter name across commands.
    Candidate lists are sorted by descending count, then value.

    Parameters
    ----------
    entries : dict
        (command, parameter) -> list of (value, count)
    global_entries : dict
        parameter -> list of (value, count)

    """

    def __init__(self, entries = None, global_entries = None):
        self.entries = dict(entries or {})
        self.global_entries = dict(global_entries or {})

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        return (isinstance(other, ValueLookup)
                and self.entries == other.entries
                and self.global_entries == other.global_entries)

    def candidates(self, command, parameter):
        """Per-command candidates, empty when unseen."""
        return list(self.entries.get((command, parameter), []))

    def global_candidates(self, parameter):
        """Candidates of a parameter name across all commands."""
        return list(self.global_entries.get(parameter, []))

    def to_dict(self):
        commands = {}
        for (command, parameter), values in sorted(self.entries.items()):
            commands.setdefault(command, {})[parameter] = \
                [[v, c] for v, c in values]
        return {'commands': commands,
                'global': {p: [[v, c] for v, c in values]
                           for p, values in sorted(self.global_entries.items())}}

    @classmethod
    def from_dict(cls, data):
        entries = {}
        for command, parameters in data.get('commands', {}).items():
            for parameter, values in parameters.items():
                entries[(command, parameter)] = [(v, int(c))
                                                 for v, c in values]
        global_entries = {p: [(v, int(c)) for v, c in values]
                          for p, values in data.get('global', {}).items()}
        return cls(entries, global_entries)


def build_lookup(corpus):
    """
    Counts the values of a filtered corpus.

    Flags without a value and positional words are not counted.

    Parameters
    ----------
    corpus : list of :class:`MinedExample`

    Returns
    -------
    :class:`ValueLookup`

    Example
    -------
    >>> import exforge as exf
    >>> lookup = exf.build_lookup(corpus)
    >>> lookup.candidates('vm create', 'location')
    [('westeurope', 2), ('eastus', 1)]

    """

    per_command = {}
    per_name = {}
    for ex in corpus:
        for a in ex.arguments:
            if a.name == POSITIONAL or a.value == FLAG_VALUE:
                continue
            per_command.setdefault((ex.command, a.name), Counter())[a.value] += 1
            per_name.setdefault(a.name, Counter())[a.value] += 1

    return ValueLookup({key: _ranked(c) for key, c in per_command.items()},
                       {key: _ranked(c) for key, c in per_name.items()})


### corpus input and output ###

def load_corpus(directory, manifest = None):
    """
    Reads the documents of a corpus directory.

    Parameters
    ----------
    directory : str
        directory holding the documents
    manifest : str (default None)
        CSV with columns ``file``, ``id`` and ``kind``; defaults to
        ``manifest.csv`` inside directory

    Returns
    -------
    list of :class:`SourceDocument`
        in manifest order

    Raises
    ------
    InputError
        If the manifest or a listed document cannot be read
    ValidationError
        On a duplicate id, an unknown kind or missing columns

    """

    if manifest is None:
        manifest = os.path.join(directory, 'manifest.csv')
    try:
        df = pd.read_csv(manifest, dtype = str, keep_default_na = False)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise InputError('cannot read manifest %s: %s' % (manifest, e))

    missing = {'file', 'id', 'kind'} - set(df.columns)
    if missing:
        raise ValidationError('manifest %s lacks columns %s'
                              % (manifest, ', '.join(sorted(missing))))
    duplicated = df.loc[df['id'].duplicated(), 'id'].tolist()
    if duplicated:
        raise ValidationError('duplicate document id "%s"' % duplicated[0])

    docs = []
    for row in df.itertuples(index = False):
        if row.kind not in DOCUMENT_KINDS:
            raise ValidationError('document "%s": %s is not a valid kind'
                                  % (row.id, row.kind))
        path = os.path.join(directory, row.file)
        try:
            with open(path, 'r', encoding = 'utf-8') as f:
                body = f.read()
        except OSError as e:
            raise InputError('cannot read document %s: %s' % (path, e))
        docs.append(SourceDocument(id = row.id, kind = row.kind, body = body))

    logger.info('loaded %i documents from %s', len(docs), directory)
    return docs


def mine_document(doc, surface, tags = CLI_TAGS):
    """
    Extracts and parses the invocations of one document.

    Returns
    -------
    examples : list of :class:`MinedExample`
        parsed, unfiltered
    rejected : collections.Counter
        parse rejections per reason
    blocks : int
        code blocks found

    """

    examples = []
    rejected = Counter()
    blocks = extract_blocks(doc, surface.prefix, tags = tags)
    for block in blocks:
        for line in candidate_lines(block, surface.prefix):
            parsed = parse_invocation(line, surface, source_id = doc.id)
            if isinstance(parsed, str):
                rejected[parsed] += 1
            else:
                examples.append(parsed)
    return examples, rejected, len(blocks)


def mine_corpus(docs, surface, tags = CLI_TAGS):
    """
    Mines and filters a corpus.

    Parameters
    ----------
    docs : list of :class:`SourceDocument`
    surface : :class:`exforge.CommandSurface`
    tags : tuple of str
        fence language tags of the product

    Returns
    -------
    :class:`MiningResult`

    """

    result = MiningResult(examples = [])
    mined = []
    for doc in docs:
        examples, rejected, blocks = mine_document(doc, surface, tags = tags)
        mined.extend(examples)
        result.rejected.update(rejected)
        result.blocks += blocks

    filtered = filter_corpus(mined, surface)
    result.examples = filtered.examples
    result.dropped = filtered.dropped

    logger.info('mined %i examples from %i blocks of %i documents '
                '(rejected %s, dropped %s)', len(result.examples),
                result.blocks, len(docs), dict(result.rejected),
                dict(result.dropped))
    return result


def example_to_dict(ex):
    return {'source_id': ex.source_id, 'command': ex.command,
            'arguments': [[a.name, a.value, a.quoted] for a in ex.arguments],
            'line': ex.line}


def example_from_dict(data):
    return MinedExample(source_id = data['source_id'],
                        command = normalize_command(data['command']),
                        arguments = tuple(Argument(n, v, bool(q))
                                          for n, v, q in data['arguments']),
                        line = data.get('line', ''))


def write_mined(examples, path, meta = None):
    """Writes mined examples as JSON lines."""
    write_jsonl(path, [example_to_dict(ex) for ex in examples], meta = meta)


def read_mined(path):
    """Reads examples written by :func:`write_mined`."""
    try:
        return [example_from_dict(row) for row in read_jsonl(path)]
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError('%s is not a mined example file: %s'
                              % (path, e))


def write_lookup(lookup, path, meta = None):
    """Writes a lookup keyed by command then parameter."""
    write_json(path, lookup.to_dict(), meta = meta)


def read_lookup(path):
    """Reads a lookup written by :func:`write_lookup`."""
    try:
        return ValueLookup.from_dict(read_json(path))
    except (AttributeError, TypeError, ValueError) as e:
        raise ValidationError('%s is not a lookup file: %s' % (path, e))
