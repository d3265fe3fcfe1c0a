# -*- coding: utf-8 -*-
"""
Emit renders examples into documentation.

Examples are written into command line help text, into markdown
reference pages where machine examples follow the human ones and carry
the "(autogenerated)" tag, and into unified diff patches that add new
examples to existing documentation files.

"""

import re
import json
import shlex
import difflib
import logging
from dataclasses import dataclass

from .exceptions import InputError, ValidationError
from .miner import parse_invocation
from .surface import normalize_command

logger = logging.getLogger(__name__)

AUTOGENERATED = '(autogenerated)'
WIDTH = 100
FENCE_TAG = 'azurecli'

_HUNK = re.compile(r'^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@')
_NO_NEWLINE = '\\ No newline at end of file\n'


@dataclass(frozen = True)
class HumanExample:
    """
    HumanExample

    An example written by the owners of a command.

    Attributes
    ----------
    command : str
    summary : str
    line : str
        command line as documented
    parameters : tuple of str
        canonical parameter names used by the line

    """

    command: str
    summary: str
    line: str
    parameters: tuple = ()

    @property
    def parameter_names(self):
        return self.parameters


@dataclass(frozen = True)
class ExampleBlock:
    summary: str
    body: tuple
    autogenerated: bool


@dataclass(frozen = True)
class RenderedDoc:
    """
    RenderedDoc

    Attributes
    ----------
    command : str
    summary_lines : tuple of str
    example_blocks : tuple of :class:`ExampleBlock`
        human blocks first
    format : str
        ``help-text`` or ``markdown``

    """

    command: str
    summary_lines: tuple
    example_blocks: tuple
    format: str


def load_human_examples(path, surface):
    """
    Reads human examples from a JSON list of objects with ``command``,
    ``summary`` and ``line``.

    Raises
    ------
    InputError
        If the file cannot be read
    ValidationError
        If the file is not a list of such objects or a line does not
        parse against the surface

    """

    try:
        with open(path, 'r', encoding = 'utf-8') as f:
            rows = json.load(f)
    except OSError as e:
        raise InputError('cannot read human examples %s: %s' % (path, e))
    except ValueError as e:
        raise ValidationError('human examples %s are malformed: %s'
                              % (path, e))
    if not isinstance(rows, list):
        raise ValidationError('human examples %s must be a list, not %s'
                              % (path, type(rows).__name__))

    examples = []
    for i, row in enumerate(rows):
        if not isinstance(row, dict) or not all(
                isinstance(row.get(k), str) for k in ('command', 'line')):
            raise ValidationError('human example %i of %s needs string '
                                  '"command" and "line" fields' % (i, path))
        if not isinstance(row.get('summary', ''), str):
            raise ValidationError('human example %i of %s has a non string '
                                  'summary' % (i, path))
        parsed = parse_invocation(row['line'], surface)
        if isinstance(parsed, str):
            raise ValidationError('human example "%s": %s'
                                  % (row['line'], parsed))
        if parsed.command != normalize_command(row['command']):
            raise ValidationError('human example "%s" is not a %s example'
                                  % (row['line'], row['command']))
        examples.append(HumanExample(command = parsed.command,
                                     summary = row.get('summary', ''),
                                     line = parsed.line,
                                     parameters = parsed.parameter_names))
    return examples


### summaries and wrapping ###

def summary_phrase(description):
    """
    Leading verb phrase of a command description, None if there is none.

    The phrase is the first sentence when it starts with a capitalized
    word, e.g. "Create a virtual machine".
    """

    if not description:
        return None
    sentence = re.split(r'\.(?:\s|$)', description.strip(), 1)[0].strip()
    if not re.match(r'[A-Z][a-z]+\b', sentence):
        return None
    return sentence


def machine_summary(spec, rank):
    """Summary line of a machine example, tagged ``(autogenerated)``."""

    phrase = summary_phrase(spec.description)
    if phrase is None:
        return 'Usage pattern %i for %s %s' % (rank, spec.name, AUTOGENERATED)
    if rank >= 2:
        phrase = '%s (usage pattern %i)' % (phrase, rank)
    return '%s %s' % (phrase, AUTOGENERATED)


def _line_groups(line):
    try:
        lexer = shlex.shlex(line, posix = False)
        lexer.whitespace_split = True
        lexer.commenters = ''
        tokens = list(lexer)
    except ValueError:
        tokens = line.split()
    groups = []
    for token in tokens:
        if not groups or token.startswith('-'):
            groups.append(token)
        else:
            groups[-1] += ' ' + token
    return groups


def _example_groups(example, prefix):
    if isinstance(example, HumanExample):
        return _line_groups(example.line)
    return _line_groups(example.render(prefix))


def wrap_groups(groups, width, continuation = '', indent = 0):
    """
    Breaks a command line between argument groups.

    Every physical line stays within width, counting ``continuation``
    and, after the first line, ``indent`` columns, unless a single group
    is longer.
    """

    lines = []
    current = ''
    for group in groups:
        candidate = group if not current else current + ' ' + group
        limit = width - len(continuation) - (indent if lines else 0)
        if current and len(candidate) > limit:
            lines.append(current)
            current = group
        else:
            current = candidate
    if current:
        lines.append(current)
    return lines


def _blocks(spec, examples, human_examples, prefix, width, continuation,
            indent):
    blocks = []
    for ex in human_examples:
        if ex.command != spec.name:
            raise ValidationError('human example of %s given for %s'
                                  % (ex.command, spec.name))
        blocks.append(ExampleBlock(ex.summary, tuple(wrap_groups(
            _example_groups(ex, prefix), width, continuation, indent)),
            False))
    for ex in examples:
        if ex.command != spec.name:
            raise ValidationError('example of %s given for %s'
                                  % (ex.command, spec.name))
        blocks.append(ExampleBlock(machine_summary(spec, ex.rank), tuple(
            wrap_groups(_example_groups(ex, prefix), width, continuation,
                        indent)), True))
    return tuple(blocks)


def build_doc(spec, examples, human_examples = (), format = 'markdown',
              prefix = 'az'):
    """
    Structured document of a command.

    Parameters
    ----------
    spec : :class:`exforge.CommandSpec`
    examples : list of :class:`exforge.FilledExample`
        machine examples
    human_examples : list of :class:`HumanExample`
    format : str (default 'markdown')
        ``markdown`` or ``help-text``
    prefix : str (default 'az')

    Returns
    -------
    :class:`RenderedDoc`

    Raises
    ------
    ValidationError
        If an example belongs to another command or format is unknown

    """

    if format == 'markdown':
        width, continuation, indent = WIDTH, ' \\', 4
    elif format == 'help-text':
        width, continuation, indent = WIDTH - 8, '', 4
    else:
        raise ValidationError('%s is not a valid format' % format)
    summary = (spec.description,) if spec.description else ()
    return RenderedDoc(spec.name, summary,
                       _blocks(spec, examples, human_examples, prefix, width,
                               continuation, indent), format)


### help text ###

def _flags(p):
    flags = ['--%s' % p.name]
    for alias in p.aliases:
        flags.append(('-%s' if len(alias) == 1 else '--%s') % alias)
    return ' '.join(flags)


def render_help(spec, examples, human_examples = (), prefix = 'az'):
    """
    Command line help of a command.

    Sections are Command, Arguments and, when there is at least one
    example, Examples. Human examples come first.

    Parameters
    ----------
    spec : :class:`exforge.CommandSpec`
    examples : list of :class:`exforge.FilledExample`
    human_examples : list of :class:`HumanExample`
    prefix : str (default 'az')

    Returns
    -------
    str

    Example
    -------
    >>> import exforge as exf
    >>> surface = exf.surface_data('az')
    >>> spec = surface.lookup('keyvault update')
    >>> print(exf.render_help(spec, filled))

    """

    doc = build_doc(spec, examples, human_examples, format = 'help-text',
                    prefix = prefix)

    lines = ['', 'Command']
    head = '    %s %s' % (prefix, spec.name)
    lines.append('%s : %s' % (head, spec.description) if spec.description
                 else head)

    if spec.parameters:
        lines += ['', 'Arguments']
        ordered = ([p for p in spec.parameters if p.required]
                   + [p for p in spec.parameters if not p.required])
        for p in ordered:
            entry = '    ' + _flags(p)
            if p.required:
                entry += ' [Required]'
            if p.description:
                entry += ' : ' + p.description
            lines.append(entry)

    if doc.example_blocks:
        lines += ['', 'Examples']
        for block in doc.example_blocks:
            lines.append('    ' + block.summary)
            lines.append('        ' + block.body[0])
            lines.extend('            ' + b for b in block.body[1:])
            lines.append('')
        lines.pop()

    return '\n'.join(lines) + '\n'


### markdown ###

def render_example_blocks(blocks):
    """Markdown of example blocks: summary, then a fenced command line."""

    out = []
    for block in blocks:
        out += [block.summary, '', '```%s' % FENCE_TAG]
        last = len(block.body) - 1
        for i, line in enumerate(block.body):
            text = line if i == 0 else '    ' + line
            out.append(text + ' \\' if i < last else text)
        out += ['```', '']
    return '\n'.join(out)


def render_markdown(spec, examples, human_examples = (), prefix = 'az'):
    """
    Markdown section of a command.

    The section opens with ``## <prefix> <command>`` and the command
    description. Human examples precede machine examples and every
    machine summary ends with "(autogenerated)".

    Parameters
    ----------
    spec : :class:`exforge.CommandSpec`
    examples : list of :class:`exforge.FilledExample`
    human_examples : list of :class:`HumanExample`
    prefix : str (default 'az')

    Returns
    -------
    str

    """

    doc = build_doc(spec, examples, human_examples, format = 'markdown',
                    prefix = prefix)
    lines = ['## %s %s' % (prefix, spec.name), '']
    if spec.description:
        lines += [spec.description, '']
    text = '\n'.join(lines) + '\n'
    if doc.example_blocks:
        text += '### Examples\n\n' + render_example_blocks(doc.example_blocks)
    return text


def render_group_doc(surface, group, examples, human_examples = (),
                     header = None):
    """
    Markdown reference page of one command group.

    Parameters
    ----------
    surface : :class:`exforge.CommandSurface`
    group : str
        first command path token, e.g. ``vm``
    examples : list of :class:`exforge.FilledExample`
        machine examples of any command
    human_examples : list of :class:`HumanExample`
    header : str (default None)
        text of an HTML comment placed first

    Returns
    -------
    str

    """

    commands = [c for c in surface.commands if c.group == group]
    if not commands:
        raise ValidationError('command group "%s" is not in the surface'
                              % group)
    parts = []
    if header is not None:
        parts.append('<!-- %s -->\n\n' % header)
    parts.append('# %s %s\n\n' % (surface.prefix, group))
    for spec in commands:
        parts.append(render_markdown(
            spec, [e for e in examples if e.command == spec.name],
            [h for h in human_examples if h.command == spec.name],
            prefix = surface.prefix))
        parts.append('\n')
    return ''.join(parts).rstrip('\n') + '\n'


### patches ###

def _heading_command(line):
    words = line[3:].split()
    return ' '.join(words[1:])


def _insertion_point(lines, command):
    """Index before which a fragment goes and whether a heading is needed."""

    sections = [i for i, line in enumerate(lines)
                if line.startswith('## ')]
    start, end = 0, len(lines)
    if command is not None:
        matches = [i for i in sections
                   if _heading_command(lines[i]) == command]
        if len(matches) > 1:
            raise ValidationError('ambiguous anchor: %s headings for "%s" at '
                                  'lines %s' % (len(matches), command,
                                                ', '.join(str(i + 1)
                                                          for i in matches)))
        if not matches:
            return len(lines), False
        start = matches[0]
        later = [i for i in sections if i > start]
        end = later[0] if later else len(lines)

    anchors = [i for i in range(start, end)
               if lines[i].strip() == '### Examples']
    if len(anchors) > 1:
        raise ValidationError(
            'ambiguous anchor: "### Examples" at lines %s; candidates %s'
            % (', '.join(str(i + 1) for i in anchors),
               ', '.join(_owner(lines, i) for i in anchors)))

    if anchors:
        index = anchors[0] + 1
        fenced = False
        while index < end:
            if lines[index].startswith(('```', '~~~')):
                fenced = not fenced
            elif not fenced and lines[index].startswith('#'):
                break
            index += 1
        return _before_blanks(lines, anchors[0] + 1, index), False

    own = [i for i in sections if start <= i < end]
    if command is None and len(own) > 1:
        raise ValidationError('ambiguous anchor: no "### Examples" section '
                              'and candidates %s'
                              % ', '.join(lines[i].strip() for i in own))
    if not own:
        return len(lines), False
    return _before_blanks(lines, own[0] + 1, end), True


def _owner(lines, index):
    for i in range(index, -1, -1):
        if lines[i].startswith('## '):
            return '"%s"' % lines[i].strip()
    return '"(top)"'


def _before_blanks(lines, lower, index):
    while index > lower and not lines[index - 1].strip():
        index -= 1
    return index


def insert_fragment(existing_doc, fragment, command = None):
    """
    Document with fragment added at the examples anchor.

    The anchor is the end of the ``### Examples`` subsection, of the
    command's section when command is given. A section without one gets
    the heading; a document without ``##`` sections gets the fragment at
    its end. A blank fragment leaves the document unchanged.
    """

    if not fragment.strip():
        return existing_doc

    lines = existing_doc.splitlines(keepends = True)
    index, heading = _insertion_point([l.rstrip('\n') for l in lines],
                                      command)

    block = fragment.strip('\n').splitlines(keepends = True)
    block[-1] = block[-1].rstrip('\n') + '\n'
    if heading:
        block = ['### Examples\n', '\n'] + block

    if index > 0:
        if not lines[index - 1].endswith('\n'):
            lines[index - 1] += '\n'
        if lines[index - 1].strip():
            block = ['\n'] + block
    if index < len(lines) and lines[index].strip():
        block = block + ['\n']
    return ''.join(lines[:index] + block + lines[index:])


def update_doc(existing_doc, surface, group, examples):
    """
    Document with the machine examples of a group added.

    Example blocks go into the ``### Examples`` subsection of their
    command; a command without a section gets a new one at the end.
    Blocks already in the document are skipped, so updating an updated
    document changes nothing.

    Parameters
    ----------
    existing_doc : str
    surface : :class:`exforge.CommandSurface`
    group : str
    examples : list of :class:`exforge.FilledExample`

    Returns
    -------
    str

    """

    doc = existing_doc
    for spec in surface.commands:
        if spec.group != group:
            continue
        own = [e for e in examples if e.command == spec.name]
        if not own:
            continue
        rendered = build_doc(spec, own, prefix = surface.prefix)
        fragment = render_example_blocks(rendered.example_blocks)
        if fragment.strip('\n') in doc:
            continue
        headings = [l for l in doc.splitlines() if l.startswith('## ')]
        if not any(_heading_command(l) == spec.name for l in headings):
            fragment = render_markdown(spec, own, prefix = surface.prefix)
        doc = insert_fragment(doc, fragment, spec.name)
    return doc


def _mark_missing_newlines(diff):
    out = []
    for line in diff:
        if line.endswith('\n'):
            out.append(line)
        else:
            out.append(line + '\n')
            out.append(_NO_NEWLINE)
    return out


def render_patch(existing_doc, fragment, path, command = None,
                 header = None):
    """
    Unified diff adding a fragment to a document.

    Parameters
    ----------
    existing_doc : str
        current document text
    fragment : str
        markdown to add
    path : str
        document path written as ``a/<path>`` and ``b/<path>``
    command : str (default None)
        restricts the anchor search to the section of this command
    header : str (default None)
        comment line placed before the diff

    Returns
    -------
    str
        diff with three lines of context, empty when the fragment is
        already in the document

    Raises
    ------
    ValidationError
        If the anchor is ambiguous; the message names the candidates

    Example
    -------
    >>> import exforge as exf
    >>> patch = exf.render_patch(doc, fragment, 'docs/keyvault.md',
    ...                          command = 'keyvault update')
    >>> exf.apply_patch(doc, patch) == exf.insert_fragment(doc, fragment,
    ...                                                    'keyvault update')
    True

    """

    if not fragment.strip() or fragment.strip('\n') in existing_doc:
        return ''
    new_doc = insert_fragment(existing_doc, fragment, command)
    return diff_documents(existing_doc, new_doc, path, header)


def diff_documents(existing_doc, new_doc, path, header = None):
    """Unified diff with three lines of context between two texts."""

    diff = difflib.unified_diff(existing_doc.splitlines(keepends = True),
                                new_doc.splitlines(keepends = True),
                                fromfile = 'a/%s' % path,
                                tofile = 'b/%s' % path, n = 3)
    lines = _mark_missing_newlines(diff)
    if not lines:
        return ''
    if header is not None:
        lines = ['# %s\n' % header] + lines
    return ''.join(lines)


def apply_patch(doc, patch):
    """
    Applies a single file unified diff to a text.

    Lines before the ``---`` file header are ignored. An empty patch
    returns doc unchanged.

    Raises
    ------
    ValidationError
        If a context or removed line does not match doc

    """

    if not patch.strip():
        return doc

    old = doc.splitlines(keepends = True)
    lines = patch.splitlines(keepends = True)
    i = 0
    while i < len(lines) and not lines[i].startswith('--- '):
        i += 1
    i += 2

    out = []
    position = 0
    while i < len(lines):
        match = _HUNK.match(lines[i])
        if match is None:
            raise ValidationError('bad hunk header: %s' % lines[i].rstrip())
        old_start = int(match.group(1))
        old_count = 1 if match.group(2) is None else int(match.group(2))
        start = old_start - 1 if old_count else old_start
        if start < position:
            raise ValidationError('overlapping hunks at line %i' % old_start)
        out.extend(old[position:start])
        position = start
        i += 1

        body = []
        while i < len(lines) and not lines[i].startswith('@@'):
            if lines[i].startswith('\\'):
                if body:
                    body[-1] = body[-1].rstrip('\n')
            else:
                body.append(lines[i])
            i += 1

        for line in body:
            op, text = line[:1], line[1:]
            if op in (' ', '-'):
                if position >= len(old) or old[position] != text:
                    raise ValidationError('patch does not apply at line %i'
                                          % (position + 1))
                position += 1
                if op == ' ':
                    out.append(text)
            elif op == '+':
                out.append(text)
            else:
                raise ValidationError('bad patch line: %s' % line.rstrip())

    out.extend(old[position:])
    return ''.join(out)
