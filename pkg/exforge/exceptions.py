# -*- coding: utf-8 -*-
"""
Exceptions raised by exforge.

Each class maps to one failure class of the command line tool, so
:func:`exforge.cli.main` can turn any of them into an exit status.

"""


class ExforgeError(Exception):
    """Base class for all exforge errors."""

    exit_code = 1


class ConfigError(ExforgeError, ValueError):
    """Bad configuration value or command line usage."""

    exit_code = 1


class InputError(ExforgeError, OSError):
    """A declared input is missing or cannot be read."""

    exit_code = 2


class ValidationError(ExforgeError, ValueError):
    """Input was read but violates a documented invariant."""

    exit_code = 3
