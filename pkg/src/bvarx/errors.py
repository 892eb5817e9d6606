"""Exception hierarchy shared across the package.

The three top-level families map onto the CLI exit-code contract:
config errors exit 2, data errors exit 3, numerical failures exit 4.
"""

from __future__ import annotations

import sys


def _raising_module() -> str:
    """Short name of the module constructing the exception (two frames up:
    past this helper and past ``BvarxError.__init__``)."""
    try:
        name = sys._getframe(2).f_globals.get("__name__", "unknown")
    except ValueError:  # pragma: no cover - shallow stack
        name = "unknown"
    return name.rsplit(".", 1)[-1]


class BvarxError(Exception):
    """Base class for all package errors."""

    exit_code = 1

    def __init__(self, message: str, module: str | None = None):
        super().__init__(message)
        self.module = module or _raising_module()


class ConfigError(BvarxError):
    """Invalid configuration: bad keys, bad values, impossible requests."""

    exit_code = 2


class UnimplementedFamilyError(ConfigError):
    """A prior family that exists in the enum but has no implementation."""


class DataError(BvarxError):
    """Input data violates the ingestion contract."""

    exit_code = 3


class MissingColumnError(DataError):
    """A column named in the schema is absent from every input file."""


class DateParseError(DataError):
    """A date cell could not be parsed as an ISO year-month."""


class DuplicateDateError(DataError):
    """The same month appears more than once in one input file."""


class MonthlyGapError(DataError):
    """The monthly index has a hole after alignment."""


class MissingValueError(DataError):
    """A NaN (or empty) cell in a used column."""


class NumericalError(BvarxError):
    """Numerical failure: lost positive-definiteness, rank deficiency, ..."""

    exit_code = 4
