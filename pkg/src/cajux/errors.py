"""Exception types shared across the package."""

from __future__ import annotations


class CAError(Exception):
    """Base class for all package errors."""


class InvalidArgument(CAError, ValueError):
    """A caller passed parameters that violate an operation's preconditions."""


class FormatError(CAError, ValueError):
    """A CA file, library archive or manifest could not be parsed.

    ``line`` and ``column`` are 1-based and may be ``None`` when the problem is
    not tied to a single location.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class MissingLibraryError(CAError):
    """The search needs a library of distinct CAs that was not supplied."""

    def __init__(self, sizes, message: str | None = None):
        self.sizes = sorted(set(sizes))
        if message is None:
            message = "missing libraries for row counts: " + " ".join(map(str, self.sizes))
        super().__init__(message)


class BudgetExhausted(CAError):
    """A node-count or wall-clock budget ran out before the search finished.

    ``stats`` carries whatever progress counters were collected and
    ``partial`` the results found so far. Neither is authoritative.
    """

    def __init__(self, message: str, stats=None, partial=None):
        super().__init__(message)
        self.stats = stats
        self.partial = partial
