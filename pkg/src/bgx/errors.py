"""Exception hierarchy shared by the whole package.

Each error class carries a distinct process exit code so the command line
front end can map failures to diagnosable statuses.
"""


class BgxError(Exception):
    """Base class for all package errors."""

    exit_code = 6


class ContractViolation(BgxError):
    """A documented precondition was violated by the caller."""

    exit_code = 6


class SchemaViolation(BgxError):
    """Serialized data failed validation (shape, labels, or module axioms)."""

    exit_code = 3


class WindowError(BgxError):
    """A truncation window is too small for the requested computation."""

    exit_code = 4


class DomainError(BgxError):
    """The requested object is excluded from the operation's domain."""

    exit_code = 5
