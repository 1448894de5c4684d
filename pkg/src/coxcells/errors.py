"""Shared exception types.

The distinction matters for the command line front end: bad input and
resource refusals exit with status 2, failed verification claims with
status 1, and internal inconsistencies are allowed to propagate because
they always indicate a bug in the engine itself.
"""


class UsageError(Exception):
    """Malformed input: unknown type symbol, mismatched scalars, bad flags."""


class RefusalError(UsageError):
    """The request is well formed but exceeds a configured resource bound."""


class CacheInvalidError(Exception):
    """On-disk cache does not match the requesting group or format version."""


class InternalInconsistencyError(Exception):
    """An invariant that should hold by theorem failed; the engine is buggy."""
