"""coxcells: exact cell computations for finite Coxeter groups.

Build a group, compute its canonical basis and structure constants, partition
it into cells, construct the asymptotic ring and the character tables on both
sides of the transport map, and classify representations and involutions as
ordinary or exceptional.  All arithmetic is exact (rationals and roots of
unity); no floats enter any result.
"""

from .errors import (
    CacheInvalidError,
    InternalInconsistencyError,
    RefusalError,
    UsageError,
)

__version__ = "0.1.0"

__all__ = [
    "CacheInvalidError",
    "InternalInconsistencyError",
    "RefusalError",
    "UsageError",
    "__version__",
]
