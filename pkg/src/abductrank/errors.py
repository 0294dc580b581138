"""Exception hierarchy shared by all abductrank modules.

The split mirrors what the CLI needs to map onto exit codes: bad numeric
inputs (DomainError) and malformed files (DataError) are both validation
failures, while StatsError marks statistical preconditions (too few runs,
zero variance) that no amount of input fixing can recover within a run.
"""


class AbductRankError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(AbductRankError):
    """A numeric-domain precondition was violated (dimension mismatch,
    zero-norm vector, empty batch, non-finite input)."""


class DataError(AbductRankError):
    """A file or record failed validation (malformed line, missing field,
    corrupt embedding store, bad label token)."""


class StatsError(AbductRankError):
    """A statistical precondition failed (n too small, zero variance)."""
