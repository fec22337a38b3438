"""Exception types shared across the package.

Every failure mode that callers are expected to handle gets its own class so
the CLI can map them to distinct exit codes.
"""


class CapacityError(Exception):
    """A requested computation would exceed the configured memory budget.

    Raised *before* any large allocation happens.  The message states the
    estimated requirement and the active budget.
    """


class ConvergenceError(Exception):
    """An iterative numerical routine failed to reach its target accuracy
    within its evaluation budget."""


class InternalInconsistencyError(Exception):
    """An internal self-check failed (e.g. a character sum that must be an
    exact multiple came out fractional).  Indicates a bug or corrupted input,
    never a user error."""
