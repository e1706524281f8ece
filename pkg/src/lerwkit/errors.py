"""Exception types shared across the package.

CLI exit-code convention: precondition violations map to exit code 2,
step-budget timeouts to exit code 3.
"""


class LerwkitError(Exception):
    pass


class InvalidInputError(LerwkitError):
    """A precondition on operation arguments was violated."""


class PrecisionError(LerwkitError):
    """Exact arithmetic cannot decide a geometric predicate for the given
    region data; the caller must perturb the region."""


class TableRangeError(LerwkitError):
    """A potential-table query fell outside the tabulated radius."""


class StepBudgetError(LerwkitError):
    """A random walk exceeded its step budget; the partial path is discarded."""


class NoTransitionError(LerwkitError):
    """A walk was started from a vertex with zero total weight."""


class SingularSystemError(LerwkitError):
    """A Dirichlet system has an interior component with no boundary contact."""


class SingularPointError(LerwkitError):
    """A conformal-map quantity was requested at a corner where it degenerates."""
