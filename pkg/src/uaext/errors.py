"""Exception types shared across the package.

The split matters for the CLI exit codes: bad input (2), a mathematical
check that fails (1, reported through certificates rather than raised),
and a computation that could not be completed at all (3).
"""


class InputError(ValueError):
    """Malformed or inconsistent input (dimension mismatch, bad parameter)."""


class ValidationError(InputError):
    """Structured input that fails a construction contract (e.g. a map that
    is not surjective); the message names the offending item."""


class SolverFailure(RuntimeError):
    """The LP solver exhausted its pivot budget.  Distinct from infeasible."""


class RootFindingError(RuntimeError):
    """Polynomial roots could not be certified to the residual contract."""


class ReconstructionError(RuntimeError):
    """A reconstruction hypothesis (fiber-constancy of the squared generator)
    was violated."""
