"""Exception types raised by the solvers."""


class SolverError(RuntimeError):
    """Base class for numerical-solver failures."""


class SingularMatrixError(SolverError):
    """A matrix required to be invertible is exactly singular."""


class ConvergenceError(SolverError):
    """An iteration exhausted its budget without meeting its tolerance."""


class LineSearchError(SolverError):
    """Backtracking line search shrank the step below the representable floor."""


class InfeasibleLPError(SolverError):
    """Phase-1 simplex certified the linear program infeasible."""
