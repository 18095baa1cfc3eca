"""Fractional user-pairing LP and its log-barrier solver.

The relaxed pairing problem is the LP

    max  r_s' x                 (candidate-pair secrecy rates)
    s.t. A x <= u               (A = [I; -I; p'], u = [b; 0; P])
         D x  = 1               (every user covered exactly once)

over the K(2K-1) above-diagonal pair indicators.  The solver replaces
the inequalities with a log barrier weighted by a growing parameter t
and minimizes g(x) = -t r_s' x + phi(x) subject to D x = 1 with an
infeasible-start Newton method: each step solves the KKT system via the
in-house LU, a backtracking line search enforces both residual descent
and strict interiority, and t grows by a factor xi until the duality-gap
proxy K(2K-1)/t drops below epsilon.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .dense_linalg import lu_factor, lu_solve
from .errors import ConvergenceError, LineSearchError, SingularMatrixError, SolverError
from .rate_model import rate_report

_EPS = np.finfo(float).eps

# Shrinking the step below this certifies numerical stagnation.
_MIN_STEP = 1e-16


def vec_index(m: int, n: int, num_pairs: int) -> int:
    """1-based position of pair (m, n), m < n, in row-major above-diagonal order."""
    two_k = 2 * num_pairs
    if not (1 <= m < n <= two_k):
        raise ValueError(f"need 1 <= m < n <= {two_k}, got ({m}, {n})")
    return (4 * num_pairs - m) * (m - 1) // 2 + n - m


def vec_pairs(num_pairs: int):
    """All user-id pairs (m, n), m < n, in vector order."""
    two_k = 2 * num_pairs
    return [(m, n) for m in range(1, two_k) for n in range(m + 1, two_k + 1)]


@dataclass
class LPData:
    """Assembled LP of the relaxed pairing problem."""

    num_pairs: int
    r_s: np.ndarray     # candidate secrecy rates, len n_x
    p: np.ndarray       # candidate pair totals (watts), len n_x
    b: np.ndarray       # per-pair indicator caps in (0, 1]
    a_mat: np.ndarray   # (2 n_x + 1) x n_x inequality matrix [I; -I; p']
    u: np.ndarray       # inequality right-hand side [b; 0; P]
    d_mat: np.ndarray   # 2K x n_x user-coverage matrix

    @property
    def n_x(self) -> int:
        return self.r_s.shape[0]

    @property
    def budget(self) -> float:
        return float(self.u[-1])

    def gap_proxy(self, t: float) -> float:
        return self.n_x / t


@dataclass
class SolveCounters:
    n_lp: int = 0
    newton_iters: int = 0
    line_search_steps: int = 0


@dataclass
class BarrierState:
    """Current iterate of the barrier solve.

    ``y`` caches the reciprocal slacks for the current ``x``; the solver
    ops refresh it whenever they touch the state.  ``zeta``/``tau`` are
    the backtracking control factors.
    """

    x: np.ndarray
    w: np.ndarray
    t: float
    y: np.ndarray = None
    zeta: float = 0.1
    tau: float = 0.5
    counters: SolveCounters = field(default_factory=SolveCounters)


@dataclass
class BarrierParams:
    t0: float = 1.0
    xi: float = 10.0
    epsilon: float = 1e-4
    rho: float = 1e-8
    zeta: float = 0.1
    tau: float = 0.5
    # Thin feasible sets (the power row binds exactly at the incumbent
    # matching) produce long damped phases with small accepted steps; the
    # budget must accommodate them.
    max_newton: int = 5000
    collect_trace: bool = False

    def __post_init__(self):
        if not (self.xi > 1):
            raise ValueError("xi must exceed 1")
        if not (0 < self.zeta < 0.5):
            raise ValueError("zeta must lie in (0, 1/2)")
        if not (0 < self.tau < 1):
            raise ValueError("tau must lie in (0, 1)")
        if not (self.t0 > 0 and self.epsilon > 0 and self.rho > 0):
            raise ValueError("t0, epsilon, rho must be positive")


@dataclass
class BarrierDiagnostics:
    n_lp: int = 0
    newton_per_phase: list = field(default_factory=list)
    damped_steps: int = 0
    full_steps: int = 0
    backtracks: int = 0
    gap_proxy: float = math.inf
    trace_rows: list = field(default_factory=list)


def build_lp(scenario, allocations) -> LPData:
    """Assemble the LP from candidate allocations for every user pair.

    ``allocations`` must cover all C(2K, 2) pairs (any order); each cap
    entry is min{R_mm / R_m, R_nn / R_n, 1} with zero-rate OMA references
    treated as vacuous (ratio = +inf).
    """
    k = scenario.config.num_pairs
    n_x = k * (2 * k - 1)
    noise = scenario.noise_power

    r_s = np.full(n_x, np.nan)
    p = np.full(n_x, np.nan)
    b = np.full(n_x, np.nan)
    for alloc in allocations:
        m, n = alloc.pair.ids
        idx = vec_index(m, n, k) - 1
        report = rate_report(alloc.pair, alloc.p_far, alloc.p_near, noise)
        ratio_m = report.rate_mm / report.oma_m if report.oma_m > 0 else math.inf
        ratio_n = report.rate_nn / report.oma_n if report.oma_n > 0 else math.inf
        r_s[idx] = alloc.secrecy
        p[idx] = alloc.p_pair
        b[idx] = min(ratio_m, ratio_n, 1.0)
    if np.any(np.isnan(r_s)):
        raise ValueError("allocations must cover every candidate pair")
    if np.any(b <= 0):
        raise SolverError("cap vector left the (0, 1] range")

    eye = np.eye(n_x)
    a_mat = np.vstack([eye, -eye, p[None, :]])
    u = np.concatenate([b, np.zeros(n_x), [scenario.budget]])
    d_mat = np.zeros((2 * k, n_x))
    for idx, (m, n) in enumerate(vec_pairs(k)):
        d_mat[m - 1, idx] = 1.0
        d_mat[n - 1, idx] = 1.0
    return LPData(num_pairs=k, r_s=r_s, p=p, b=b, a_mat=a_mat, u=u, d_mat=d_mat)


def feasible_start(lp: LPData) -> np.ndarray:
    """Strictly interior start: a uniform vector clear of every inequality."""
    theta = 0.5 * min(
        float(np.min(lp.b)),
        lp.budget / float(np.sum(lp.p)) if np.sum(lp.p) > 0 else math.inf,
        1.0 / (2 * lp.num_pairs - 1),
    )
    return np.full(lp.n_x, theta)


# A = [I; -I; p'] lets the hot-path products collapse to O(n_x) forms:
# A x = [x; -x; p'x], A'y = y_box - y_sign + y_pow p, and the Hessian
# A' diag(y)^2 A is diagonal plus a rank-1 power term.  These identities
# are exact; tests pin them against the dense a_mat kept in LPData.


def _slacks(lp: LPData, x: np.ndarray) -> np.ndarray:
    n = lp.n_x
    out = np.empty(2 * n + 1)
    np.subtract(lp.b, x, out=out[:n])
    out[n:2 * n] = x
    out[2 * n] = lp.budget - lp.p @ x
    return out


def _at_y(lp: LPData, y: np.ndarray) -> np.ndarray:
    n = lp.n_x
    return y[:n] - y[n:2 * n] + y[2 * n] * lp.p


def _refresh(lp: LPData, state: BarrierState) -> np.ndarray:
    slacks = _slacks(lp, state.x)
    if np.any(slacks <= 0):
        raise SolverError("iterate left the strict interior of the inequalities")
    state.y = 1.0 / slacks
    return state.y


def barrier_gradient_hessian(lp: LPData, state: BarrierState):
    """Gradient and Hessian block of g(x) = -t r_s' x + phi(x).

    grad = -t r_s + A' y,  hess = A' diag(y)^2 A  with y the reciprocal
    slacks; this is the upper-left block of the Newton KKT matrix.
    """
    y = _refresh(lp, state)
    n = lp.n_x
    grad = -state.t * lp.r_s + _at_y(lp, y)
    hess = (y[2 * n] ** 2) * np.outer(lp.p, lp.p)
    diag = np.arange(n)
    hess[diag, diag] += y[:n] ** 2 + y[n:2 * n] ** 2
    return grad, hess


def residual_J(lp: LPData, state: BarrierState):
    """Concatenated dual/primal residual and its Frobenius norm."""
    y = _refresh(lp, state)
    r_dual = -state.t * lp.r_s + _at_y(lp, y) + lp.d_mat.T @ state.w
    r_pri = lp.d_mat @ state.x - 1.0
    vec = np.concatenate([r_dual, r_pri])
    return vec, float(np.sqrt(vec @ vec))


def _j_norm(lp: LPData, x, w, t):
    """Residual norm at a candidate point; None when not strictly interior."""
    slacks = _slacks(lp, x)
    if np.any(slacks <= 0):
        return None
    y = 1.0 / slacks
    r_dual = -t * lp.r_s + _at_y(lp, y) + lp.d_mat.T @ w
    r_pri = lp.d_mat @ x - 1.0
    return float(np.sqrt(r_dual @ r_dual + r_pri @ r_pri))


def newton_step(lp: LPData, state: BarrierState):
    """Solve the KKT system for the primal/dual Newton step via LU.

    [ A' diag(y)^2 A   D' ] [ dx     ]   [ -(-t r_s + A' y) ]
    [ D                0  ] [ w + dw ] = [ -(D x - 1)       ]
    """
    grad, hess = barrier_gradient_hessian(lp, state)
    n_x, n_w = lp.n_x, lp.d_mat.shape[0]
    kkt = np.zeros((n_x + n_w, n_x + n_w))
    kkt[:n_x, :n_x] = hess
    kkt[:n_x, n_x:] = lp.d_mat.T
    kkt[n_x:, :n_x] = lp.d_mat
    rhs = -np.concatenate([grad, lp.d_mat @ state.x - 1.0])
    try:
        sol = lu_solve(lu_factor(kkt), rhs)
    except SingularMatrixError as exc:
        raise SingularMatrixError(
            f"singular KKT system at t={state.t:g}, "
            f"newton_iters={state.counters.newton_iters}"
        ) from exc
    resid = np.linalg.norm(kkt @ sol - rhs)
    scale = np.linalg.norm(kkt) * np.linalg.norm(sol) + np.linalg.norm(rhs)
    if resid > 1e-8 * max(scale, 1.0):
        raise SolverError(f"newton step solve residual {resid:g} above tolerance")
    return sol[:n_x], sol[n_x:] - state.w


def _line_search(lp: LPData, state: BarrierState, dx, dw, j0=None):
    """Backtracking core; returns (step, accepted residual norm)."""
    if j0 is None:
        j0 = _j_norm(lp, state.x, state.w, state.t)
    if j0 is None:
        raise SolverError("line search started outside the strict interior")
    if j0 == 0.0 or (not np.any(dx) and not np.any(dw)):
        # A zero step holds the iterate; this is the fixed-point case.
        return 1.0, j0
    s = 1.0
    while True:
        cand = _j_norm(lp, state.x + s * dx, state.w + s * dw, state.t)
        state.counters.line_search_steps += 1
        if cand is not None and cand <= (1.0 - state.zeta * s) * j0:
            return s, cand
        s *= state.tau
        if s < _MIN_STEP:
            raise LineSearchError(f"line search underflow at t={state.t:g}, |J|={j0:g}")


def line_search(lp: LPData, state: BarrierState, dx, dw) -> float:
    """Largest s = tau^j with residual decrease and strict interiority."""
    return _line_search(lp, state, dx, dw)[0]


def _rho_floor(params: BarrierParams, lp: LPData, t: float) -> float:
    # The gradient cancels O(t r_s) terms, so the attainable |J| in doubles
    # is bounded below; without this floor the final phases of very tight
    # epsilon runs stall in the line search instead of converging.
    return max(params.rho, 1024.0 * _EPS * (1.0 + t * float(np.linalg.norm(lp.r_s))))


def barrier_solve(lp: LPData, params: BarrierParams = None):
    """Drive the barrier outer loop to a fractional pairing.

    Returns (x, diagnostics).  Each inner phase runs infeasible-start
    Newton at fixed t until |J| and the coverage residual drop below
    rho; t then grows by xi until the gap proxy K(2K-1)/t is below
    epsilon.  The iterate is carried across phases.
    """
    params = params or BarrierParams()
    if lp.n_x == 1:
        # Single-pair instance: the coverage equalities pin x = 1 and make
        # the KKT equality rows duplicates, so Newton does not apply.
        return np.ones(1), BarrierDiagnostics(gap_proxy=lp.gap_proxy(params.t0))

    state = BarrierState(
        x=feasible_start(lp),
        w=np.zeros(lp.d_mat.shape[0]),
        t=params.t0,
        zeta=params.zeta,
        tau=params.tau,
    )
    diag = BarrierDiagnostics()

    while lp.gap_proxy(state.t) >= params.epsilon:
        rho = _rho_floor(params, lp, state.t)
        phase_iters = 0
        norms = []
        last_step = 1.0
        j_norm = _j_norm(lp, state.x, state.w, state.t)
        if j_norm is None:
            raise SolverError("barrier phase started outside the strict interior")
        while True:
            pri_norm = float(np.linalg.norm(lp.d_mat @ state.x - 1.0))
            if j_norm <= rho and pri_norm <= rho:
                break
            # Ill-conditioning of the KKT solve bounds the attainable |J| at
            # large t.  Near the target (within 1e4 of rho), chronically slow
            # progress means the phase is asymptoting to that floor, so stop
            # tightening; far from the target the iteration budget governs.
            norms.append(j_norm)
            if (
                j_norm <= 1e4 * rho
                and len(norms) >= 10
                and j_norm > 0.9 * norms[-10]
            ):
                break
            # A crawl far from the target with vanishing steps means the
            # strict interior is (numerically) empty: the incumbent matching
            # can be the cheapest cover, and then no point satisfies the
            # coverage equalities with power to spare.  The barrier method
            # cannot run there; fail fast so callers can switch solvers.
            if (
                len(norms) >= 25
                and j_norm > 0.95 * norms[-25]
                and last_step < 1e-2
            ):
                raise ConvergenceError(
                    f"newton phase at t={state.t:g} stalled at |J|={j_norm:g}; "
                    "the feasible interior is empty or too thin for the barrier"
                )
            if phase_iters >= params.max_newton:
                raise ConvergenceError(
                    f"newton phase at t={state.t:g} exceeded {params.max_newton} "
                    f"iterations (|J|={j_norm:g})"
                )
            dx, dw = newton_step(lp, state)
            s, j_new = _line_search(lp, state, dx, dw, j0=j_norm)
            if j_new >= j_norm:
                # At float resolution (1 - zeta*s) rounds to 1 for extreme
                # backtracking, so the accepted step no longer decreases the
                # residual: this t has reached its attainable floor.
                break
            last_step = s
            j_norm = j_new
            state.x = state.x + s * dx
            state.w = state.w + s * dw
            state.counters.newton_iters += 1
            phase_iters += 1
            if s < 1.0:
                diag.damped_steps += 1
            else:
                diag.full_steps += 1
            if params.collect_trace:
                slacks = _slacks(lp, state.x)
                diag.trace_rows.append(
                    (state.t, j_norm, s, float(np.min(slacks)))
                )
        diag.newton_per_phase.append(phase_iters)
        state.t *= params.xi
        state.counters.n_lp += 1

    diag.n_lp = state.counters.n_lp
    diag.backtracks = state.counters.line_search_steps - state.counters.newton_iters
    diag.gap_proxy = lp.gap_proxy(state.t)
    _refresh(lp, state)
    return state.x, diag
