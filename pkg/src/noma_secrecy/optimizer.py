"""Outer alternation: powers given a matching, matching given powers.

Each round calibrates the power price on the current matching, prices
every candidate pair at that price, solves the fractional pairing LP,
and rounds greedily back to a matching.  The loop stops once the sum
secrecy rate moves less than ``eta`` between consecutive rounds (or the
round budget runs out).  Rounding can step backwards, so the best
matching seen is retained and returned.
"""

from dataclasses import dataclass, field

from .errors import ConvergenceError, LineSearchError
from .pairing_lp import BarrierParams, barrier_solve, build_lp
from .power_alloc import allocations_at_dual, calibrate_dual
from .rate_model import OrderedPair
from .rounding import Pairing, greedy_round


@dataclass
class OptimizeParams:
    eta: float = 1e-6
    max_outer: int = 50
    lp_solver: str = "barrier"          # "barrier" or "simplex"
    barrier: BarrierParams = field(default_factory=BarrierParams)

    def __post_init__(self):
        if not (self.eta > 0):
            raise ValueError("eta must be positive")
        if self.max_outer < 1:
            raise ValueError("max_outer must be >= 1")
        if self.lp_solver not in ("barrier", "simplex"):
            raise ValueError(f"unknown lp_solver {self.lp_solver!r}")


@dataclass
class Solution:
    pairing: Pairing
    allocations: list
    sum_secrecy: float
    iterations: int
    trajectory: list
    converged: bool
    trace_rows: list = field(default_factory=list)


def matched_pairs(scenario, pairing: Pairing):
    """OrderedPair objects (roles assigned by gain) for a matching."""
    return [
        OrderedPair(m, n, scenario.gain(m), scenario.gain(n))
        for m, n in pairing.pairs
    ]


def all_candidate_pairs(scenario):
    """Every unordered user pair as an OrderedPair."""
    total = scenario.num_users
    return [
        OrderedPair(m, n, scenario.gain(m), scenario.gain(n))
        for m in range(1, total)
        for n in range(m + 1, total + 1)
    ]


def initial_pairing(scenario) -> Pairing:
    """Strongest-with-weakest start: rank users by gain, fold the list."""
    order = sorted(
        range(1, scenario.num_users + 1),
        key=lambda uid: (-scenario.gain(uid), uid),
    )
    k = scenario.num_users // 2
    pairs = tuple(
        sorted(tuple(sorted((order[i], order[-1 - i]))) for i in range(k))
    )
    return Pairing(num_users=scenario.num_users, pairs=pairs)


def sum_secrecy(pairing: Pairing, allocations) -> float:
    """Sum of per-pair secrecy rates over the matched pairs."""
    matched = {tuple(sorted(p)) for p in pairing.pairs}
    got = {alloc.pair.ids for alloc in allocations}
    if matched != got:
        raise ValueError("allocations do not cover exactly the matched pairs")
    return float(sum(alloc.secrecy for alloc in allocations))


def _solve_lp(lp, params: OptimizeParams):
    if params.lp_solver == "simplex":
        from .baselines import simplex_solve

        return simplex_solve(lp), []
    try:
        x, diag = barrier_solve(lp, params.barrier)
        return x, diag.trace_rows
    except (ConvergenceError, LineSearchError):
        # Degenerate pricing can leave the LP with an empty strict interior
        # (the incumbent matching is the cheapest cover and costs the whole
        # budget); the barrier's precondition fails there, so solve that
        # round with the exact vertex method instead of aborting the run.
        from .baselines import simplex_solve

        return simplex_solve(lp), []


def optimize(scenario, params: OptimizeParams = None) -> Solution:
    """Alternate closed-form power allocation and LP pairing to convergence."""
    params = params or OptimizeParams()
    noise, budget = scenario.noise_power, scenario.budget
    candidates = all_candidate_pairs(scenario)

    pairing = initial_pairing(scenario)
    trajectory = []
    trace_rows = []
    best = None
    prev_rate = None
    lp_rounds = 0
    converged = False

    while True:
        upsilon, allocations = calibrate_dual(
            matched_pairs(scenario, pairing), budget, noise
        )
        rate = sum_secrecy(pairing, allocations)
        trajectory.append(rate)
        if best is None or rate > best[0]:
            best = (rate, pairing, allocations)
        if prev_rate is not None and abs(rate - prev_rate) < params.eta:
            converged = True
            break
        if lp_rounds >= params.max_outer:
            break
        prev_rate = rate

        lp = build_lp(scenario, allocations_at_dual(candidates, upsilon, noise))
        x_frac, rows = _solve_lp(lp, params)
        trace_rows.extend(rows)
        pairing = greedy_round(x_frac, scenario.config.num_pairs)
        lp_rounds += 1

    rate, pairing, allocations = best
    return Solution(
        pairing=pairing,
        allocations=allocations,
        sum_secrecy=rate,
        iterations=lp_rounds,
        trajectory=trajectory,
        converged=converged,
        trace_rows=trace_rows,
    )
