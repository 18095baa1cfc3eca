"""Comparison schemes: random pairing, Gale-Shapley pairing, and a
two-phase simplex LP solver that can replace the barrier method.

All schemes reuse the shared power/rate code paths; nothing here owns
scheme-specific rate math.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InfeasibleLPError
from .pairing_lp import LPData
from .power_alloc import pn_star
from .rate_model import OrderedPair, secrecy_rate
from .rounding import Pairing

_PIVOT_TOL = 1e-10
_PHASE1_TOL = 1e-7


def random_pairing(scenario, rng) -> Pairing:
    """Uniformly random perfect matching (shuffle, pair consecutive)."""
    ids = np.arange(1, scenario.num_users + 1)
    rng.shuffle(ids)
    pairs = tuple(
        sorted(tuple(sorted((int(ids[2 * i]), int(ids[2 * i + 1]))))
               for i in range(scenario.num_users // 2))
    )
    return Pairing(num_users=scenario.num_users, pairs=pairs)


def _equal_budget_secrecy(scenario, strong_id, weak_id):
    """Pair secrecy under an equal per-pair budget with the parity split."""
    pair = OrderedPair(strong_id, weak_id,
                       scenario.gain(strong_id), scenario.gain(weak_id))
    p_pair = scenario.budget / scenario.config.num_pairs
    p_near = pn_star(pair, p_pair, scenario.noise_power)
    return secrecy_rate(pair, p_pair - p_near, p_near, scenario.noise_power)


def gale_shapley_pairing(scenario) -> Pairing:
    """Deferred acceptance between the strong half and the weak half.

    The K strongest users (by gain) propose, the K weakest receive; both
    sides rank the other side by the secrecy rate the pair would earn
    under an equal per-pair power budget.  The outcome is stable for
    these preference lists.
    """
    order = sorted(range(1, scenario.num_users + 1),
                   key=lambda uid: (-scenario.gain(uid), uid))
    k = scenario.config.num_pairs
    proposers, receivers = order[:k], order[k:]

    score = {
        (p, r): _equal_budget_secrecy(scenario, p, r)
        for p in proposers for r in receivers
    }
    pref = {
        p: sorted(receivers, key=lambda r: (-score[(p, r)], r))
        for p in proposers
    }
    rank = {
        r: {p: i for i, p in enumerate(
            sorted(proposers, key=lambda p: (-score[(p, r)], p)))}
        for r in receivers
    }

    next_choice = {p: 0 for p in proposers}
    engaged = {}          # receiver -> proposer
    free = list(proposers)
    while free:
        p = free.pop(0)
        r = pref[p][next_choice[p]]
        next_choice[p] += 1
        held = engaged.get(r)
        if held is None:
            engaged[r] = p
        elif rank[r][p] < rank[r][held]:
            engaged[r] = p
            free.append(held)
        else:
            free.append(p)

    pairs = tuple(sorted(tuple(sorted((p, r))) for r, p in engaged.items()))
    return Pairing(num_users=scenario.num_users, pairs=pairs)


@dataclass
class SimplexTableau:
    """Dense tableau with the current basis; last column is the RHS."""

    tableau: np.ndarray
    basis: list
    phase: int


def _bland_entering(costs, allowed):
    for j in range(costs.shape[0]):
        if allowed[j] and costs[j] < -_PIVOT_TOL:
            return j
    return -1


def _bland_leaving(tab, basis, col):
    rows, rhs = tab.shape[0], tab.shape[1] - 1
    best = None
    for i in range(rows):
        a = tab[i, col]
        if a > _PIVOT_TOL:
            ratio = tab[i, rhs] / a
            if best is None or ratio < best[0] - _PIVOT_TOL or (
                abs(ratio - best[0]) <= _PIVOT_TOL and basis[i] < basis[best[1]]
            ):
                best = (ratio, i)
    return -1 if best is None else best[1]


def _pivot(tab, row, col):
    tab[row, :] /= tab[row, col]
    colvals = tab[:, col].copy()
    colvals[row] = 0.0
    tab -= np.outer(colvals, tab[row, :])
    tab[:, col] = 0.0
    tab[row, col] = 1.0


def _run_simplex(tab, basis, costs, allowed, max_pivots):
    """Minimize costs' x over the tableau rows with Bland's rule."""
    m = tab.shape[0]
    z = costs.copy().astype(float)
    offset = 0.0
    for i in range(m):
        if costs[basis[i]] != 0.0:
            z -= costs[basis[i]] * tab[i, :-1]
            offset += costs[basis[i]] * tab[i, -1]
    for _ in range(max_pivots):
        col = _bland_entering(z, allowed)
        if col < 0:
            return offset
        row = _bland_leaving(tab, basis, col)
        if row < 0:
            raise ConvergenceError("simplex detected an unbounded direction")
        _pivot(tab, row, col)
        offset += z[col] * tab[row, -1]
        z -= z[col] * tab[row, :-1]
        basis[row] = col
    raise ConvergenceError("simplex exceeded its pivot budget")


def simplex_solve(lp: LPData) -> np.ndarray:
    """Optimal fractional pairing via two-phase simplex with Bland's rule.

    Standard form: box rows x + s = b and the power row p' x + s = P get
    slacks; the coverage equalities D x = 1 get phase-1 artificials.
    Nonnegativity of x is handled as variable bounds, not rows.
    """
    n_x = lp.n_x
    n_eq = lp.d_mat.shape[0]
    n_slack = n_x + 1
    n_art = n_eq
    m = n_x + 1 + n_eq
    cols = n_x + n_slack + n_art + 1

    tab = np.zeros((m, cols))
    # box rows
    tab[:n_x, :n_x] = np.eye(n_x)
    tab[:n_x, n_x:n_x + n_x] = np.eye(n_x)
    tab[:n_x, -1] = lp.b
    # power row
    tab[n_x, :n_x] = lp.p
    tab[n_x, n_x + n_x] = 1.0
    tab[n_x, -1] = lp.budget
    # coverage rows with artificials
    tab[n_x + 1:, :n_x] = lp.d_mat
    tab[n_x + 1:, n_x + n_slack:n_x + n_slack + n_art] = np.eye(n_art)
    tab[n_x + 1:, -1] = 1.0

    state = SimplexTableau(
        tableau=tab,
        basis=list(range(n_x, n_x + n_slack + n_art)),
        phase=1,
    )
    max_pivots = 200 * (m + cols)
    rhs_scale = max(1.0, float(np.sum(np.abs(tab[:, -1]))))

    # Phase 1: drive the artificials to zero (they may leave, never re-enter).
    costs1 = np.zeros(cols - 1)
    costs1[n_x + n_slack:] = 1.0
    allowed = np.ones(cols - 1, dtype=bool)
    allowed[n_x + n_slack:] = False
    value = _run_simplex(state.tableau, state.basis, costs1, allowed, max_pivots)
    if value > _PHASE1_TOL * rhs_scale:
        raise InfeasibleLPError(f"phase-1 optimum {value:g} is positive")

    # Pivot any degenerate artificial out of the basis when possible.
    for i in range(m):
        if state.basis[i] >= n_x + n_slack:
            for j in range(n_x + n_slack):
                if abs(state.tableau[i, j]) > _PIVOT_TOL:
                    _pivot(state.tableau, i, j)
                    state.basis[i] = j
                    break

    # Phase 2: artificials are banned from entering.
    state.phase = 2
    costs2 = np.zeros(cols - 1)
    costs2[:n_x] = -lp.r_s
    allowed = np.ones(cols - 1, dtype=bool)
    allowed[n_x + n_slack:] = False
    _run_simplex(state.tableau, state.basis, costs2, allowed, max_pivots)

    x = np.zeros(n_x)
    for i, var in enumerate(state.basis):
        if var < n_x:
            x[var] = state.tableau[i, -1]
    return x
