"""Closed-form per-pair power allocation and total-power calibration.

Given a pair's total power, the near user's share is pinned by the far
user's OMA-parity constraint (it binds at the optimum because secrecy
grows with the near share).  The pair total itself maximizes secrecy
minus a price ``upsilon`` on power; the stationarity condition reduces
to a cubic in ``alpha = sqrt(1 + p * g_far / noise)`` with exactly one
positive root, solved in closed form (Cardano) with a bisection
fallback.  A scalar bisection on ``upsilon`` then makes the pair totals
exhaust the cell budget.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, SolverError
from .rate_model import LN2, OrderedPair, secrecy_rate

# |f(alpha)| <= CUBIC_RTOL * max(1, alpha^3) qualifies a root.
CUBIC_RTOL = 1e-9

# Budget match quality for calibrate_dual: |sum p - P| <= BUDGET_RTOL * P.
BUDGET_RTOL = 1e-8

_BRACKET_LO = 1e-12
_BRACKET_HI = 1.0
_MAX_EXPANSIONS = 200
_MIN_BRACKET_WIDTH = 1e-14

_SQRT3 = math.sqrt(3.0)
_CBRT4 = 4.0 ** (1.0 / 3.0)


@dataclass(frozen=True)
class PairAllocation:
    """Transmit powers for one pair and the resulting secrecy rate."""

    pair: OrderedPair
    p_pair: float
    p_near: float
    p_far: float
    secrecy: float


@dataclass
class DualState:
    """Bisection state for the power price."""

    upsilon: float
    total_power: float
    bracket: tuple


def pn_star(pair: OrderedPair, p_pair: float, noise: float) -> float:
    """Near user's optimal power share for a given pair total.

    Solves the far user's rate-parity constraint with equality:
    (noise / g_far) * (sqrt(1 + p_pair * g_far / noise) - 1).
    """
    if pair.gain_far <= 0:
        raise ValueError("pn_star requires a strictly positive far-user gain")
    if not (p_pair >= 0):
        raise ValueError(f"pair power must be >= 0, got {p_pair!r}")
    scale = noise / pair.gain_far
    return scale * (math.sqrt(1.0 + p_pair / scale) - 1.0)


def _cubic_coeffs(gain_far, gain_near, upsilon, noise):
    """(one_r, const): f(a) = a^3 - one_r a^2 - const, const = c*one_r/2."""
    one_r = (gain_near - gain_far) / gain_near
    c = gain_far / (LN2 * noise * upsilon)
    return one_r, 0.5 * c * one_r


def _cubic_residual(alpha, one_r, const):
    return alpha ** 3 - one_r * alpha ** 2 - const


def _alpha_closed_form(gain_far, gain_near, upsilon, noise):
    """Vectorized Cardano root of the stationarity cubic.

    The aggregate under the cube root is a sum of nonnegative terms, so
    no cancellation occurs at either scale extreme; np.cbrt is itself
    scale-safe.  One Newton polish step tightens the root to full double
    precision.
    """
    r = gain_far / gain_near
    one_r = 1.0 - r
    c = gain_far / (LN2 * noise * upsilon)
    radicand = c * (8.0 * one_r * one_r + 27.0 * c)
    if np.any(radicand < 0):
        raise ValueError("negative radicand in the cubic aggregate; "
                         "inputs violate 0 < gain_far < gain_near, upsilon > 0")
    aggregate = (
        4.0 * one_r ** 3
        + 27.0 * c * one_r
        + 3.0 * _SQRT3 * one_r * np.sqrt(radicand)
    )
    cbrt_a = np.cbrt(aggregate)
    alpha = (
        cbrt_a / (3.0 * _CBRT4)
        + _CBRT4 * one_r * one_r / (3.0 * cbrt_a)
        + one_r / 3.0
    )
    const = 0.5 * c * one_r
    for _ in range(2):
        f = alpha ** 3 - one_r * alpha ** 2 - const
        df = 3.0 * alpha ** 2 - 2.0 * one_r * alpha
        step = np.where(df != 0.0, f / np.where(df != 0.0, df, 1.0), 0.0)
        alpha = alpha - step
    return alpha


def _alpha_bisect(one_r, const):
    """Scalar bisection fallback for one cubic root."""
    lo, hi = 0.0, max(1.0, one_r)
    while _cubic_residual(hi, one_r, const) < 0.0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _cubic_residual(mid, one_r, const) <= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _alpha_roots(gain_far, gain_near, upsilon, noise):
    """Root array with per-element residual check and bisection fallback."""
    gain_far = np.asarray(gain_far, dtype=float)
    gain_near = np.asarray(gain_near, dtype=float)
    alpha = _alpha_closed_form(gain_far, gain_near, upsilon, noise)
    one_r = (gain_near - gain_far) / gain_near
    const = 0.5 * one_r * gain_far / (LN2 * noise * upsilon)
    resid = np.abs(alpha ** 3 - one_r * alpha ** 2 - const)
    bad = resid > CUBIC_RTOL * np.maximum(1.0, alpha ** 3)
    if np.any(bad):
        flat_a = alpha.reshape(-1)
        flat_r = one_r.reshape(-1)
        flat_c = const.reshape(-1)
        for i in np.flatnonzero(bad.reshape(-1)):
            flat_a[i] = _alpha_bisect(flat_r[i], flat_c[i])
        alpha = flat_a.reshape(alpha.shape)
    return alpha


def cardano_alpha(pair: OrderedPair, upsilon: float, noise: float) -> float:
    """Unique positive root of the power-stationarity cubic for one pair."""
    if not (upsilon > 0):
        raise ValueError(f"upsilon must be > 0, got {upsilon!r}")
    if not (pair.gain_far < pair.gain_near):
        raise ValueError("cardano_alpha requires gain_far < gain_near")
    if pair.gain_far <= 0:
        raise ValueError("cardano_alpha requires gain_far > 0")
    return float(_alpha_roots(pair.gain_far, pair.gain_near, upsilon, noise))


def _pair_totals(gain_far, gain_near, upsilon, noise):
    """Vectorized optimal pair totals at price upsilon (clamped at 0)."""
    alpha = _alpha_roots(gain_far, gain_near, upsilon, noise)
    return np.maximum((noise / gain_far) * (alpha ** 2 - 1.0), 0.0)


def pair_power_star(pair: OrderedPair, upsilon: float, noise: float) -> float:
    """Optimal total power for one pair at price upsilon.

    (noise / g_far) * (alpha^2 - 1) from the cubic root; zero whenever
    the root lands at or below 1 (the price exceeds the pair's marginal
    secrecy value at zero power).
    """
    alpha = cardano_alpha(pair, upsilon, noise)
    if alpha <= 1.0:
        return 0.0
    return (noise / pair.gain_far) * (alpha ** 2 - 1.0)


def _allocation(pair: OrderedPair, p_pair: float, noise: float) -> PairAllocation:
    p_near = pn_star(pair, p_pair, noise)
    p_far = max(p_pair - p_near, 0.0)
    return PairAllocation(
        pair=pair,
        p_pair=p_pair,
        p_near=p_near,
        p_far=p_far,
        secrecy=secrecy_rate(pair, p_far, p_near, noise),
    )


def allocations_at_dual(pairs, upsilon: float, noise: float):
    """Per-pair allocations at a common price (used to price LP candidates)."""
    gm = np.array([p.gain_far for p in pairs])
    gn = np.array([p.gain_near for p in pairs])
    totals = _pair_totals(gm, gn, upsilon, noise)
    return [_allocation(pair, float(t), noise) for pair, t in zip(pairs, totals)]


def calibrate_dual(pairs, total_power: float, noise: float):
    """Bisect the power price until the pair totals exhaust the budget.

    Returns (upsilon, allocations).  The summed total is nonincreasing in
    the price and sweeps (0, inf), so a bracket always exists; expansion
    failure after the configured doublings raises ConvergenceError.
    """
    if not pairs:
        raise ValueError("calibrate_dual needs at least one pair")
    if not (total_power > 0):
        raise ValueError(f"total power must be > 0, got {total_power!r}")
    gm = np.array([p.gain_far for p in pairs])
    gn = np.array([p.gain_near for p in pairs])

    def summed(upsilon):
        return float(np.sum(_pair_totals(gm, gn, upsilon, noise)))

    lo, hi = _BRACKET_LO, _BRACKET_HI
    sum_lo, sum_hi = summed(lo), summed(hi)
    grew = 0
    while sum_hi > total_power:
        lo, sum_lo = hi, sum_hi
        hi *= 2.0
        sum_hi = summed(hi)
        grew += 1
        if grew > _MAX_EXPANSIONS:
            raise ConvergenceError("price bracket expansion failed (upper)")
    grew = 0
    while sum_lo < total_power:
        hi, sum_hi = lo, sum_lo
        lo /= 2.0
        sum_lo = summed(lo)
        grew += 1
        if grew > _MAX_EXPANSIONS:
            raise ConvergenceError("price bracket expansion failed (lower)")

    state = DualState(upsilon=hi, total_power=sum_hi, bracket=(lo, hi))
    tol = BUDGET_RTOL * total_power
    while True:
        if sum_lo + 1e-9 * (1.0 + total_power) < sum_hi:
            raise SolverError("pair totals are not monotone in the price")
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi):
            break  # bracket exhausted at double precision
        total_mid = summed(mid)
        state = DualState(upsilon=mid, total_power=total_mid, bracket=(lo, hi))
        if abs(total_mid - total_power) <= tol or (hi - lo) < _MIN_BRACKET_WIDTH:
            break
        if total_mid > total_power:
            lo, sum_lo = mid, total_mid
        else:
            hi, sum_hi = mid, total_mid

    return state.upsilon, allocations_at_dual(pairs, state.upsilon, noise)


def epa_allocation(pairs, total_power: float, noise: float):
    """Equal power allocation: every user gets P / (2K)."""
    if not (total_power > 0):
        raise ValueError(f"total power must be > 0, got {total_power!r}")
    share = total_power / (2 * len(pairs))
    return [
        PairAllocation(
            pair=pair,
            p_pair=2 * share,
            p_near=share,
            p_far=share,
            secrecy=secrecy_rate(pair, share, share, noise),
        )
        for pair in pairs
    ]
