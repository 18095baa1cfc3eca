"""Shared helpers: independent oracles and synthetic instance builders.

Everything here is deliberately written from first principles (loops,
bisection, brute force) so the tests check the library against
independent computations rather than against itself.
"""

import math

import numpy as np
import pytest

from noma_secrecy.rate_model import OrderedPair
from noma_secrecy.scenario import Scenario, SystemConfig, UserChannel

LN2 = math.log(2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)


def random_ordered_pair(rng, gain_lo=0.05, gain_hi=3.0):
    """A pair with O(1) gains so finite differences are well scaled."""
    gm = rng.uniform(gain_lo, gain_hi)
    gn = gm * (1.0 + rng.uniform(0.05, 3.0))
    return OrderedPair(1, 2, gm, gn)


def make_scenario(gains, budget=1.0, noise=1.0, num_pairs=None):
    """Hand-built scenario with prescribed gain_sq values."""
    k = num_pairs or len(gains) // 2
    config = SystemConfig(num_pairs=k, rng_seed=0)
    users = tuple(
        UserChannel(user_id=i + 1, distance=1.0, fading_coeff_sq=g, gain_sq=g)
        for i, g in enumerate(gains)
    )
    return Scenario(config=config, users=users, noise_power=noise, budget=budget)


def cubic_residual(alpha, gain_far, gain_near, noise, upsilon):
    """The stationarity cubic f(alpha), written independently."""
    one_r = (gain_near - gain_far) / gain_near
    const = gain_far * (gain_near - gain_far) / (2 * LN2 * noise * upsilon * gain_near)
    return alpha ** 3 - one_r * alpha ** 2 - const


def bisect_alpha(gain_far, gain_near, noise, upsilon, iters=200):
    """Independent bisection root of the cubic on an expanding bracket."""
    lo, hi = 0.0, 1.0
    while cubic_residual(hi, gain_far, gain_near, noise, upsilon) < 0.0:
        hi *= 2.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if cubic_residual(mid, gain_far, gain_near, noise, upsilon) <= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def secrecy_of_pair_total(p_pair, gain_far, gain_near, noise):
    """Secrecy rate as a function of the pair total with the parity split."""
    root = math.sqrt(1.0 + p_pair * gain_far / noise)
    return (
        math.log2(1.0 + (gain_near / gain_far) * (root - 1.0))
        - 0.5 * math.log2(1.0 + p_pair * gain_far / noise)
    )


def priced_objective(p_pair, gain_far, gain_near, noise, upsilon):
    """Pair secrecy minus the power price; maximized by pair_power_star."""
    return secrecy_of_pair_total(p_pair, gain_far, gain_near, noise) - upsilon * p_pair


def all_perfect_matchings(user_ids):
    """Enumerate every perfect matching of the given users."""
    ids = sorted(user_ids)
    if not ids:
        return [()]
    first, rest = ids[0], ids[1:]
    out = []
    for i, partner in enumerate(rest):
        others = rest[:i] + rest[i + 1:]
        for sub in all_perfect_matchings(others):
            out.append(((first, partner),) + sub)
    return out
