"""SINRs, achievable rates, and secrecy rates for one ordered NOMA pair.

Within a pair the near user (larger channel gain) decodes the far user's
signal first and removes it by SIC; the far user decodes its own signal
treating the near user's as interference.  Because both users can attempt
to decode each other, the near user's secrecy rate is its SIC rate minus
what the far user can overhear, floored at zero.

All functions are pure and hold rates in bits/s/Hz.
"""

import math
from dataclasses import dataclass

LN2 = math.log(2.0)


def log2(x: float) -> float:
    """Base-2 log via ln for cross-platform bit consistency."""
    return math.log(x) / LN2


@dataclass(frozen=True)
class OrderedPair:
    """A user pair with roles fixed by channel gain: far < near.

    The constructor swaps the two users if needed, so callers may pass
    them in any order.  Equal gains are tolerated (degenerate pair with
    zero secrecy); sampled scenarios jitter ties away.
    """

    far: int
    near: int
    gain_far: float
    gain_near: float

    def __post_init__(self):
        for g in (self.gain_far, self.gain_near):
            if not (math.isfinite(g) and g >= 0):
                raise ValueError(f"channel gains must be finite and >= 0, got {g!r}")
        if self.far == self.near:
            raise ValueError("a pair needs two distinct users")
        if self.gain_far > self.gain_near:
            far, near = self.far, self.near
            g_far, g_near = self.gain_far, self.gain_near
            object.__setattr__(self, "far", near)
            object.__setattr__(self, "near", far)
            object.__setattr__(self, "gain_far", g_near)
            object.__setattr__(self, "gain_near", g_far)

    @property
    def ids(self):
        """(min_id, max_id) — the role-free identity of the pair."""
        return (min(self.far, self.near), max(self.far, self.near))


@dataclass(frozen=True)
class RateReport:
    """All per-pair SINRs and rates for one power split."""

    sinr_mn: float
    sinr_nn: float
    sinr_mm: float
    sinr_nm: float
    rate_nn: float
    rate_mm: float
    eaves_nm: float
    secrecy: float
    oma_m: float
    oma_n: float


def _check_powers(noise, *powers):
    if not (math.isfinite(noise) and noise > 0):
        raise ValueError(f"noise power must be finite and positive, got {noise!r}")
    for p in powers:
        if not (math.isfinite(p) and p >= 0):
            raise ValueError(f"transmit powers must be finite and >= 0, got {p!r}")


def sinr_terms(pair: OrderedPair, p_far: float, p_near: float, noise: float):
    """The four decoding SINRs (gamma_mn, gamma_nn, gamma_mm, gamma_nm).

    gamma_mn: far signal decoded at the near user (before its SIC);
    gamma_nn: near signal at the near user after SIC;
    gamma_mm: far signal at the far user under near-user interference;
    gamma_nm: near signal overheard at the far user after its SIC.
    """
    _check_powers(noise, p_far, p_near)
    gm, gn = pair.gain_far, pair.gain_near
    gamma_mn = p_far * gn / (p_near * gn + noise)
    gamma_nn = p_near * gn / noise
    gamma_mm = p_far * gm / (p_near * gm + noise)
    gamma_nm = p_near * gm / noise
    return gamma_mn, gamma_nn, gamma_mm, gamma_nm


def secrecy_rate(pair: OrderedPair, p_far: float, p_near: float, noise: float) -> float:
    """Near user's secrecy rate: max{R_nn - R_nm, 0}."""
    _, gamma_nn, _, gamma_nm = sinr_terms(pair, p_far, p_near, noise)
    return max(log2(1.0 + gamma_nn) - log2(1.0 + gamma_nm), 0.0)


def secrecy_rate_deriv_pn(pair: OrderedPair, p_near: float, noise: float) -> float:
    """Closed-form d(secrecy)/d(p_near); nonnegative whenever far < near."""
    _check_powers(noise, p_near)
    gm, gn = pair.gain_far, pair.gain_near
    num = (gn - gm) * noise
    den = (p_near * gn + noise) * (p_near * gm + noise)
    return num / (LN2 * den)


def oma_rates(pair: OrderedPair, p_pair: float, noise: float):
    """Reference OMA rates (R_m, R_n) at the pair's total power.

    Each user would get the whole pair budget but only half the resource,
    hence the 1/2 multiplexing factor.
    """
    _check_powers(noise, p_pair)
    r_m = 0.5 * log2(1.0 + p_pair * pair.gain_far / noise)
    r_n = 0.5 * log2(1.0 + p_pair * pair.gain_near / noise)
    return r_m, r_n


def rate_report(pair: OrderedPair, p_far: float, p_near: float, noise: float) -> RateReport:
    """Bundle every SINR/rate quantity for one power split."""
    gamma_mn, gamma_nn, gamma_mm, gamma_nm = sinr_terms(pair, p_far, p_near, noise)
    rate_nn = log2(1.0 + gamma_nn)
    rate_mm = log2(1.0 + gamma_mm)
    eaves_nm = log2(1.0 + gamma_nm)
    oma_m, oma_n = oma_rates(pair, p_far + p_near, noise)
    return RateReport(
        sinr_mn=gamma_mn,
        sinr_nn=gamma_nn,
        sinr_mm=gamma_mm,
        sinr_nm=gamma_nm,
        rate_nn=rate_nn,
        rate_mm=rate_mm,
        eaves_nm=eaves_nm,
        secrecy=max(rate_nn - eaves_nm, 0.0),
        oma_m=oma_m,
        oma_n=oma_n,
    )
