"""Reproducible network instances for the downlink simulator.

A scenario is one snapshot of a single-cell downlink: 2K users dropped
uniformly at random inside a disc around the base station, each with an
independent unit-mean exponential fading power (Rayleigh amplitude) and a
power-law path loss.  All randomness flows through a seeded PCG64 stream so
that every instance is bit-reproducible across platforms.

Stream-splitting rule: Monte-Carlo trial ``i`` of an experiment uses the
config seed XOR ``i`` (see :func:`trial_config`); auxiliary draws inside a
trial (e.g. the random-pairing baseline) use ``SeedSequence([seed, k])``
with a documented per-purpose constant ``k`` so they never collide with
the scenario stream, which is ``SeedSequence([seed, 0])``.

Rates everywhere in this package are spectral efficiencies in bits/s/Hz;
multiply by ``SystemConfig.bandwidth`` to obtain bits/s.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

# Users closer than this are clipped outward; the path-loss law otherwise
# produces unbounded gains at the cell center.
MIN_DISTANCE_M = 1.0

# Relative bump applied to break exact gain ties (the pairing model needs
# strictly ordered gains inside every pair).
TIE_JITTER = 1e-12

_SCENARIO_STREAM = 0


@dataclass(frozen=True)
class SystemConfig:
    """Static system parameters.

    Attributes
    ----------
    num_pairs:
        K, the number of resource blocks; the cell serves 2K users.
    cell_radius:
        Disc radius in meters.
    path_loss_exponent:
        Amplitude path-loss exponent; gain falls as d**(-2*exponent).
    bandwidth:
        Resource-block bandwidth in Hz.
    noise_psd_dbm_per_hz:
        Receiver noise power spectral density in dBm/Hz.
    total_power_dbm:
        Base-station transmit power budget in dBm.
    rng_seed:
        64-bit seed for the sampling stream.
    """

    num_pairs: int = 4
    cell_radius: float = 300.0
    path_loss_exponent: float = 3.0
    bandwidth: float = 0.5e6
    noise_psd_dbm_per_hz: float = -174.0
    total_power_dbm: float = 20.0
    rng_seed: int = 20240201

    def __post_init__(self):
        if self.num_pairs < 1:
            raise ValueError("num_pairs must be >= 1")
        if not (self.cell_radius > 0):
            raise ValueError("cell_radius must be positive")
        if not (self.path_loss_exponent > 0):
            raise ValueError("path_loss_exponent must be positive")
        if not (self.bandwidth > 0):
            raise ValueError("bandwidth must be positive")
        if not (0 <= self.rng_seed < 2 ** 64):
            raise ValueError("rng_seed must fit in 64 unsigned bits")
        sigma_sq = noise_power(self.noise_psd_dbm_per_hz, self.bandwidth)
        budget = dbm_to_watts(self.total_power_dbm)
        if not (math.isfinite(sigma_sq) and sigma_sq > 0):
            raise ValueError("derived noise power must be positive and finite")
        if not (math.isfinite(budget) and budget > 0):
            raise ValueError("derived power budget must be positive and finite")

    @property
    def num_users(self) -> int:
        return 2 * self.num_pairs

    @property
    def noise_power_watts(self) -> float:
        return noise_power(self.noise_psd_dbm_per_hz, self.bandwidth)

    @property
    def total_power_watts(self) -> float:
        return dbm_to_watts(self.total_power_dbm)


@dataclass(frozen=True)
class UserChannel:
    """One user's link state: distance, fading power, and composite gain."""

    user_id: int
    distance: float
    fading_coeff_sq: float
    gain_sq: float


@dataclass(frozen=True)
class Scenario:
    """One sampled network instance. Immutable; safe to share across threads."""

    config: SystemConfig
    users: tuple
    noise_power: float
    budget: float

    @property
    def num_users(self) -> int:
        return len(self.users)

    def gain(self, user_id: int) -> float:
        return self.users[user_id - 1].gain_sq


def dbm_to_watts(dbm: float) -> float:
    """Convert a dBm level to watts: 10**((dbm - 30) / 10)."""
    if not math.isfinite(dbm):
        raise ValueError(f"non-finite dBm value: {dbm!r}")
    return 10.0 ** ((dbm - 30.0) / 10.0)


def noise_power(psd_dbm_per_hz: float, bandwidth_hz: float) -> float:
    """Total noise power in watts over a band: psd + 10*log10(bandwidth)."""
    if not (bandwidth_hz > 0):
        raise ValueError("bandwidth must be positive")
    return dbm_to_watts(psd_dbm_per_hz + 10.0 * math.log10(bandwidth_hz))


def sample_scenario(config: SystemConfig) -> Scenario:
    """Draw one network instance from the seeded stream.

    Distances come from a uniform distribution over the disc (radius is
    ``cell_radius * sqrt(U)``, clipped at :data:`MIN_DISTANCE_M`); fading
    powers are unit-mean exponential.  Same config (and seed) gives a
    bit-identical scenario.
    """
    rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence([config.rng_seed, _SCENARIO_STREAM]))
    )
    n = config.num_users
    distances = np.maximum(
        config.cell_radius * np.sqrt(rng.random(n)), MIN_DISTANCE_M
    )
    fading = rng.exponential(1.0, n)
    gains = fading * distances ** (-2.0 * config.path_loss_exponent)

    # Break exact gain ties by nudging the later-indexed user's fading.
    for j in range(1, n):
        while np.any(gains[:j] == gains[j]):
            fading[j] *= 1.0 + TIE_JITTER
            gains[j] = fading[j] * distances[j] ** (-2.0 * config.path_loss_exponent)

    users = tuple(
        UserChannel(i + 1, float(distances[i]), float(fading[i]), float(gains[i]))
        for i in range(n)
    )
    return Scenario(
        config=config,
        users=users,
        noise_power=config.noise_power_watts,
        budget=config.total_power_watts,
    )


def trial_config(config: SystemConfig, trial: int) -> SystemConfig:
    """Config for Monte-Carlo trial ``trial``: seed = base seed XOR trial."""
    if trial < 0:
        raise ValueError("trial index must be nonnegative")
    return replace(config, rng_seed=(config.rng_seed ^ trial) & (2 ** 64 - 1))


# Flat `key = value` config files; exact keys, one per line, `#` comments.
_CONFIG_PARSERS = {
    "num_pairs": int,
    "cell_radius": float,
    "path_loss_exponent": float,
    "bandwidth": float,
    "noise_psd_dbm_per_hz": float,
    "total_power_dbm": float,
    "rng_seed": int,
}


def load_config(path) -> SystemConfig:
    """Read a :class:`SystemConfig` from a flat key-value file.

    Unspecified keys keep their defaults; unknown keys are an error.
    """
    overrides = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _CONFIG_PARSERS:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            try:
                overrides[key] = _CONFIG_PARSERS[key](value)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad value for {key!r}: {value!r}") from exc
    return SystemConfig(**overrides)
