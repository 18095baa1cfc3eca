import math

import numpy as np
import pytest
from scipy import stats

from noma_secrecy.scenario import (
    MIN_DISTANCE_M,
    SystemConfig,
    dbm_to_watts,
    load_config,
    noise_power,
    sample_scenario,
    trial_config,
)


def test_dbm_anchor_values():
    assert dbm_to_watts(30.0) == pytest.approx(1.0, rel=1e-12)
    assert dbm_to_watts(20.0) == pytest.approx(0.1, rel=1e-12)
    assert dbm_to_watts(0.0) == pytest.approx(1e-3, rel=1e-12)


def test_dbm_rejects_non_finite():
    with pytest.raises(ValueError):
        dbm_to_watts(math.nan)
    with pytest.raises(ValueError):
        dbm_to_watts(math.inf)


def test_noise_power_values():
    # 1 Hz band reduces to a pure dBm conversion.
    assert noise_power(-174.0, 1.0) == pytest.approx(3.9810717055349726e-21, rel=1e-12)
    assert noise_power(-174.0, 5e5) == pytest.approx(1.9905358527674843e-15, rel=1e-12)
    assert noise_power(-144.0, 1e3) == pytest.approx(3.981071705534973e-15, rel=1e-12)
    with pytest.raises(ValueError):
        noise_power(-174.0, 0.0)


def test_config_validation():
    with pytest.raises(ValueError):
        SystemConfig(num_pairs=0)
    with pytest.raises(ValueError):
        SystemConfig(cell_radius=-1.0)
    with pytest.raises(ValueError):
        SystemConfig(bandwidth=0.0)
    with pytest.raises(ValueError):
        SystemConfig(rng_seed=-1)


def test_same_seed_same_scenario():
    config = SystemConfig(num_pairs=4, rng_seed=11)
    a, b = sample_scenario(config), sample_scenario(config)
    assert a == b


def test_different_seeds_differ():
    a = sample_scenario(SystemConfig(num_pairs=4, rng_seed=1))
    b = sample_scenario(SystemConfig(num_pairs=4, rng_seed=2))
    assert [u.fading_coeff_sq for u in a.users] != [u.fading_coeff_sq for u in b.users]


def test_cardinality_and_positivity():
    scenario = sample_scenario(SystemConfig(num_pairs=4, rng_seed=5))
    assert scenario.num_users == 8
    assert all(u.gain_sq > 0 for u in scenario.users)
    assert all(MIN_DISTANCE_M <= u.distance <= 300.0 for u in scenario.users)


def test_gain_composition_invariant():
    scenario = sample_scenario(SystemConfig(num_pairs=8, rng_seed=17))
    alpha = scenario.config.path_loss_exponent
    for u in scenario.users:
        assert u.gain_sq == pytest.approx(
            u.fading_coeff_sq * u.distance ** (-2 * alpha), rel=1e-12
        )


def test_gains_distinct():
    for seed in range(50):
        scenario = sample_scenario(SystemConfig(num_pairs=8, rng_seed=seed))
        gains = [u.gain_sq for u in scenario.users]
        assert len(set(gains)) == len(gains)


def test_fading_unit_mean():
    scenario = sample_scenario(SystemConfig(num_pairs=60000, rng_seed=4))
    fading = np.array([u.fading_coeff_sq for u in scenario.users])
    assert fading.size >= 1e5
    assert 0.99 <= fading.mean() <= 1.01


def test_disc_placement_uniform():
    config = SystemConfig(num_pairs=60000, rng_seed=21)
    scenario = sample_scenario(config)
    d = np.array([u.distance for u in scenario.users])
    u = (d / config.cell_radius) ** 2
    ks = stats.kstest(u, "uniform").statistic
    assert ks < 0.01


def test_gain_decreasing_in_distance():
    config = SystemConfig()
    fading = 0.7
    distances = np.linspace(1.0, 300.0, 500)
    gains = fading * distances ** (-2 * config.path_loss_exponent)
    assert np.all(np.diff(gains) < 0)


def test_trial_config_xor_rule():
    config = SystemConfig(rng_seed=0b1100)
    assert trial_config(config, 0).rng_seed == 0b1100
    assert trial_config(config, 0b1010).rng_seed == 0b0110
    with pytest.raises(ValueError):
        trial_config(config, -1)


def test_load_config_roundtrip(tmp_path):
    path = tmp_path / "system.cfg"
    path.write_text(
        "# comment line\n"
        "num_pairs = 5\n"
        "cell_radius = 250.0\n"
        "total_power_dbm = 23  # trailing comment\n"
        "\n"
        "rng_seed = 99\n"
    )
    config = load_config(path)
    assert config.num_pairs == 5
    assert config.cell_radius == 250.0
    assert config.total_power_dbm == 23.0
    assert config.rng_seed == 99
    # untouched keys keep their defaults
    assert config.bandwidth == 0.5e6
    assert config.noise_psd_dbm_per_hz == -174.0


def test_load_config_rejects_unknown_key(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("powr = 3\n")
    with pytest.raises(ValueError, match="unknown config key"):
        load_config(path)


def test_load_config_rejects_bad_value(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("num_pairs = many\n")
    with pytest.raises(ValueError, match="bad value"):
        load_config(path)
