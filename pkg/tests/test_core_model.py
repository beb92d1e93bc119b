import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pass_isac.core_model import (
    Beamformer,
    DomainError,
    RatePair,
    Scenario,
    SystemConfig,
    comm_rate,
    comm_snr,
    dbm_to_watts,
    fixed_antenna_rates,
    rate_pair,
    sense_rate,
    watts_to_dbm,
)

FIG4 = Scenario(8.0, 1.0, -8.0, -1.0)

# 40-digit evaluations of the array sums, frozen
FROZEN = [
    # (positions, scenario, feed, loss dB/m, CR, SR)
    ([8.0], FIG4, -10.0, 0.0, 16.628367501847475, 0.0039613843171655357),
    ([-1.3, 0.2, 4.7], FIG4, -11.0, 0.0, 15.914887654194119, 0.034425603396982525),
    ([-1.3, 0.2, 4.7], FIG4, -11.0, 0.08, 15.554769526634665, 0.026680340431643393),
    ([2.5, -3.25], Scenario(3.1, -2.2, -4.4, 3.3), -11.0, 0.0, 17.609969136945787, 0.0045700862036237112),
]


def brute_rates(cfg: SystemConfig, sc: Scenario, t):
    """Direct per-antenna complex sum with cmath, no phase reduction."""
    n = len(t)
    k0 = 2 * math.pi * cfg.carrier_freq_hz / 299_792_458.0
    lam = 299_792_458.0 / cfg.carrier_freq_hz
    eta = lam**2 / (16 * math.pi**2)
    dc2 = cfg.waveguide_height_d**2 + (sc.user_y - cfg.y_tx) ** 2
    ds2 = cfg.waveguide_height_d**2 + (sc.target_y - cfg.y_tx) ** 2
    dr2 = cfg.waveguide_height_d**2 + (sc.target_y - cfg.y_rx) ** 2

    def amp(x):
        return 10 ** (-cfg.waveguide_loss_db_per_m * abs(x) / 20)

    def array_sum(x, d2):
        out = 0j
        for tn in t:
            rho = math.sqrt(d2 + (tn - x) ** 2)
            out += amp(tn - cfg.feed_x_t0) * cmath.exp(-1j * (k0 * rho + k0 * cfg.n_eff * (tn - cfg.feed_x_t0))) / rho
        return out

    gc = cfg.power_w * eta / (n * cfg.noise_comm_w) * abs(array_sum(sc.user_x, dc2)) ** 2
    b2 = amp(sc.target_x - cfg.feed_x_r0) ** 2
    gs = cfg.power_w * cfg.frame_len_L * eta**2 * cfg.alpha_s / (n * cfg.noise_sense_w * dr2) * b2 * abs(array_sum(sc.target_x, ds2)) ** 2
    return math.log2(1 + gc), math.log2(1 + gs) / cfg.frame_len_L


def test_defaults_and_derived_constants():
    cfg = SystemConfig()
    assert cfg.wavelength == pytest.approx(0.0107068735, rel=1e-9)
    assert cfg.eta_m2 == pytest.approx(7.25948170554011539e-7, rel=1e-12)
    assert cfg.wavenumber_k0 == pytest.approx(586.836606146470907, rel=1e-12)
    assert cfg.min_spacing_delta == pytest.approx(cfg.wavelength / 2)
    assert watts_to_dbm(cfg.power_w) == pytest.approx(10.0)
    assert watts_to_dbm(cfg.noise_comm_w) == pytest.approx(-114.0)


def test_dbm_roundtrip():
    assert dbm_to_watts(30.0) == pytest.approx(1.0)
    assert watts_to_dbm(dbm_to_watts(-73.5)) == pytest.approx(-73.5)


@pytest.mark.parametrize("t, sc, feed, loss, cr, sr", FROZEN)
def test_rates_match_frozen_high_precision(t, sc, feed, loss, cr, sr):
    cfg = SystemConfig(num_antennas_N=len(t), feed_x_t0=feed, feed_x_r0=feed, deploy_max_x=-feed, waveguide_loss_db_per_m=loss)
    got = rate_pair(cfg, sc, Beamformer(t))
    assert got.cr == pytest.approx(cr, rel=1e-10)
    assert got.sr == pytest.approx(sr, rel=1e-8)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(-11, 11), min_size=1, max_size=6),
    st.floats(-10, 10),
    st.floats(-4, 4),
    st.floats(-10, 10),
    st.floats(-4, 4),
    st.sampled_from([0.0, 0.08, 0.5]),
)
def test_rates_match_brute_force(t, xc, yc, xs, ys, loss):
    cfg = SystemConfig(num_antennas_N=len(t), feed_x_t0=-11, feed_x_r0=-11, deploy_max_x=11, waveguide_loss_db_per_m=loss, min_spacing_delta=0)
    sc = Scenario(xc, yc, xs, ys)
    cr, sr = brute_rates(cfg, sc, t)
    got = rate_pair(cfg, sc, Beamformer(t))
    assert got.cr == pytest.approx(cr, rel=1e-9, abs=1e-12)
    assert got.sr == pytest.approx(sr, rel=1e-7, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.permutations([-4.0, -1.0, 0.5, 3.0, 7.25]))
def test_rates_invariant_to_antenna_order(t):
    cfg = SystemConfig(num_antennas_N=5)
    a = rate_pair(cfg, FIG4, Beamformer(t))
    b = rate_pair(cfg, FIG4, Beamformer(sorted(t)))
    assert a == b


def test_single_antenna_closed_form_ignores_phase():
    cfg = SystemConfig()
    t = 1.7
    rho2 = cfg.waveguide_height_d**2 + (FIG4.user_y - cfg.y_tx) ** 2 + (t - FIG4.user_x) ** 2
    expect = math.log2(1 + cfg.power_w * cfg.eta_m2 / cfg.noise_comm_w / rho2)
    assert comm_rate(cfg, FIG4, Beamformer([t])) == pytest.approx(expect, rel=1e-13)


def test_coherent_stack_gives_array_gain():
    # two antennas one guided wavelength apart add almost in phase at a distant user
    cfg = SystemConfig(num_antennas_N=2, min_spacing_delta=0)
    far = Scenario(0.0, 3000.0, 0.0, 0.0)
    one = comm_snr(cfg.replace(num_antennas_N=1), far, Beamformer([0.0]))
    two = comm_snr(cfg, far, Beamformer([0.0, 0.0]))
    # same position twice: |2h|^2 / 2 = 2 |h|^2
    assert two == pytest.approx(2 * one, rel=1e-12)


def test_fixed_antenna_hand_arithmetic():
    cfg = SystemConfig()
    r = fixed_antenna_rates(cfg, FIG4, 0.0, 0.0)
    dc2 = 9 + 9 + 64
    ds2 = 9 + 1 + 64
    dr2 = 9 + 9 + 64
    snr_c = cfg.power_w * cfg.eta_m2 / cfg.noise_comm_w / dc2
    snr_s = cfg.power_w * 5 * cfg.eta_m2**2 * 10 / cfg.noise_sense_w / dr2 / ds2
    assert r.cr == pytest.approx(math.log2(1 + snr_c), rel=1e-13)
    assert r.sr == pytest.approx(math.log2(1 + snr_s) / 5, rel=1e-12)


def test_fixed_antenna_at_user_equals_pinch_at_user_for_comm():
    cfg = SystemConfig()
    assert fixed_antenna_rates(cfg, FIG4, 8.0, 0.0).cr == pytest.approx(comm_rate(cfg, FIG4, Beamformer([8.0])))


def test_sense_rate_decreases_with_loss():
    base = SystemConfig()
    bf = Beamformer([-8.0])
    assert sense_rate(base.replace(waveguide_loss_db_per_m=0.08), FIG4, bf) < sense_rate(base, FIG4, bf)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"power_w": 0.0},
        {"noise_comm_w": -1.0},
        {"frame_len_L": 0},
        {"num_antennas_N": 0},
        {"carrier_freq_hz": float("nan")},
        {"waveguide_loss_db_per_m": -0.1},
        {"feed_x_t0": 20.0},
        {"num_antennas_N": 5000},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(DomainError):
        SystemConfig(**kwargs)


def test_config_roundtrip_and_unknown_field():
    cfg = SystemConfig(num_antennas_N=4, feed_x_t0=-11, deploy_max_x=11)
    assert SystemConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(DomainError):
        SystemConfig.from_dict({"bogus": 1})


def test_replace_keeps_half_wavelength_spacing():
    cfg = SystemConfig().replace(carrier_freq_hz=14e9)
    assert cfg.min_spacing_delta == pytest.approx(cfg.wavelength / 2)


def test_antenna_count_must_match():
    with pytest.raises(DomainError):
        comm_snr(SystemConfig(num_antennas_N=2), FIG4, Beamformer([0.0]))


def test_feasibility():
    cfg = SystemConfig(num_antennas_N=2)
    assert Beamformer([0.0, 0.01]).is_feasible(cfg)
    assert not Beamformer([0.0, 0.001]).is_feasible(cfg)
    assert not Beamformer([0.0, 10.5]).is_feasible(cfg)


def test_rate_pair_validation():
    with pytest.raises(DomainError):
        RatePair(-1.0, 0.0)
    with pytest.raises(DomainError):
        RatePair(math.inf, 0.0)


def test_scenario_coerces_numpy_scalars():
    sc = Scenario(np.float64(1.0), 2, 3.0, 4.0)
    assert type(sc.user_x) is float and type(sc.user_y) is float
    with pytest.raises(DomainError):
        Scenario(math.nan, 0, 0, 0)
