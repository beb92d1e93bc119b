import math

import numpy as np
import pytest

from pass_isac.core_model import Beamformer, DomainError, Scenario, SystemConfig, sense_rate
from pass_isac.monte_carlo import McConfig, mode_config
from pass_isac.sensing_oracle import (
    VirtualChannel,
    cme_weights,
    induced_channel,
    lemma2_check,
    mi_determinant,
    mi_scalar,
    mmse,
    simulate_mse,
    unit_stream,
)
from pass_isac.verification import random_channel

FIG4 = Scenario(8.0, 1.0, -8.0, -1.0)


def test_zero_channel():
    vc = VirtualChannel(np.zeros(4), 2.0, 0.5)
    assert mi_determinant(vc) == pytest.approx(0.0, abs=1e-15)
    assert mmse(vc) == 2.0


def test_scalar_channel():
    vc = VirtualChannel([1.5 - 0.5j], 2.0, 0.5)
    assert mi_determinant(vc) == pytest.approx(math.log2(1 + 2.0 * 2.5 / 0.5), rel=1e-13)


def test_strong_channel_mmse_vanishes():
    assert mmse(VirtualChannel(np.full(3, 1e6), 1.0, 1.0)) < 1e-11


def test_determinant_matches_scalar():
    rng = np.random.default_rng(3)
    for _ in range(200):
        vc = random_channel(rng, 16)
        assert abs(mi_determinant(vc) - mi_scalar(vc)) <= 1e-10


def test_determinant_size_limit():
    with pytest.raises(DomainError):
        mi_determinant(VirtualChannel(np.ones(65), 1.0, 1.0))


def test_invalid_channel():
    with pytest.raises(DomainError):
        VirtualChannel([], 1.0, 1.0)
    with pytest.raises(DomainError):
        VirtualChannel([1.0], 0.0, 1.0)


def test_unit_stream_power():
    for L in (1, 5, 16):
        assert np.vdot(unit_stream(L), unit_stream(L)).real == pytest.approx(L)
        assert np.allclose(np.abs(unit_stream(L)), 1.0)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_mse_simulation_within_three_se(seed):
    rng = np.random.default_rng(seed)
    vc = random_channel(rng, 8)
    mean, se = simulate_mse(vc, 100_000, seed)
    assert abs(mean - mmse(vc)) <= 3 * se


def test_cme_weights_closed_form():
    vc = VirtualChannel([1.0, 1j], 2.0, 0.5)
    w = cme_weights(vc)
    assert w == pytest.approx(2.0 / (0.5 + 2.0 * 2.0) * np.array([1.0, -1j]))


@pytest.mark.parametrize("loss", [0.0, 0.08])
def test_induced_channel_reproduces_sense_rate(loss):
    cfg = mode_config(SystemConfig(waveguide_loss_db_per_m=loss), McConfig(), "multi", 3)
    bf = Beamformer([-8.3, -2.0, 5.5])
    vc = induced_channel(cfg, FIG4, bf)
    assert vc.L == cfg.frame_len_L
    assert mi_scalar(vc) / cfg.frame_len_L == pytest.approx(sense_rate(cfg, FIG4, bf), rel=1e-10)


def test_lemma2_examples():
    cfg = mode_config(SystemConfig(), McConfig(), "multi", 3)
    a, b = Beamformer([-8.0, -7.5, -7.0]), Beamformer([5.0, 6.0, 7.0])
    assert lemma2_check(cfg, FIG4, [a, b])
    assert lemma2_check(cfg, FIG4, [a, a])
    rng = np.random.default_rng(4)
    assert lemma2_check(cfg, FIG4, [Beamformer(rng.uniform(-11, 11, 3)) for _ in range(100)])
    with pytest.raises(DomainError):
        lemma2_check(cfg, FIG4, [])
