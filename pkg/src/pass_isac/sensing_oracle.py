"""Independent checks of the sensing-rate closed form.

The echo, conditioned on the transmitted frame, is a SIMO Gaussian channel
y = h_v * beta + n with beta ~ CN(0, alpha_s). Its mutual information can be
computed from the full L x L determinant or from the rank-one shortcut, and
the conditional-mean estimator of beta has a closed-form MSE.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core_model import (
    Beamformer,
    DomainError,
    Scenario,
    SystemConfig,
    TWO_PI,
    element_terms,
    loss_amplitude,
    sense_rate,
)

MAX_ORACLE_L = 64


@dataclass(frozen=True)
class VirtualChannel:
    h_v: np.ndarray
    alpha_s: float
    sigma_sq: float

    def __post_init__(self) -> None:
        h = np.asarray(self.h_v, dtype=complex).ravel()
        if h.size < 1 or not np.all(np.isfinite(h)):
            raise DomainError("virtual channel must be a finite, nonempty vector")
        if self.alpha_s <= 0 or self.sigma_sq <= 0:
            raise DomainError("alpha_s and sigma_sq must be positive")
        object.__setattr__(self, "h_v", h)

    @property
    def L(self) -> int:
        return self.h_v.size

    @property
    def energy(self) -> float:
        return float(np.vdot(self.h_v, self.h_v).real)


def unit_stream(L: int) -> np.ndarray:
    """Constant-modulus stream with ||s||^2 = L exactly."""
    return np.exp(1j * TWO_PI * np.arange(L) / L)


def mi_determinant(vc: VirtualChannel) -> float:
    """log2 det(I_L + (alpha_s/sigma^2) h h^H), from the explicit L x L matrix."""
    if vc.L > MAX_ORACLE_L:
        raise DomainError(f"determinant oracle limited to L <= {MAX_ORACLE_L}")
    h = vc.h_v[:, None]
    m = np.eye(vc.L) + (vc.alpha_s / vc.sigma_sq) * (h @ h.conj().T)
    sign, logdet = np.linalg.slogdet(m)
    if abs(sign - 1.0) > 1e-9:
        raise DomainError(f"determinant has unexpected sign {sign}")
    return float(logdet / math.log(2.0))


def mi_scalar(vc: VirtualChannel) -> float:
    return math.log2(1.0 + vc.alpha_s / vc.sigma_sq * vc.energy)


def mmse(vc: VirtualChannel) -> float:
    return vc.alpha_s * vc.sigma_sq / (vc.sigma_sq + vc.alpha_s * vc.energy)


def cme_weights(vc: VirtualChannel) -> np.ndarray:
    """Linear weights of the conditional-mean estimator: (alpha_s/omega_s) h_v^H."""
    return (vc.alpha_s / (vc.sigma_sq + vc.alpha_s * vc.energy)) * vc.h_v.conj()


def _cn(rng: np.random.Generator, var: float, size) -> np.ndarray:
    return np.sqrt(var / 2.0) * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def simulate_mse(vc: VirtualChannel, draws: int, seed: int) -> tuple[float, float]:
    """Empirical MSE of the conditional-mean estimator and its standard error."""
    rng = np.random.default_rng(seed)
    beta = _cn(rng, vc.alpha_s, draws)
    noise = _cn(rng, vc.sigma_sq, (draws, vc.L))
    y = beta[:, None] * vc.h_v[None, :] + noise
    est = y @ cme_weights(vc)
    err = np.abs(est - beta) ** 2
    return float(err.mean()), float(err.std(ddof=1) / math.sqrt(draws))


def induced_channel(
    cfg: SystemConfig, sc: Scenario, bf: Beamformer, stream: np.ndarray | None = None
) -> VirtualChannel:
    """Virtual channel sqrt(P/N) * phi_r * g_r * (phi_t^T h) * s for the aligned receive pinch."""
    t = bf.as_array()
    n = len(t)
    L = cfg.frame_len_L
    s = unit_stream(L) if stream is None else np.asarray(stream, dtype=complex)
    root_eta = math.sqrt(cfg.eta_m2)
    # element_terms already carries e^{-j k0 rho}/rho and the in-waveguide phase/loss
    array_gain = root_eta * element_terms(cfg, sc.d_s_sq(cfg), sc.target_x, t).sum()
    d_r = math.sqrt(sc.d_r_sq(cfg))
    g_r = root_eta * np.exp(-1j * math.fmod(cfg.wavenumber_k0 * d_r, TWO_PI)) / d_r
    run = sc.target_x - cfg.feed_x_r0
    phi_r = loss_amplitude(cfg.waveguide_loss_db_per_m, run) * np.exp(
        -1j * math.fmod(cfg.wavenumber_k0 * cfg.n_eff * run, TWO_PI)
    )
    h_v = math.sqrt(cfg.power_w / n) * phi_r * g_r * array_gain * s
    return VirtualChannel(h_v, cfg.alpha_s, cfg.noise_sense_w)


def lemma2_check(cfg: SystemConfig, sc: Scenario, candidate_bfs: Sequence[Beamformer]) -> bool:
    """True iff the SR-maximizing candidate is also the MSE-minimizing one."""
    if not candidate_bfs:
        raise DomainError("no candidates")
    rates = [sense_rate(cfg, sc, bf) for bf in candidate_bfs]
    errors = [mmse(induced_channel(cfg, sc, bf)) for bf in candidate_bfs]
    return int(np.argmax(rates)) == int(np.argmin(errors))
