"""System model: configuration, geometry and closed-form CR/SR evaluation.

All powers are in watts, lengths in metres, rates in bit/s/Hz.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0
TWO_PI = 2.0 * math.pi


class DomainError(ValueError):
    """Input outside the domain of a model operation."""


class InfeasibleError(DomainError):
    """No feasible antenna placement exists for the requested update."""


def dbm_to_watts(x_dbm: float) -> float:
    return 10.0 ** ((x_dbm - 30.0) / 10.0)


def watts_to_dbm(x_w: float) -> float:
    return 10.0 * math.log10(x_w) + 30.0


def loss_amplitude(loss_db_per_m: float, distance_m) -> np.ndarray | float:
    """Amplitude factor 10^(-kappa*|distance|/20) of a lossy waveguide run."""
    if loss_db_per_m == 0.0:
        return np.ones_like(distance_m, dtype=float) if np.ndim(distance_m) else 1.0
    return 10.0 ** (-loss_db_per_m * np.abs(distance_m) / 20.0)


def _finite(*values: float) -> None:
    for v in values:
        if not np.all(np.isfinite(v)):
            raise DomainError(f"non-finite input: {v!r}")


@dataclass(frozen=True)
class SystemConfig:
    """Physical and system constants. Defaults are the desk-scale reference setup
    (28 GHz, P = 10 dBm, noise -114 dBm, single-pinch feed at -10 m)."""

    carrier_freq_hz: float = 28e9
    n_eff: float = 1.4
    waveguide_height_d: float = 3.0
    y_tx: float = -2.0
    y_rx: float = 2.0
    feed_x_t0: float = -10.0
    feed_x_r0: float = -10.0
    deploy_max_x: float = 10.0
    power_w: float = dbm_to_watts(10.0)
    noise_comm_w: float = dbm_to_watts(-114.0)
    noise_sense_w: float = dbm_to_watts(-114.0)
    frame_len_L: int = 5
    alpha_s: float = 10.0
    num_antennas_N: int = 1
    # None resolves to half a free-space wavelength
    min_spacing_delta: float | None = None
    waveguide_loss_db_per_m: float = 0.0

    def __post_init__(self) -> None:
        if self.min_spacing_delta is None:
            object.__setattr__(self, "min_spacing_delta", self.wavelength / 2.0)
        _finite(*(getattr(self, f.name) for f in dataclasses.fields(self)))
        if self.carrier_freq_hz <= 0 or self.n_eff <= 0:
            raise DomainError("carrier frequency and n_eff must be positive")
        if min(self.power_w, self.noise_comm_w, self.noise_sense_w, self.alpha_s) <= 0:
            raise DomainError("powers, noise variances and alpha_s must be positive")
        if int(self.frame_len_L) != self.frame_len_L or self.frame_len_L < 1:
            raise DomainError("frame_len_L must be a positive integer")
        if int(self.num_antennas_N) != self.num_antennas_N or self.num_antennas_N < 1:
            raise DomainError("num_antennas_N must be a positive integer")
        if self.min_spacing_delta < 0 or self.waveguide_loss_db_per_m < 0:
            raise DomainError("spacing and loss must be nonnegative")
        if self.feed_x_t0 > self.deploy_max_x:
            raise DomainError("feed point lies beyond the deployment range")
        span = self.deploy_max_x - self.feed_x_t0
        if self.min_spacing_delta * (self.num_antennas_N - 1) > span + 1e-12:
            raise DomainError(
                f"{self.num_antennas_N} antennas at spacing {self.min_spacing_delta} "
                f"do not fit in [{self.feed_x_t0}, {self.deploy_max_x}]"
            )

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq_hz

    @property
    def eta_m2(self) -> float:
        return SPEED_OF_LIGHT**2 / (16.0 * math.pi**2 * self.carrier_freq_hz**2)

    @property
    def wavenumber_k0(self) -> float:
        return TWO_PI / self.wavelength

    def comm_snr_scale(self) -> float:
        """P*eta / (N*sigma_c^2)."""
        return self.power_w * self.eta_m2 / (self.num_antennas_N * self.noise_comm_w)

    def sense_snr_scale(self, sc: "Scenario") -> float:
        """P*L*eta^2*alpha_s / (N*sigma_s^2*d_r^2), receive pinch aligned at x_s."""
        return (
            self.power_w * self.frame_len_L * self.eta_m2**2 * self.alpha_s
            / (self.num_antennas_N * self.noise_sense_w * sc.d_r_sq(self))
        )

    def replace(self, **changes: Any) -> "SystemConfig":
        if "carrier_freq_hz" in changes and "min_spacing_delta" not in changes:
            # keep the half-wavelength default tied to the new frequency
            if math.isclose(self.min_spacing_delta, self.wavelength / 2.0):
                changes["min_spacing_delta"] = None
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["eta_m2"] = self.eta_m2
        d["wavenumber_k0"] = self.wavenumber_k0
        return d

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SystemConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names - {"eta_m2", "wavenumber_k0", "search"}
        if unknown:
            raise DomainError(f"unknown SystemConfig fields: {sorted(unknown)}")
        return cls(**{k: v for k, v in data.items() if k in names})


@dataclass(frozen=True)
class Scenario:
    """Planar user (x_c, y_c) and target (x_s, y_s) positions."""

    user_x: float
    user_y: float
    target_x: float
    target_y: float

    def __post_init__(self) -> None:
        for name in ("user_x", "user_y", "target_x", "target_y"):
            object.__setattr__(self, name, float(getattr(self, name)))
        _finite(self.user_x, self.user_y, self.target_x, self.target_y)

    @property
    def delta_x(self) -> float:
        return abs(self.user_x - self.target_x)

    def d_c_sq(self, cfg: SystemConfig) -> float:
        return (self.user_y - cfg.y_tx) ** 2 + cfg.waveguide_height_d**2

    def d_s_sq(self, cfg: SystemConfig) -> float:
        return (self.target_y - cfg.y_tx) ** 2 + cfg.waveguide_height_d**2

    def d_r_sq(self, cfg: SystemConfig) -> float:
        return cfg.waveguide_height_d**2 + (self.target_y - cfg.y_rx) ** 2


@dataclass(frozen=True)
class Beamformer:
    """Activated x-coordinates t_1 < ... < t_N on the transmit waveguide."""

    positions: tuple[float, ...]

    def __init__(self, positions: Iterable[float]) -> None:
        pos = tuple(sorted(float(p) for p in positions))
        if not pos:
            raise DomainError("a beamformer needs at least one antenna")
        _finite(*pos)
        object.__setattr__(self, "positions", pos)

    def __len__(self) -> int:
        return len(self.positions)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.positions, dtype=float)

    def is_feasible(self, cfg: SystemConfig, tol: float = 1e-9) -> bool:
        t = self.as_array()
        if len(t) != cfg.num_antennas_N:
            return False
        if t[0] < cfg.feed_x_t0 - tol or t[-1] > cfg.deploy_max_x + tol:
            return False
        return bool(np.all(np.diff(t) >= cfg.min_spacing_delta - tol))


@dataclass(frozen=True)
class RatePair:
    cr: float
    sr: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.cr) and math.isfinite(self.sr)):
            raise DomainError(f"non-finite rate pair ({self.cr}, {self.sr})")
        if self.cr < 0 or self.sr < 0:
            raise DomainError(f"negative rate pair ({self.cr}, {self.sr})")

    def as_tuple(self) -> tuple[float, float]:
        return (self.cr, self.sr)


def element_terms(cfg: SystemConfig, dist_sq: float, x_ref: float, t) -> np.ndarray:
    """Per-antenna complex contributions a_n e^{-j(k0*rho_n + k0*n_eff*(t_n - t0))} / rho_n.

    ``dist_sq`` is the squared perpendicular distance (d_c^2 or d_s^2) and
    ``x_ref`` the x-coordinate of the node; ``t`` may be any array of positions.
    """
    t = np.asarray(t, dtype=float)
    rho = np.sqrt(dist_sq + (t - x_ref) ** 2)
    if np.any(rho == 0.0):
        raise DomainError("an antenna coincides with the node it serves")
    k0 = cfg.wavenumber_k0
    # reduce each phase mod 2*pi before trig; k0 ~ 586 rad/m at 28 GHz
    phase = np.mod(k0 * rho, TWO_PI) + np.mod(k0 * cfg.n_eff * (t - cfg.feed_x_t0), TWO_PI)
    amp = loss_amplitude(cfg.waveguide_loss_db_per_m, t - cfg.feed_x_t0) / rho
    return amp * np.exp(-1j * phase)


def _check_bf(cfg: SystemConfig, bf: Beamformer) -> np.ndarray:
    if len(bf) != cfg.num_antennas_N:
        raise DomainError(f"beamformer has {len(bf)} antennas, config expects {cfg.num_antennas_N}")
    return bf.as_array()


def comm_snr(cfg: SystemConfig, sc: Scenario, bf: Beamformer) -> float:
    t = _check_bf(cfg, bf)
    s = element_terms(cfg, sc.d_c_sq(cfg), sc.user_x, t).sum()
    return float(cfg.comm_snr_scale() * abs(s) ** 2)


def receive_loss_power(cfg: SystemConfig, sc: Scenario) -> float:
    """Power factor of the receive-waveguide run from r_0 to the aligned pinch at x_s."""
    return float(loss_amplitude(cfg.waveguide_loss_db_per_m, sc.target_x - cfg.feed_x_r0)) ** 2


def sense_snr(cfg: SystemConfig, sc: Scenario, bf: Beamformer) -> float:
    t = _check_bf(cfg, bf)
    s = element_terms(cfg, sc.d_s_sq(cfg), sc.target_x, t).sum()
    return float(cfg.sense_snr_scale(sc) * receive_loss_power(cfg, sc) * abs(s) ** 2)


def comm_rate(cfg: SystemConfig, sc: Scenario, bf: Beamformer) -> float:
    return math.log2(1.0 + comm_snr(cfg, sc, bf))


def sense_rate(cfg: SystemConfig, sc: Scenario, bf: Beamformer) -> float:
    return math.log2(1.0 + sense_snr(cfg, sc, bf)) / cfg.frame_len_L


def rate_pair(cfg: SystemConfig, sc: Scenario, bf: Beamformer) -> RatePair:
    return RatePair(comm_rate(cfg, sc, bf), sense_rate(cfg, sc, bf))


def fixed_antenna_rates(cfg: SystemConfig, sc: Scenario, tx_x: float, rx_x: float) -> RatePair:
    """Rates of a conventional single transmit antenna at tx_x and receive antenna at rx_x.

    Both offsets on the sensing link are measured from the target, x_s.
    """
    _finite(tx_x, rx_x)
    p, eta = cfg.power_w, cfg.eta_m2
    snr_c = p * eta / cfg.noise_comm_w / (sc.d_c_sq(cfg) + (tx_x - sc.user_x) ** 2)
    snr_s_scale = (
        p * cfg.frame_len_L * eta**2 * cfg.alpha_s
        / (cfg.noise_sense_w * (sc.d_r_sq(cfg) + (rx_x - sc.target_x) ** 2))
    )
    snr_s = snr_s_scale / (sc.d_s_sq(cfg) + (tx_x - sc.target_x) ** 2)
    return RatePair(math.log2(1.0 + snr_c), math.log2(1.0 + snr_s) / cfg.frame_len_L)


def rates_for_positions(cfg: SystemConfig, sc: Scenario, t: Sequence[float]) -> RatePair:
    """Convenience wrapper: rates of an arbitrary position list (N inferred)."""
    bf = Beamformer(t)
    return rate_pair(cfg.replace(num_antennas_N=len(bf)), sc, bf)
