"""Phase-free outer bound on the multi-pinch rate region.

Ignoring the spacing constraint and both phase terms, and restricting every
antenna to [x_c, x_s], the array sums are bounded by Cauchy-Schwarz and a
majorization argument; the result depends only on Z = sum of the normalized
offsets beta_n = (t_n - x_c)/(x_s - x_c).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core_model import DomainError, Scenario, SystemConfig, loss_amplitude
from .region import RateRegion, hull_of_rectangles

DEGENERATE_DELTA_X = 1e-9


@dataclass(frozen=True)
class BoundPoint:
    z_beta: float
    cr_ub: float
    sr_ub: float


def f_ub(rho_sq: float, s: float, n_antennas: int) -> float:
    """Max of sum_n 1/(rho^2 + x_n) over x in [0,1]^N with sum(x) = s.

    Attained by the profile of floor(s) ones, one entry s - floor(s), and zeros.
    """
    if not rho_sq > 0:
        raise DomainError("rho_sq must be positive")
    if not (0.0 <= s <= n_antennas):
        raise DomainError(f"s={s} outside [0, {n_antennas}]")
    whole = math.floor(s)
    frac = s - whole
    if frac > 0.0:
        return whole / (rho_sq + 1.0) + 1.0 / (rho_sq + frac) + (n_antennas - whole - 1) / rho_sq
    return whole / (rho_sq + 1.0) + (n_antennas - whole) / rho_sq


def extremal_profile(s: float, n_antennas: int) -> np.ndarray:
    """The majorizing profile {1,...,1, s - floor(s), 0,...,0} of length N."""
    whole = math.floor(s)
    x = np.zeros(n_antennas)
    x[:whole] = 1.0
    if whole < n_antennas:
        x[whole] = s - whole
    return x


def _check_z(cfg: SystemConfig, z_beta: float) -> float:
    n = cfg.num_antennas_N
    if not (0.0 <= z_beta <= n):
        raise DomainError(f"z_beta={z_beta} outside [0, {n}]")
    return float(z_beta)


def _cr_outer(cfg: SystemConfig, sc: Scenario, z: float, gain: float = 1.0) -> float:
    n, dx2 = cfg.num_antennas_N, sc.delta_x**2
    s = min(z * z / n, float(n))
    bound = f_ub(sc.d_c_sq(cfg) / dx2, s, n)
    return math.log2(1.0 + gain * cfg.comm_snr_scale() * n / dx2 * bound)


def _sr_outer(cfg: SystemConfig, sc: Scenario, z: float, gain: float = 1.0) -> float:
    n, dx2 = cfg.num_antennas_N, sc.delta_x**2
    s = min((n - z) ** 2 / n, float(n))
    bound = f_ub(sc.d_s_sq(cfg) / dx2, s, n)
    return math.log2(1.0 + gain * cfg.sense_snr_scale(sc) * n / dx2 * bound) / cfg.frame_len_L


def cr_outer(cfg: SystemConfig, sc: Scenario, z_beta: float) -> float:
    z = _check_z(cfg, z_beta)
    if sc.delta_x < DEGENERATE_DELTA_X:
        return degenerate_outer(cfg, sc).cr_max
    return _cr_outer(cfg, sc, z)


def sr_outer(cfg: SystemConfig, sc: Scenario, z_beta: float) -> float:
    z = _check_z(cfg, z_beta)
    if sc.delta_x < DEGENERATE_DELTA_X:
        return degenerate_outer(cfg, sc).sr_max
    return _sr_outer(cfg, sc, z)


def bound_point(cfg: SystemConfig, sc: Scenario, z_beta: float) -> BoundPoint:
    return BoundPoint(z_beta, cr_outer(cfg, sc, z_beta), sr_outer(cfg, sc, z_beta))


def default_z_grid(n_antennas: int, points: int = 201) -> np.ndarray:
    return np.linspace(0.0, n_antennas, points)


def degenerate_outer(
    cfg: SystemConfig, sc: Scenario, gain_c: float = 1.0, gain_s: float = 1.0, copies: int = 1
) -> RateRegion:
    """Coherent N^2 array-gain cap, used when user and target share an x-coordinate.

    ``copies`` repeats the single corner so the anchor count matches a z grid.
    """
    n = cfg.num_antennas_N
    cr = math.log2(1.0 + gain_c * cfg.comm_snr_scale() * n * n / sc.d_c_sq(cfg))
    sr = math.log2(1.0 + gain_s * cfg.sense_snr_scale(sc) * n * n / sc.d_s_sq(cfg)) / cfg.frame_len_L
    return hull_of_rectangles([(cr, sr)] * copies)


def _region(cfg, sc, z_grid, gain_c, gain_s) -> RateRegion:
    zs = [_check_z(cfg, z) for z in z_grid]
    if not zs:
        raise DomainError("empty z grid")
    if sc.delta_x < DEGENERATE_DELTA_X:
        return degenerate_outer(cfg, sc, gain_c, gain_s, len(zs))
    return hull_of_rectangles(
        [(_cr_outer(cfg, sc, z, gain_c), _sr_outer(cfg, sc, z, gain_s)) for z in zs]
    )


def outer_region(cfg: SystemConfig, sc: Scenario, z_grid: Sequence[float] | None = None) -> RateRegion:
    if z_grid is None:
        z_grid = default_z_grid(cfg.num_antennas_N)
    return _region(cfg, sc, z_grid, 1.0, 1.0)


def case2_gains(cfg: SystemConfig, sc: Scenario) -> tuple[float, float]:
    """Power factors for the lossy-waveguide bound.

    Every transmit pinch is charged the loss over |t_0 - min(x_c, x_s)|; the
    sensing link additionally pays the receive run |x_s - r_0|.
    """
    kappa = cfg.waveguide_loss_db_per_m
    tx = float(loss_amplitude(kappa, cfg.feed_x_t0 - min(sc.user_x, sc.target_x))) ** 2
    rx = float(loss_amplitude(kappa, sc.target_x - cfg.feed_x_r0)) ** 2
    return tx, tx * rx


def case2_outer(cfg: SystemConfig, sc: Scenario, z_grid: Sequence[float] | None = None) -> RateRegion:
    if z_grid is None:
        z_grid = default_z_grid(cfg.num_antennas_N)
    gain_c, gain_s = case2_gains(cfg, sc)
    return _region(cfg, sc, z_grid, gain_c, gain_s)
