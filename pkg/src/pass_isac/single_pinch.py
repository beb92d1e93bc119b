"""Closed-form single-antenna placements and the single-pinch rate region."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .core_model import (
    Beamformer,
    DomainError,
    RatePair,
    Scenario,
    SystemConfig,
    fixed_antenna_rates,
    rate_pair,
    receive_loss_power,
)
from .region import RateRegion, _cross, hull_of_rectangles

BISECTION_WIDTH_TOL = 1e-12
BISECTION_VALUE_TOL = 1e-9
# chord sag, in rate units, below which the boundary between anchors is left alone
REFINE_TOL = 1e-10
MAX_REFINE_DEPTH = 40


@dataclass(frozen=True)
class ParetoSolution:
    alpha: float
    t_star: float
    beta_star: float
    rates: RatePair


def _single(cfg: SystemConfig) -> SystemConfig:
    if cfg.num_antennas_N != 1:
        raise DomainError("single-pinch designs require num_antennas_N == 1")
    return cfg


def _solution(cfg: SystemConfig, sc: Scenario, alpha: float, beta: float) -> ParetoSolution:
    t = sc.user_x + beta * (sc.target_x - sc.user_x)
    return ParetoSolution(alpha, t, beta, rate_pair(cfg, sc, Beamformer([t])))


def cc_design(cfg: SystemConfig, sc: Scenario) -> ParetoSolution:
    return _solution(_single(cfg), sc, 1.0, 0.0)


def sc_design(cfg: SystemConfig, sc: Scenario) -> ParetoSolution:
    return _solution(_single(cfg), sc, 0.0, 1.0)


def profile_functions(cfg: SystemConfig, sc: Scenario, alpha: float):
    """Return (f_c, f_s): CR/alpha and SR/(1-alpha) as functions of beta in [0, 1].

    beta parameterizes t = x_c + beta*(x_s - x_c); both are loss-free rates.
    """
    g_c = cfg.comm_snr_scale()
    g_s = cfg.sense_snr_scale(sc)
    dc2, ds2 = sc.d_c_sq(cfg), sc.d_s_sq(cfg)
    dx2 = sc.delta_x**2
    L = cfg.frame_len_L

    def f_c(beta: float) -> float:
        return math.log2(1.0 + g_c / (dc2 + beta * beta * dx2)) / alpha

    def f_s(beta: float) -> float:
        return math.log2(1.0 + g_s / (ds2 + (1.0 - beta) ** 2 * dx2)) / (L * (1.0 - alpha))

    return f_c, f_s


def bisect_beta(f_c, f_s) -> float:
    """Root of f_c(beta) = f_s(beta) on [0, 1]; f_c decreasing, f_s increasing."""
    lo, hi = 0.0, 1.0
    while hi - lo >= BISECTION_WIDTH_TOL:
        mid = 0.5 * (lo + hi)
        gap = f_c(mid) - f_s(mid)
        if abs(gap) < BISECTION_VALUE_TOL:
            return mid
        if gap > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def pareto_design(cfg: SystemConfig, sc: Scenario, alpha: float) -> ParetoSolution:
    """Rate-profile optimal location for a single pinch.

    The location is chosen with the loss-free model; rates are evaluated with
    ``cfg`` as given, so a lossy config reports the attenuated rates.
    """
    _single(cfg)
    if not (0.0 <= alpha <= 1.0) or math.isnan(alpha):
        raise DomainError(f"alpha={alpha} outside [0, 1]")
    if alpha == 1.0:
        return cc_design(cfg, sc)
    if alpha == 0.0:
        return sc_design(cfg, sc)
    f_c, f_s = profile_functions(cfg, sc, alpha)
    if f_c(1.0) > f_s(1.0):
        beta = 1.0
    elif f_c(0.0) < f_s(0.0):
        beta = 0.0
    else:
        beta = bisect_beta(f_c, f_s)
    return _solution(cfg, sc, alpha, beta)


def _check_grid(alpha_grid: Sequence[float]) -> list[float]:
    grid = [float(a) for a in alpha_grid]
    if not grid:
        raise DomainError("empty alpha grid")
    if any(not (0.0 <= a <= 1.0) for a in grid):
        raise DomainError("alpha grid must lie in [0, 1]")
    return grid


def balanced_alpha(a: float, cr_scale: float, sr_scale: float) -> float:
    """Monotone bijection of [0, 1] placing a = 1/2 where CR/alpha = SR/(1 - alpha)
    for rates of size ``cr_scale`` and ``sr_scale``.

    CR is typically hundreds of times larger than SR, so a uniform grid in the
    raw weight crowds all interior Pareto points into alpha > 0.99.
    """
    den = a * cr_scale + (1.0 - a) * sr_scale
    return a * cr_scale / den if den > 0.0 else a


def balanced_grid(cfg: SystemConfig, sc: Scenario, alpha_grid: Sequence[float]) -> list[float]:
    grid = _check_grid(alpha_grid)
    cr_scale = cc_design(cfg, sc).rates.cr
    sr_scale = sc_design(cfg, sc).rates.sr
    return [balanced_alpha(a, cr_scale, sr_scale) for a in grid]


def single_pinch_region(
    cfg: SystemConfig, sc: Scenario, alpha_grid: Sequence[float], balanced: bool = True
) -> RateRegion:
    """Hull of the rate-profile designs over ``alpha_grid``.

    With ``balanced`` the grid is first mapped through ``balanced_alpha``; the
    traced boundary is the same, only the sampling along it changes.
    """
    grid = balanced_grid(cfg, sc, alpha_grid) if balanced else _check_grid(alpha_grid)
    return refined_region(cfg, sc, [pareto_design(cfg, sc, a).t_star for a in grid])


def _scalar_rates(cfg: SystemConfig, sc: Scenario):
    """Fast (CR, SR) of a single pinch at t; the phase drops out for N = 1."""
    g_c = cfg.comm_snr_scale()
    g_s = cfg.sense_snr_scale(sc) * receive_loss_power(cfg, sc)
    dc2, ds2 = sc.d_c_sq(cfg), sc.d_s_sq(cfg)
    xc, xs, t0 = sc.user_x, sc.target_x, cfg.feed_x_t0
    k = -cfg.waveguide_loss_db_per_m / 10.0
    L = cfg.frame_len_L

    def rates(t: float) -> tuple[float, float]:
        a2 = 10.0 ** (k * abs(t - t0))
        return (
            math.log2(1.0 + g_c * a2 / (dc2 + (t - xc) ** 2)),
            math.log2(1.0 + g_s * a2 / (ds2 + (t - xs) ** 2)) / L,
        )

    return rates


def refined_region(cfg: SystemConfig, sc: Scenario, t_anchors: Sequence[float], tol: float = REFINE_TOL) -> RateRegion:
    """Hull of the anchor placements, densified between consecutive anchors.

    Extra single-pinch placements are inserted by bisection in t wherever the
    rate of the midpoint sticks out of the chord by more than ``tol``. Every
    inserted point is achievable, so the hull stays an inner approximation.
    ``anchors`` of the result are the rates at ``t_anchors`` only.
    """

    rates = _scalar_rates(_single(cfg), sc)
    anchors = [rates(t) for t in t_anchors]
    points = list(anchors)
    stack = [(t_anchors[i], anchors[i], t_anchors[i + 1], anchors[i + 1], 0) for i in range(len(anchors) - 1)]
    while stack:
        t0, p0, t1, p1, depth = stack.pop()
        length = math.dist(p0, p1)
        if depth >= MAX_REFINE_DEPTH or length == 0.0 or t0 == t1:
            continue
        tm = 0.5 * (t0 + t1)
        pm = rates(tm)
        side_m = _cross(p0, p1, pm)
        # the midpoint matters only on the far side of the chord from the origin
        if side_m * _cross(p0, p1, (0.0, 0.0)) < 0.0 and abs(side_m) / length > tol:
            points.append(pm)
            stack.append((t0, p0, tm, pm, depth + 1))
            stack.append((tm, pm, t1, p1, depth + 1))
    hull = hull_of_rectangles(points)
    return RateRegion(hull.vertices, tuple(anchors))


def timeshare_region(cfg: SystemConfig, sc: Scenario) -> RateRegion:
    """Time sharing between the C-C and S-C placements only."""
    return single_pinch_region(cfg, sc, [0.0, 1.0], balanced=False)


def fixed_region(cfg: SystemConfig, sc: Scenario, tx_x: float = 0.0, rx_x: float = 0.0) -> RateRegion:
    return hull_of_rectangles([fixed_antenna_rates(cfg, sc, tx_x, rx_x)])
