"""Seeded Monte-Carlo batches over uniformly placed users and targets."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Callable, Sequence

import numpy as np

from .core_model import (
    Beamformer,
    DomainError,
    RatePair,
    Scenario,
    SystemConfig,
    fixed_antenna_rates,
    rate_pair,
)
from .multi_pinch import SearchConfig, cc_beamformer, inner_bound_beamformers, sc_beamformer
from .outer_bound import case2_outer, default_z_grid, outer_region
from .region import RateRegion, average_regions, contains, hull_of_rectangles
from .single_pinch import balanced_grid, fixed_region, pareto_design, refined_region

log = logging.getLogger(__name__)

DESIGNS = ("cc", "sc", "fixed")
MODES = ("single", "multi")
CASES = ("ideal", "lossy")
SEED_MASK = (1 << 64) - 1


def default_alpha_grid(points: int = 101) -> tuple[float, ...]:
    return tuple(float(a) for a in np.linspace(0.0, 1.0, points))


@dataclass(frozen=True)
class McConfig:
    dx_m: float = 20.0
    dy_m: float = 8.0
    trials: int = 1000
    seed: int = 0
    alpha_grid: tuple[float, ...] = field(default_factory=default_alpha_grid)
    # Case II in-waveguide loss, dB/m
    lossy_db_per_m: float = 0.08
    # fixed-antenna comparator x-coordinate on both waveguides
    fixed_x: float = 0.0

    def __post_init__(self) -> None:
        if self.dx_m <= 0 or self.dy_m <= 0:
            raise DomainError("dx_m and dy_m must be positive")
        if self.trials < 1:
            raise DomainError("trials must be at least 1")
        if any(not (0.0 <= a <= 1.0) for a in self.alpha_grid):
            raise DomainError("alpha grid must lie in [0, 1]")
        object.__setattr__(self, "alpha_grid", tuple(float(a) for a in self.alpha_grid))

    def to_dict(self) -> dict:
        return {
            "dx_m": self.dx_m,
            "dy_m": self.dy_m,
            "trials": self.trials,
            "seed": self.seed,
            "alpha_grid": list(self.alpha_grid),
            "lossy_db_per_m": self.lossy_db_per_m,
            "fixed_x": self.fixed_x,
        }


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    """Independent substream per (seed, trial); serial and parallel runs agree."""
    return np.random.default_rng([seed & SEED_MASK, trial_index])


def sample_scenario(mc: McConfig, trial_index: int) -> Scenario:
    u = trial_rng(mc.seed, trial_index).random(4) - 0.5
    return Scenario(u[0] * mc.dx_m, u[1] * mc.dy_m, u[2] * mc.dx_m, u[3] * mc.dy_m)


def mode_config(cfg: SystemConfig, mc: McConfig, mode: str, num_antennas: int | None = None) -> SystemConfig:
    """Feed point and deployment range for the mode: +-D_x/2 single, +-(D_x/2 + 1) multi."""
    if mode not in MODES:
        raise DomainError(f"unknown mode {mode!r}")
    half = mc.dx_m / 2.0 + (1.0 if mode == "multi" else 0.0)
    n = 1 if mode == "single" else (num_antennas or cfg.num_antennas_N)
    return cfg.replace(feed_x_t0=-half, feed_x_r0=-half, deploy_max_x=half, num_antennas_N=n)


def case_configs(cfg: SystemConfig, mc: McConfig) -> dict[str, SystemConfig]:
    return {
        "ideal": cfg.replace(waveguide_loss_db_per_m=0.0),
        "lossy": cfg.replace(waveguide_loss_db_per_m=mc.lossy_db_per_m),
    }


def _map(fn: Callable, items: Sequence, jobs: int) -> list:
    if jobs <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map preserves input order, so reductions stay deterministic
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


# -- per-design rates --------------------------------------------------------


def design_rates(
    cfg: SystemConfig, mc: McConfig, sc: Scenario, design: str, mode: str, search: SearchConfig
) -> dict[str, RatePair]:
    """Rates of one design in both cases; placements are optimized loss-free."""
    cases = case_configs(cfg, mc)
    if design == "fixed":
        r = fixed_antenna_rates(cases["ideal"], sc, mc.fixed_x, mc.fixed_x)
        return {"ideal": r, "lossy": r}
    if design not in ("cc", "sc"):
        raise DomainError(f"unknown design {design!r}")
    if mode == "single":
        alpha = 1.0 if design == "cc" else 0.0
        t = pareto_design(cases["ideal"], sc, alpha).t_star
        bf = Beamformer([t])
    else:
        solver = cc_beamformer if design == "cc" else sc_beamformer
        bf, _ = solver(cases["ideal"], sc, search)
    return {case: rate_pair(c, sc, bf) for case, c in cases.items()}


@dataclass(frozen=True)
class RateRow:
    sweep_value: float
    design: str
    case: str
    mean_cr: float
    mean_sr: float
    se_cr: float
    se_sr: float
    trials_ok: int
    trials_failed: int

    COLUMNS = ("sweep_value", "design", "case", "mean_cr", "mean_sr", "se_cr", "se_sr", "trials_ok", "trials_failed")

    def as_csv_row(self) -> str:
        return (
            f"{self.sweep_value!r},{self.design},{self.case},{self.mean_cr!r},{self.mean_sr!r},"
            f"{self.se_cr!r},{self.se_sr!r},{self.trials_ok},{self.trials_failed}"
        )


@dataclass(frozen=True)
class Sweep:
    """A parameter sweep: ``param`` is ``dx_m`` or ``num_antennas_N``."""

    param: str
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.param not in ("dx_m", "num_antennas_N"):
            raise DomainError(f"cannot sweep {self.param!r}")
        if not self.values:
            raise DomainError("empty sweep")

    def apply(self, cfg: SystemConfig, mc: McConfig, mode: str, value: float):
        if self.param == "dx_m":
            mc = replace(mc, dx_m=float(value))
            return mode_config(cfg, mc, mode), mc
        return mode_config(cfg, mc, mode, int(value)), mc


def _trial_rates(trial_index, cfg, mc, designs, mode, search):
    sc = sample_scenario(mc, trial_index)
    out = {}
    for d in designs:
        try:
            out[d] = design_rates(cfg, mc, sc, d, mode, search)
        except DomainError as exc:
            log.warning("trial %d design %s failed: %s", trial_index, d, exc)
            out[d] = None
    return out


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    if len(x) == 0:
        return math.nan, math.nan
    se = float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0
    return float(x.mean()), se


def average_rates(
    cfg: SystemConfig,
    mc: McConfig,
    designs: Sequence[str] = DESIGNS,
    mode: str = "single",
    sweep: Sweep | None = None,
    search: SearchConfig = SearchConfig(),
    jobs: int = 1,
) -> list[RateRow]:
    """Mean CR/SR per sweep point, design and case over a common scenario batch."""
    if sweep is None:
        sweep = Sweep("dx_m", (mc.dx_m,))
    rows: list[RateRow] = []
    for value in sweep.values:
        point_cfg, point_mc = sweep.apply(cfg, mc, mode, value)
        fn = partial(_trial_rates, cfg=point_cfg, mc=point_mc, designs=tuple(designs), mode=mode, search=search)
        results = _map(fn, range(mc.trials), jobs)
        for d in designs:
            ok = [r[d] for r in results if r[d] is not None]
            failed = len(results) - len(ok)
            for case in CASES:
                cr = np.array([r[case].cr for r in ok])
                sr = np.array([r[case].sr for r in ok])
                m_cr, se_cr = _mean_se(cr)
                m_sr, se_sr = _mean_se(sr)
                rows.append(RateRow(float(value), d, case, m_cr, m_sr, se_cr, se_sr, len(ok), failed))
    return rows


# -- per-trial regions -------------------------------------------------------


def instantaneous_regions(
    cfg: SystemConfig,
    mc: McConfig,
    sc: Scenario,
    mode: str,
    search: SearchConfig = SearchConfig(),
    z_points: int = 201,
) -> dict[str, RateRegion]:
    """All comparison regions for one scenario, keyed by curve label.

    Single mode: ``pass`` (rate profile + time sharing), ``timeshare`` (C-C/S-C
    only), ``fixed``, each ideal and ``*_lossy``. Multi mode adds ``inner`` and
    ``outer`` in place of ``pass``.
    """
    cases = case_configs(cfg, mc)
    fixed = fixed_region(cases["ideal"], sc, mc.fixed_x, mc.fixed_x)
    out = {"fixed": fixed}
    if mode == "single":
        grid = balanced_grid(cases["ideal"], sc, mc.alpha_grid)
        sols = [pareto_design(cases["ideal"], sc, a) for a in grid]
        ends = [pareto_design(cases["ideal"], sc, a) for a in (0.0, 1.0)]
        for case, c in cases.items():
            suffix = "" if case == "ideal" else "_lossy"
            out["pass" + suffix] = refined_region(c, sc, [s.t_star for s in sols])
            out["timeshare" + suffix] = hull_of_rectangles(
                [rate_pair(c, sc, Beamformer([s.t_star])) for s in ends]
            )
        return out
    if mode != "multi":
        raise DomainError(f"unknown mode {mode!r}")
    anchors = inner_bound_beamformers(cases["ideal"], sc, mc.alpha_grid, search)
    z_grid = default_z_grid(cfg.num_antennas_N, z_points)
    for case, c in cases.items():
        suffix = "" if case == "ideal" else "_lossy"
        pairs = [rate_pair(c, sc, bf) for _, bf in anchors]
        out["inner" + suffix] = hull_of_rectangles(pairs)
        out["timeshare" + suffix] = hull_of_rectangles([pairs[0], pairs[-1]])
    out["outer"] = outer_region(cases["ideal"], sc, z_grid)
    out["outer_lossy"] = case2_outer(cases["lossy"], sc, z_grid)
    return out


def _trial_regions(trial_index, cfg, mc, mode, search, z_points):
    sc = sample_scenario(mc, trial_index)
    try:
        return instantaneous_regions(cfg, mc, sc, mode, search, z_points)
    except DomainError as exc:
        log.warning("trial %d failed: %s", trial_index, exc)
        return None


@dataclass
class RegionBatch:
    regions: dict[str, RateRegion]
    trials_ok: int
    trials_failed: int
    nesting_violations: int


def average_region(
    cfg: SystemConfig,
    mc: McConfig,
    mode: str = "single",
    search: SearchConfig = SearchConfig(),
    jobs: int = 1,
    z_points: int = 201,
    tol: float = 1e-9,
) -> RegionBatch:
    """Average every curve's anchors across trials and hull the means.

    ``nesting_violations`` counts trials whose fixed-antenna corner falls
    outside that trial's PASS region (``pass`` or ``inner``).
    """
    mcfg = mode_config(cfg, mc, mode)
    fn = partial(_trial_regions, cfg=mcfg, mc=mc, mode=mode, search=search, z_points=z_points)
    results = _map(fn, range(mc.trials), jobs)
    ok = [r for r in results if r is not None]
    if not ok:
        raise DomainError("every trial failed")
    key = "pass" if mode == "single" else "inner"
    violations = sum(
        not all(contains(r[key], v, tol) for v in r["fixed"].vertices) for r in ok
    )
    averaged = {
        label: average_regions([r[label] for r in ok], len(ok[0][label].anchors))
        for label in ok[0]
    }
    return RegionBatch(averaged, len(ok), len(results) - len(ok), violations)
