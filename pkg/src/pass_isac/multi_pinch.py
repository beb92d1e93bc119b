"""Element-wise grid search for multi-pinch beamformers and the inner-bound region."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .core_model import (
    Beamformer,
    DomainError,
    InfeasibleError,
    RatePair,
    Scenario,
    SystemConfig,
    element_terms,
    rate_pair,
    receive_loss_power,
)
from .region import RateRegion, hull_of_rectangles
from .single_pinch import balanced_alpha

log = logging.getLogger(__name__)

INIT_STRATEGIES = ("spread_midpoint", "from_cc", "from_sc")
ALPHA_GUARD = 1e-9
SPACING_TOL = 1e-12


@dataclass(frozen=True)
class SearchConfig:
    grid_points_Q: int = 10_000
    max_iters: int = 50
    rel_improvement_eps: float = 1e-4
    init_strategy: str = "spread_midpoint"
    # extra restarts use seeded random feasible initializations
    restarts: int = 1
    restart_seed: int = 0

    def __post_init__(self) -> None:
        if self.grid_points_Q < 2:
            raise DomainError("grid_points_Q must be at least 2")
        if self.max_iters < 1 or self.restarts < 1:
            raise DomainError("max_iters and restarts must be positive")
        if not self.rel_improvement_eps > 0:
            raise DomainError("rel_improvement_eps must be positive")
        if self.init_strategy not in INIT_STRATEGIES:
            raise DomainError(f"unknown init_strategy {self.init_strategy!r}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "grid_points_Q": self.grid_points_Q,
            "max_iters": self.max_iters,
            "rel_improvement_eps": self.rel_improvement_eps,
            "init_strategy": self.init_strategy,
            "restarts": self.restarts,
            "restart_seed": self.restart_seed,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SearchConfig":
        return cls(**dict(data))


def search_grid(cfg: SystemConfig, search: SearchConfig) -> np.ndarray:
    return np.linspace(cfg.feed_x_t0, cfg.deploy_max_x, search.grid_points_Q)


def _profile(cr, sr, alpha: float):
    """min(CR/alpha, SR/(1-alpha)); alpha in {0, 1} reduces to the single rate."""
    if alpha >= 1.0:
        return cr
    if alpha <= 0.0:
        return sr
    a = min(max(alpha, ALPHA_GUARD), 1.0 - ALPHA_GUARD)
    return np.minimum(cr / a, sr / (1.0 - a))


def objective_profile(cfg: SystemConfig, sc: Scenario, bf: Beamformer, alpha: float) -> float:
    _check_alpha(alpha)
    r = rate_pair(cfg, sc, bf)
    return float(_profile(r.cr, r.sr, alpha))


def _check_alpha(alpha: float) -> None:
    if not (0.0 <= alpha <= 1.0):
        raise DomainError(f"alpha={alpha} outside [0, 1]")


class _GridModel:
    """Precomputed per-grid-point complex contributions for one (cfg, scenario).

    Only the sum over the other antennas changes between element updates, so
    each update is O(Q) arithmetic on cached terms.
    """

    def __init__(self, cfg: SystemConfig, sc: Scenario, grid: np.ndarray):
        self.cfg, self.sc, self.grid = cfg, sc, grid
        self.term_c = element_terms(cfg, sc.d_c_sq(cfg), sc.user_x, grid)
        self.term_s = element_terms(cfg, sc.d_s_sq(cfg), sc.target_x, grid)
        self.g_c = cfg.comm_snr_scale()
        self.g_s = cfg.sense_snr_scale(sc) * receive_loss_power(cfg, sc)
        self.L = cfg.frame_len_L

    def rates(self, sum_c, sum_s):
        cr = np.log2(1.0 + self.g_c * np.abs(sum_c) ** 2)
        sr = np.log2(1.0 + self.g_s * np.abs(sum_s) ** 2) / self.L
        return cr, sr

    def objective(self, idx: np.ndarray, alpha: float) -> float:
        cr, sr = self.rates(self.term_c[idx].sum(), self.term_s[idx].sum())
        return float(_profile(cr, sr, alpha))

    def admissible(self, idx: np.ndarray, n: int) -> np.ndarray:
        """Mask of grid points at least Delta away from every antenna other than n."""
        delta = self.cfg.min_spacing_delta
        mask = np.ones(len(self.grid), dtype=bool)
        for m, j in enumerate(idx):
            if m != n:
                mask &= np.abs(self.grid - self.grid[j]) >= delta - SPACING_TOL
        return mask

    def best_index(self, idx: np.ndarray, n: int, alpha: float) -> tuple[int, float]:
        others = np.delete(idx, n)
        sum_c = self.term_c[others].sum() + self.term_c
        sum_s = self.term_s[others].sum() + self.term_s
        values = _profile(*self.rates(sum_c, sum_s), alpha)
        mask = self.admissible(idx, n)
        if not mask.any():
            raise InfeasibleError(f"no admissible grid point for antenna {n}")
        values = np.where(mask, values, -np.inf)
        # argmax returns the first maximum: smallest coordinate wins ties
        j = int(np.argmax(values))
        return j, float(values[j])


def _spacing_steps(cfg: SystemConfig, grid: np.ndarray) -> int:
    if len(grid) < 2 or cfg.min_spacing_delta == 0:
        return 1
    step = grid[1] - grid[0]
    return max(1, math.ceil(cfg.min_spacing_delta / step - 1e-9))


def initial_indices(cfg: SystemConfig, sc: Scenario, grid: np.ndarray, strategy: str) -> np.ndarray:
    """Grid indices of N antennas packed at minimum spacing around a centre point."""
    n = cfg.num_antennas_N
    k = _spacing_steps(cfg, grid)
    span = k * (n - 1)
    if span > len(grid) - 1:
        raise InfeasibleError(f"{n} antennas do not fit on a {len(grid)}-point grid")
    centre = {
        "spread_midpoint": 0.5 * (sc.user_x + sc.target_x),
        "from_cc": sc.user_x,
        "from_sc": sc.target_x,
    }[strategy]
    c = int(np.argmin(np.abs(grid - centre)))
    start = min(max(c - span // 2, 0), len(grid) - 1 - span)
    return start + k * np.arange(n)


def _random_indices(cfg: SystemConfig, grid: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Uniformly random feasible placement via gap sampling on the grid."""
    n = cfg.num_antennas_N
    k = _spacing_steps(cfg, grid)
    slack = len(grid) - 1 - k * (n - 1)
    if slack < 0:
        raise InfeasibleError(f"{n} antennas do not fit on a {len(grid)}-point grid")
    offsets = np.sort(rng.integers(0, slack + 1, size=n))
    return offsets + k * np.arange(n)


def optimize_element(
    cfg: SystemConfig,
    sc: Scenario,
    bf: Beamformer,
    n: int,
    alpha: float,
    search: SearchConfig,
) -> Beamformer:
    """Replace t_n by the grid maximizer of the profile objective, others fixed.

    The update never lowers the objective: if the current t_n beats every
    admissible grid point (possible when it is off-grid) it is kept.
    """
    _check_alpha(alpha)
    t = list(bf.positions)
    if not 0 <= n < len(t):
        raise DomainError(f"antenna index {n} out of range")
    grid = search_grid(cfg, search)
    model = _GridModel(cfg, sc, grid)
    others = np.array([t[m] for m in range(len(t)) if m != n])
    sum_c = element_terms(cfg, sc.d_c_sq(cfg), sc.user_x, others).sum() + model.term_c
    sum_s = element_terms(cfg, sc.d_s_sq(cfg), sc.target_x, others).sum() + model.term_s
    values = _profile(*model.rates(sum_c, sum_s), alpha)
    mask = np.ones(len(grid), dtype=bool)
    for x in others:
        mask &= np.abs(grid - x) >= cfg.min_spacing_delta - SPACING_TOL
    if not mask.any():
        raise InfeasibleError(f"no admissible grid point for antenna {n}")
    values = np.where(mask, values, -np.inf)
    j = int(np.argmax(values))
    current = objective_profile(cfg, sc, bf, alpha)
    if values[j] < current and all(abs(t[n] - x) >= cfg.min_spacing_delta - SPACING_TOL for x in others):
        return bf
    t[n] = float(grid[j])
    return Beamformer(t)


@dataclass
class SearchTrace:
    """Objective value after initialization and after every sweep."""

    objective: list[float] = field(default_factory=list)
    iterations: int = 0


def _ascend(model: _GridModel, idx: np.ndarray, alpha: float, search: SearchConfig, trace: SearchTrace):
    obj = model.objective(idx, alpha)
    trace.objective.append(obj)
    for it in range(search.max_iters):
        for n in range(len(idx)):
            j, _ = model.best_index(idx, n, alpha)
            idx[n] = j
        new = model.objective(idx, alpha)
        trace.objective.append(new)
        trace.iterations = it + 1
        improvement = (new - obj) / obj if obj > 0 else (math.inf if new > obj else 0.0)
        obj = new
        if improvement < search.rel_improvement_eps:
            break
    return idx, obj


def optimize_beamformer(
    cfg: SystemConfig,
    sc: Scenario,
    alpha: float,
    search: SearchConfig = SearchConfig(),
    trace: SearchTrace | None = None,
) -> tuple[Beamformer, RatePair]:
    """Alternating one-dimensional grid search for the rate-profile problem."""
    _check_alpha(alpha)
    grid = search_grid(cfg, search)
    model = _GridModel(cfg, sc, grid)
    rng = np.random.default_rng([search.restart_seed, cfg.num_antennas_N])
    best_idx, best_obj = None, -math.inf
    for r in range(search.restarts):
        if r == 0:
            idx = initial_indices(cfg, sc, grid, search.init_strategy)
        else:
            idx = _random_indices(cfg, grid, rng)
        t = SearchTrace()
        idx, obj = _ascend(model, idx.copy(), alpha, search, t)
        log.debug("restart %d: objective %.6g after %d sweeps", r, obj, t.iterations)
        if obj > best_obj:
            best_idx, best_obj = idx, obj
            if trace is not None:
                trace.objective, trace.iterations = t.objective, t.iterations
    bf = Beamformer(grid[best_idx])
    return bf, rate_pair(cfg, sc, bf)


def _with_init(search: SearchConfig, strategy: str) -> SearchConfig:
    d = search.to_dict()
    d["init_strategy"] = strategy
    return SearchConfig.from_dict(d)


def cc_beamformer(cfg: SystemConfig, sc: Scenario, search: SearchConfig = SearchConfig()):
    """CR-maximizing beamformer; the search starts packed around the user."""
    return optimize_beamformer(cfg, sc, 1.0, _with_init(search, "from_cc"))


def sc_beamformer(cfg: SystemConfig, sc: Scenario, search: SearchConfig = SearchConfig()):
    """SR-maximizing beamformer; the search starts packed around the target."""
    return optimize_beamformer(cfg, sc, 0.0, _with_init(search, "from_sc"))


def inner_bound_alphas(alpha_grid: Sequence[float]) -> list[float]:
    grid = [float(a) for a in alpha_grid]
    if any(not (0.0 <= a <= 1.0) for a in grid):
        raise DomainError("alpha grid must lie in [0, 1]")
    return [a for a in grid if 0.0 < a < 1.0]


def inner_bound_beamformers(
    cfg: SystemConfig,
    sc: Scenario,
    alpha_grid: Sequence[float],
    search: SearchConfig = SearchConfig(),
    balanced: bool = True,
) -> list[tuple[float, Beamformer]]:
    """(alpha, beamformer) anchors: S-C, interior alphas in grid order, then C-C.

    With ``balanced`` each interior grid value is mapped through
    ``balanced_alpha`` using the C-C rate and S-C rate as scales; the returned
    alpha is the weight actually optimized.
    """
    bf_sc, r_sc = sc_beamformer(cfg, sc, search)
    bf_cc, r_cc = cc_beamformer(cfg, sc, search)
    out = [(0.0, bf_sc)]
    for a in inner_bound_alphas(alpha_grid):
        if balanced:
            a = balanced_alpha(a, r_cc.cr, r_sc.sr)
        out.append((a, optimize_beamformer(cfg, sc, a, search)[0]))
    out.append((1.0, bf_cc))
    return out


def inner_bound_region(
    cfg: SystemConfig, sc: Scenario, alpha_grid: Sequence[float], search: SearchConfig = SearchConfig()
) -> RateRegion:
    """Time-sharing hull of the S-C, C-C and rate-profile anchors.

    An empty ``alpha_grid`` yields plain time sharing between C-C and S-C.
    """
    anchors = inner_bound_beamformers(cfg, sc, alpha_grid, search)
    return hull_of_rectangles([rate_pair(cfg, sc, bf) for _, bf in anchors])
