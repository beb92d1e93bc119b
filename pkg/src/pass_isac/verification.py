"""Numerical self-checks behind ``pass-isac verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import outer_bound
from .core_model import Beamformer, Scenario, SystemConfig, comm_rate, sense_rate
from .monte_carlo import McConfig, default_alpha_grid, mode_config, sample_scenario
from .region import region_subset
from .sensing_oracle import (
    VirtualChannel,
    induced_channel,
    lemma2_check,
    mi_determinant,
    mi_scalar,
    mmse,
    simulate_mse,
)
from .single_pinch import fixed_region, single_pinch_region


class VerificationFailed(RuntimeError):
    pass


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def random_channel(rng: np.random.Generator, max_L: int = 16) -> VirtualChannel:
    L = int(rng.integers(1, max_L + 1))
    scale = 10.0 ** rng.uniform(-3, 1)
    h = scale * (rng.standard_normal(L) + 1j * rng.standard_normal(L))
    return VirtualChannel(h, 10.0 ** rng.uniform(-1, 1), 10.0 ** rng.uniform(-1, 1))


def check_sylvester(count: int, rng: np.random.Generator) -> CheckResult:
    worst = max(abs(mi_determinant(vc) - mi_scalar(vc)) for vc in (random_channel(rng) for _ in range(count)))
    return CheckResult("sylvester", worst <= 1e-10, f"max |det - scalar| = {worst:.3e} bits over {count}")


def check_mmse(count: int, draws: int, rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    for _ in range(count):
        vc = random_channel(rng, max_L=8)
        mean, se = simulate_mse(vc, draws, int(rng.integers(2**63)))
        worst = max(worst, abs(mean - mmse(vc)) / se)
    # 3.5 SE leaves room for multiple comparisons
    return CheckResult("mmse_monte_carlo", worst <= 3.5, f"max deviation {worst:.2f} SE over {count} channels")


def check_lemma2(scenarios: int, candidates: int, rng: np.random.Generator, seed: int) -> CheckResult:
    mc = McConfig(seed=seed, trials=1)
    cfg = mode_config(SystemConfig(), mc, "multi", 3)
    bad = 0
    for i in range(scenarios):
        sc = sample_scenario(mc, i)
        bfs = [Beamformer(rng.uniform(cfg.feed_x_t0, cfg.deploy_max_x, 3)) for _ in range(candidates)]
        bad += not lemma2_check(cfg, sc, bfs)
    return CheckResult("lemma2", bad == 0, f"{bad} mismatches in {scenarios} scenarios x {candidates} candidates")


def check_karamata(samples: int, rng: np.random.Generator, f: Callable) -> CheckResult:
    worst_gap = -math.inf
    worst_attain = 0.0
    for _ in range(samples):
        n = int(rng.integers(1, 9))
        rho_sq = 10.0 ** rng.uniform(-2, 2)
        beta = rng.random(n)
        s = float(np.sum(beta**2))
        lhs = float(np.sum(1.0 / (rho_sq + beta**2)))
        worst_gap = max(worst_gap, lhs - f(rho_sq, s, n))
        x = outer_bound.extremal_profile(s, n)
        worst_attain = max(worst_attain, abs(float(np.sum(1.0 / (rho_sq + x))) - f(rho_sq, s, n)))
    ok = worst_gap <= 1e-12 and worst_attain <= 1e-12
    return CheckResult("karamata", ok, f"max excess {worst_gap:.3e}, extremal gap {worst_attain:.3e}")


def check_fub_continuity(f: Callable) -> CheckResult:
    """Jumps at integer s, net of the slope: |df/ds| <= 1/rho^4 on every branch."""
    eps = 1e-12
    worst = 0.0
    for n in range(1, 9):
        for rho_sq in (0.01, 0.5, 3.0):
            for k in range(1, n):
                at = f(rho_sq, float(k), n)
                jump = max(abs(f(rho_sq, k - eps, n) - at), abs(f(rho_sq, k + eps, n) - at))
                worst = max(worst, jump - eps / rho_sq**2)
    return CheckResult("fub_continuity", worst <= 1e-9, f"max jump at integer s {worst:.3e}")


def check_chain(scenarios: int, rng: np.random.Generator, seed: int) -> CheckResult:
    """Rates of random placements inside [x_c, x_s] stay below the Z-indexed outer bound."""
    mc = McConfig(seed=seed, trials=1)
    bad = 0
    for i in range(scenarios):
        sc = sample_scenario(mc, 10_000 + i)
        n = int(rng.integers(1, 9))
        cfg = mode_config(SystemConfig(), mc, "multi", n)
        lo, hi = sorted((sc.user_x, sc.target_x))
        t = rng.uniform(lo, hi, n)
        bf = Beamformer(t)
        z = float(np.clip(np.sum((t - sc.user_x) / (sc.target_x - sc.user_x)), 0.0, n))
        cr_ok = comm_rate(cfg, sc, bf) <= outer_bound.cr_outer(cfg, sc, z) + 1e-9
        sr_ok = sense_rate(cfg, sc, bf) <= outer_bound.sr_outer(cfg, sc, z) + 1e-9
        bad += not (cr_ok and sr_ok)
    return CheckResult("bound_chain", bad == 0, f"{bad} violations in {scenarios} placements")


def check_nesting(scenarios: int, seed: int) -> CheckResult:
    mc = McConfig(seed=seed, trials=1)
    cfg = mode_config(SystemConfig(), mc, "single")
    grid = default_alpha_grid()
    bad = 0
    for i in range(scenarios):
        sc = sample_scenario(mc, 20_000 + i)
        bad += not region_subset(fixed_region(cfg, sc), single_pinch_region(cfg, sc, grid), 1e-9)
    return CheckResult("fixed_nesting", bad == 0, f"{bad} violations in {scenarios} scenarios")


def _bad_fub(rho_sq: float, s: float, n: int) -> float:
    return 0.9 * outer_bound.f_ub(rho_sq, s, n)


def run_all(quick: bool = False, seed: int = 0, inject_bad_fub: bool = False) -> list[CheckResult]:
    rng = np.random.default_rng([seed & ((1 << 64) - 1), 7])
    f = _bad_fub if inject_bad_fub else outer_bound.f_ub
    scale = 5 if quick else 1
    return [
        check_sylvester(1000 // scale, rng),
        check_mmse(5 if quick else 20, 20_000, rng),
        check_lemma2(50 // scale, 100, rng, seed),
        check_karamata(10_000 // scale, rng, f),
        check_fub_continuity(f),
        check_chain(200 // scale, rng, seed),
        check_nesting(200 // scale, seed),
    ]
