"""Command-line entry point: ``pass-isac {rates,region,pareto,verify}``.

Configuration precedence: built-in defaults < ``--config`` JSON < flags.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .core_model import DomainError, Scenario, SystemConfig, dbm_to_watts
from .monte_carlo import (
    McConfig,
    RateRow,
    Sweep,
    average_rates,
    average_region,
    default_alpha_grid,
    instantaneous_regions,
    mode_config,
    sample_scenario,
)
from .multi_pinch import SearchConfig, cc_beamformer, optimize_beamformer, sc_beamformer
from .single_pinch import pareto_design

log = logging.getLogger("pass_isac")

SCHEMA_HEADER = "# pass-isac v1\n"
DEFAULT_SWEEPS = {"single": ("dx_m", (10.0, 20.0, 30.0, 40.0)), "multi": ("num_antennas_N", (1, 2, 4, 6, 8, 10))}
# instantaneous-region scenario used when only some coordinates are given
DEFAULT_SCENARIO = {"xc": 8.0, "yc": 1.0, "xs": -8.0, "ys": -1.0}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # one-line diagnostic, exit 2
        self.exit(2, f"pass-isac: error: {message}\n")


@dataclass
class RunManifest:
    config_hash: str
    command: str
    seed: int
    outputs: list[str] = field(default_factory=list)
    wall_time_s: float = 0.0

    def write(self, out_dir: Path) -> Path:
        path = out_dir / f"manifest_{self.command}.json"
        path.write_text(json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n")
        return path


def config_digest(resolved: dict[str, Any]) -> str:
    return hashlib.sha256(json.dumps(resolved, sort_keys=True).encode()).hexdigest()


# -- argument handling -------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON config (flat SystemConfig fields, optional 'search' and 'monte_carlo')")
    p.add_argument("--seed", type=int, help="64-bit seed for scenario sampling")
    p.add_argument("--trials", type=int, help="Monte-Carlo realizations (default 1000)")
    p.add_argument("--alpha-grid", type=int, dest="alpha_points", help="number of uniform alpha points (default 101)")
    p.add_argument("--mode", choices=("single", "multi"), default="single")
    p.add_argument("--antennas", type=int, help="number of pinching antennas N (multi mode)")
    p.add_argument("--case", choices=("ideal", "lossy"), default="ideal")
    p.add_argument("--bound", choices=("inner", "outer", "both", "timeshare"), default="both")
    p.add_argument("--out", type=Path, default=Path("results"))
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--grid-points", type=int, dest="grid_points", help="search grid size Q (default 10000)")
    p.add_argument("--restarts", type=int, help="element-wise search restarts (default 1)")
    p.add_argument("--dx", type=float, help="side length D_x of the placement rectangle, m")
    p.add_argument("--power-dbm", type=float, help="transmit power P, dBm")
    p.add_argument("--noise-dbm", type=float, help="noise power for both links, dBm")
    p.add_argument("--sweep", help="comma-separated sweep values (D_x in single mode, N in multi mode)")
    for name in ("xc", "yc", "xs", "ys"):
        p.add_argument(f"--{name}", type=float, help=f"scenario coordinate {name} (instantaneous results)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pass-isac", description="CR-SR rate regions of pinching-antenna ISAC systems")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("rates", help="average CR/SR of C-C, S-C and fixed designs over a sweep")
    _common(p)
    p = sub.add_parser("region", help="instantaneous (with --xc..--ys) or averaged rate regions")
    _common(p)
    p = sub.add_parser("pareto", help="print one rate-profile design as JSON")
    _common(p)
    p.add_argument("--alpha", type=float, default=0.5)
    p = sub.add_parser("verify", help="run the numerical identity and bound checks")
    _common(p)
    p.add_argument("--quick", action="store_true", help="reduced sample counts")
    p.add_argument("--inject-bad-fub", action="store_true", help=argparse.SUPPRESS)
    return parser


@dataclass
class Resolved:
    cfg: SystemConfig
    search: SearchConfig
    mc: McConfig

    def as_dict(self) -> dict[str, Any]:
        return {"system": self.cfg.to_dict(), "search": self.search.to_dict(), "monte_carlo": self.mc.to_dict()}


def resolve(args: argparse.Namespace) -> Resolved:
    cfg_data: dict[str, Any] = {}
    search_data: dict[str, Any] = {}
    mc_data: dict[str, Any] = {}
    if args.config is not None:
        try:
            raw = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        search_data = dict(raw.pop("search", {}))
        mc_data = dict(raw.pop("monte_carlo", {}))
        cfg_data = raw
    if args.power_dbm is not None:
        cfg_data["power_w"] = dbm_to_watts(args.power_dbm)
    if args.noise_dbm is not None:
        cfg_data["noise_comm_w"] = cfg_data["noise_sense_w"] = dbm_to_watts(args.noise_dbm)
    if args.antennas is not None:
        cfg_data["num_antennas_N"] = args.antennas
    if args.grid_points is not None:
        search_data["grid_points_Q"] = args.grid_points
    if args.restarts is not None:
        search_data["restarts"] = args.restarts
    for flag, key in (("seed", "seed"), ("trials", "trials"), ("dx", "dx_m")):
        if getattr(args, flag) is not None:
            mc_data[key] = getattr(args, flag)
    if args.alpha_points is not None:
        if args.alpha_points < 2:
            raise UsageError("--alpha-grid needs at least 2 points")
        mc_data["alpha_grid"] = default_alpha_grid(args.alpha_points)
    if args.mode == "single" and cfg_data.get("num_antennas_N", 1) != 1:
        raise UsageError("--mode single requires N = 1")
    try:
        mc = McConfig(**mc_data)
        base = SystemConfig.from_dict(cfg_data)
        cfg = mode_config(base, mc, args.mode)
        search = SearchConfig.from_dict(search_data)
    except (TypeError, DomainError) as exc:
        raise UsageError(f"bad configuration: {exc}") from exc
    return Resolved(cfg, search, mc)


def _scenario(args: argparse.Namespace) -> Scenario | None:
    given = {k: getattr(args, k) for k in DEFAULT_SCENARIO}
    if all(v is None for v in given.values()):
        return None
    vals = {k: (DEFAULT_SCENARIO[k] if v is None else v) for k, v in given.items()}
    return Scenario(vals["xc"], vals["yc"], vals["xs"], vals["ys"])


def _write_csv(path: Path, header: str, lines: Sequence[str]) -> None:
    path.write_text(SCHEMA_HEADER + header + "\n" + "".join(line + "\n" for line in lines))


# -- commands ----------------------------------------------------------------


def cmd_rates(args: argparse.Namespace, res: Resolved) -> list[Path]:
    param, values = DEFAULT_SWEEPS[args.mode]
    if args.sweep:
        values = tuple(float(v) for v in args.sweep.split(","))
    if param == "num_antennas_N" and any(v != int(v) or v < 1 for v in values):
        raise UsageError("antenna sweep values must be positive integers")
    rows = average_rates(res.cfg, res.mc, mode=args.mode, sweep=Sweep(param, tuple(values)), search=res.search, jobs=args.jobs)
    rates_path = args.out / f"rates_{args.mode}.csv"
    _write_csv(rates_path, ",".join(RateRow.COLUMNS), [r.as_csv_row() for r in rows])
    scen_path = args.out / "scenarios.csv"
    lines = []
    for i in range(res.mc.trials):
        s = sample_scenario(res.mc, i)
        lines.append(f"{i},{s.user_x!r},{s.user_y!r},{s.target_x!r},{s.target_y!r}")
    _write_csv(scen_path, "trial,user_x,user_y,target_x,target_y", lines)
    return [rates_path, scen_path]


def _labels(mode: str, bound: str, case: str) -> list[str]:
    if mode == "single":
        base = ["pass", "timeshare"]
    else:
        base = {
            "inner": ["inner", "timeshare"],
            "outer": ["outer"],
            "both": ["inner", "outer", "timeshare"],
            "timeshare": ["timeshare"],
        }[bound]
    suffix = "" if case == "ideal" else "_lossy"
    return [b + suffix for b in base] + ["fixed"]


def cmd_region(args: argparse.Namespace, res: Resolved) -> list[Path]:
    sc = _scenario(args)
    if sc is not None:
        regions = instantaneous_regions(res.cfg, res.mc, sc, args.mode, res.search)
        tag = "instantaneous"
    else:
        batch = average_region(res.cfg, res.mc, args.mode, res.search, jobs=args.jobs)
        regions = batch.regions
        tag = "average"
        log.info("trials ok=%d failed=%d nesting violations=%d", batch.trials_ok, batch.trials_failed, batch.nesting_violations)
    path = args.out / f"region_{args.mode}_{tag}.csv"
    lines = []
    for label in _labels(args.mode, args.bound, args.case):
        lines.extend(regions[label].to_csv(label).splitlines())
    _write_csv(path, "curve,cr,sr", lines)
    return [path]


def cmd_pareto(args: argparse.Namespace, res: Resolved) -> list[Path]:
    if not 0.0 <= args.alpha <= 1.0:
        raise UsageError("--alpha must lie in [0, 1]")
    sc = _scenario(args) or Scenario(**{k: v for k, v in zip(("user_x", "user_y", "target_x", "target_y"), DEFAULT_SCENARIO.values())})
    if args.mode == "single":
        sol = pareto_design(res.cfg, sc, args.alpha)
        positions, rates = [sol.t_star], sol.rates
    elif args.alpha == 1.0:
        bf, rates = cc_beamformer(res.cfg, sc, res.search)
        positions = list(bf.positions)
    elif args.alpha == 0.0:
        bf, rates = sc_beamformer(res.cfg, sc, res.search)
        positions = list(bf.positions)
    else:
        bf, rates = optimize_beamformer(res.cfg, sc, args.alpha, res.search)
        positions = list(bf.positions)
    doc = {"alpha": args.alpha, "mode": args.mode, "positions": positions, "cr": rates.cr, "sr": rates.sr}
    text = json.dumps(doc, indent=2)
    print(text)
    path = args.out / f"pareto_{args.mode}.json"
    path.write_text(text + "\n")
    return [path]


def cmd_verify(args: argparse.Namespace, res: Resolved) -> list[Path]:
    from . import verification

    results = verification.run_all(quick=args.quick, seed=res.mc.seed, inject_bad_fub=args.inject_bad_fub)
    path = args.out / "verify.csv"
    _write_csv(path, "check,passed,detail", [f"{r.name},{int(r.passed)},{r.detail}" for r in results])
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    if not all(r.passed for r in results):
        raise verification.VerificationFailed(f"{sum(not r.passed for r in results)} check(s) failed")
    return [path]


COMMANDS = {"rates": cmd_rates, "region": cmd_region, "pareto": cmd_pareto, "verify": cmd_verify}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    start = time.perf_counter()
    try:
        res = resolve(args)
        if args.jobs < 1:
            raise UsageError("--jobs must be positive")
        args.out.mkdir(parents=True, exist_ok=True)
        outputs = COMMANDS[args.command](args, res)
    except UsageError as exc:
        print(f"pass-isac: error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"pass-isac: numerical failure: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # verification failures and anything numerical
        from .verification import VerificationFailed

        if isinstance(exc, VerificationFailed):
            print(f"pass-isac: {exc}", file=sys.stderr)
            return 1
        raise
    manifest = RunManifest(
        config_hash=config_digest(res.as_dict()),
        command=args.command,
        seed=res.mc.seed,
        outputs=[str(p) for p in outputs],
        wall_time_s=round(time.perf_counter() - start, 6),
    )
    manifest.write(args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
