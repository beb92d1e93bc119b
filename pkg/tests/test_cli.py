import json
import subprocess
import sys

import pytest

from pass_isac import cli
from pass_isac.core_model import Scenario, SystemConfig
from pass_isac.monte_carlo import McConfig, mode_config
from pass_isac.multi_pinch import SearchConfig, optimize_beamformer
from pass_isac.single_pinch import pareto_design


def run(args, tmp_path):
    return cli.main([*args, "--out", str(tmp_path)])


def test_help_exits_zero():
    proc = subprocess.run([sys.executable, "-m", "pass_isac.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "rates" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "pass_isac.cli", "verify", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "inject" not in proc.stdout


def test_rates_writes_two_csvs_and_manifest(tmp_path):
    assert run(["rates", "--trials", "5"], tmp_path) == 0
    rates = (tmp_path / "rates_single.csv").read_text().splitlines()
    assert rates[0] == "# pass-isac v1"
    assert rates[1].startswith("sweep_value,design,case,mean_cr,mean_sr")
    assert len(rates) == 2 + 4 * 3 * 2
    scen = (tmp_path / "scenarios.csv").read_text().splitlines()
    assert scen[0] == "# pass-isac v1" and len(scen) == 2 + 5
    manifest = json.loads((tmp_path / "manifest_rates.json").read_text())
    assert manifest["command"] == "rates" and manifest["seed"] == 0
    assert len(manifest["config_hash"]) == 64
    assert sorted(manifest["outputs"]) == sorted(str(tmp_path / n) for n in ("rates_single.csv", "scenarios.csv"))


def test_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert cli.main(["rates", "--trials", "6", "--seed", "77", "--out", str(out)]) == 0
    assert (a / "rates_single.csv").read_bytes() == (b / "rates_single.csv").read_bytes()
    ha = json.loads((a / "manifest_rates.json").read_text())["config_hash"]
    hb = json.loads((b / "manifest_rates.json").read_text())["config_hash"]
    assert ha == hb


def test_hash_tracks_config(tmp_path):
    cli.main(["rates", "--trials", "2", "--out", str(tmp_path / "a")])
    cli.main(["rates", "--trials", "2", "--power-dbm", "20", "--out", str(tmp_path / "b")])
    ha = json.loads((tmp_path / "a" / "manifest_rates.json").read_text())["config_hash"]
    hb = json.loads((tmp_path / "b" / "manifest_rates.json").read_text())["config_hash"]
    assert ha != hb


def test_config_precedence(tmp_path):
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps({"frame_len_L": 7, "monte_carlo": {"trials": 3, "seed": 5}, "search": {"grid_points_Q": 99}}))
    args = cli.build_parser().parse_args(["rates", "--config", str(cfg_file), "--seed", "6"])
    res = cli.resolve(args)
    assert res.cfg.frame_len_L == 7
    assert res.mc.trials == 3 and res.mc.seed == 6
    assert res.search.grid_points_Q == 99


def test_region_instantaneous_single(tmp_path):
    assert run(["region", "--xc", "8", "--yc", "1", "--xs", "-8", "--ys", "-1", "--alpha-grid", "11"], tmp_path) == 0
    lines = (tmp_path / "region_single_instantaneous.csv").read_text().splitlines()
    assert lines[:2] == ["# pass-isac v1", "curve,cr,sr"]
    assert {l.split(",")[0] for l in lines[2:]} == {"pass", "timeshare", "fixed"}


def test_region_lossy_outer_multi(tmp_path):
    args = ["region", "--mode", "multi", "--antennas", "2", "--case", "lossy", "--bound", "outer", "--xc", "1", "--grid-points", "301", "--alpha-grid", "3"]
    assert run(args, tmp_path) == 0
    lines = (tmp_path / "region_multi_instantaneous.csv").read_text().splitlines()
    assert {l.split(",")[0] for l in lines[2:]} == {"outer_lossy", "fixed"}


def test_region_averaged(tmp_path):
    assert run(["region", "--trials", "3", "--alpha-grid", "5"], tmp_path) == 0
    assert (tmp_path / "region_single_average.csv").exists()
    assert (tmp_path / "manifest_region.json").exists()


def test_pareto_matches_library(tmp_path, capsys):
    assert run(["pareto", "--alpha", "0.997"], tmp_path) == 0
    doc = json.loads(capsys.readouterr().out)
    cfg = mode_config(SystemConfig(), McConfig(), "single")
    sol = pareto_design(cfg, Scenario(8, 1, -8, -1), 0.997)
    assert doc["positions"] == [sol.t_star] and doc["cr"] == sol.rates.cr and doc["sr"] == sol.rates.sr

    assert run(["pareto", "--mode", "multi", "--antennas", "2", "--alpha", "0.5", "--grid-points", "401"], tmp_path) == 0
    doc = json.loads(capsys.readouterr().out)
    bf, r = optimize_beamformer(mode_config(SystemConfig(), McConfig(), "multi", 2), Scenario(8, 1, -8, -1), 0.5, SearchConfig(grid_points_Q=401))
    assert doc["positions"] == list(bf.positions) and doc["sr"] == r.sr


def test_pareto_endpoints(tmp_path, capsys):
    run(["pareto", "--alpha", "1", "--xc", "3"], tmp_path)
    assert json.loads(capsys.readouterr().out)["positions"] == [3.0]
    run(["pareto", "--alpha", "0", "--xs", "-2.5"], tmp_path)
    assert json.loads(capsys.readouterr().out)["positions"] == [-2.5]


@pytest.mark.parametrize(
    "args",
    [
        ["rates", "--bogus"],
        ["rates", "--mode", "single", "--antennas", "3"],
        ["rates", "--trials", "0"],
        ["rates", "--alpha-grid", "1"],
        ["rates", "--jobs", "0"],
        ["rates", "--mode", "multi", "--sweep", "1.5"],
        ["pareto", "--alpha", "1.5"],
        ["region", "--case", "medium"],
    ],
)
def test_bad_flags_exit_two(args, tmp_path, capsys):
    try:
        code = run(args, tmp_path)
    except SystemExit as exc:
        code = exc.code
    assert code == 2
    err = capsys.readouterr().err.strip()
    assert err.startswith("pass-isac: error:") and "\n" not in err


def test_bad_config_file_exit_two(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["rates", "--config", str(bad)], tmp_path) == 2
    bad.write_text(json.dumps({"warp_factor": 9}))
    assert run(["rates", "--config", str(bad)], tmp_path) == 2


def test_numerical_failure_exits_one(tmp_path, capsys):
    # y_tx = y_c = -2 and zero height: a zero distance is rejected as a numerical failure
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps({"waveguide_height_d": 0.0}))
    code = run(["pareto", "--config", str(cfg_file), "--alpha", "1", "--yc", "-2"], tmp_path)
    assert code == 1
    assert "numerical failure" in capsys.readouterr().err


def test_verify_quick_passes_and_bad_fub_fails(tmp_path):
    assert run(["verify", "--quick"], tmp_path) == 0
    assert run(["verify", "--quick", "--inject-bad-fub"], tmp_path) == 1
    lines = (tmp_path / "verify.csv").read_text().splitlines()
    assert "karamata,0," in "\n".join(lines)
