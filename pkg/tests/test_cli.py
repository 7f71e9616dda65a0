#!/usr/bin/env python3
"""Test suite for the skybridge command line and run directories"""

import csv
import json
from pathlib import Path

import pytest

from src.scenario.cli import EXIT_OK, EXIT_VALIDATION, build_parser, main
from src.scenario.config import load_config
from src.scenario.runner import resolve_run_dir

SHORT_HOP = """
[scenario]
mode = "coverage"
name = "short_hop"

[flight]
origin_lat_deg = 40.64
origin_lon_deg = -73.78
destination_lat_deg = 39.64
destination_lon_deg = -73.78

[constellation.policy]
max_satellites = 3
search_raan_step_deg = 10.0
search_anomaly_step_deg = 10.0
"""

SMALL_CABIN = """
[scenario]
mode = "cabin"
name = "small_cabin"

[cabin.geometry]
length_m = 6.0
width_m = 3.0
height_m = 2.4

[cabin.sbr]
angular_separation_deg = 5.0
max_reflections = 1
dump_paths = true

[cabin.layout]
n_transmitters = 4
rows = 2
columns = 1
seats_per_cell = 1
"""


@pytest.fixture
def coverage_config(tmp_path):
    path = tmp_path / "short_hop.toml"
    path.write_text(SHORT_HOP)
    return path


@pytest.fixture
def cabin_config(tmp_path):
    path = tmp_path / "small_cabin.toml"
    path.write_text(SMALL_CABIN)
    return path


def _read_csv(path: Path) -> list[dict]:
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_parser_subcommands():
    """Test run, report and sweep parse their options"""
    parser = build_parser()
    args = parser.parse_args(["run", "x.toml", "--set", "a.b=1", "--set", "c.d=2", "--threads", "4"])
    assert args.command == "run"
    assert args.overrides == ["a.b=1", "c.d=2"]
    assert args.threads == 4
    args = parser.parse_args(["sweep", "x.toml", "--values", "10", "20"])
    assert args.key == "constellation.mask.beam_half_angle_deg"
    assert args.values == ["10", "20"]
    with pytest.raises(SystemExit):
        parser.parse_args(["fly"])


def test_validation_exit_codes(tmp_path, coverage_config):
    """Test configuration problems exit with code 2"""
    assert main(["run", str(tmp_path / "missing.toml"), "--no-progress"]) == EXIT_VALIDATION
    assert main(["run", str(coverage_config), "--set", "nonsense", "--no-progress"]) == EXIT_VALIDATION
    assert main(["run", str(coverage_config), "--threads", "0", "--no-progress"]) == EXIT_VALIDATION
    zero_budget = ["run", str(coverage_config), "--set", "constellation.policy.max_satellites=0", "--no-progress"]
    assert main(zero_budget) == EXIT_VALIDATION
    assert main(["report", str(tmp_path)]) == EXIT_VALIDATION


def test_coverage_run_and_report(tmp_path, coverage_config, capsys):
    """Test a coverage run writes its tables and report ends at the summary coverage"""
    run_dir = tmp_path / "run"
    assert main(["run", str(coverage_config), "--out", str(run_dir), "--no-progress"]) == EXIT_OK
    assert str(run_dir) in capsys.readouterr().out

    for name in ("timeline.csv", "handovers.csv", "satellites.csv", "coverage_progress.csv",
                 "summary.json", "discarded.log", "run_manifest.json"):
        assert (run_dir / name).is_file()
    manifest = json.loads((run_dir / "run_manifest.json").read_text())
    assert manifest["artifact"] == "skybridge"
    assert manifest["mode"] == "coverage"
    assert manifest["config"]["constellation"]["policy"]["max_satellites"] == 3
    summary = json.loads((run_dir / "summary.json").read_text())

    timeline = _read_csv(run_dir / "timeline.csv")
    assert list(timeline[0]) == ["t_s", "serving_sat", "elevation_deg", "slant_range_m"]
    satellites = _read_csv(run_dir / "satellites.csv")
    assert 1 <= len(satellites) <= 3

    (run_dir / "coverage_progress.csv").unlink()
    assert main(["report", str(run_dir)]) == EXIT_OK
    assert "coverage_pct" in capsys.readouterr().out
    progress = _read_csv(run_dir / "coverage_progress.csv")
    assert len(progress) == len(timeline)
    assert float(progress[-1]["cumulative_coverage_pct"]) == summary["coverage_pct"]


def test_threads_byte_identical(tmp_path, coverage_config):
    """Test --threads 1 and --threads 8 write identical outputs"""
    single, multi = tmp_path / "single", tmp_path / "multi"
    assert main(["run", str(coverage_config), "--out", str(single), "--threads", "1", "--no-progress"]) == EXIT_OK
    assert main(["run", str(coverage_config), "--out", str(multi), "--threads", "8", "--no-progress"]) == EXIT_OK
    names = sorted(p.name for p in single.iterdir())
    assert names == sorted(p.name for p in multi.iterdir())
    for name in names:
        if name == "run_manifest.json":
            continue
        assert (single / name).read_bytes() == (multi / name).read_bytes(), name
    manifests = [json.loads((d / "run_manifest.json").read_text()) for d in (single, multi)]
    for manifest in manifests:
        manifest.pop("created_at")
    assert manifests[0] == manifests[1]


def test_cabin_run_and_boxplot(tmp_path, cabin_config):
    """Test a cabin run reports one boxplot row per transmitter"""
    run_dir = tmp_path / "cabin"
    assert main(["run", str(cabin_config), "--out", str(run_dir), "--no-progress"]) == EXIT_OK
    matrix = _read_csv(run_dir / "path_loss_matrix.csv")
    assert len(matrix) == 4 * 2
    assert (run_dir / "paths.csv").is_file()
    stats = json.loads((run_dir / "tx_stats.json").read_text())
    assert stats["tx_array"] == "URA 4x8"
    assert stats["ue_array"] == "URA 2x2"

    assert main(["report", str(run_dir)]) == EXIT_OK
    boxplot = _read_csv(run_dir / "boxplot.csv")
    assert [row["tx_id"] for row in boxplot] == ["0", "1", "2", "3"]
    for row in boxplot:
        assert float(row["min"]) <= float(row["median"]) <= float(row["max"])


def test_sweep_writes_table(tmp_path, coverage_config):
    """Test a sweep writes one row per value and a sweep manifest"""
    out = tmp_path / "sweep"
    argv = ["sweep", str(coverage_config), "--out", str(out), "--key", "constellation.mask.min_elevation_deg",
            "--values", "10", "25", "--no-progress"]
    assert main(argv) == EXIT_OK
    rows = _read_csv(out / "sweep.csv")
    assert [row["value"] for row in rows] == ["10", "25"]
    manifest = json.loads((out / "run_manifest.json").read_text())
    assert manifest["mode"] == "sweep"
    assert main(["report", str(out)]) == EXIT_OK


def test_sweep_rejects_cabin(tmp_path, cabin_config):
    """Test sweeps only apply to coverage scenarios"""
    argv = ["sweep", str(cabin_config), "--out", str(tmp_path / "s"), "--values", "1", "--no-progress"]
    assert main(argv) == EXIT_VALIDATION


def test_run_dir_precedence(tmp_path, coverage_config, monkeypatch):
    """Test --out, then output_dir, then $SKYBRIDGE_OUT, then runs/"""
    loaded = load_config(coverage_config)
    monkeypatch.delenv("SKYBRIDGE_OUT", raising=False)
    assert resolve_run_dir(loaded) == Path("runs") / "short_hop"
    monkeypatch.setenv("SKYBRIDGE_OUT", str(tmp_path / "env"))
    assert resolve_run_dir(loaded) == tmp_path / "env" / "short_hop"
    with_dir = load_config(coverage_config, [f'scenario.output_dir="{tmp_path / "configured"}"'])
    assert resolve_run_dir(with_dir) == tmp_path / "configured"
    assert resolve_run_dir(with_dir, str(tmp_path / "cli")) == tmp_path / "cli"
