"""End-to-end command-line checks on tiny grids."""

import json
import os

import pytest

from topocut.cli import main


def read_grid(path):
    with open(path) as fh:
        return [[int(v) for v in line.split(",")] for line in fh if line.strip()]


@pytest.fixture(scope="module")
def smoke_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("smoke")
    rc = main(["run", "--preset", "mbb", "--resolution", "12x4",
               "--max-iters", "12", "--out", str(out)])
    return rc, out


def test_run_exits_zero(smoke_run):
    rc, _ = smoke_run
    assert rc == 0


def test_run_writes_all_artifacts(smoke_run):
    _, out = smoke_run
    for name in ("design_final.csv", "design_final.pgm",
                 "history.csv", "summary.json"):
        assert (out / name).exists(), name


def test_summary_matches_history(smoke_run):
    _, out = smoke_run
    summary = json.loads((out / "summary.json").read_text())
    assert summary["preset"] == "mbb"
    assert summary["resolution"] == "12x4"
    assert summary["status"] == "ok"
    assert summary["objective"] > 0
    rows = (out / "history.csv").read_text().strip().splitlines()
    assert rows[0].startswith("stage,k,f,eta,U,d,omega")
    assert summary["n_fem"] == len(rows) - 1


def test_design_grid_shape_and_values(smoke_run):
    _, out = smoke_run
    grid = read_grid(out / "design_final.csv")
    assert len(grid) == 4  # rows run top to bottom
    assert all(len(r) == 12 for r in grid)
    assert set(v for r in grid for v in r) <= {0, 1}


def test_pgm_header_and_levels(smoke_run):
    _, out = smoke_run
    lines = (out / "design_final.pgm").read_text().split("\n")
    assert lines[0] == "P2"
    assert lines[1] == "12 4"
    assert lines[2] == "255"
    pixels = {int(v) for line in lines[3:] for v in line.split()}
    assert pixels <= {0, 255}


def test_reruns_are_byte_identical(smoke_run, tmp_path):
    _, first = smoke_run
    rc = main(["run", "--preset", "mbb", "--resolution", "12x4",
               "--max-iters", "12", "--out", str(tmp_path)])
    assert rc == 0
    for name in ("design_final.csv", "history.csv"):
        assert (tmp_path / name).read_bytes() == (first / name).read_bytes()


def test_config_file_supplies_defaults_and_flags_win(tmp_path):
    cfg = tmp_path / "job.cfg"
    cfg.write_text(
        "# tiny regression job\n"
        "preset = mbb\n"
        "resolution = 16x8\n"
        "vt = 0.5\n"
        "max_iters = 2\n")
    out = tmp_path / "out"
    rc = main(["run", "--config", str(cfg),
               "--resolution", "12x4", "--out", str(out)])
    assert rc == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["resolution"] == "12x4"  # flag beats config
    assert summary["target"] == 0.5         # config beats preset default


def test_mechanism_export_mirrors_the_half_domain(tmp_path):
    rc = main(["run", "--preset", "mechanism", "--resolution", "16x8",
               "--max-iters", "3", "--out", str(tmp_path)])
    assert rc == 0
    grid = read_grid(tmp_path / "design_final.csv")
    assert len(grid) == 16  # half domain of 8 rows, mirrored
    assert grid == grid[::-1]


def test_missing_preset_is_a_usage_error(tmp_path, capsys):
    rc = main(["run", "--out", str(tmp_path)])
    assert rc == 2
    assert "preset" in capsys.readouterr().err


def test_bad_resolution_is_a_usage_error(tmp_path, capsys):
    rc = main(["run", "--preset", "mbb", "--resolution", "240by80",
               "--out", str(tmp_path)])
    assert rc == 2
    assert "resolution" in capsys.readouterr().err


def test_conflicting_targets_rejected(tmp_path):
    rc = main(["run", "--preset", "mbb", "--resolution", "12x4",
               "--vt", "0.4", "--mmax", "0.4", "--out", str(tmp_path)])
    assert rc == 2


def test_volume_flag_rejected_on_mass_preset(tmp_path, capsys):
    rc = main(["run", "--preset", "mbb2mat", "--resolution", "12x6",
               "--vt", "0.4", "--out", str(tmp_path)])
    assert rc == 2
    assert "--mmax" in capsys.readouterr().err


def test_matset_limited_to_five_material_presets(tmp_path):
    rc = main(["run", "--preset", "mbb", "--resolution", "12x4",
               "--matset", "2", "--out", str(tmp_path)])
    assert rc == 2


def test_optimization_failure_exits_three_but_keeps_artifacts(tmp_path, capsys):
    # a trust region far tighter than one element flip leaves the first
    # master problem with no feasible binary point
    rc = main(["run", "--preset", "mbb", "--resolution", "12x4",
               "--d0", "1e-9", "--out", str(tmp_path)])
    assert rc == 3
    assert "failed" in capsys.readouterr().err
    assert (tmp_path / "summary.json").exists()
    assert (tmp_path / "design_final.csv").exists()


def test_diagnose_prints_conditioning_table(capsys):
    rc = main(["diagnose-conditioning", "--preset", "mbb",
               "--resolution", "12x4"])
    assert rc == 0
    text = capsys.readouterr().out
    assert "ratio" in text
    assert "iterate 1" in text and "iterate 2" in text
