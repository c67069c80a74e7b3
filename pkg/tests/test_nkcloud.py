from __future__ import annotations

import pytest

from config import ExperimentConfig
from exports import read_descriptor, read_key_values, read_shape, read_thresholds, read_trajectory
from landscape import nk_new
import nkcloud
from nkcloud import cmd_ghc, main

DATA_FILES = ("landscape.txt", "shape.csv", "horizontal_shape.csv", "thresholds.csv", "fit_summary.txt",
              "cloud_points.csv")


def _run(*argv) -> int:
    return main([str(a) for a in argv])


def test_cloud_writes_every_artifact(tmp_path, capsys):
    out = tmp_path / "cloud"
    assert _run("cloud", "--n", 8, "--k", 2, "--seed", 3, "--out", out) == 0
    for name in DATA_FILES + ("cloud.svg",):
        assert (out / name).is_file(), name
    assert read_descriptor(out / "landscape.txt") == nk_new(8, 2, seed=3)
    sh = read_shape(out / "shape.csv")
    assert int(sh.column("count").sum()) == 8 * 2**8
    read_thresholds(out / "thresholds.csv")
    err = capsys.readouterr().err
    assert "2,048 points" in err
    assert "Wrote" in err


def test_cloud_summary_reports_the_predicted_line(tmp_path):
    out = tmp_path / "cloud"
    assert _run("cloud", "--n", 16, "--k", 4, "--out", out) == 0
    summary = read_key_values(out / "fit_summary.txt")
    assert float(summary["predicted_slope"]) == 0.6875
    assert float(summary["predicted_intercept"]) == 0.15625
    assert float(summary["observed_slope"]) == pytest.approx(0.6875, abs=0.02)
    assert summary["points"] == str(16 * 2**16)
    assert not (out / "cloud_points.csv").exists()


def test_reruns_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run("cloud", "--n", 10, "--k", 3, "--seed", 9, "--out", a) == 0
    assert _run("cloud", "--n", 10, "--k", 3, "--seed", 9, "--out", b, "--workers", 2) == 0
    for name in DATA_FILES:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_sampled_runs_are_byte_identical(tmp_path):
    args = ("cloud", "--n", 20, "--k", 5, "--mode", "sample", "--samples", 10_000, "--sample-seed", 4)
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run(*args, "--out", a) == 0
    assert _run(*args, "--out", b, "--workers", 3) == 0
    assert (a / "shape.csv").read_bytes() == (b / "shape.csv").read_bytes()


def test_config_file_and_flags(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("n=9\nk=8\nrule=ghc\n")
    out = tmp_path / "cloud"
    assert _run("cloud", "--config", cfg, "--k", 1, "--out", out) == 0
    summary = read_key_values(out / "fit_summary.txt")
    assert (summary["n"], summary["k"], summary["rule"]) == ("9", "1", "ghc")
    assert summary["predicted_intercept"] == ""
    assert summary["points"] == str(2**9)


def test_ghc_defaults_to_100_generations_70_runs(tmp_path):
    out = tmp_path / "ghc"
    assert _run("ghc", "--n", 8, "--k", 3, "--out", out) == 0
    barrier = read_key_values(out / "barrier.txt")
    assert (barrier["generations"], barrier["runs"]) == ("100", "70")
    avg = read_trajectory(out / "trajectory.csv")
    assert len(avg) == 101
    runs = (out / "runs.csv").read_text().splitlines()
    assert len(runs) == 1 + 70 * 101
    assert (out / "ghc.svg").is_file()
    t = read_thresholds(out / "thresholds.csv")
    assert float(barrier["beta"]) == t.beta


def test_ghc_without_settings_is_an_error(tmp_path):
    with pytest.raises(ValueError, match="ghc"):
        cmd_ghc(ExperimentConfig(n=6, k=1, out=tmp_path))


def test_optima_writes_census_and_basins(tmp_path):
    out = tmp_path / "optima"
    assert _run("optima", "--n", 10, "--k", 0, "--seed", 4, "--out", out) == 0
    optima = read_key_values(out / "optima.txt")
    assert optima["optima"] == "1"
    assert optima["verdict"] == "true"
    assert optima["counterexamples"] == ""
    basins = (out / "basins.csv").read_text().splitlines()
    assert len(basins) == 2
    assert basins[1].endswith(",1024,true")
    hist = (out / "optima_histogram.csv").read_text().splitlines()
    assert hist[0] == "phi,count"
    assert hist[1].endswith(",1")


def test_optima_refuses_sample_mode(tmp_path, capsys):
    out = tmp_path / "optima"
    assert _run("optima", "--n", 10, "--k", 2, "--mode", "sample", "--samples", 100, "--out", out) == 1
    assert "ERROR: mode" in capsys.readouterr().err
    assert not out.exists() or not any(out.iterdir())


@pytest.mark.parametrize("argv", [
    ("cloud", "--n", 5, "--k", 5),
    ("cloud", "--mode", "sample", "--samples", 0),
    ("cloud", "--n", 26, "--k", 1),
])
def test_config_errors_exit_nonzero(tmp_path, capsys, argv):
    assert _run(*argv, "--out", tmp_path / "x") == 1
    assert "ERROR:" in capsys.readouterr().err


def test_failed_run_removes_partial_files(tmp_path):
    out = tmp_path / "cloud"
    # one bin holds the whole cloud, so no thresholds can be found
    assert _run("cloud", "--n", 6, "--k", 1, "--bin-width", 2.0, "--out", out) == 1
    assert out.is_dir()
    assert list(out.iterdir()) == []


def test_unexpected_failure_removes_partial_files(tmp_path, monkeypatch, capsys):
    def broken_plot(*args, **kwargs):
        raise RuntimeError("renderer crashed")

    monkeypatch.setattr(nkcloud, "plot_cloud_shape", broken_plot)
    out = tmp_path / "cloud"
    assert _run("cloud", "--n", 8, "--k", 2, "--out", out) == 1
    assert "ERROR: renderer crashed" in capsys.readouterr().err
    assert list(out.iterdir()) == []
