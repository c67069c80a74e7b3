#!/usr/bin/env python3
"""
nkcloud.py — Fitness-cloud experiments on NK landscapes, end to end.

Commands:
    cloud   shape curves, α/β/γ and the mean-line fit vs. the Weinberger line
    ghc     GHC cloud + average GHC trajectory + barrier-of-fitness report
    optima  strict local optima census, diagonal check and basins of attraction

Every run also writes landscape.txt (the full landscape descriptor) so the
instance can be audited and rebuilt. Progress goes to stderr; data goes to
files under --out.

Usage:
    python3 nkcloud.py cloud --n 16 --k 4 --out out/cloud_16_4
    python3 nkcloud.py cloud --n 25 --k 20 --mode sample --samples 1000000 --workers 8
    python3 nkcloud.py ghc --n 16 --k 8 --runs 70 --generations 100 --out out/ghc_16_8
    python3 nkcloud.py optima --n 12 --k 6 --seed 3
    python3 nkcloud.py cloud --config experiments/n25_k20.cfg --seed 11   # flags win
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

load_dotenv()

from cloud import (  # noqa: E402
    BorderingRule,
    CloudShape,
    EvolvabilityThresholds,
    FitnessCloud,
    RegressionFit,
    build_cloud,
    fit_mean_line,
    horizontal_shape,
    instance_slope,
    local_optima_census,
    optima_below_diagonal,
    shape,
    thresholds,
    weinberger_line,
)
from config import ConfigError, ExperimentConfig, Mode, load_config  # noqa: E402
from exports import (  # noqa: E402
    write_basins,
    write_descriptor,
    write_histogram,
    write_key_values,
    write_points,
    write_runs,
    write_shape,
    write_thresholds,
    write_trajectory,
)
from heuristic import average_trajectory, barrier_report, basin_census  # noqa: E402
from landscape import GenotypeStream, NkLandscape, enumerate_genotypes, nk_new, sample_genotypes  # noqa: E402
from plots import plot_cloud_shape, plot_ghc_dynamics  # noqa: E402

# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

RAW_POINTS_MAX_N = 12
BASIN_MAX_N = 20


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _out(cfg: ExperimentConfig, name: str, written: list[Path]) -> Path:
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / name
    written.append(path)
    return path


def _landscape(cfg: ExperimentConfig, written: list[Path]) -> NkLandscape:
    _say(f"Building NK landscape n={cfg.n} k={cfg.k} seed={cfg.seed} ({cfg.links.value} links)...")
    land = nk_new(cfg.n, cfg.k, cfg.seed, cfg.links)
    write_descriptor(_out(cfg, "landscape.txt", written), land)
    return land


def _stream(cfg: ExperimentConfig, land: NkLandscape) -> GenotypeStream:
    for warning in cfg.warnings:
        _say(f"WARN: {warning}")
    if cfg.mode is Mode.SAMPLE:
        return sample_genotypes(land, cfg.samples, cfg.sample_seed)
    return enumerate_genotypes(land)


def _build(cfg: ExperimentConfig, land: NkLandscape, stream: GenotypeStream,
           rule: BorderingRule) -> FitnessCloud:
    _say(f"  Accumulating {rule.value} cloud over {len(stream):,} genotypes "
         f"({cfg.mode.value}, {stream.n_chunks:,} chunks, {cfg.workers} workers)...")
    fc = build_cloud(land, stream, rule, cfg.bin_width, workers=cfg.workers,
                     keep_points=cfg.n <= RAW_POINTS_MAX_N)
    _say(f"  {fc.total_points:,} points in {len(fc.bins):,} bins of width {cfg.bin_width}")
    return fc


def _fit_summary(cfg: ExperimentConfig, rule: BorderingRule, fc: FitnessCloud,
                 sh: CloudShape) -> tuple[dict, RegressionFit]:
    fit = fit_mean_line(sh)
    slope, intercept = weinberger_line(cfg.n, cfg.k)
    summary = {
        "n": cfg.n,
        "k": cfg.k,
        "seed": cfg.seed,
        "link_model": cfg.links.value,
        "mode": cfg.mode.value,
        "rule": rule.value,
        "bin_width": cfg.bin_width,
        "points": fc.total_points,
        "observed_slope": fit.slope,
        "observed_intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "predicted_slope": slope,
        # the GHC mean line has no closed-form intercept
        "predicted_intercept": intercept if rule is BorderingRule.WHOLE_NEIGHBORHOOD else None,
        "instance_slope": instance_slope(cfg.n, cfg.k),
        "slope_error": fit.slope - slope,
    }
    _say(f"  FC_mean fit: slope {fit.slope:.4f} (predicted {slope:.4f}), "
         f"intercept {fit.intercept:.4f}, r² {fit.r_squared:.4f}")
    return summary, fit


def _report_thresholds(t: EvolvabilityThresholds) -> None:
    found = ", ".join(f"{name}={t.value(name):.4f}" if t.value(name) is not None else f"{name}=absent"
                      for name in ("alpha", "beta", "gamma"))
    _say(f"  Thresholds: {found}")
    for warning in t.warnings:
        _say(f"WARN: {warning}")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_cloud(cfg: ExperimentConfig, written: Optional[list[Path]] = None) -> list[Path]:
    """Shape, thresholds, fit summary and figure for the configured bordering rule."""
    written = [] if written is None else written
    land = _landscape(cfg, written)
    fc = _build(cfg, land, _stream(cfg, land), cfg.rule)
    sh = shape(fc)
    t = thresholds(sh)
    _report_thresholds(t)
    summary, _ = _fit_summary(cfg, cfg.rule, fc, sh)

    write_shape(_out(cfg, "shape.csv", written), sh)
    write_shape(_out(cfg, "horizontal_shape.csv", written), horizontal_shape(fc))
    write_thresholds(_out(cfg, "thresholds.csv", written), t)
    write_key_values(_out(cfg, "fit_summary.txt", written), summary)
    points = fc.point_arrays() if fc.keep_points else None
    if points is not None:
        write_points(_out(cfg, "cloud_points.csv", written), *points)
    line = weinberger_line(cfg.n, cfg.k) if cfg.rule is BorderingRule.WHOLE_NEIGHBORHOOD else None
    label = "Whole fitness cloud" if cfg.rule is BorderingRule.WHOLE_NEIGHBORHOOD else "GHC fitness cloud"
    plot_cloud_shape(_out(cfg, "cloud.svg", written), sh, line=line, points=points,
                     title=f"{label}, NK N={cfg.n} K={cfg.k}")
    _say(f"Wrote {len(written)} files to {cfg.out}")
    return written


def cmd_ghc(cfg: ExperimentConfig, written: Optional[list[Path]] = None) -> list[Path]:
    """GHC cloud, average trajectory over cfg.ghc.runs runs, and the barrier report."""
    if cfg.ghc is None:
        raise ConfigError("ghc", "GHC settings are missing; supply generations, runs and run_seed")
    written = [] if written is None else written
    rule = BorderingRule.GHC_BEST
    land = _landscape(cfg, written)
    fc = _build(cfg, land, _stream(cfg, land), rule)
    sh = shape(fc)
    t = thresholds(sh)
    _report_thresholds(t)
    summary, fit = _fit_summary(cfg, rule, fc, sh)

    ghc = cfg.ghc
    _say(f"  Running {ghc.runs} GHC runs x {ghc.generations} generations (run_seed={ghc.run_seed})...")
    avg = average_trajectory(land, ghc)
    report = barrier_report(avg, t, tolerance=cfg.barrier_tol, band=cfg.band, mean_line=fit)
    verdict = "PASS" if report.passed else "FAIL"
    _say(f"  Terminal mean f {report.terminal_f:.4f} vs beta {report.beta:.4f}: "
         f"distance {report.distance:.4f} ({verdict} at tol {report.tolerance})")

    write_shape(_out(cfg, "shape.csv", written), sh)
    write_thresholds(_out(cfg, "thresholds.csv", written), t)
    write_key_values(_out(cfg, "fit_summary.txt", written), summary)
    write_trajectory(_out(cfg, "trajectory.csv", written), avg)
    write_runs(_out(cfg, "runs.csv", written), avg)
    write_key_values(_out(cfg, "barrier.txt", written), {
        "generations": ghc.generations,
        "runs": ghc.runs,
        "run_seed": ghc.run_seed,
        "beta": report.beta,
        "terminal_f": report.terminal_f,
        "terminal_f_border": report.terminal_f_border,
        "distance": report.distance,
        "tolerance": report.tolerance,
        "passed": report.passed,
        "band": report.band,
        "on_line_fraction": report.on_line_fraction,
    })
    plot_ghc_dynamics(_out(cfg, "ghc.svg", written), sh, t, avg,
                      title=f"GHC fitness cloud and average trajectory, NK N={cfg.n} K={cfg.k}")
    _say(f"Wrote {len(written)} files to {cfg.out}")
    return written


def cmd_optima(cfg: ExperimentConfig, written: Optional[list[Path]] = None) -> list[Path]:
    """Local optima census, below-diagonal verification and basin sizes (exhaustive only)."""
    if cfg.mode is not Mode.EXHAUSTIVE:
        raise ConfigError("mode", "the optima census needs exhaustive mode; it is undefined on samples")
    written = [] if written is None else written
    land = _landscape(cfg, written)
    stream = _stream(cfg, land)

    _say(f"  Scanning {len(stream):,} genotypes for strict local optima...")
    census = local_optima_census(land, stream, cfg.bin_width, workers=cfg.workers)
    report = optima_below_diagonal(land, stream, workers=cfg.workers)
    _say(f"  {census.count:,} strict optima, {census.ties:,} plateau ties, "
         f"diagonal check {'passed' if report.verdict else 'FAILED'}")

    write_key_values(_out(cfg, "optima.txt", written), {
        "visited": census.visited,
        "optima": census.count,
        "ties": census.ties,
        "verdict": report.verdict,
        "checked": report.checked,
        "counterexamples": ",".join(str(g) for g in report.counterexamples),
    })
    write_histogram(_out(cfg, "optima_histogram.csv", written), census.histogram)
    if cfg.n <= BASIN_MAX_N:
        _say("  Climbing every genotype to its stopping point for basin sizes...")
        basins = basin_census(land, stream)
        write_basins(_out(cfg, "basins.csv", written), basins)
    else:
        _say(f"  Skipping basins (n > {BASIN_MAX_N})")
    _say(f"Wrote {len(written)} files to {cfg.out}")
    return written


COMMANDS = {"cloud": cmd_cloud, "ghc": cmd_ghc, "optima": cmd_optima}


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="Flat key=value config file (flags override it)")
    common.add_argument("--n", type=int, help="Locus count N")
    common.add_argument("--k", type=int, help="Epistasis degree K")
    common.add_argument("--seed", help="Landscape seed (64-bit)")
    common.add_argument("--links", choices=["random", "adjacent"], help="Epistatic link model")
    common.add_argument("--mode", choices=["exhaustive", "sample"], help="Genotype source")
    common.add_argument("--samples", type=int, help="Sample count in sample mode")
    common.add_argument("--sample-seed", help="Sampling seed (64-bit)")
    common.add_argument("--bin-width", type=float, help="Neutrality bin width (default 0.002)")
    common.add_argument("--rule", choices=["whole", "ghc"], help="Bordering rule for `cloud`")
    common.add_argument("--generations", type=int, help="GHC generations per run (default 100)")
    common.add_argument("--runs", type=int, help="GHC runs (default 70)")
    common.add_argument("--run-seed", help="Seed for GHC initial solutions")
    common.add_argument("--barrier-tol", type=float, help="Tolerance on |terminal mean f - beta|")
    common.add_argument("--band", type=float, help="Band around the GHC mean line")
    common.add_argument("--workers", type=int, help="Worker processes for cloud accumulation")
    common.add_argument("--allow-large", action="store_const", const=True,
                        help="Allow exhaustive enumeration beyond N=25")
    common.add_argument("--out", type=Path, help="Output directory")

    parser = argparse.ArgumentParser(description="Fitness clouds of NK landscapes")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("cloud", parents=[common], help="Fitness cloud shape and Weinberger check")
    sub.add_parser("ghc", parents=[common], help="GHC cloud, average trajectory, barrier of fitness")
    sub.add_parser("optima", parents=[common], help="Local optima census (exhaustive)")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    flags = {key: value for key, value in vars(args).items() if key not in ("command", "config")}
    written: list[Path] = []
    try:
        cfg = load_config(flags, args.config, with_ghc=args.command == "ghc")
        COMMANDS[args.command](cfg, written)
    except Exception as e:
        for path in written:
            path.unlink(missing_ok=True)
        print(f"ERROR: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
