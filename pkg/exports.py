"""
exports.py — CSV artifacts and key/value audit files, written and read back.

CSV layouts:
    shape.csv            phi,min,mean,max,std,count   (phi with 6 decimals)
    thresholds.csv       curve,value,found            (alpha, beta, gamma)
    cloud_points.csv     f,f_border
    trajectory.csv       generation,mean_f,mean_f_border,std_f
    runs.csv             run,generation,f,f_border
    optima_histogram.csv phi,count
    basins.csv           optimum,fitness,basin_size,strict

Key/value files (landscape.txt, summaries) use the same `key=value` format
as experiment config files and are parsed with python-dotenv.

Floats other than phi are written with repr(), which round-trips exactly.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np
from dotenv import dotenv_values

from cloud import CloudShape, EvolvabilityThresholds, ShapeRow
from heuristic import AveragePoint, AverageTrajectory, BasinRow, TrajectoryPoint
from landscape import Genotype, NkLandscape, landscape_from_links

SHAPE_HEADER = ["phi", "min", "mean", "max", "std", "count"]
THRESHOLDS_HEADER = ["curve", "value", "found"]
POINTS_HEADER = ["f", "f_border"]
TRAJECTORY_HEADER = ["generation", "mean_f", "mean_f_border", "std_f"]
RUNS_HEADER = ["run", "generation", "f", "f_border"]
HISTOGRAM_HEADER = ["phi", "count"]
BASINS_HEADER = ["optimum", "fitness", "basin_size", "strict"]


def _num(x: float) -> str:
    return repr(float(x))


def _write_rows(path: Path, header: list[str], rows: Iterable[Iterable[Any]]) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _read_rows(path: Path, header: list[str]) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != header:
            raise ValueError(f"{path}: expected header {','.join(header)}, got {reader.fieldnames}")
        return list(reader)


# ---------------------------------------------------------------------------
# Cloud shape and thresholds
# ---------------------------------------------------------------------------

def write_shape(path: Path, sh: CloudShape) -> Path:
    return _write_rows(path, SHAPE_HEADER, (
        [f"{r.phi:.6f}", _num(r.min), _num(r.mean), _num(r.max), _num(r.std), r.count]
        for r in sh.rows
    ))


def read_shape(path: Path) -> CloudShape:
    rows = _read_rows(path, SHAPE_HEADER)
    return CloudShape(tuple(
        ShapeRow(float(r["phi"]), float(r["min"]), float(r["mean"]), float(r["max"]),
                 float(r["std"]), int(r["count"]))
        for r in rows
    ))


def write_thresholds(path: Path, t: EvolvabilityThresholds) -> Path:
    rows = []
    for name in ("alpha", "beta", "gamma"):
        value = t.value(name)
        rows.append([name, "" if value is None else _num(value), "true" if value is not None else "false"])
    return _write_rows(path, THRESHOLDS_HEADER, rows)


def read_thresholds(path: Path) -> EvolvabilityThresholds:
    values = {}
    for r in _read_rows(path, THRESHOLDS_HEADER):
        if r["curve"] not in ("alpha", "beta", "gamma"):
            raise ValueError(f"{path}: unknown curve {r['curve']!r}")
        values[r["curve"]] = float(r["value"]) if r["found"] == "true" else None
    return EvolvabilityThresholds(**values)


def write_points(path: Path, f: np.ndarray, f_border: np.ndarray) -> Path:
    return _write_rows(path, POINTS_HEADER, ([_num(a), _num(b)] for a, b in zip(f, f_border)))


def read_points(path: Path) -> tuple[np.ndarray, np.ndarray]:
    rows = _read_rows(path, POINTS_HEADER)
    return (np.array([float(r["f"]) for r in rows]), np.array([float(r["f_border"]) for r in rows]))


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------

def write_trajectory(path: Path, avg: AverageTrajectory) -> Path:
    return _write_rows(path, TRAJECTORY_HEADER, (
        [p.generation, _num(p.mean_f), _num(p.mean_f_border), _num(p.std_f)] for p in avg.points
    ))


def read_trajectory(path: Path) -> AverageTrajectory:
    return AverageTrajectory(points=tuple(
        AveragePoint(int(r["generation"]), float(r["mean_f"]), float(r["mean_f_border"]), float(r["std_f"]))
        for r in _read_rows(path, TRAJECTORY_HEADER)
    ))


def write_runs(path: Path, avg: AverageTrajectory) -> Path:
    return _write_rows(path, RUNS_HEADER, (
        [run, p.generation, _num(p.f), _num(p.f_border)]
        for run, traj in enumerate(avg.runs)
        for p in traj.points
    ))


def read_runs(path: Path) -> dict[int, tuple[TrajectoryPoint, ...]]:
    """Per-run points keyed by run index; start and end genotypes are not stored."""
    runs: dict[int, list[TrajectoryPoint]] = {}
    for r in _read_rows(path, RUNS_HEADER):
        runs.setdefault(int(r["run"]), []).append(
            TrajectoryPoint(int(r["generation"]), float(r["f"]), float(r["f_border"])))
    return {run: tuple(points) for run, points in runs.items()}


# ---------------------------------------------------------------------------
# Local optima
# ---------------------------------------------------------------------------

def write_histogram(path: Path, histogram: Iterable[tuple[float, int]]) -> Path:
    return _write_rows(path, HISTOGRAM_HEADER, ([f"{phi:.6f}", count] for phi, count in histogram))


def read_histogram(path: Path) -> tuple[tuple[float, int], ...]:
    return tuple((float(r["phi"]), int(r["count"])) for r in _read_rows(path, HISTOGRAM_HEADER))


def write_basins(path: Path, rows: Iterable[BasinRow]) -> Path:
    return _write_rows(path, BASINS_HEADER, (
        [str(r.optimum), _num(r.fitness), r.basin_size, "true" if r.strict else "false"] for r in rows
    ))


def read_basins(path: Path) -> tuple[BasinRow, ...]:
    return tuple(
        BasinRow(Genotype.from_text(r["optimum"]), float(r["fitness"]), int(r["basin_size"]), r["strict"] == "true")
        for r in _read_rows(path, BASINS_HEADER)
    )


# ---------------------------------------------------------------------------
# Key/value files
# ---------------------------------------------------------------------------

def write_key_values(path: Path, values: Mapping[str, Any]) -> Path:
    lines = []
    for key, value in values.items():
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = _num(value)
        elif value is None:
            value = ""
        lines.append(f"{key}={value}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_key_values(path: Path) -> dict[str, str]:
    if not Path(path).exists():
        raise FileNotFoundError(f"no such file: {path}")
    return {k: (v or "") for k, v in dotenv_values(path).items()}


def write_descriptor(path: Path, land: NkLandscape) -> Path:
    values: dict[str, Any] = {
        "n": land.n,
        "k": land.k,
        "seed": land.seed,
        "link_model": land.link_model.value,
    }
    for i, row in enumerate(land.links):
        values[f"links_{i}"] = ",".join(str(j) for j in row)
    return write_key_values(path, values)


def read_descriptor(path: Path) -> NkLandscape:
    """Rebuild the landscape named by a descriptor and check its stored links."""
    kv = read_key_values(path)
    try:
        n, k, seed = int(kv["n"]), int(kv["k"]), int(kv["seed"])
        link_model = kv["link_model"]
        links = [[int(j) for j in kv[f"links_{i}"].split(",") if j] for i in range(n)]
    except KeyError as e:
        raise ValueError(f"{path}: missing key {e.args[0]}") from None
    return landscape_from_links(n, k, seed, link_model, links)
