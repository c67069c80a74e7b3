"""
heuristic.py — Greedy hill climbing (GHC) trajectories on an NK landscape.

GHC moves to the best Hamming-1 neighbor while it is strictly fitter, ties
going to the lowest flipped locus. A run records (f, f̃) once per
generation, f̃ being the GHC bordering fitness (best neighbor fitness) of
the current state; a converged run repeats its last state until the
generation budget is spent. All runs of an experiment climb together as one
vector of genotype codes, so the averaging is a fixed reduction over run
index.

Usage:
    from heuristic import GhcConfig, average_trajectory, barrier_report
    avg = average_trajectory(land, GhcConfig(generations=100, runs=70, run_seed=3))
    print(barrier_report(avg, thresholds(shape(ghc_cloud))))
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional

import numpy as np

from cloud import EvolvabilityThresholds, RegressionFit
from landscape import Genotype, GenotypeStream, NkLandscape, code_chunks, neighbor_fitness_codes

# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

DEFAULT_GENERATIONS = 100
DEFAULT_RUNS = 70
DEFAULT_BARRIER_TOL = 0.03
DEFAULT_LINE_BAND = 0.02
_RUN_STREAM = 0x47484331  # separates run starts from other seeded streams


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GhcConfig:
    generations: int = DEFAULT_GENERATIONS
    runs: int = DEFAULT_RUNS
    run_seed: int = 0

    def __post_init__(self) -> None:
        if self.generations < 1:
            raise ValueError(f"generations must be >= 1: generations={self.generations}")
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1: runs={self.runs}")
        if self.run_seed < 0:
            raise ValueError(f"run_seed must be non-negative: run_seed={self.run_seed}")


class TrajectoryPoint(NamedTuple):
    generation: int
    f: float
    f_border: float


class AveragePoint(NamedTuple):
    generation: int
    mean_f: float
    mean_f_border: float
    std_f: float


@dataclass(frozen=True)
class Trajectory:
    start: Genotype
    end: Genotype
    points: tuple[TrajectoryPoint, ...]

    @property
    def final(self) -> TrajectoryPoint:
        return self.points[-1]

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class AverageTrajectory:
    points: tuple[AveragePoint, ...]
    runs: tuple[Trajectory, ...] = ()

    @property
    def terminal(self) -> AveragePoint:
        return self.points[-1]

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class BarrierReport:
    beta: float
    terminal_f: float
    terminal_f_border: float
    distance: float
    tolerance: float
    passed: bool
    band: float
    on_line_fraction: Optional[float]


# ---------------------------------------------------------------------------
# Climbing
# ---------------------------------------------------------------------------

def _best_moves(land: NkLandscape, codes: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Fitness, best neighbor fitness and best neighbor locus (lowest index on ties)."""
    f, nb = neighbor_fitness_codes(land, codes)
    locus = np.argmax(nb, axis=1)
    return f, nb[np.arange(len(f)), locus], locus


def _climb(land: NkLandscape, codes: np.ndarray,
           generations: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Climb every code for a fixed budget; returns (G+1, m) f and f̃ histories and end codes."""
    codes = np.asarray(codes, dtype=np.uint64).copy()
    f_hist = np.empty((generations + 1, len(codes)))
    fb_hist = np.empty((generations + 1, len(codes)))
    for t in range(generations + 1):
        f, best, locus = _best_moves(land, codes)
        f_hist[t] = f
        fb_hist[t] = best
        if t < generations:
            move = best > f
            codes[move] ^= land.flip_masks[locus[move]]
    return f_hist, fb_hist, codes


def ghc_step(land: NkLandscape, g: Genotype) -> Genotype:
    if g.n != land.n:
        raise ValueError(f"genotype length {g.n} does not match landscape n={land.n}")
    f, best, locus = _best_moves(land, np.array([g.code], dtype=np.uint64))
    if best[0] > f[0]:
        return g.flip(int(locus[0]))
    return g


def _trajectory(land: NkLandscape, start: int, end: int, f_col: np.ndarray,
                fb_col: np.ndarray) -> Trajectory:
    points = tuple(TrajectoryPoint(t, float(a), float(b))
                   for t, (a, b) in enumerate(zip(f_col, fb_col)))
    return Trajectory(Genotype(int(start), land.n), Genotype(int(end), land.n), points)


def run_ghc(land: NkLandscape, start: Genotype, generations: int = DEFAULT_GENERATIONS) -> Trajectory:
    if generations < 1:
        raise ValueError(f"generations must be >= 1: generations={generations}")
    if start.n != land.n:
        raise ValueError(f"genotype length {start.n} does not match landscape n={land.n}")
    f_hist, fb_hist, end = _climb(land, np.array([start.code], dtype=np.uint64), generations)
    return _trajectory(land, start.code, end[0], f_hist[:, 0], fb_hist[:, 0])


def initial_codes(n: int, cfg: GhcConfig) -> np.ndarray:
    """One uniform random start per run, each drawn from (run_seed, run index)."""
    return np.array([
        np.random.default_rng([cfg.run_seed, _RUN_STREAM, r]).integers(0, 1 << n, dtype=np.uint64)
        for r in range(cfg.runs)
    ], dtype=np.uint64)


def average_trajectory(land: NkLandscape, cfg: GhcConfig) -> AverageTrajectory:
    starts = initial_codes(land.n, cfg)
    f_hist, fb_hist, ends = _climb(land, starts, cfg.generations)
    points = tuple(
        AveragePoint(t, float(f_hist[t].mean()), float(fb_hist[t].mean()), float(f_hist[t].std()))
        for t in range(cfg.generations + 1)
    )
    runs = tuple(_trajectory(land, starts[r], ends[r], f_hist[:, r], fb_hist[:, r])
                 for r in range(cfg.runs))
    return AverageTrajectory(points=points, runs=runs)


# ---------------------------------------------------------------------------
# Barrier of fitness
# ---------------------------------------------------------------------------

def barrier_report(avg: AverageTrajectory, t: EvolvabilityThresholds, *,
                   tolerance: float = DEFAULT_BARRIER_TOL,
                   band: float = DEFAULT_LINE_BAND,
                   mean_line: Optional[RegressionFit] = None) -> BarrierReport:
    """Compare where the average trajectory stops with β.

    With a GHC mean line, also reports the share of generations after 0
    whose (mean_f, mean_f_border) lies within `band` of that line.
    """
    if t.beta is None:
        raise ValueError("barrier report needs beta, but FC_mean never crosses the diagonal")
    end = avg.terminal
    distance = abs(end.mean_f - t.beta)
    on_line = None
    if mean_line is not None and len(avg) > 1:
        after = avg.points[1:]
        near = [abs(p.mean_f_border - (mean_line.slope * p.mean_f + mean_line.intercept)) <= band
                for p in after]
        on_line = sum(near) / len(near)
    return BarrierReport(
        beta=t.beta,
        terminal_f=end.mean_f,
        terminal_f_border=end.mean_f_border,
        distance=distance,
        tolerance=tolerance,
        passed=distance <= tolerance,
        band=band,
        on_line_fraction=on_line,
    )


# ---------------------------------------------------------------------------
# Basins of attraction
# ---------------------------------------------------------------------------

class BasinRow(NamedTuple):
    optimum: Genotype
    fitness: float
    basin_size: int
    strict: bool


def basin_census(land: NkLandscape, genotypes: Iterable[Genotype] | GenotypeStream) -> tuple[BasinRow, ...]:
    """Climb every genotype to convergence and count how many end at each stopping point.

    A stopping point is strict when all neighbors are less fit; otherwise it
    ties its best neighbor (plateau). Rows are sorted by descending fitness.
    """
    sizes: dict[int, int] = {}
    for codes in code_chunks(genotypes, land.n):
        codes = codes.copy()
        active = np.ones(len(codes), dtype=bool)
        while active.any():
            f, best, locus = _best_moves(land, codes[active])
            move = best > f
            idx = np.flatnonzero(active)
            codes[idx[move]] ^= land.flip_masks[locus[move]]
            active[idx[~move]] = False
        ends, counts = np.unique(codes, return_counts=True)
        for end, count in zip(ends.tolist(), counts.tolist()):
            sizes[end] = sizes.get(end, 0) + count

    if not sizes:
        return ()
    ends = np.array(sorted(sizes), dtype=np.uint64)
    f, best, _ = _best_moves(land, ends)
    rows = [BasinRow(Genotype(int(c), land.n), float(fv), sizes[int(c)], bool(fv > b))
            for c, fv, b in zip(ends, f, best)]
    return tuple(sorted(rows, key=lambda r: (-r.fitness, r.optimum.code)))
