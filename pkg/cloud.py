"""
cloud.py — Fitness clouds: binned (f, f̃) accumulation, shape curves, evolvability.

A cloud is a fold over chunks of genotypes. Each chunk produces its points
(f(x), f̃(x)) under a bordering rule, the points are routed to neutrality
bins by the abscissa f(x), and per-bin count/min/max/mean/M2 accumulators
are merged with the parallel-variance update. Chunks are folded in chunk
order, so the result does not depend on how many workers produced them.

The same fold keeps the transposed accumulation (binned by f̃, aggregating
f), which gives the horizontal slices of the cloud.

Usage:
    from landscape import nk_new, enumerate_genotypes
    from cloud import BorderingRule, build_cloud, shape, thresholds, fit_mean_line

    land = nk_new(16, 4, seed=1)
    fc = build_cloud(land, enumerate_genotypes(land), BorderingRule.WHOLE_NEIGHBORHOOD)
    sh = shape(fc)
    print(thresholds(sh), fit_mean_line(sh))
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Callable, Iterable, Iterator, NamedTuple, Optional

import numpy as np

from landscape import (
    Genotype,
    GenotypeStream,
    NkLandscape,
    code_chunks,
    neighbor_fitness_codes,
)

# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

DEFAULT_BIN_WIDTH = 0.002
MAX_COUNTEREXAMPLES = 10
CURVES = ("min", "mean", "max")
THRESHOLD_NAMES = {"min": "alpha", "mean": "beta", "max": "gamma"}


class BorderingRule(str, Enum):
    WHOLE_NEIGHBORHOOD = "whole"
    GHC_BEST = "ghc"


class Regime(IntEnum):
    ALWAYS_ADVANTAGEOUS = 1
    MEAN_ADVANTAGEOUS = 2
    MEAN_DELETERIOUS = 3
    ALWAYS_DELETERIOUS = 4


# ---------------------------------------------------------------------------
# Neighborhood and binning
# ---------------------------------------------------------------------------

def neighbors(g: Genotype) -> list[Genotype]:
    """The n Hamming-1 neighbors of g, in locus order."""
    return [g.flip(i) for i in range(g.n)]


def n_bins(w: float) -> int:
    if not w > 0:
        raise ValueError(f"bin width must be > 0: w={w}")
    return max(1, math.ceil(1.0 / w - 1e-9))


def bin_index(f: float, w: float) -> int:
    """floor(f / w) over half-open bins, with f = 1.0 clamped into the top bin."""
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"fitness must be in [0, 1]: f={f}")
    return min(int(math.floor(f / w)), n_bins(w) - 1)


def bin_indices(f: np.ndarray, w: float) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    if f.size and (f.min() < 0.0 or f.max() > 1.0):
        raise ValueError(f"fitness values must be in [0, 1]: range=[{f.min()}, {f.max()}]")
    return np.minimum(np.floor(f / w).astype(np.int64), n_bins(w) - 1)


def bin_center(index: int, w: float) -> float:
    return (index + 0.5) * w


# ---------------------------------------------------------------------------
# Bins
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NeutralityBin:
    index: int
    phi: float
    count: int
    min: float
    max: float
    mean: float
    m2: float

    def merge(self, other: "NeutralityBin") -> "NeutralityBin":
        if other.index != self.index:
            raise ValueError(f"cannot merge bins {self.index} and {other.index}")
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        n = self.count + other.count
        delta = other.mean - self.mean
        return NeutralityBin(
            index=self.index,
            phi=self.phi,
            count=n,
            min=min(self.min, other.min),
            max=max(self.max, other.max),
            mean=self.mean + delta * other.count / n,
            m2=self.m2 + other.m2 + delta * delta * self.count * other.count / n,
        )


@dataclass
class BinTable:
    """Dense per-bin accumulators over [0, 1] for one binning direction."""

    size: int
    counts: np.ndarray = field(init=False)
    mins: np.ndarray = field(init=False)
    maxs: np.ndarray = field(init=False)
    means: np.ndarray = field(init=False)
    m2s: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.counts = np.zeros(self.size, dtype=np.int64)
        self.mins = np.full(self.size, np.inf)
        self.maxs = np.full(self.size, -np.inf)
        self.means = np.zeros(self.size)
        self.m2s = np.zeros(self.size)

    def add(self, keys: np.ndarray, values: np.ndarray) -> None:
        part = BinTable(self.size)
        part.counts = np.bincount(keys, minlength=self.size).astype(np.int64)
        sums = np.bincount(keys, weights=values, minlength=self.size)
        filled = part.counts > 0
        part.means[filled] = sums[filled] / part.counts[filled]
        dev = values - part.means[keys]
        part.m2s = np.bincount(keys, weights=dev * dev, minlength=self.size)
        np.minimum.at(part.mins, keys, values)
        np.maximum.at(part.maxs, keys, values)
        self.merge(part)

    def merge(self, other: "BinTable") -> None:
        if other.size != self.size:
            raise ValueError(f"cannot merge bin tables of sizes {self.size} and {other.size}")
        n = self.counts + other.counts
        filled = n > 0
        ratio = np.zeros(self.size)
        ratio[filled] = other.counts[filled] / n[filled]
        delta = other.means - self.means
        self.means = np.where(filled, self.means + delta * ratio, 0.0)
        self.m2s = self.m2s + other.m2s + delta * delta * self.counts * ratio
        self.mins = np.minimum(self.mins, other.mins)
        self.maxs = np.maximum(self.maxs, other.maxs)
        self.counts = n


# ---------------------------------------------------------------------------
# Fitness cloud
# ---------------------------------------------------------------------------

@dataclass
class FitnessCloud:
    bin_width: float = DEFAULT_BIN_WIDTH
    rule: BorderingRule = BorderingRule.WHOLE_NEIGHBORHOOD
    keep_points: bool = False
    vertical: BinTable = field(init=False)
    horizontal: BinTable = field(init=False)
    points: list[tuple[np.ndarray, np.ndarray]] = field(init=False, default_factory=list)

    def __post_init__(self) -> None:
        size = n_bins(self.bin_width)
        self.vertical = BinTable(size)
        self.horizontal = BinTable(size)

    @property
    def total_points(self) -> int:
        return int(self.vertical.counts.sum())

    @property
    def bins(self) -> dict[int, NeutralityBin]:
        t = self.vertical
        return {
            int(i): NeutralityBin(
                index=int(i),
                phi=bin_center(int(i), self.bin_width),
                count=int(t.counts[i]),
                min=float(t.mins[i]),
                max=float(t.maxs[i]),
                mean=float(t.means[i]),
                m2=float(t.m2s[i]),
            )
            for i in np.flatnonzero(t.counts)
        }

    def add_points(self, f: np.ndarray, f_border: np.ndarray) -> None:
        f = np.asarray(f, dtype=np.float64).ravel()
        f_border = np.asarray(f_border, dtype=np.float64).ravel()
        if f.shape != f_border.shape:
            raise ValueError(f"point arrays differ in length: {f.size} vs {f_border.size}")
        self.vertical.add(bin_indices(f, self.bin_width), f_border)
        self.horizontal.add(bin_indices(f_border, self.bin_width), f)
        if self.keep_points:
            self.points.append((f, f_border))

    def merge(self, other: "FitnessCloud") -> None:
        if other.bin_width != self.bin_width or other.rule != self.rule:
            raise ValueError("cannot merge clouds with different bin width or bordering rule")
        self.vertical.merge(other.vertical)
        self.horizontal.merge(other.horizontal)
        self.points.extend(other.points)

    def point_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.points:
            return np.empty(0), np.empty(0)
        return (np.concatenate([p[0] for p in self.points]),
                np.concatenate([p[1] for p in self.points]))


def bordering_points(land: NkLandscape, codes: np.ndarray,
                     rule: BorderingRule) -> tuple[np.ndarray, np.ndarray]:
    """(f, f̃) points contributed by a chunk of genotype codes."""
    f, nb = neighbor_fitness_codes(land, codes)
    if rule is BorderingRule.GHC_BEST:
        return f, nb.max(axis=1)
    return np.repeat(f, land.n), nb.ravel()


def _map_chunks(fn: Callable, land: NkLandscape, genotypes, extra: tuple,
                workers: int) -> Iterator:
    """Apply fn(land, codes, *extra) to every chunk, yielding results in chunk order."""
    if workers > 1 and isinstance(genotypes, GenotypeStream):
        with ProcessPoolExecutor(max_workers=workers) as pool:
            yield from pool.map(_run_stream_chunk, ((fn, land, genotypes, i, extra)
                                                    for i in range(genotypes.n_chunks)))
        return
    for codes in code_chunks(genotypes, land.n):
        yield fn(land, codes, *extra)


def _run_stream_chunk(job: tuple):
    fn, land, stream, index, extra = job
    return fn(land, stream.chunk(index), *extra)


def _chunk_cloud(land: NkLandscape, codes: np.ndarray, rule: BorderingRule,
                 w: float, keep_points: bool) -> FitnessCloud:
    part = FitnessCloud(bin_width=w, rule=rule, keep_points=keep_points)
    part.add_points(*bordering_points(land, codes, rule))
    return part


def build_cloud(land: NkLandscape, genotypes: Iterable[Genotype] | GenotypeStream,
                rule: BorderingRule | str = BorderingRule.WHOLE_NEIGHBORHOOD,
                w: float = DEFAULT_BIN_WIDTH, *, workers: int = 1,
                keep_points: bool = False) -> FitnessCloud:
    rule = BorderingRule(rule)
    cloud = FitnessCloud(bin_width=w, rule=rule, keep_points=keep_points)
    for part in _map_chunks(_chunk_cloud, land, genotypes, (rule, w, keep_points), workers):
        cloud.merge(part)
    if cloud.total_points == 0:
        raise ValueError("genotype stream is empty")
    return cloud


# ---------------------------------------------------------------------------
# Shape
# ---------------------------------------------------------------------------

class ShapeRow(NamedTuple):
    phi: float
    min: float
    mean: float
    max: float
    std: float
    count: int


@dataclass(frozen=True)
class CloudShape:
    rows: tuple[ShapeRow, ...]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=np.float64)

    def __len__(self) -> int:
        return len(self.rows)


def _shape_of(table: BinTable, w: float) -> CloudShape:
    filled = np.flatnonzero(table.counts)
    if filled.size == 0:
        raise ValueError("cloud is empty")
    rows = []
    for i in filled:
        lo, hi = float(table.mins[i]), float(table.maxs[i])
        mean = min(max(float(table.means[i]), lo), hi)
        std = math.sqrt(max(float(table.m2s[i]), 0.0) / int(table.counts[i]))
        rows.append(ShapeRow(bin_center(int(i), w), lo, mean, hi, std, int(table.counts[i])))
    return CloudShape(tuple(rows))


def shape(cloud: FitnessCloud) -> CloudShape:
    """FC_min / FC_mean / FC_max (with per-bin population std), one row per non-empty bin."""
    return _shape_of(cloud.vertical, cloud.bin_width)


def horizontal_shape(cloud: FitnessCloud) -> CloudShape:
    """Horizontal slices: per f̃ bin, the min/mean/max of the fitnesses that reach it."""
    return _shape_of(cloud.horizontal, cloud.bin_width)


# ---------------------------------------------------------------------------
# Evolvability thresholds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvolvabilityThresholds:
    alpha: Optional[float] = None
    beta: Optional[float] = None
    gamma: Optional[float] = None
    crossings: dict[str, int] = field(default_factory=dict)

    def value(self, name: str) -> Optional[float]:
        return getattr(self, name)

    @property
    def warnings(self) -> list[str]:
        return [
            f"{THRESHOLD_NAMES[curve]}: FC_{curve} crosses the diagonal {n} times, first crossing kept"
            for curve, n in self.crossings.items() if n > 1
        ]


def _first_crossing(phi: np.ndarray, y: np.ndarray) -> tuple[Optional[float], int]:
    d = y - phi
    found: Optional[float] = None
    crossings = 0
    for a in range(len(d) - 1):
        b = a + 1
        if d[a] == 0.0:
            hit = float(phi[a])
        elif d[a] * d[b] < 0.0:
            hit = float(phi[a] + d[a] * (phi[b] - phi[a]) / (d[a] - d[b]))
        else:
            continue
        crossings += 1
        if found is None:
            found = hit
    if d[-1] == 0.0:
        crossings += 1
        if found is None:
            found = float(phi[-1])
    return found, crossings


def thresholds(sh: CloudShape) -> EvolvabilityThresholds:
    """α, β, γ: first diagonal crossings of FC_min, FC_mean, FC_max (linear interpolation)."""
    if len(sh) < 2:
        raise ValueError(f"thresholds need at least 2 shape rows, got {len(sh)}")
    phi = sh.column("phi")
    values = {}
    crossings = {}
    for curve in CURVES:
        values[THRESHOLD_NAMES[curve]], crossings[curve] = _first_crossing(phi, sh.column(curve))
    return EvolvabilityThresholds(**values, crossings=crossings)


def classify_regime(phi: float, t: EvolvabilityThresholds) -> Regime:
    missing = [name for name in ("alpha", "beta", "gamma") if t.value(name) is None]
    if missing:
        raise ValueError(f"regime needs all thresholds; missing: {', '.join(missing)}")
    if phi <= t.alpha:
        return Regime.ALWAYS_ADVANTAGEOUS
    if phi <= t.beta:
        return Regime.MEAN_ADVANTAGEOUS
    if phi <= t.gamma:
        return Regime.MEAN_DELETERIOUS
    return Regime.ALWAYS_DELETERIOUS


# ---------------------------------------------------------------------------
# Mean-line regression
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    r_squared: float


def weinberger_line(n: int, k: int) -> tuple[float, float]:
    """Predicted FC_mean of the whole cloud: slope 1-(k+1)/n, intercept 0.5(k+1)/n."""
    if n < 1 or not 0 <= k <= n - 1:
        raise ValueError(f"need n >= 1 and 0 <= k <= n-1: n={n}, k={k}")
    ratio = (k + 1) / n
    return 1.0 - ratio, 0.5 * ratio


def instance_slope(n: int, k: int) -> float:
    """Expected whole-cloud slope on one exhaustively enumerated instance.

    A single instance draws each contribution table once, with m = 2^(k+1)
    entries; a flip swaps an entry for another entry of the same table, which
    shrinks the slope to 1 - ((k+1)/n) * m/(m-1). At k=0 this is exactly
    1 - 2/n; for large k it meets the Weinberger slope.
    """
    slope, _ = weinberger_line(n, k)
    m = 2.0 ** (k + 1)
    return 1.0 - (1.0 - slope) * m / (m - 1.0)


def fit_mean_line(sh: CloudShape) -> RegressionFit:
    """Count-weighted least squares of FC_mean against phi."""
    if len(sh) < 2:
        raise ValueError(f"mean-line fit needs at least 2 shape rows, got {len(sh)}")
    x = sh.column("phi")
    y = sh.column("mean")
    w = sh.column("count")
    if np.all(x == x[0]):
        raise ValueError("mean-line fit is degenerate: all rows share one phi")
    slope, intercept = np.polyfit(x, y, 1, w=np.sqrt(w))
    y_bar = np.average(y, weights=w)
    ss_res = float(np.sum(w * (y - (slope * x + intercept)) ** 2))
    ss_tot = float(np.sum(w * (y - y_bar) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RegressionFit(float(slope), float(intercept), min(max(r2, 0.0), 1.0))


# ---------------------------------------------------------------------------
# Local optima
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OptimaCensus:
    count: int
    ties: int
    visited: int
    histogram: tuple[tuple[float, int], ...]


@dataclass(frozen=True)
class DiagonalReport:
    verdict: bool
    checked: int
    optima: int
    counterexamples: tuple[Genotype, ...]


def _chunk_census(land: NkLandscape, codes: np.ndarray, w: float) -> tuple[int, int, np.ndarray]:
    f, nb = neighbor_fitness_codes(land, codes)
    best = nb.max(axis=1)
    strict = f > best
    hist = np.bincount(bin_indices(f[strict], w), minlength=n_bins(w))
    return len(f), int(np.count_nonzero(f == best)), hist


def local_optima_census(land: NkLandscape, genotypes: Iterable[Genotype] | GenotypeStream,
                        w: float = DEFAULT_BIN_WIDTH, *, workers: int = 1) -> OptimaCensus:
    """Strict local optima (fitter than every neighbor); best-neighbor ties counted apart."""
    visited = 0
    ties = 0
    hist = np.zeros(n_bins(w), dtype=np.int64)
    for seen, tied, part in _map_chunks(_chunk_census, land, genotypes, (w,), workers):
        visited += seen
        ties += tied
        hist += part
    rows = tuple((bin_center(int(i), w), int(hist[i])) for i in np.flatnonzero(hist))
    return OptimaCensus(count=int(hist.sum()), ties=ties, visited=visited, histogram=rows)


def _chunk_diagonal(land: NkLandscape, codes: np.ndarray) -> tuple[int, int, list[int]]:
    f, nb = neighbor_fitness_codes(land, codes)
    f_border = nb.max(axis=1)
    is_optimum = np.all(nb < f[:, None], axis=1)
    improvable = np.any(nb > f[:, None], axis=1)
    bad = (is_optimum != (f_border < f)) | (improvable != (f_border > f))
    return len(f), int(np.count_nonzero(is_optimum)), codes[bad][:MAX_COUNTEREXAMPLES].tolist()


def optima_below_diagonal(land: NkLandscape,
                          genotypes: Iterable[Genotype] | GenotypeStream,
                          *, workers: int = 1) -> DiagonalReport:
    """Check that strict optima sit below the GHC diagonal and improvable points above it."""
    checked = 0
    optima = 0
    bad: list[Genotype] = []
    for seen, found, codes in _map_chunks(_chunk_diagonal, land, genotypes, (), workers):
        checked += seen
        optima += found
        bad.extend(Genotype(c, land.n) for c in codes[:MAX_COUNTEREXAMPLES - len(bad)])
    return DiagonalReport(verdict=not bad, checked=checked, optima=optima,
                          counterexamples=tuple(bad))
