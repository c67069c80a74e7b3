"""
landscape.py — NK fitness model: genotypes, epistatic links, seeded evaluation.

A landscape is fully determined by (n, k, seed, link_model). Per-locus
contributions are never stored as tables: each one is drawn on demand by a
keyed counter-based PRF (SplitMix64 finalizer over seed, locus and pattern),
so evaluation stays stateless and cheap on memory even at N=25, K=20.

Genotypes are packed into one integer. Locus 0 is the most significant bit,
so the text form (locus 0 leftmost) is the plain binary rendering of the
integer and enumeration in integer order reads 00, 01, 10, 11.

Contribution pattern bit order: the locus's own bit is pattern bit 0, the
linked loci follow in stored link order as pattern bits 1..K.

Contributions are multiples of 2^-53. Fitness sums them as integers and
rounds to float once, so every evaluation path (single genotype, vector,
incremental neighbor) gives the same bits.

Usage:
    from landscape import nk_new, fitness, enumerate_genotypes
    land = nk_new(16, 4, seed=7)
    for g in enumerate_genotypes(land):
        print(g, fitness(land, g))
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable, Iterator, Optional

import numpy as np

# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

MAX_N = 32
MAX_SEED = 2**64 - 1
CHUNK_SIZE = 4096

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_LOCUS_SHIFT = np.uint64(32)
_UNIT = 2.0**-53
_LINK_STREAM = 0x4C494E4B  # separates the link shuffle from other seeded streams


class LinkModel(str, Enum):
    RANDOM = "random"
    ADJACENT = "adjacent"


# ---------------------------------------------------------------------------
# Genotype
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Genotype:
    """A bit-string of length n packed into `code` (locus 0 = most significant bit)."""

    code: int
    n: int

    def __post_init__(self) -> None:
        if not 1 <= self.n <= MAX_N:
            raise ValueError(f"genotype length must be in [1, {MAX_N}]: n={self.n}")
        if not 0 <= self.code < (1 << self.n):
            raise ValueError(f"genotype code out of range for n={self.n}: code={self.code}")

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "Genotype":
        bits = [int(b) for b in bits]
        if any(b not in (0, 1) for b in bits):
            raise ValueError(f"genotype bits must be 0/1: {bits}")
        code = 0
        for b in bits:
            code = (code << 1) | b
        return cls(code, len(bits))

    @classmethod
    def from_text(cls, text: str) -> "Genotype":
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"genotype text must be a non-empty 0/1 string: {text!r}")
        return cls(int(text, 2), len(text))

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.code >> (self.n - 1 - i)) & 1 for i in range(self.n))

    def flip(self, locus: int) -> "Genotype":
        if not 0 <= locus < self.n:
            raise ValueError(f"locus must be in [0, {self.n - 1}]: locus={locus}")
        return Genotype(self.code ^ (1 << (self.n - 1 - locus)), self.n)

    def __str__(self) -> str:
        return format(self.code, f"0{self.n}b")


# ---------------------------------------------------------------------------
# Landscape
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NkLandscape:
    n: int
    k: int
    seed: int
    link_model: LinkModel
    links: tuple[tuple[int, ...], ...]

    # Derived lookup arrays. Landscapes are immutable, so these are computed once.

    @cached_property
    def index(self) -> np.ndarray:
        """(n, k+1) loci feeding each contribution: own locus first, then links."""
        return np.array([(i, *self.links[i]) for i in range(self.n)], dtype=np.int64)

    @cached_property
    def shifts(self) -> np.ndarray:
        """Integer bit position of each locus inside a genotype code."""
        return np.arange(self.n - 1, -1, -1, dtype=np.uint64)

    @cached_property
    def flip_masks(self) -> np.ndarray:
        return np.left_shift(np.uint64(1), self.shifts)

    @cached_property
    def pattern_masks(self) -> np.ndarray:
        """(n, n) uint64: [j, i] is the pattern bit of locus i toggled by flipping locus j."""
        masks = np.zeros((self.n, self.n), dtype=np.uint64)
        for i in range(self.n):
            for pos, j in enumerate(self.index[i]):
                masks[j, i] = np.uint64(1 << pos)
        return masks

    @cached_property
    def affected(self) -> tuple[np.ndarray, ...]:
        """Per flipped locus j, the loci whose contribution depends on j."""
        return tuple(np.flatnonzero(self.pattern_masks[j]) for j in range(self.n))

    @cached_property
    def key(self) -> np.uint64:
        with np.errstate(over="ignore"):
            return _mix64(np.uint64(self.seed))

    @property
    def size(self) -> int:
        return 1 << self.n


def _mix64(z):
    """SplitMix64 finalizer; wraps modulo 2^64 on uint64 scalars and arrays."""
    z = z ^ (z >> np.uint64(30))
    z = z * _MIX1
    z = z ^ (z >> np.uint64(27))
    z = z * _MIX2
    return z ^ (z >> np.uint64(31))


def _random_links(n: int, k: int, seed: int) -> tuple[tuple[int, ...], ...]:
    rng = np.random.default_rng([seed, _LINK_STREAM])
    links = []
    for i in range(n):
        others = np.array([j for j in range(n) if j != i], dtype=np.int64)
        links.append(tuple(int(j) for j in rng.permutation(others)[:k]))
    return tuple(links)


def _adjacent_links(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple((i + j) % n for j in range(1, k + 1)) for i in range(n))


def nk_new(n: int, k: int, seed: int = 0, link_model: LinkModel | str = LinkModel.RANDOM) -> NkLandscape:
    """Build the landscape determined by (n, k, seed, link_model)."""
    if not 1 <= n <= MAX_N:
        raise ValueError(f"n must be in [1, {MAX_N}]: n={n}")
    if not 0 <= k <= n - 1:
        raise ValueError(f"k must be in [0, n-1={n - 1}]: k={k}")
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be a 64-bit unsigned integer: seed={seed}")
    try:
        link_model = LinkModel(link_model)
    except ValueError:
        raise ValueError(f"link_model must be one of {[m.value for m in LinkModel]}: {link_model!r}") from None

    if link_model is LinkModel.ADJACENT:
        links = _adjacent_links(n, k)
    else:
        links = _random_links(n, k, seed)
    return NkLandscape(n=n, k=k, seed=seed, link_model=link_model, links=links)


def landscape_from_links(n: int, k: int, seed: int, link_model: LinkModel | str,
                         links: Iterable[Iterable[int]]) -> NkLandscape:
    """Rebuild a landscape from stored links, rejecting links it would not generate."""
    land = nk_new(n, k, seed, link_model)
    stored = tuple(tuple(int(j) for j in row) for row in links)
    if stored != land.links:
        raise ValueError("stored links do not match the links generated from (n, k, seed, link_model)")
    return land


# ---------------------------------------------------------------------------
# Contributions and fitness
# ---------------------------------------------------------------------------

def contribution_units(land: NkLandscape, loci: np.ndarray, patterns: np.ndarray) -> np.ndarray:
    """Contributions as 53-bit unsigned integers; c_i(pattern) = units * 2^-53."""
    loci = np.asarray(loci).astype(np.uint64)
    patterns = np.asarray(patterns).astype(np.uint64)
    with np.errstate(over="ignore"):
        counter = (loci << _LOCUS_SHIFT) | patterns
        state = land.key + (counter + np.uint64(1)) * _GOLDEN
        out = _mix64(state)
    return out >> np.uint64(11)


def contribution_array(land: NkLandscape, loci: np.ndarray, patterns: np.ndarray) -> np.ndarray:
    """Vectorized contribution c_i(pattern) in [0, 1) for broadcastable loci/patterns."""
    return contribution_units(land, loci, patterns).astype(np.float64) * _UNIT


def contribution(land: NkLandscape, i: int, pattern: int) -> float:
    if not 0 <= i < land.n:
        raise ValueError(f"locus must be in [0, {land.n - 1}]: i={i}")
    if not 0 <= pattern < (1 << (land.k + 1)):
        raise ValueError(f"pattern must fit in k+1={land.k + 1} bits: pattern={pattern}")
    return float(contribution_array(land, np.array([i]), np.array([pattern]))[0])


def scale_unit_sums(sums: np.ndarray, n: int) -> np.ndarray:
    """Turn per-genotype sums of contribution units into fitness values.

    n <= 32 units below 2^53 sum below 2^58, so the uint64 sum is exact and
    the single rounding to float happens here, whatever path built the sum.
    """
    return np.asarray(sums, dtype=np.uint64).astype(np.float64) * _UNIT / n


def patterns_of(land: NkLandscape, codes: np.ndarray) -> np.ndarray:
    """(m, n) contribution patterns for a vector of genotype codes."""
    codes = np.asarray(codes, dtype=np.uint64)
    bits = (codes[:, None] >> land.shifts[None, :]) & np.uint64(1)
    gathered = bits[:, land.index]
    weights = np.arange(land.k + 1, dtype=np.uint64)
    return (gathered << weights).sum(axis=-1, dtype=np.uint64)


def _unit_table(land: NkLandscape, codes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    patterns = patterns_of(land, codes)
    loci = np.broadcast_to(np.arange(land.n, dtype=np.uint64), patterns.shape)
    return patterns, contribution_units(land, loci, patterns)


def fitness_codes(land: NkLandscape, codes: np.ndarray) -> np.ndarray:
    """Fitness of each code: mean of its n contributions."""
    _, units = _unit_table(land, codes)
    return scale_unit_sums(units.sum(axis=1, dtype=np.uint64), land.n)


def neighbor_fitness_codes(land: NkLandscape, codes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Fitness of each code and of its n Hamming-1 neighbors, shape (m,) and (m, n).

    Column j is the neighbor obtained by flipping locus j. Only the loci that
    depend on j are re-drawn and swapped into the integer row sum, which stays
    exact, so values are bit-identical to fitness_codes.
    """
    patterns, units = _unit_table(land, codes)
    total = units.sum(axis=1, dtype=np.uint64)
    f = scale_unit_sums(total, land.n)
    nb = np.empty((len(f), land.n), dtype=np.float64)
    for j in range(land.n):
        hit = land.affected[j]
        fresh = contribution_units(land, hit[None, :], patterns[:, hit] ^ land.pattern_masks[j, hit])
        swapped = total - units[:, hit].sum(axis=1, dtype=np.uint64) + fresh.sum(axis=1, dtype=np.uint64)
        nb[:, j] = scale_unit_sums(swapped, land.n)
    return f, nb


def fitness(land: NkLandscape, g: Genotype) -> float:
    if g.n != land.n:
        raise ValueError(f"genotype length {g.n} does not match landscape n={land.n}")
    return float(fitness_codes(land, np.array([g.code], dtype=np.uint64))[0])


# ---------------------------------------------------------------------------
# Genotype streams
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GenotypeStream:
    """Exhaustive (sample_seed is None) or sampled genotypes, served in fixed chunks.

    Chunk boundaries depend only on chunk_size, never on how many workers
    consume them, and sampled chunk c draws from a generator seeded by
    (sample_seed, c). Any partition of the chunks sees the same genotypes.
    """

    n: int
    count: int
    sample_seed: Optional[int] = None
    chunk_size: int = CHUNK_SIZE

    @property
    def exhaustive(self) -> bool:
        return self.sample_seed is None

    @property
    def n_chunks(self) -> int:
        return -(-self.count // self.chunk_size)

    def chunk(self, index: int) -> np.ndarray:
        start = index * self.chunk_size
        stop = min(start + self.chunk_size, self.count)
        if not 0 <= start < stop:
            raise IndexError(f"chunk index out of range: {index}")
        if self.exhaustive:
            return np.arange(start, stop, dtype=np.uint64)
        rng = np.random.default_rng([self.sample_seed, index])
        return rng.integers(0, 1 << self.n, size=stop - start, dtype=np.uint64)

    def chunks(self) -> Iterator[np.ndarray]:
        for index in range(self.n_chunks):
            yield self.chunk(index)

    def __len__(self) -> int:
        return self.count

    def __iter__(self) -> Iterator[Genotype]:
        for codes in self.chunks():
            for code in codes.tolist():
                yield Genotype(code, self.n)


def enumerate_genotypes(land: NkLandscape) -> GenotypeStream:
    """All 2^n genotypes in integer order."""
    return GenotypeStream(n=land.n, count=land.size)


def sample_genotypes(land: NkLandscape, count: int, sample_seed: int) -> GenotypeStream:
    """count i.i.d. uniform genotypes (with replacement), reproducible from sample_seed."""
    if count < 1:
        raise ValueError(f"sample count must be >= 1: count={count}")
    if not 0 <= sample_seed <= MAX_SEED:
        raise ValueError(f"sample_seed must be a 64-bit unsigned integer: sample_seed={sample_seed}")
    return GenotypeStream(n=land.n, count=count, sample_seed=sample_seed)


def code_chunks(genotypes, n: int, chunk_size: int = CHUNK_SIZE) -> Iterator[np.ndarray]:
    """Turn a GenotypeStream or any iterable of Genotype into uint64 code chunks."""
    if isinstance(genotypes, GenotypeStream):
        if genotypes.n != n:
            raise ValueError(f"stream length {genotypes.n} does not match landscape n={n}")
        yield from genotypes.chunks()
        return
    buf: list[int] = []
    for g in genotypes:
        if g.n != n:
            raise ValueError(f"genotype length {g.n} does not match landscape n={n}")
        buf.append(g.code)
        if len(buf) == chunk_size:
            yield np.array(buf, dtype=np.uint64)
            buf = []
    if buf:
        yield np.array(buf, dtype=np.uint64)
