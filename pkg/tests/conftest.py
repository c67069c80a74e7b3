"""Shared fixtures and brute-force oracles for the NK fitness-cloud tests."""

from __future__ import annotations

import numpy as np
import pytest

from cloud import bin_index
from landscape import Genotype, NkLandscape, contribution, nk_new


def explicit_tables(land: NkLandscape) -> list[list[float]]:
    """Materialize every contribution table: tables[i][pattern]."""
    return [[contribution(land, i, p) for p in range(1 << (land.k + 1))] for i in range(land.n)]


def oracle_pattern(land: NkLandscape, bits: tuple[int, ...], i: int) -> int:
    pattern = bits[i]
    for pos, j in enumerate(land.links[i], start=1):
        pattern |= bits[j] << pos
    return pattern


def oracle_fitness_table(land: NkLandscape) -> np.ndarray:
    """Fitness of every genotype in integer order, via explicit tables and plain bit loops."""
    tables = explicit_tables(land)
    values = []
    for code in range(land.size):
        bits = Genotype(code, land.n).bits
        # contributions are exact multiples of 2^-53, so the integer sum is exact
        units = sum(int(tables[i][oracle_pattern(land, bits, i)] * 2**53) for i in range(land.n))
        values.append(float(units) * 2.0**-53 / land.n)
    return np.array(values, dtype=np.float64)


def brute_force_points(land: NkLandscape, rule: str = "whole") -> list[tuple[float, float]]:
    """List every (f, f̃) point of the exhaustive cloud from a fitness table."""
    f = oracle_fitness_table(land)
    points = []
    for code in range(land.size):
        nb = [f[code ^ (1 << (land.n - 1 - j))] for j in range(land.n)]
        if rule == "ghc":
            points.append((float(f[code]), float(max(nb))))
        else:
            points.extend((float(f[code]), float(y)) for y in nb)
    return points


def brute_force_shape(points: list[tuple[float, float]], w: float) -> dict[int, dict]:
    groups: dict[int, list[float]] = {}
    for x, y in points:
        groups.setdefault(bin_index(x, w), []).append(y)
    return {
        idx: {"min": min(ys), "max": max(ys), "mean": float(np.mean(ys)),
              "std": float(np.std(ys)), "count": len(ys)}
        for idx, ys in sorted(groups.items())
    }


@pytest.fixture
def small_land() -> NkLandscape:
    return nk_new(8, 2, seed=11)


@pytest.fixture
def land_12_6() -> NkLandscape:
    return nk_new(12, 6, seed=3)
