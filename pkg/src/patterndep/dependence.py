"""Outcome-gap CDFs, the size-matched null band and the significance region."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import ClusterAssignment, derive_rng

GRID_POINTS = 200
GRID_MARGIN = 1.05
NULL_TRIALS = 1000


@dataclass(frozen=True)
class DeltaCdf:
    deltas: np.ndarray
    grid: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class NullBand:
    grid: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    trials: int
    alpha0: np.ndarray

    @property
    def lower2(self) -> np.ndarray:
        """Mean minus two standard deviations."""
        return self.mean - 2.0 * self.std


@dataclass(frozen=True)
class SignificanceRegion:
    intervals: list[tuple[float, float]] = field(default_factory=list)
    alpha0: list[float] = field(default_factory=list)
    pattern_fraction: list[float] = field(default_factory=list)
    index_ranges: list[tuple[int, int]] = field(default_factory=list)

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def to_dict(self) -> dict:
        return {
            "intervals": [
                {
                    "delta_start": lo,
                    "delta_end": hi,
                    "pattern_fraction": frac,
                    "alpha0": a0,
                }
                for (lo, hi), frac, a0 in zip(self.intervals, self.pattern_fraction, self.alpha0)
            ]
        }


def delta(outcomes: np.ndarray, assignment: ClusterAssignment | np.ndarray) -> float:
    """Absolute difference of the mean outcome in the two clusters."""
    z = np.asarray(outcomes, dtype=float).ravel()
    labels = assignment.labels if isinstance(assignment, ClusterAssignment) else assignment
    labels = np.asarray(labels).ravel().astype(bool)
    if labels.shape != z.shape:
        raise ValueError("outcomes and labels differ in length")
    if labels.all() or not labels.any():
        raise ValueError("empty cluster")
    return float(abs(z[~labels].mean() - z[labels].mean()))


def make_grid(upper: float, points: int = GRID_POINTS) -> np.ndarray:
    """Evenly spaced points on ``[0, GRID_MARGIN * upper]``.

    A zero upper bound (all gaps zero) falls back to ``[0, 1]``.
    """
    if points < 2:
        raise ValueError("grid needs at least two points")
    top = GRID_MARGIN * float(upper)
    if top <= 0.0:
        top = 1.0
    return np.linspace(0.0, top, points)


def cdf_on_grid(samples: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Fraction of ``samples`` at or below each grid point."""
    s = np.sort(np.asarray(samples, dtype=float).ravel())
    return np.searchsorted(s, grid, side="right") / s.size


def empirical_cdf(
    deltas: Sequence[float] | np.ndarray,
    grid_points: int = GRID_POINTS,
    grid: np.ndarray | None = None,
) -> DeltaCdf:
    """Step-function CDF of the gap samples.

    The grid defaults to ``make_grid(max(deltas), grid_points)``; pass a
    shared ``grid`` to compare several curves point by point.
    """
    d = np.sort(np.asarray(deltas, dtype=float).ravel())
    if d.size == 0:
        raise ValueError("no delta samples")
    if grid is None:
        grid = make_grid(d[-1], grid_points)
    return DeltaCdf(deltas=d, grid=np.asarray(grid, dtype=float), values=cdf_on_grid(d, grid))


def _check_sizes(size_pairs: Sequence[tuple[int, int]], m: int) -> np.ndarray:
    sizes = np.asarray(size_pairs, dtype=int).reshape(-1, 2)
    if sizes.shape[0] == 0:
        raise ValueError("no size pairs")
    if (sizes < 1).any():
        raise ValueError("size pairs must not contain an empty group")
    if (sizes.sum(axis=1) != m).any():
        raise ValueError(f"every size pair must sum to {m}")
    return sizes


def null_deltas_trial(
    outcomes: np.ndarray, sizes: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """One random partition per size pair; returns one gap per pair."""
    z = np.asarray(outcomes, dtype=float)
    m = z.size
    order = np.argsort(rng.random((sizes.shape[0], m)), axis=1)
    n0 = sizes[:, 0]
    first = np.arange(m)[None, :] < n0[:, None]
    zz = z[order]
    s0 = np.where(first, zz, 0.0).sum(axis=1)
    s1 = z.sum() - s0
    return np.abs(s0 / n0 - s1 / sizes[:, 1])


def null_delta_samples(
    outcomes: np.ndarray,
    size_pairs: Sequence[tuple[int, int]],
    trials: int,
    seed: int,
) -> np.ndarray:
    """``trials x len(size_pairs)`` matrix of null gaps.

    Trial ``t`` draws from its own stream ``derive_rng(seed, "null", t)``.
    """
    z = np.asarray(outcomes, dtype=float).ravel()
    sizes = _check_sizes(size_pairs, z.size)
    if trials < 2:
        raise ValueError("need at least two null trials")
    out = np.empty((trials, sizes.shape[0]))
    for t in range(trials):
        out[t] = null_deltas_trial(z, sizes, derive_rng(seed, "null", t))
    return out


def band_from_samples(samples: np.ndarray, grid: np.ndarray) -> NullBand:
    """Pointwise mean, standard deviation and alpha0 of per-trial CDFs."""
    samples = np.asarray(samples, dtype=float)
    grid = np.asarray(grid, dtype=float)
    trials = samples.shape[0]
    curves = np.empty((trials, grid.size))
    for t in range(trials):
        curves[t] = cdf_on_grid(samples[t], grid)
    mean = curves.mean(axis=0)
    std = curves.std(axis=0, ddof=1)
    alpha0 = (curves < (mean - 2.0 * std)[None, :]).mean(axis=0)
    return NullBand(grid=grid, mean=mean, std=std, trials=trials, alpha0=alpha0)


def null_band(
    outcomes: np.ndarray,
    size_pairs: Sequence[tuple[int, int]],
    trials: int,
    grid: np.ndarray,
    seed: int,
) -> NullBand:
    """Band of CDF curves from size-matched random partitions of the outcomes."""
    return band_from_samples(null_delta_samples(outcomes, size_pairs, trials, seed), grid)


def significance_region(experimental: DeltaCdf, band: NullBand) -> SignificanceRegion:
    """Maximal grid runs where the experimental CDF is below mean - 2 std."""
    if experimental.grid.shape != band.grid.shape or not np.array_equal(
        experimental.grid, band.grid
    ):
        raise ValueError("experimental CDF and null band use different grids")
    inside = experimental.values < band.lower2
    region = SignificanceRegion()
    i = 0
    n = inside.size
    while i < n:
        if not inside[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and inside[j + 1]:
            j += 1
        region.intervals.append((float(band.grid[i]), float(band.grid[j])))
        region.alpha0.append(float(band.alpha0[i : j + 1].max()))
        region.pattern_fraction.append(float(1.0 - experimental.values[i]))
        region.index_ranges.append((i, j))
        i = j + 1
    return region


def shift_up_fraction(reference: np.ndarray, ablated: np.ndarray) -> float | None:
    """Share of differing grid points where ``ablated`` lies on or above ``reference``.

    ``None`` when the curves coincide everywhere.
    """
    reference = np.asarray(reference, dtype=float)
    ablated = np.asarray(ablated, dtype=float)
    differ = ablated != reference
    if not differ.any():
        return None
    return float(np.mean(ablated[differ] >= reference[differ]))
