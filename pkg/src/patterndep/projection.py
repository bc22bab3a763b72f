"""Random-projection binary clustering (n-TARP training) and clusterability.

A candidate clustering is obtained by projecting the data onto a random
direction and splitting the projected values with an exact 1-D 2-means.
The quality of a split is its normalized withinss

    W = within-cluster sum of squares / total sum of squares,

which lies in [0, 1], is invariant under affine maps of the projected
values, and is small when the values fall into two tight groups.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DegenerateError, ProjectionClassifier

WITHINSS_CUTOFF = 0.36
# relative floor on total SS below which a projection counts as constant
TSS_RELATIVE_EPS = 1e-12
# candidate splits within this relative gap of the best are re-scored exactly
_REFINE_RTOL = 1e-9


@dataclass(frozen=True)
class Split1D:
    """Optimal contiguous split of sorted values; ``split_index`` values go low."""

    sorted_values: np.ndarray
    split_index: int
    within_ss: float
    total_ss: float

    @property
    def low(self) -> np.ndarray:
        return self.sorted_values[: self.split_index]

    @property
    def high(self) -> np.ndarray:
        return self.sorted_values[self.split_index :]


@dataclass(frozen=True)
class WithinssReport:
    samples: np.ndarray
    mass_below_cutoff: float
    cutoff: float = WITHINSS_CUTOFF
    subset_indices: np.ndarray | None = None

    @property
    def attempts(self) -> int:
        return int(self.samples.size)

    def summary(self) -> dict:
        return {
            "attempts": self.attempts,
            "cutoff": self.cutoff,
            "mass_below_cutoff": self.mass_below_cutoff,
        }


def random_direction(p: int, rng: np.random.Generator) -> np.ndarray:
    """Coordinates i.i.d. uniform on [-1, 1]; the zero vector is redrawn."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    while True:
        r = rng.uniform(-1.0, 1.0, size=p)
        if np.any(r):
            return r


def random_directions(n: int, p: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` directions as rows, drawn as by :func:`random_direction`."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    dirs = rng.uniform(-1.0, 1.0, size=(n, p))
    for i in np.flatnonzero(~dirs.any(axis=1)):
        dirs[i] = random_direction(p, rng)
    return dirs


def project(features: np.ndarray, direction: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=float)
    direction = np.asarray(direction, dtype=float)
    if features.ndim != 2 or direction.ndim != 1 or features.shape[1] != direction.size:
        raise ValueError(
            f"cannot project features of shape {features.shape} "
            f"onto direction of shape {direction.shape}"
        )
    return features @ direction


def _segment_ss(values: np.ndarray) -> float:
    return float(((values - values.mean()) ** 2).sum())


def _tss_floor(values: np.ndarray) -> float:
    return TSS_RELATIVE_EPS * float(np.max(np.abs(values))) ** 2


def two_means_1d(values: np.ndarray) -> Split1D:
    """Globally optimal 2-means of 1-D values.

    In one dimension the optimal 2-cluster partition is a contiguous split
    of the sorted values, so all ``n - 1`` split points are scanned using
    prefix sums. Splits whose prefix-sum score is within rounding of the
    best are re-scored directly; ties go to the smallest split index.
    """
    v = np.sort(np.asarray(values, dtype=float).ravel())
    n = v.size
    if n < 2:
        raise ValueError("need at least two values")
    if v[0] == v[-1]:
        raise DegenerateError("all values equal")
    c = v - v.mean()
    cs = np.cumsum(c)[:-1]
    k = np.arange(1, n)
    # within = sum(c^2) - k*mean_low^2 - (n-k)*mean_high^2, and sum(c) = 0
    between = cs**2 / k + cs**2 / (n - k)
    best = between.max()
    cand = np.flatnonzero(between >= best - _REFINE_RTOL * max(best, 1e-300))
    scores = [_segment_ss(v[:i]) + _segment_ss(v[i:]) for i in cand + 1]
    j = int(np.argmin(scores))
    return Split1D(v, int(cand[j] + 1), float(scores[j]), _segment_ss(v))


def normalized_withinss(split: Split1D) -> float:
    """W = within_ss / total_ss; raises for (numerically) constant values."""
    if split.total_ss <= _tss_floor(split.sorted_values):
        raise DegenerateError("projection is constant")
    return min(1.0, max(0.0, split.within_ss / split.total_ss))


def threshold_between(split: Split1D) -> float:
    """Midpoint between the largest low value and the smallest high value."""
    return 0.5 * (float(split.low[-1]) + float(split.high[0]))


def batch_withinss(projected: np.ndarray) -> np.ndarray:
    """Best-split normalized withinss for every column of ``projected``.

    Degenerate (constant) columns give ``inf``. This is the vectorised scan
    used during training; it agrees with :func:`two_means_1d` up to
    floating-point rounding.
    """
    x = np.sort(np.asarray(projected, dtype=float), axis=0)
    n = x.shape[0]
    c = x - x.mean(axis=0)
    tss = (c**2).sum(axis=0)
    cs = np.cumsum(c, axis=0)[:-1]
    k = np.arange(1, n)[:, None]
    between = (cs**2 / k + cs**2 / (n - k)).max(axis=0)
    floor = TSS_RELATIVE_EPS * np.max(np.abs(x), axis=0) ** 2
    ok = (tss > floor) & (x[0] != x[-1])
    w = np.full(x.shape[1], np.inf)
    w[ok] = np.clip(1.0 - between[ok] / tss[ok], 0.0, 1.0)
    return w


def train(
    train_features: np.ndarray, n: int, rng: np.random.Generator
) -> ProjectionClassifier:
    """Keep the best of ``n`` random projections of the training points.

    Raises
    ------
    DegenerateError
        If every projection is constant.
    """
    x = np.asarray(train_features, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("need a 2-D array with at least two training points")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    dirs = random_directions(n, x.shape[1], rng)
    w = batch_withinss(x @ dirs.T)
    if not np.isfinite(w).any():
        raise DegenerateError(f"all {n} projections were constant")
    # argmin returns the earliest attempt among ties
    best = int(np.argmin(w))
    split = two_means_1d(project(x, dirs[best]))
    return ProjectionClassifier(
        direction=dirs[best],
        threshold=threshold_between(split),
        train_withinss=normalized_withinss(split),
    )


def clusterability_scan(
    features: np.ndarray,
    attempts: int,
    subset_fraction: float,
    rng: np.random.Generator,
    cutoff: float = WITHINSS_CUTOFF,
) -> WithinssReport:
    """Distribution of W over random projections of one random subset.

    Constant projections are dropped, so the report may hold fewer than
    ``attempts`` samples on duplicate-heavy data.
    """
    x = np.asarray(features, dtype=float)
    if attempts < 1:
        raise ValueError("attempts must be >= 1")
    if not 0.0 < subset_fraction <= 1.0:
        raise ValueError("subset_fraction must lie in (0, 1]")
    size = math.ceil(subset_fraction * x.shape[0])
    if size < 2:
        raise ValueError(f"subset of {size} subjects is too small")
    idx = np.sort(rng.choice(x.shape[0], size=size, replace=False))
    dirs = random_directions(attempts, x.shape[1], rng)
    w = batch_withinss(x[idx] @ dirs.T)
    w = w[np.isfinite(w)]
    mass = float(np.mean(w < cutoff)) if w.size else 0.0
    return WithinssReport(samples=w, mass_below_cutoff=mass, cutoff=cutoff, subset_indices=idx)
