"""Monomial feature expansion and feature-group removal."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from .core import DataError, Dataset


@dataclass(frozen=True)
class MonomialBasis:
    """All monomials of total degree 1..degree in ``p`` variables.

    ``combos`` holds the factor indices of each monomial as a non-decreasing
    tuple; ``exponent_vectors`` is the equivalent ``len(combos) x p`` array.
    Ordering is graded lexicographic on the index tuples.
    """

    p: int
    degree: int
    combos: tuple[tuple[int, ...], ...]

    @property
    def exponent_vectors(self) -> np.ndarray:
        out = np.zeros((len(self.combos), self.p), dtype=int)
        for row, combo in enumerate(self.combos):
            for j in combo:
                out[row, j] += 1
        return out

    def __len__(self) -> int:
        return len(self.combos)


def monomial_count(p: int, degree: int) -> int:
    """C(p + degree, degree) - 1: monomials of degree 1..degree, no constant."""
    return comb(p + degree, degree) - 1


def monomial_basis(p: int, degree: int) -> MonomialBasis:
    if degree < 1:
        raise ValueError(f"degree must be >= 1, got {degree}")
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    combos = tuple(
        c
        for d in range(1, degree + 1)
        for c in itertools.combinations_with_replacement(range(p), d)
    )
    return MonomialBasis(p=p, degree=degree, combos=combos)


def monomial_name(combo: tuple[int, ...], names: tuple[str, ...]) -> str:
    parts = []
    for j, group in itertools.groupby(combo):
        power = len(list(group))
        parts.append(names[j] if power == 1 else f"{names[j]}^{power}")
    return "*".join(parts)


def expand(dataset: Dataset, degree: int) -> Dataset:
    """Replace the features by all their monomials of degree 1..``degree``.

    An expanded feature belongs to every group that any of its factors
    belongs to. Degree 1 returns the dataset unchanged.

    Raises
    ------
    DataError
        If a monomial overflows to a non-finite value.
    """
    if degree < 1:
        raise ValueError(f"degree must be >= 1, got {degree}")
    if degree == 1:
        return dataset
    basis = monomial_basis(dataset.p, degree)
    x = dataset.features
    cols = np.empty((dataset.m, len(basis)))
    position: dict[tuple[int, ...], int] = {}
    with np.errstate(over="ignore", invalid="ignore"):
        for k, combo in enumerate(basis.combos):
            if len(combo) == 1:
                cols[:, k] = x[:, combo[0]]
            else:
                cols[:, k] = cols[:, position[combo[:-1]]] * x[:, combo[-1]]
            position[combo] = k
    bad = np.flatnonzero(~np.isfinite(cols).all(axis=0))
    names = tuple(monomial_name(c, dataset.feature_names) for c in basis.combos)
    if bad.size:
        raise DataError(f"monomial {names[bad[0]]!r} overflows to a non-finite value")
    gmap = None
    if dataset.group_map is not None:
        base = [dataset.group_map.get(n, ()) for n in dataset.feature_names]
        gmap = {}
        for name, combo in zip(names, basis.combos):
            groups = sorted({g for j in set(combo) for g in base[j]})
            if groups:
                gmap[name] = tuple(groups)
    return Dataset(cols, dataset.outcome, names, gmap)


def remove_group(dataset: Dataset, group: str) -> Dataset:
    """Drop every feature mapped to ``group``.

    Raises
    ------
    DataError
        For an unknown group, or when nothing would be left.
    """
    if not dataset.group_map:
        raise DataError("dataset has no group map")
    drop = {n for n, gs in dataset.group_map.items() if group in gs}
    if not drop:
        raise DataError(f"group {group!r} owns no features")
    keep = [j for j, n in enumerate(dataset.feature_names) if n not in drop]
    if not keep:
        raise DataError(f"removing group {group!r} leaves no features")
    names = tuple(dataset.feature_names[j] for j in keep)
    gmap = {n: gs for n, gs in dataset.group_map.items() if n not in drop}
    return Dataset(dataset.features[:, keep], dataset.outcome, names, gmap)
