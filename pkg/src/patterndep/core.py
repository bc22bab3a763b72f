"""Shared domain types, CSV ingestion and canonical partitions."""

from __future__ import annotations

import csv
import math
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

MIN_SUBJECTS = 4


class DataError(ValueError):
    """Raised for malformed input data (bad CSV, non-finite cells, ...)."""


class DegenerateError(ValueError):
    """Raised when a clustering or projection carries no usable structure."""


@dataclass(frozen=True)
class Dataset:
    """Subjects x features matrix plus one scalar outcome per subject.

    ``group_map`` maps a feature name to a group label (e.g. a skill); it is
    optional and only consulted by group ablation.
    """

    features: np.ndarray
    outcome: np.ndarray
    feature_names: tuple[str, ...]
    group_map: Mapping[str, tuple[str, ...]] | None = None

    def __post_init__(self) -> None:
        features = np.array(self.features, dtype=float)
        outcome = np.array(self.outcome, dtype=float).ravel()
        if features.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {features.shape}")
        m, p = features.shape
        if m < MIN_SUBJECTS:
            raise DataError(f"need at least {MIN_SUBJECTS} subjects, got {m}")
        if p < 1:
            raise DataError("need at least one feature")
        if outcome.shape != (m,):
            raise DataError(f"outcome has {outcome.size} entries for {m} subjects")
        bad = np.argwhere(~np.isfinite(features))
        if bad.size:
            i, j = bad[0]
            raise DataError(f"non-finite feature at row {i + 1}, column {j + 1}")
        bad = np.flatnonzero(~np.isfinite(outcome))
        if bad.size:
            raise DataError(f"non-finite outcome at row {bad[0] + 1}")
        names = tuple(str(n) for n in self.feature_names)
        if len(names) != p:
            raise DataError(f"{len(names)} feature names for {p} columns")
        if len(set(names)) != p:
            dup = next(n for n in names if names.count(n) > 1)
            raise DataError(f"duplicate feature name {dup!r}")
        gmap = None
        if self.group_map is not None:
            gmap = {}
            for key, groups in self.group_map.items():
                if key not in names:
                    raise DataError(f"group map names unknown feature {key!r}")
                if isinstance(groups, str):
                    groups = (groups,)
                gmap[key] = tuple(sorted(set(groups)))
        features.setflags(write=False)
        outcome.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "outcome", outcome)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "group_map", gmap)

    @property
    def m(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    def groups(self) -> list[str]:
        """Sorted list of group labels present in the group map."""
        if not self.group_map:
            return []
        return sorted({g for gs in self.group_map.values() for g in gs})

    def replace(self, **changes) -> Dataset:
        kwargs = dict(
            features=self.features,
            outcome=self.outcome,
            feature_names=self.feature_names,
            group_map=self.group_map,
        )
        kwargs.update(changes)
        return Dataset(**kwargs)


@dataclass(frozen=True)
class SplitSpec:
    train_indices: np.ndarray
    test_indices: np.ndarray

    def __post_init__(self) -> None:
        train = np.asarray(self.train_indices, dtype=int)
        test = np.asarray(self.test_indices, dtype=int)
        if train.size < 2 or test.size < 2:
            raise ValueError("train and test sides need at least 2 subjects each")
        if np.intersect1d(train, test).size:
            raise ValueError("train and test indices overlap")
        if len(np.unique(train)) != train.size or len(np.unique(test)) != test.size:
            raise ValueError("repeated subject index in split")
        if min(train.min(), test.min()) < 0:
            raise ValueError("negative subject index")
        object.__setattr__(self, "train_indices", train)
        object.__setattr__(self, "test_indices", test)


@dataclass(frozen=True)
class ProjectionClassifier:
    """Trained direction, threshold and the training-set normalized withinss."""

    direction: np.ndarray
    threshold: float
    train_withinss: float

    def __post_init__(self) -> None:
        direction = np.array(self.direction, dtype=float).ravel()
        if not np.any(direction):
            raise ValueError("direction must not be the zero vector")
        if not 0.0 <= self.train_withinss <= 1.0:
            raise ValueError(f"train_withinss {self.train_withinss} outside [0, 1]")
        direction.setflags(write=False)
        object.__setattr__(self, "direction", direction)

    def assign(self, features: np.ndarray) -> np.ndarray:
        """Label 1 for projections strictly above the threshold, else 0."""
        return (np.asarray(features) @ self.direction > self.threshold).astype(np.int8)

    def digest(self) -> str:
        """Short stable hash of the direction and threshold."""
        payload = self.direction.tobytes() + np.float64(self.threshold).tobytes()
        return f"{zlib.crc32(payload):08x}"


@dataclass(frozen=True, eq=False)
class ClusterAssignment:
    """Binary partition in canonical form (first subject carries label 0)."""

    labels: np.ndarray
    sizes: tuple[int, int] = field(init=False)

    def __post_init__(self) -> None:
        labels = np.array(self.labels, dtype=np.int8).ravel()
        if labels.size < 2 or not np.all((labels == 0) | (labels == 1)):
            raise ValueError("labels must be a 0/1 vector of length >= 2")
        n1 = int(labels.sum())
        if n1 == 0 or n1 == labels.size:
            raise DegenerateError("single-cluster labelling")
        if labels[0] != 0:
            raise ValueError("labels not canonical; use canonicalize()")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "sizes", (labels.size - n1, n1))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ClusterAssignment):
            return NotImplemented
        return np.array_equal(self.labels, other.labels)

    def __hash__(self) -> int:
        return hash(self.labels.tobytes())

    def key(self) -> bytes:
        return self.labels.tobytes()


def canonicalize(labels: Sequence[int] | np.ndarray) -> ClusterAssignment:
    """Relabel so that the first subject is in cluster 0.

    Raises
    ------
    DegenerateError
        If every subject carries the same label.
    """
    arr = np.asarray(labels).ravel()
    if arr.size < 2:
        raise ValueError("need at least two labels")
    if not np.all((arr == 0) | (arr == 1)):
        raise ValueError("labels must be 0/1")
    arr = arr.astype(np.int8)
    if arr[0] == 1:
        arr = 1 - arr
    return ClusterAssignment(arr)


@dataclass(frozen=True)
class ValidClustering:
    classifier: ProjectionClassifier
    assignment: ClusterAssignment
    p_value: float
    delta: float


def _parse_float(text: str, row: int, column: str, path: Path) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DataError(
            f"{path}: non-numeric cell {text!r} at row {row}, column {column!r}"
        ) from None
    if not math.isfinite(value):
        raise DataError(f"{path}: non-finite cell {text!r} at row {row}, column {column!r}")
    return value


def load_group_map(path: str | Path) -> dict[str, tuple[str, ...]]:
    """Read a ``feature,group`` CSV; a feature may appear on several rows."""
    path = Path(path)
    groups: dict[str, set[str]] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["feature", "group"]:
            raise DataError(f"{path}: group map header must be 'feature,group'")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 2 or not row[0].strip() or not row[1].strip():
                raise DataError(f"{path}: malformed group map line {lineno}")
            groups.setdefault(row[0].strip(), set()).add(row[1].strip())
    return {k: tuple(sorted(v)) for k, v in groups.items()}


def load_dataset(
    path: str | Path,
    outcome_column: str,
    group_map_path: str | Path | None = None,
) -> Dataset:
    """Load a subjects-by-columns CSV; every non-outcome column is a feature.

    Row numbers in error messages count data rows from 1 (the header is
    row 0).
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: no such file")
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except (UnicodeDecodeError, csv.Error) as exc:
        raise DataError(f"{path}: cannot parse CSV ({exc})") from None
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if outcome_column not in header:
        raise DataError(f"{path}: outcome column {outcome_column!r} not in header")
    if header.count(outcome_column) > 1:
        raise DataError(f"{path}: outcome column {outcome_column!r} appears twice")
    seen = set()
    for name in header:
        if name in seen:
            raise DataError(f"{path}: duplicate column name {name!r}")
        seen.add(name)
    body = [r for r in rows[1:] if r and any(c.strip() for c in r)]
    values = np.empty((len(body), len(header)))
    for i, row in enumerate(body, start=1):
        if len(row) != len(header):
            raise DataError(
                f"{path}: row {i} has {len(row)} cells, header has {len(header)}"
            )
        for j, cell in enumerate(row):
            values[i - 1, j] = _parse_float(cell.strip(), i, header[j], path)
    k = header.index(outcome_column)
    feature_cols = [j for j in range(len(header)) if j != k]
    gmap = load_group_map(group_map_path) if group_map_path is not None else None
    return Dataset(
        features=values[:, feature_cols],
        outcome=values[:, k],
        feature_names=tuple(header[j] for j in feature_cols),
        group_map=gmap,
    )


def write_dataset(
    dataset: Dataset, path: str | Path, outcome_column: str = "outcome"
) -> None:
    """Write features plus outcome as CSV (outcome last), floats in repr form."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([*dataset.feature_names, outcome_column])
        for row, z in zip(dataset.features, dataset.outcome):
            writer.writerow([repr(float(v)) for v in row] + [repr(float(z))])


def write_group_map(dataset: Dataset, path: str | Path) -> None:
    if not dataset.group_map:
        raise DataError("dataset has no group map")
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["feature", "group"])
        for name in dataset.feature_names:
            for g in dataset.group_map.get(name, ()):
                writer.writerow([name, g])


def derive_rng(seed: int, tag: str, index: int = 0) -> np.random.Generator:
    """Independent generator for the stream identified by (seed, tag, index).

    Streams never depend on the order in which they are requested, so
    campaign runs and null trials can be evaluated in any order.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(zlib.crc32(tag.encode()), int(index)))
    return np.random.Generator(np.random.PCG64(ss))
