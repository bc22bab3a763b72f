"""k-means (k=2) baseline and distinct/significant clustering accounting."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .core import ClusterAssignment, Dataset, DegenerateError, canonicalize, derive_rng
from .projection import train
from .validation import permutation_test_highd, test_projection


@dataclass(frozen=True)
class ComparisonReport:
    method: str
    runs: int
    distinct_fraction: float
    distinct_count: int
    sig_highd_fraction_distinct: float
    sig_highd_fraction_all: float
    sig_proj_fraction_distinct: float | None = None
    sig_proj_fraction_all: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RunRecord:
    """One clustering run; ``assignment`` is None when the run was degenerate."""

    run: int
    assignment: ClusterAssignment | None
    sig_highd: bool | None = None
    sig_proj: bool | None = None


@dataclass
class ComparisonAudit:
    reports: list[ComparisonReport]
    records: dict[str, list[RunRecord]] = field(default_factory=dict)


def lloyd_2means(
    features: np.ndarray, init: tuple[int, int], max_iters: int = 100
) -> tuple[np.ndarray, list[float]]:
    """Lloyd iterations from two seed subjects.

    Returns raw labels and the within-cluster sum of squares after each
    assignment step. Ties go to cluster 0. Stops at an assignment fixpoint,
    after ``max_iters`` steps, or if a cluster would become empty.
    """
    x = np.asarray(features, dtype=float)
    centroids = x[list(init)].copy()
    labels = None
    history: list[float] = []
    for _ in range(max_iters):
        d = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new = (d[:, 1] < d[:, 0]).astype(np.int8)
        if new.all() or not new.any():
            break
        history.append(float(d[np.arange(x.shape[0]), new].sum()))
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        centroids = np.stack([x[labels == 0].mean(axis=0), x[labels == 1].mean(axis=0)])
    if labels is None:
        raise DegenerateError("initial centroids do not split the data")
    return labels, history


def kmeans2(
    features: np.ndarray, max_iters: int = 100, rng: np.random.Generator | None = None
) -> ClusterAssignment:
    """2-means initialised at two distinct random subjects.

    Raises
    ------
    DegenerateError
        If all points are identical.
    """
    x = np.asarray(features, dtype=float)
    if x.shape[0] < 2:
        raise ValueError("need at least two points")
    if np.all(x == x[0]):
        raise DegenerateError("all points identical")
    rng = np.random.default_rng() if rng is None else rng
    while True:
        i, j = rng.choice(x.shape[0], size=2, replace=False)
        if not np.array_equal(x[i], x[j]):
            break
    labels, _ = lloyd_2means(x, (int(i), int(j)), max_iters)
    return canonicalize(labels)


def _fraction(flags: list[bool]) -> float:
    return float(np.mean(flags)) if flags else 0.0


def summarize(method: str, runs: int, records: list[RunRecord]) -> ComparisonReport:
    """Build a report from per-run records.

    "distinct" statistics count each canonical assignment once (its first
    occurrence); "all" statistics count every non-degenerate run.
    """
    seen: dict[bytes, RunRecord] = {}
    usable = [r for r in records if r.assignment is not None]
    for r in usable:
        seen.setdefault(r.assignment.key(), r)
    distinct = list(seen.values())
    proj_all = [r.sig_proj for r in usable if r.sig_proj is not None]
    proj_distinct = [r.sig_proj for r in distinct if r.sig_proj is not None]
    has_proj = any(r.sig_proj is not None for r in records)
    return ComparisonReport(
        method=method,
        runs=runs,
        distinct_fraction=len(distinct) / runs if runs else 0.0,
        distinct_count=len(distinct),
        sig_highd_fraction_distinct=_fraction([bool(r.sig_highd) for r in distinct]),
        sig_highd_fraction_all=_fraction([bool(r.sig_highd) for r in usable]),
        sig_proj_fraction_distinct=_fraction(proj_distinct) if has_proj else None,
        sig_proj_fraction_all=_fraction(proj_all) if has_proj else None,
    )


def compare(
    dataset: Dataset,
    runs: int,
    config,
) -> ComparisonAudit:
    """Run n-TARP and k-means ``runs`` times each and tabulate the outcomes.

    ``config`` is an :class:`~patterndep.pipeline.AnalysisConfig`. Each
    distinct assignment is tested once in the ambient space; repeated
    assignments reuse that verdict.
    """
    from .pipeline import random_split

    if runs < 1:
        raise ValueError("runs must be >= 1")
    x = dataset.features
    highd_cache: dict[bytes, bool] = {}

    def highd(assignment: ClusterAssignment) -> bool:
        key = assignment.key()
        if key not in highd_cache:
            rng = derive_rng(config.seed, "highd", len(highd_cache))
            try:
                res = permutation_test_highd(
                    x, assignment, config.permutations, config.alpha, rng
                )
                highd_cache[key] = res.significant
            except DegenerateError:
                highd_cache[key] = False
        return highd_cache[key]

    ntarp: list[RunRecord] = []
    for run in range(runs):
        rng = derive_rng(config.seed, "compare-ntarp", run)
        split = random_split(dataset.m, config.train_fraction, rng)
        try:
            clf = train(x[split.train_indices], config.n_attempts, rng)
            assignment = canonicalize(clf.assign(x))
        except DegenerateError:
            ntarp.append(RunRecord(run, None))
            continue
        try:
            res = test_projection(
                x[split.test_indices] @ clf.direction,
                clf.threshold,
                config.permutations,
                config.alpha,
                rng,
                config.null_model,
            )
        except DegenerateError:
            res = None
        ntarp.append(
            RunRecord(run, assignment, highd(assignment), bool(res is not None and res.significant))
        )

    km: list[RunRecord] = []
    for run in range(runs):
        rng = derive_rng(config.seed, "compare-kmeans", run)
        try:
            assignment = kmeans2(x, rng=rng)
        except DegenerateError:
            km.append(RunRecord(run, None))
            continue
        km.append(RunRecord(run, assignment, highd(assignment)))

    reports = [summarize("n-TARP", runs, ntarp), summarize("k-means", runs, km)]
    return ComparisonAudit(reports, {"n-TARP": ntarp, "k-means": km})
