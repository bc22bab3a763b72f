"""End-to-end analyses: clustering campaign, gap CDF, null band, ablation."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import Dataset, DegenerateError, SplitSpec, ValidClustering, derive_rng
from .dependence import (
    DeltaCdf,
    NullBand,
    SignificanceRegion,
    band_from_samples,
    empirical_cdf,
    make_grid,
    null_delta_samples,
    shift_up_fraction,
    significance_region,
)
from .features import expand, remove_group
from .projection import train
from .validation import NULL_MODELS, validate_clustering

logger = logging.getLogger(__name__)

SHIFT_FRACTION = 0.7


@dataclass
class AnalysisConfig:
    n_attempts: int = 500
    clustering_runs: int = 10_000
    compare_runs: int = 1000
    train_fraction: float = 0.5
    permutations: int = 10_000
    alpha: float = 0.01
    null_trials: int = 1000
    grid_points: int = 200
    degree: int = 1
    removed_groups: list[str] = field(default_factory=list)
    seed: int = 0
    null_model: str = "gaussian"
    standardize: bool = False
    scan_attempts: int = 500
    subset_fraction: float = 0.5

    def __post_init__(self) -> None:
        for name in (
            "n_attempts",
            "clustering_runs",
            "compare_runs",
            "permutations",
            "null_trials",
            "grid_points",
            "degree",
            "scan_attempts",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if not 0.0 < self.subset_fraction <= 1.0:
            raise ValueError("subset_fraction must lie in (0, 1]")
        if self.null_model not in NULL_MODELS:
            raise ValueError(f"null_model must be one of {NULL_MODELS}")
        self.removed_groups = list(self.removed_groups)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class CampaignRecord:
    run: int
    clustering: ValidClustering


@dataclass
class AnalysisResult:
    config: AnalysisConfig
    dataset: Dataset
    records: list[CampaignRecord]
    cdf: DeltaCdf | None = None
    band: NullBand | None = None
    region: SignificanceRegion = field(default_factory=SignificanceRegion)
    null_samples: np.ndarray | None = None

    @property
    def deltas(self) -> np.ndarray:
        return np.array([r.clustering.delta for r in self.records])

    @property
    def size_pairs(self) -> list[tuple[int, int]]:
        return [r.clustering.assignment.sizes for r in self.records]


def random_split(m: int, train_fraction: float, rng: np.random.Generator) -> SplitSpec:
    """Fresh random split with floor(train_fraction * m) training subjects."""
    n_train = math.floor(train_fraction * m)
    order = rng.permutation(m)
    return SplitSpec(np.sort(order[:n_train]), np.sort(order[n_train:]))


def standardize(dataset: Dataset) -> Dataset:
    x = dataset.features
    sd = x.std(axis=0)
    sd[sd == 0] = 1.0
    return dataset.replace(features=(x - x.mean(axis=0)) / sd)


def prepare(dataset: Dataset, config: AnalysisConfig) -> Dataset:
    """Group removal on base features, then expansion, then optional scaling."""
    for group in config.removed_groups:
        dataset = remove_group(dataset, group)
    dataset = expand(dataset, config.degree)
    if config.standardize:
        dataset = standardize(dataset)
    return dataset


def run_campaign(dataset: Dataset, config: AnalysisConfig, tag: str = "campaign") -> list[CampaignRecord]:
    """Train and validate ``config.clustering_runs`` classifiers.

    Run ``r`` draws its split, directions and test null from
    ``derive_rng(config.seed, tag, r)``.
    """
    records = []
    for run in range(config.clustering_runs):
        rng = derive_rng(config.seed, tag, run)
        split = random_split(dataset.m, config.train_fraction, rng)
        try:
            clf = train(dataset.features[split.train_indices], config.n_attempts, rng)
        except DegenerateError:
            continue
        valid = validate_clustering(
            dataset, split, clf, config.permutations, config.alpha, rng, config.null_model
        )
        if valid is not None:
            records.append(CampaignRecord(run, valid))
    logger.info("%d of %d runs produced valid clusterings", len(records), config.clustering_runs)
    return records


def finish_analysis(
    result: AnalysisResult, grid: np.ndarray | None = None
) -> AnalysisResult:
    """Experimental CDF, size-matched null band and significance region."""
    if not result.records:
        return result
    cfg = result.config
    deltas = result.deltas
    samples = null_delta_samples(result.dataset.outcome, result.size_pairs, cfg.null_trials, cfg.seed)
    if grid is None:
        grid = make_grid(max(deltas.max(), samples.max()), cfg.grid_points)
    result.null_samples = samples
    result.cdf = empirical_cdf(deltas, grid=grid)
    result.band = band_from_samples(samples, grid)
    result.region = significance_region(result.cdf, result.band)
    return result


def analyze(dataset: Dataset, config: AnalysisConfig) -> AnalysisResult:
    prepared = prepare(dataset, config)
    records = run_campaign(prepared, config)
    return finish_analysis(AnalysisResult(config, prepared, records))


@dataclass
class FeatselResult:
    grid: np.ndarray
    reference: AnalysisResult
    ablations: dict[str, AnalysisResult]
    curves: dict[str, np.ndarray | None]
    shift: dict[str, float | None]

    def fired(self, group: str, threshold: float = SHIFT_FRACTION) -> bool:
        frac = self.shift[group]
        return frac is not None and frac >= threshold


def featsel(
    dataset: Dataset, config: AnalysisConfig, groups: Sequence[str] | None = None
) -> FeatselResult:
    """Reference analysis plus one analysis per removed group, on one grid.

    All analyses share the seed, so the campaigns use the same random
    splits and directions stream by stream.
    """
    if not dataset.group_map:
        raise ValueError("feature selection needs a group map")
    groups = list(groups) if groups is not None else dataset.groups()
    base = AnalysisConfig(**{**config.to_dict(), "removed_groups": list(config.removed_groups)})
    reference = AnalysisResult(base, prepare(dataset, base), [])
    reference.records = run_campaign(reference.dataset, base)
    ablations = {}
    for g in groups:
        cfg = AnalysisConfig(**{**base.to_dict(), "removed_groups": base.removed_groups + [g]})
        res = AnalysisResult(cfg, prepare(dataset, cfg), [])
        res.records = run_campaign(res.dataset, cfg)
        ablations[g] = res

    tops = [r.deltas.max() for r in [reference, *ablations.values()] if r.records]
    if reference.records:
        samples = null_delta_samples(
            dataset.outcome, reference.size_pairs, base.null_trials, base.seed
        )
        tops.append(samples.max())
    grid = make_grid(max(tops) if tops else 0.0, base.grid_points)
    finish_analysis(reference, grid)
    curves: dict[str, np.ndarray | None] = {
        "reference": reference.cdf.values if reference.cdf is not None else None
    }
    shift: dict[str, float | None] = {}
    for g, res in ablations.items():
        curve = empirical_cdf(res.deltas, grid=grid).values if res.records else None
        curves[g] = curve
        if curve is None or curves["reference"] is None:
            shift[g] = None
        else:
            shift[g] = shift_up_fraction(curves["reference"], curve)
    return FeatselResult(grid, reference, ablations, curves, shift)


# --- output files -----------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else _fmt(v) for v in row])


def write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


CDF_COLUMNS = (
    "grid",
    "experimental_cdf",
    "null_mean",
    "null_std",
    "null_mean_minus_2std",
    "alpha0",
    "in_region",
)


def cdf_rows(result: AnalysisResult):
    cdf, band = result.cdf, result.band
    inside = np.zeros(cdf.grid.size, dtype=bool)
    for i, j in result.region.index_ranges:
        inside[i : j + 1] = True
    for k in range(cdf.grid.size):
        yield (
            cdf.grid[k],
            cdf.values[k],
            band.mean[k],
            band.std[k],
            band.lower2[k],
            band.alpha0[k],
            inside[k],
        )


def read_cdf_csv(path: str | Path) -> dict[str, np.ndarray]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return {c: np.array([float(r[c]) for r in rows]) for c in CDF_COLUMNS}


def write_analysis(result: AnalysisResult, out: Path) -> dict:
    """Write cdf.csv, clusterings.csv, region.json and config.json."""
    out.mkdir(parents=True, exist_ok=True)
    write_csv(
        out / "clusterings.csv",
        ("run", "direction_hash", "n0", "n1", "p_value", "delta", "train_withinss"),
        (
            (
                r.run,
                r.clustering.classifier.digest(),
                *r.clustering.assignment.sizes,
                r.clustering.p_value,
                r.clustering.delta,
                r.clustering.classifier.train_withinss,
            )
            for r in result.records
        ),
    )
    summary = {
        "runs": result.config.clustering_runs,
        "valid": len(result.records),
        "features": result.dataset.p,
        **result.region.to_dict(),
    }
    if result.cdf is None:
        summary["message"] = "no valid patterns"
        (out / "cdf.csv").unlink(missing_ok=True)
    else:
        write_csv(out / "cdf.csv", CDF_COLUMNS, cdf_rows(result))
    write_json(out / "region.json", summary)
    write_json(out / "config.json", result.config.to_dict())
    return summary


def write_featsel(result: FeatselResult, out: Path) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    names = list(result.curves)
    header = ["grid"] + ["reference" if n == "reference" else f"minus_{n}" for n in names]
    band = result.reference.band
    if band is not None:
        header += ["null_mean", "null_mean_minus_2std"]

    def rows():
        for k, x in enumerate(result.grid):
            row = [x] + [None if result.curves[n] is None else result.curves[n][k] for n in names]
            if band is not None:
                row += [band.mean[k], band.lower2[k]]
            yield row

    write_csv(out / "featsel.csv", header, rows())
    summary = {
        "degree": result.reference.config.degree,
        "reference_valid": len(result.reference.records),
        "groups": {
            g: {
                "valid": len(res.records),
                "features": res.dataset.p,
                "shift_up_fraction": result.shift[g],
                "curve_moves_up": result.fired(g),
            }
            for g, res in result.ablations.items()
        },
    }
    write_json(out / "featsel.json", summary)
    write_json(out / "config.json", result.reference.config.to_dict())
    return summary
