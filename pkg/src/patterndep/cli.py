"""Command-line entry point: ``patterndep <subcommand> ...``.

Exit status: 0 on success (including analyses that find no valid pattern),
1 for input or configuration errors, 2 for numerical failures.
"""

from __future__ import annotations

import argparse
import logging
import secrets
import sys
from pathlib import Path

from .baseline import compare
from .core import DataError, DegenerateError, load_dataset, write_dataset, write_group_map
from .core import derive_rng
from .pipeline import (
    AnalysisConfig,
    analyze,
    featsel,
    prepare,
    write_analysis,
    write_csv,
    write_featsel,
    write_json,
)
from .projection import clusterability_scan
from .synth import OUTCOME_MODES, STRUCTURES, SynthSpec, generate

logger = logging.getLogger("patterndep")


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("data", type=Path, help="CSV with a header row, one row per subject")
    p.add_argument("--outcome", default="outcome", help="name of the outcome column")
    p.add_argument("--groups", type=Path, help="feature,group CSV for ablation")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--seed", type=int, help="master seed (drawn at random if omitted)")


def _add_config_args(p: argparse.ArgumentParser, runs_default: int) -> None:
    d = AnalysisConfig()
    p.add_argument("--attempts", type=int, default=d.n_attempts, help="random directions per training run")
    p.add_argument("--runs", type=int, default=runs_default, help="clustering runs")
    p.add_argument("--train-fraction", type=float, default=d.train_fraction)
    p.add_argument("--permutations", type=int, default=d.permutations)
    p.add_argument("--alpha", type=float, default=d.alpha)
    p.add_argument("--null-trials", type=int, default=d.null_trials)
    p.add_argument("--grid-points", type=int, default=d.grid_points)
    p.add_argument("--degree", type=int, default=d.degree)
    p.add_argument("--remove", action="append", default=[], metavar="GROUP", help="drop a feature group (repeatable)")
    p.add_argument("--null", dest="null_model", choices=("gaussian", "permutation"), default=d.null_model,
                   help="null model of the held-out validity test")
    p.add_argument("--standardize", action="store_true", help="z-score features after expansion")


def _config(args, **extra) -> AnalysisConfig:
    return AnalysisConfig(
        n_attempts=args.attempts,
        clustering_runs=args.runs,
        compare_runs=args.runs,
        train_fraction=args.train_fraction,
        permutations=args.permutations,
        alpha=args.alpha,
        null_trials=args.null_trials,
        grid_points=args.grid_points,
        degree=args.degree,
        removed_groups=args.remove,
        seed=args.seed,
        null_model=args.null_model,
        standardize=args.standardize,
        **extra,
    )


def _seed(args) -> None:
    if args.seed is None:
        args.seed = secrets.randbits(32)
        print(f"seed: {args.seed}")


def _load(args):
    return load_dataset(args.data, args.outcome, args.groups)


def cmd_clusterability(args) -> int:
    _seed(args)
    dataset = _load(args)
    report = clusterability_scan(
        dataset.features, args.attempts, args.subset_fraction, derive_rng(args.seed, "clusterability")
    )
    args.out.mkdir(parents=True, exist_ok=True)
    write_csv(args.out / "withinss.csv", ("withinss",), ((w,) for w in report.samples))
    summary = {**report.summary(), "subset_size": int(report.subset_indices.size), "seed": args.seed}
    write_json(args.out / "summary.json", summary)
    print(f"mass below {report.cutoff}: {report.mass_below_cutoff:.3f} ({report.attempts} projections)")
    return 0


def cmd_analyze(args) -> int:
    _seed(args)
    dataset = _load(args)
    config = _config(args)
    result = analyze(dataset, config)
    summary = write_analysis(result, args.out)
    print(f"{summary['valid']} valid clusterings out of {summary['runs']} runs "
          f"({summary['features']} features)")
    if not result.records:
        print("no valid patterns")
    for iv in summary["intervals"]:
        print(
            f"significant gaps [{iv['delta_start']:.4g}, {iv['delta_end']:.4g}]: "
            f"{iv['pattern_fraction']:.3f} of patterns at or above the left edge, "
            f"alpha0 <= {iv['alpha0']:.4f}"
        )
    if result.records and not summary["intervals"]:
        print("empty significance region")
    return 0


def cmd_featsel(args) -> int:
    _seed(args)
    dataset = _load(args)
    if not dataset.group_map:
        raise DataError("featsel needs a group map (--groups)")
    degrees = args.degrees or [args.degree]
    for degree in degrees:
        args.degree = degree
        out = args.out / f"degree_{degree}" if len(degrees) > 1 else args.out
        result = featsel(dataset, _config(args))
        summary = write_featsel(result, out)
        for g, info in summary["groups"].items():
            frac = info["shift_up_fraction"]
            frac = "n/a" if frac is None else f"{frac:.2f}"
            moved = "moves up" if info["curve_moves_up"] else "no upward shift"
            print(f"degree {degree}, without {g}: {moved} (fraction {frac}, {info['valid']} valid)")
    return 0


def cmd_compare(args) -> int:
    _seed(args)
    config = _config(args)
    dataset = prepare(_load(args), config)
    audit = compare(dataset, args.runs, config)
    args.out.mkdir(parents=True, exist_ok=True)
    fields = list(audit.reports[0].to_dict())
    write_csv(args.out / "comparison.csv", fields, ([r.to_dict()[f] for f in fields] for r in audit.reports))
    write_json(args.out / "comparison.json", {"reports": [r.to_dict() for r in audit.reports]})
    write_csv(
        args.out / "runs.csv",
        ("method", "run", "assignment", "sig_highd", "sig_proj"),
        (
            (
                method,
                r.run,
                None if r.assignment is None else "".join(map(str, r.assignment.labels)),
                r.sig_highd,
                r.sig_proj,
            )
            for method, recs in audit.records.items()
            for r in recs
        ),
    )
    write_json(args.out / "config.json", config.to_dict())
    for r in audit.reports:
        print(f"{r.method}: {r.distinct_count} distinct of {r.runs} runs "
              f"({100 * r.distinct_fraction:.2f} %)")
    return 0


def cmd_synth(args) -> int:
    _seed(args)
    spec = SynthSpec(
        m=args.m,
        p=args.p,
        structure=args.structure,
        separation=args.separation,
        outcome_mode=args.outcome_mode,
        gap=args.gap,
        noise=args.noise,
        groups=args.n_groups,
        group=args.group,
        power=args.power,
        group_scale=args.group_scale,
        planted_groups=tuple(args.planted_groups or ()),
        seed=args.seed,
    )
    dataset, truth = generate(spec)
    args.out.mkdir(parents=True, exist_ok=True)
    write_dataset(dataset, args.out / "data.csv")
    if dataset.group_map:
        write_group_map(dataset, args.out / "groups.csv")
    if truth is not None:
        write_csv(args.out / "truth.csv", ("label",), ((int(v),) for v in truth.labels))
    print(f"wrote {dataset.m} x {dataset.p} dataset to {args.out / 'data.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="patterndep",
        description="Outcome dependence on random-projection cluster patterns.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("clusterability", help="distribution of normalized withinss")
    _add_data_args(p)
    p.add_argument("--attempts", type=int, default=500)
    p.add_argument("--subset-fraction", type=float, default=0.5)
    p.set_defaults(func=cmd_clusterability)

    p = sub.add_parser("analyze", help="gap CDF, null band and significance region")
    _add_data_args(p)
    _add_config_args(p, AnalysisConfig().clustering_runs)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("featsel", help="CDF shift after removing each feature group")
    _add_data_args(p)
    _add_config_args(p, AnalysisConfig().clustering_runs)
    p.add_argument("--degrees", type=int, nargs="+", help="run several degrees into degree_<k>/")
    p.set_defaults(func=cmd_featsel)

    p = sub.add_parser("compare", help="n-TARP vs k-means distinct/significant table")
    _add_data_args(p)
    _add_config_args(p, AnalysisConfig().compare_runs)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synth", help="write a synthetic dataset")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--m", type=int, default=27)
    p.add_argument("--p", type=int, default=26)
    p.add_argument("--structure", choices=STRUCTURES, default="isotropic")
    p.add_argument("--separation", type=float, default=0.0)
    p.add_argument("--outcome-mode", choices=OUTCOME_MODES, default="independent")
    p.add_argument("--gap", type=float, default=1.0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--n-groups", type=int, default=0)
    p.add_argument("--group", default="A")
    p.add_argument("--power", type=int, default=1)
    p.add_argument("--group-scale", type=float, default=1.0)
    p.add_argument("--planted-groups", nargs="+")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (DegenerateError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (DataError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
