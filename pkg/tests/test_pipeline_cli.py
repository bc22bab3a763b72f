import json
from math import comb

import numpy as np
import pytest

from patterndep.cli import main
from patterndep.core import load_dataset
from patterndep.synth import SynthSpec, generate
from patterndep.pipeline import AnalysisConfig, analyze, featsel, random_split, read_cdf_csv

from conftest import write_csv

FAST = ["--attempts", "30", "--runs", "15", "--permutations", "200", "--null-trials", "50",
        "--grid-points", "40"]


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    rc = main(["synth", "--out", str(out), "--seed", "3", "--m", "20", "--p", "6",
               "--structure", "planted_two_cluster", "--separation", "12",
               "--outcome-mode", "cluster_mean_gap", "--n-groups", "3"])
    assert rc == 0
    return out


def test_synth_files(synth_dir):
    assert {p.name for p in synth_dir.iterdir()} == {"data.csv", "groups.csv", "truth.csv"}
    ds = load_dataset(synth_dir / "data.csv", "outcome", synth_dir / "groups.csv")
    assert (ds.m, ds.p) == (20, 6)
    assert ds.groups() == ["A", "B", "C"]


def test_analyze_outputs_and_determinism(synth_dir, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["analyze", str(synth_dir / "data.csv"), "--out", str(out), "--seed", "42", *FAST]) == 0
    for name in ("cdf.csv", "clusterings.csv", "region.json", "config.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    cdf = read_cdf_csv(a / "cdf.csv")
    assert cdf["grid"].size == 40
    assert np.all(np.diff(cdf["experimental_cdf"]) >= 0)
    assert cdf["experimental_cdf"][-1] == 1.0
    np.testing.assert_allclose(cdf["null_mean_minus_2std"], cdf["null_mean"] - 2 * cdf["null_std"])
    region = json.loads((a / "region.json").read_text())
    assert region["valid"] > 0
    assert json.loads((a / "config.json").read_text())["seed"] == 42


def test_analyze_degree_two(synth_dir, tmp_path):
    assert main(["analyze", str(synth_dir / "data.csv"), "--out", str(tmp_path), "--seed", "1",
                 "--degree", "2", *FAST]) == 0
    assert json.loads((tmp_path / "region.json").read_text())["features"] == comb(6 + 2, 2) - 1


def test_analyze_no_valid_patterns(tmp_path, capsys):
    rng = np.random.default_rng(0)
    rows = np.c_[rng.normal(size=(8, 2)), rng.normal(size=8)]
    data = write_csv(tmp_path / "d.csv", ["a", "b", "outcome"], rows)
    out = tmp_path / "out"
    rc = main(["analyze", str(data), "--out", str(out), "--seed", "0", "--attempts", "5",
               "--runs", "3", "--permutations", "100", "--alpha", "0.0001"])
    assert rc == 0
    assert "no valid patterns" in capsys.readouterr().out
    region = json.loads((out / "region.json").read_text())
    assert region["message"] == "no valid patterns"
    assert not (out / "cdf.csv").exists()


def test_bad_csv_exit_1(tmp_path, capsys):
    data = write_csv(tmp_path / "d.csv", ["a", "outcome"], [[1, 2], ["x", 3], [1, 1], [2, 2]])
    assert main(["analyze", str(data), "--out", str(tmp_path / "o"), "--seed", "0"]) == 1
    err = capsys.readouterr().err
    assert "row 2" in err and "a" in err


def test_missing_file_exit_1(tmp_path):
    assert main(["analyze", str(tmp_path / "none.csv"), "--out", str(tmp_path / "o")]) == 1


def test_bad_config_exit_1(synth_dir, tmp_path):
    assert main(["analyze", str(synth_dir / "data.csv"), "--out", str(tmp_path),
                 "--train-fraction", "1.5"]) == 1


def test_seed_echoed(synth_dir, tmp_path, capsys):
    main(["clusterability", str(synth_dir / "data.csv"), "--out", str(tmp_path), "--attempts", "20"])
    assert "seed:" in capsys.readouterr().out
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["attempts"] <= 20 and summary["subset_size"] == 10


def test_featsel_cli(synth_dir, tmp_path):
    rc = main(["featsel", str(synth_dir / "data.csv"), "--groups", str(synth_dir / "groups.csv"),
               "--out", str(tmp_path), "--seed", "2", "--degrees", "1", "2", *FAST])
    assert rc == 0
    for k in (1, 2):
        summary = json.loads((tmp_path / f"degree_{k}" / "featsel.json").read_text())
        assert set(summary["groups"]) == {"A", "B", "C"}
        assert summary["degree"] == k


def test_featsel_without_groups(synth_dir, tmp_path):
    assert main(["featsel", str(synth_dir / "data.csv"), "--out", str(tmp_path), *FAST]) == 1


def test_compare_cli(synth_dir, tmp_path):
    assert main(["compare", str(synth_dir / "data.csv"), "--out", str(tmp_path), "--seed", "5",
                 "--attempts", "20", "--runs", "6", "--permutations", "100"]) == 0
    for name in ("comparison.csv", "comparison.json", "runs.csv", "config.json"):
        assert (tmp_path / name).exists()
    rows = (tmp_path / "runs.csv").read_text().splitlines()
    assert len(rows) == 1 + 12


def test_random_split_sizes():
    s = random_split(27, 0.5, np.random.default_rng(0))
    assert s.train_indices.size == 13 and s.test_indices.size == 14
    assert set(s.train_indices) | set(s.test_indices) == set(range(27))


def test_featsel_shares_grid():
    ds, _ = generate(SynthSpec(p=6, m=20, groups=2, structure="planted_two_cluster",
                               separation=12.0, outcome_mode="cluster_mean_gap", seed=1))
    cfg = AnalysisConfig(n_attempts=20, clustering_runs=10, permutations=100, null_trials=30, grid_points=30)
    res = featsel(ds, cfg)
    assert res.reference.cdf.grid is res.grid or np.array_equal(res.reference.cdf.grid, res.grid)
    assert set(res.shift) == {"A", "B"}


def test_analyze_permutation_null_option(planted):
    ds, _ = planted
    cfg = AnalysisConfig(n_attempts=30, clustering_runs=10, permutations=100, null_trials=30,
                         grid_points=30, null_model="permutation")
    res = analyze(ds, cfg)
    assert all(r.clustering.p_value <= 0.01 for r in res.records)
