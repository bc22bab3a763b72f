import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from patterndep.core import DegenerateError, derive_rng
from patterndep.projection import (
    Split1D,
    WITHINSS_CUTOFF,
    batch_withinss,
    clusterability_scan,
    normalized_withinss,
    project,
    random_direction,
    threshold_between,
    train,
    two_means_1d,
)


def brute_force_split(values):
    """Minimum within-cluster SS over every contiguous split of the sorted values."""
    v = np.sort(np.asarray(values, dtype=float))
    best = None
    for i in range(1, v.size):
        lo, hi = v[:i], v[i:]
        wss = float(((lo - lo.mean()) ** 2).sum()) + float(((hi - hi.mean()) ** 2).sum())
        if best is None or wss < best[0]:
            best = (wss, i)
    return best


def brute_force_any_partition(values):
    """Minimum within-cluster SS over every 2-partition (not just contiguous ones)."""
    v = np.asarray(values, dtype=float)
    n = v.size
    best = np.inf
    for mask in range(1, 2 ** (n - 1)):
        sel = np.array([(mask >> k) & 1 for k in range(n)], dtype=bool)
        a, b = v[sel], v[~sel]
        best = min(best, ((a - a.mean()) ** 2).sum() + ((b - b.mean()) ** 2).sum())
    return best


def test_random_direction_deterministic():
    a = random_direction(3, np.random.default_rng(4))
    b = random_direction(3, np.random.default_rng(4))
    np.testing.assert_array_equal(a, b)


def test_random_direction_range(rng):
    r = random_direction(26, rng)
    assert r.shape == (26,)
    assert np.all((r >= -1) & (r <= 1))


def test_random_direction_mean(rng):
    draws = np.array([random_direction(1, rng)[0] for _ in range(100_000)])
    assert abs(draws.mean()) < 0.01


def test_random_direction_rejects_bad_p(rng):
    with pytest.raises(ValueError):
        random_direction(0, rng)


def test_project_examples(rng):
    x = rng.normal(size=(7, 1))
    np.testing.assert_array_equal(project(x, np.array([1.0])), x[:, 0])
    x = rng.normal(size=(7, 4))
    e = np.zeros(4)
    e[2] = 1.0
    np.testing.assert_array_equal(project(x, e), x[:, 2])
    r = rng.uniform(-1, 1, 4)
    np.testing.assert_array_equal(project(x, 2 * r), 2 * project(x, r))
    with pytest.raises(ValueError):
        project(x, np.ones(3))


def test_two_means_separated():
    s = two_means_1d([0, 0, 1, 1])
    assert s.split_index == 2
    assert s.within_ss == 0.0


def test_two_means_hand_case():
    s = two_means_1d([3, 0, 2, 1])
    assert s.low.tolist() == [0, 1] and s.high.tolist() == [2, 3]
    assert s.within_ss == pytest.approx(1.0, abs=1e-15)
    assert s.total_ss == pytest.approx(5.0, abs=1e-15)


def test_two_means_degenerate():
    with pytest.raises(DegenerateError):
        two_means_1d([2.0, 2.0, 2.0])


def test_two_means_matches_brute_force_n50(rng):
    v = rng.normal(size=50)
    wss, _ = brute_force_split(v)
    assert two_means_1d(v).within_ss == wss


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=2, max_size=9).filter(lambda v: len(set(v)) > 1))
def test_contiguous_split_is_global_optimum(values):
    assert two_means_1d(values).within_ss == pytest.approx(
        brute_force_any_partition(values), abs=1e-9
    )


def test_ties_take_smallest_index():
    # symmetric data: splitting after 1 or before the last value are equivalent
    s = two_means_1d([0.0, 1.0, 1.0, 2.0])
    assert s.split_index == 1


def test_normalized_withinss_examples():
    assert normalized_withinss(two_means_1d([0, 0, 1, 1])) == 0.0
    assert normalized_withinss(two_means_1d([0, 1, 2, 3])) == pytest.approx(0.2, abs=1e-15)


def test_normalized_withinss_constant():
    split = Split1D(np.array([1.0, 1.0 + 1e-9]), 1, 0.0, 1e-30)
    with pytest.raises(DegenerateError):
        normalized_withinss(split)


@settings(max_examples=300, deadline=None)
@given(
    st.lists(st.floats(-100, 100, allow_nan=False), min_size=3, max_size=30),
    st.floats(0.01, 100).flatmap(lambda a: st.sampled_from([a, -a])),
    st.floats(-1000, 1000),
)
def test_withinss_affine_invariant(values, a, b):
    v = np.array(values)
    if np.ptp(v) < 1e-3:
        return
    w = normalized_withinss(two_means_1d(v))
    assert 0.0 <= w <= 1.0
    assert abs(normalized_withinss(two_means_1d(a * v + b)) - w) <= 1e-9


def test_threshold_examples():
    assert threshold_between(two_means_1d([0, 0, 1, 1])) == 0.5
    assert threshold_between(two_means_1d([0, 1, 2, 3])) == 1.5
    g = 7.0
    assert threshold_between(two_means_1d([-3, -1, -1 + 2 * g, 1 + 2 * g])) == -1 + g


def test_batch_matches_scalar(rng):
    x = rng.normal(size=(13, 40))
    w = batch_withinss(x)
    for j in range(40):
        assert w[j] == pytest.approx(normalized_withinss(two_means_1d(x[:, j])), abs=1e-12)
    x[:, 3] = 2.5
    assert np.isinf(batch_withinss(x)[3])


def test_train_point_masses(rng):
    x = np.zeros((12, 5))
    x[6:, 0] = 10.0
    clf = train(x, 100, rng)
    assert clf.train_withinss < 0.05
    assert set(clf.assign(x)[:6]) != set(clf.assign(x)[6:])


def test_train_single_attempt():
    x = np.random.default_rng(1).normal(size=(8, 3))
    clf = train(x, 1, np.random.default_rng(2))
    r = random_direction(3, np.random.default_rng(2))
    np.testing.assert_array_equal(clf.direction, r)
    assert clf.train_withinss == normalized_withinss(two_means_1d(x @ r))


def test_train_deterministic(rng):
    x = rng.normal(size=(13, 26))
    a = train(x, 500, derive_rng(3, "t"))
    b = train(x, 500, derive_rng(3, "t"))
    np.testing.assert_array_equal(a.direction, b.direction)
    assert a.threshold == b.threshold and a.train_withinss == b.train_withinss


def test_train_all_degenerate(rng):
    with pytest.raises(DegenerateError):
        train(np.ones((5, 3)), 10, rng)


def test_train_picks_minimum(rng):
    x = rng.normal(size=(13, 6))
    state = np.random.default_rng(9)
    clf = train(x, 50, state)
    dirs = np.random.default_rng(9).uniform(-1, 1, size=(50, 6))
    ws = [normalized_withinss(two_means_1d(x @ d)) for d in dirs]
    assert clf.train_withinss == pytest.approx(min(ws), abs=1e-12)


@pytest.mark.parametrize("c", [0.5, 3.0, 1e3])
def test_withinss_invariant_to_direction_scale(rng, c):
    x = rng.normal(size=(13, 26))
    r = rng.uniform(-1, 1, 26)
    w1 = normalized_withinss(two_means_1d(project(x, r)))
    w2 = normalized_withinss(two_means_1d(project(x, c * r)))
    assert abs(w1 - w2) <= 1e-9


def test_clusterability_scan_shape(isotropic):
    rep = clusterability_scan(isotropic.features, 500, 0.5, derive_rng(0, "c"))
    assert rep.attempts == 500
    assert rep.subset_indices.size == 14
    assert np.all((rep.samples >= 0) & (rep.samples <= 1))
    assert rep.mass_below_cutoff == np.mean(rep.samples < WITHINSS_CUTOFF)
    assert rep.summary() == {"attempts": 500, "cutoff": 0.36, "mass_below_cutoff": rep.mass_below_cutoff}


def test_clusterability_planted_vs_isotropic():
    from patterndep.synth import SynthSpec, generate

    # well-separated mixture in few dimensions; all subjects scanned
    planted, _ = generate(SynthSpec(m=40, p=3, structure="planted_two_cluster", separation=6, seed=2))
    iso, _ = generate(SynthSpec(m=40, p=3, seed=2))
    a = clusterability_scan(planted.features, 500, 1.0, derive_rng(0, "c"))
    b = clusterability_scan(iso.features, 500, 1.0, derive_rng(0, "c"))
    assert a.mass_below_cutoff > b.mass_below_cutoff + 0.2


def test_clusterability_errors(rng):
    x = rng.normal(size=(6, 2))
    with pytest.raises(ValueError):
        clusterability_scan(x, 10, 0.1, rng)
    with pytest.raises(ValueError):
        clusterability_scan(x, 0, 0.5, rng)
    with pytest.raises(ValueError):
        clusterability_scan(x, 10, 1.5, rng)
