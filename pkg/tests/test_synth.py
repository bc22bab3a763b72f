import numpy as np
import pytest

from patterndep.synth import SynthSpec, generate, group_blocks


def test_isotropic_shape_and_determinism():
    a, truth = generate(SynthSpec(seed=3))
    b, _ = generate(SynthSpec(seed=3))
    assert truth is None
    assert a.features.shape == (27, 26)
    np.testing.assert_array_equal(a.features, b.features)
    np.testing.assert_array_equal(a.outcome, b.outcome)


def test_planted_balanced_and_separated():
    ds, truth = generate(SynthSpec(structure="planted_two_cluster", separation=8.0,
                                   outcome_mode="cluster_mean_gap", gap=2.0, seed=1))
    assert sorted(truth.sizes) == [13, 14]
    # outcome is gap times the planted membership
    assert set(np.unique(ds.outcome)) == {0.0, 2.0}
    hi = ds.outcome == 2.0
    diff = ds.features[hi].mean(0) - ds.features[~hi].mean(0)
    assert np.linalg.norm(diff) > 6.0


def test_noisy_gap():
    ds, _ = generate(SynthSpec(structure="planted_two_cluster", separation=4.0,
                               outcome_mode="noisy_cluster_gap", noise=0.5, seed=2))
    assert len(np.unique(ds.outcome)) == ds.m


def test_groups_and_planted_groups():
    spec = SynthSpec(p=10, groups=3, structure="planted_two_cluster", separation=20.0,
                     planted_groups=("B",), seed=4)
    ds, truth = generate(spec)
    assert ds.groups() == ["A", "B", "C"]
    blocks = group_blocks(10, 3)
    member = truth.labels == 1
    gaps = np.abs(ds.features[member].mean(0) - ds.features[~member].mean(0))
    assert gaps[blocks[1]].sum() > 5 * gaps[blocks[0]].sum()


def test_group_power():
    spec = SynthSpec(p=6, groups=2, outcome_mode="group_power", group="B", power=3,
                     group_scale=2.0, seed=5)
    ds, _ = generate(spec)
    cols = group_blocks(6, 2)[1]
    np.testing.assert_allclose(ds.outcome, ds.features[:, cols].sum(1) ** 3)


@pytest.mark.parametrize("kwargs", [
    dict(m=3),
    dict(separation=-1.0),
    dict(structure="nope"),
    dict(outcome_mode="cluster_mean_gap"),
    dict(outcome_mode="group_power"),
    dict(groups=2, planted_groups=("Z",)),
    dict(groups=30),
])
def test_invalid_specs(kwargs):
    with pytest.raises(ValueError):
        SynthSpec(**kwargs)
