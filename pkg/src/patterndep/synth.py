"""Synthetic datasets with known cluster structure and outcome dependence."""

from __future__ import annotations

import string
from dataclasses import dataclass

import numpy as np

from .core import ClusterAssignment, Dataset, canonicalize

STRUCTURES = ("isotropic", "planted_two_cluster")
OUTCOME_MODES = ("independent", "cluster_mean_gap", "noisy_cluster_gap", "group_power")


@dataclass(frozen=True)
class SynthSpec:
    """Generator settings.

    ``outcome_mode`` picks how the outcome is produced:

    - ``independent``: i.i.d. standard normal, unrelated to the features
    - ``cluster_mean_gap``: planted cluster indicator times ``gap``
    - ``noisy_cluster_gap``: the same plus normal noise of std ``noise``
    - ``group_power``: (sum of the base features in ``group``) ** ``power``,
      after those features are multiplied by ``group_scale``

    With ``groups > 0`` features are split into contiguous blocks labelled
    A, B, C, ... and a group map is attached; ``planted_groups`` then
    confines the planted direction to those blocks.
    """

    m: int = 27
    p: int = 26
    structure: str = "isotropic"
    separation: float = 0.0
    outcome_mode: str = "independent"
    gap: float = 1.0
    noise: float = 0.0
    groups: int = 0
    group: str = "A"
    power: int = 1
    group_scale: float = 1.0
    planted_groups: tuple[str, ...] = ()
    seed: int = 0

    def __post_init__(self) -> None:
        if self.m < 4:
            raise ValueError("m must be >= 4")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.separation < 0:
            raise ValueError("separation must be >= 0")
        if self.structure not in STRUCTURES:
            raise ValueError(f"structure must be one of {STRUCTURES}")
        if self.outcome_mode not in OUTCOME_MODES:
            raise ValueError(f"outcome_mode must be one of {OUTCOME_MODES}")
        if self.noise < 0:
            raise ValueError("noise must be >= 0")
        if self.outcome_mode in ("cluster_mean_gap", "noisy_cluster_gap") and (
            self.structure != "planted_two_cluster"
        ):
            raise ValueError(f"{self.outcome_mode} needs planted_two_cluster structure")
        if not 0 <= self.groups <= min(self.p, 26):
            raise ValueError("groups must lie in [0, min(p, 26)]")
        if self.outcome_mode == "group_power":
            if self.groups == 0 or self.group not in group_labels(self.groups):
                raise ValueError(f"group_power needs group {self.group!r} to exist")
            if self.power < 1:
                raise ValueError("power must be >= 1")
        unknown = set(self.planted_groups) - set(group_labels(self.groups))
        if unknown:
            raise ValueError(f"planted_groups names unknown groups {sorted(unknown)}")


def group_labels(count: int) -> list[str]:
    return list(string.ascii_uppercase[:count])


def group_blocks(p: int, count: int) -> list[np.ndarray]:
    """Column indices of ``count`` near-equal contiguous blocks."""
    return [np.asarray(b) for b in np.array_split(np.arange(p), count)]


def generate(spec: SynthSpec) -> tuple[Dataset, ClusterAssignment | None]:
    """Draw a dataset; the planted partition is returned as ground truth."""
    rng = np.random.default_rng(spec.seed)
    m, p = spec.m, spec.p
    x = rng.standard_normal((m, p))
    truth = None
    if spec.structure == "planted_two_cluster":
        u = rng.standard_normal(p)
        if spec.planted_groups:
            blocks = group_blocks(p, spec.groups)
            labels = group_labels(spec.groups)
            mask = np.zeros(p, dtype=bool)
            for g in spec.planted_groups:
                mask[blocks[labels.index(g)]] = True
            u[~mask] = 0.0
        u /= np.linalg.norm(u)
        member = np.zeros(m, dtype=np.int8)
        member[m // 2 :] = 1
        rng.shuffle(member)
        x += np.outer(np.where(member == 1, 0.5, -0.5) * spec.separation, u)
        truth = canonicalize(member)

    names = tuple(f"f{j + 1}" for j in range(p))
    gmap = None
    if spec.groups:
        gmap = {}
        for label, block in zip(group_labels(spec.groups), group_blocks(p, spec.groups)):
            for j in block:
                gmap[names[j]] = (label,)

    mode = spec.outcome_mode
    if mode == "independent":
        z = rng.standard_normal(m)
    elif mode in ("cluster_mean_gap", "noisy_cluster_gap"):
        z = member * spec.gap
        if mode == "noisy_cluster_gap":
            z = z + rng.normal(0.0, spec.noise, m)
    else:
        cols = group_blocks(p, spec.groups)[group_labels(spec.groups).index(spec.group)]
        x[:, cols] *= spec.group_scale
        z = x[:, cols].sum(axis=1) ** spec.power
    return Dataset(np.ascontiguousarray(x), np.asarray(z, dtype=float), names, gmap), truth
