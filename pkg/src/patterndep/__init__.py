"""Detect and validate outcome dependence on random-projection cluster patterns."""

from .core import (
    ClusterAssignment,
    DataError,
    Dataset,
    DegenerateError,
    ProjectionClassifier,
    SplitSpec,
    ValidClustering,
    canonicalize,
    derive_rng,
    load_dataset,
)
from .dependence import delta, empirical_cdf, null_band, significance_region
from .features import expand, remove_group
from .pipeline import AnalysisConfig, analyze, featsel
from .projection import clusterability_scan, normalized_withinss, train, two_means_1d
from .synth import SynthSpec, generate
from .validation import permutation_test_1d, permutation_test_highd, validate_clustering

__version__ = "0.1.0"
