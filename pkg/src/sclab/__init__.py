"""Spatially coupled LDPC ensembles: sampling, exact Gibbs computations, interpolation experiments and thresholds."""

from .channels import BmsChannel, bec, bsc, channel_from_entropy, parse_channel
from .ensembles import (
    DegreeDistribution,
    EnsembleSpec,
    TannerGraph,
    design_rate,
    sample_configuration_pattern,
    sample_coupled_graph,
    sample_simple_graph,
)
from .gibbs import BecEvaluator, GibbsState, conditional_entropy_exact, log_partition
from .mc import MCEstimate
from .thresholds import area_threshold, bp_gexit_curve, bp_threshold, coupled_bp_threshold

__version__ = "0.1.0"
