"""Responsive visualization transform enumeration, task-oriented
insight-preservation loss measures, and target ranking."""

__version__ = "0.1.0"

from .model import ChartSpec, Dataset, Encoding, FieldDef, load_dataset, parse_spec, serialize_spec
from .render import RenderedTuple, RenderedView, bin_values, render
from .measures import (
    PerceptualKernel,
    channel_entropy,
    comparison_loss,
    default_kernel,
    discriminability,
    distance_position,
    distance_shape,
    distance_size,
    emd_1d,
    identification_loss,
    match_channels,
)
from .color import distance_color, resolve_color, srgb_to_lab
from .trend import (
    area_between_curves,
    linearize_color,
    loess_fit_2d,
    loess_fit_3d,
    standardize_and_interpolate,
    trend_loss,
    volume_between_surfaces,
)
from .report import LossReport, compute_loss_report
from .targets import TransformDescriptor, build_target, enumerate_heights, generate_targets, to_partial_spec
from .ranker import (
    FeatureVector,
    PairSample,
    RankModel,
    aggregate_labels,
    check_monotonic,
    evaluate_loo,
    extract_features,
    pair_map,
    quintile_sample,
    rank_by_model,
    rank_by_weighted_sum,
    score,
    train,
)

__all__ = [name for name in dir() if not name.startswith("_")]
