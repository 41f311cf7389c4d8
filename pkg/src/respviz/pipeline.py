"""End-to-end wiring shared by the CLI and the HTTP service.

The gallery bundle is a pure function of (spec text, data text, target
width, weights or model, seed): losses are weight-independent, so the
bundle carries the full per-target loss breakdown and clients may
re-rank with new weights without recomputation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .errors import SchemaError
from .measures import PerceptualKernel, default_kernel
from .model import ChartSpec, Dataset, load_dataset
from .ranker import (
    FeatureVector,
    RankModel,
    extract_features,
    rank_by_model,
    rank_by_weighted_sum,
)
from .render import render, view_to_jsonable
from .report import LossReport, compute_loss_report, report_to_jsonable
from .targets import (
    DEFAULT_TARGET_WIDTH,
    descriptor_to_jsonable,
    generate_targets,
    target_set_to_jsonable,
)
from .model import spec_to_jsonable

MAX_ROWS = 50_000
DEFAULT_WEIGHTS = (1.0, 1.0, 1.0)


@dataclass(frozen=True)
class RunConfig:
    target_width: int = DEFAULT_TARGET_WIDTH
    weights: tuple[float, float, float] = DEFAULT_WEIGHTS
    seed: int = 0
    feature_family: str = "A"

    def echo(self, mode: str) -> dict:
        return {
            "mode": mode,
            "seed": self.seed,
            "targetWidth": self.target_width,
            "weights": list(self.weights),
        }


def guard_dataset_size(data: Dataset, subsample: Optional[int] = None, seed: int = 0) -> Dataset:
    """Refuse very large datasets (pair distributions are O(n^2)) unless
    a subsample size is requested."""
    if len(data.rows) <= MAX_ROWS:
        return data
    if subsample is None:
        raise SchemaError(
            f"dataset has {len(data.rows)} rows (> {MAX_ROWS}); pass a subsample size to proceed"
        )
    import numpy as np

    rng = np.random.default_rng(seed)
    keep = sorted(rng.choice(len(data.rows), size=subsample, replace=False))
    return Dataset(
        name=data.name,
        fields=data.fields,
        rows=tuple(data.rows[i] for i in keep),
        dropped_rows=data.dropped_rows,
    )


def enumerate_bundle(spec: ChartSpec, config: RunConfig) -> dict:
    target_set = generate_targets(spec, config.target_width)
    return target_set_to_jsonable(target_set)


def rank_bundle(
    spec: ChartSpec,
    data: Dataset,
    config: RunConfig,
    model: Optional[RankModel] = None,
    kernel: Optional[PerceptualKernel] = None,
) -> dict:
    """Compute every target's loss report and rank; returns the bundle."""
    kernel = kernel or default_kernel()
    source_view = render(data, spec)
    target_set = generate_targets(spec, config.target_width)

    entries = {}
    reports: list[tuple[str, LossReport]] = []
    features: list[tuple[str, FeatureVector]] = []
    for entry in target_set.targets:
        view = render(data, entry.spec)
        report = compute_loss_report(source_view, view, kernel)
        reports.append((entry.view_id, report))
        if model is not None:
            features.append(
                (entry.view_id, extract_features(report, spec, entry.spec, model_family(model)))
            )
        entries[entry.view_id] = (entry, view, report)

    if model is not None:
        ranking = rank_by_model(model, features)
        mode = "model"
    else:
        ranking = rank_by_weighted_sum(reports, config.weights)
        mode = "weighted"

    targets_json = []
    for view_id, score_value in ranking:
        entry, view, report = entries[view_id]
        targets_json.append(
            {
                "id": view_id,
                "descriptor": descriptor_to_jsonable(entry.descriptor),
                "spec": spec_to_jsonable(entry.spec),
                "rendered": view_to_jsonable(view),
                "losses": report_to_jsonable(report),
                "score": score_value,
            }
        )
    return {
        "config": config.echo(mode),
        "source": {
            "id": target_set.source_id,
            "spec": spec_to_jsonable(spec),
            "rendered": view_to_jsonable(source_view),
        },
        "targets": targets_json,
    }


def model_family(model: RankModel) -> str:
    """Recover the feature family a model was trained with.

    Stored implicitly through the feature names; kept total so a model
    file with foreign names fails loudly at extraction time.
    """
    names = set(model.feature_names)
    parts = []
    if any(n.endswith("_total") for n in names):
        parts.append("A")
    if "identification_x" in names:  # D always carries the per-channel slots
        parts.append("D")
    if "d_width" in names:
        parts.append("B1")
    if "transposed" in names:
        parts.append("B2")
    if not parts:
        raise SchemaError("model feature names match no known family")
    return "+".join(parts)


def dumps_stable(obj) -> str:
    """Canonical JSON used for every artifact: sorted keys, compact,
    UTF-8 safe, NaN rejected."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False, ensure_ascii=False)


def load_dataset_for_spec(spec: ChartSpec, data_text: str, name: str = "data") -> Dataset:
    return load_dataset(data_text, spec.data.fields, name)
