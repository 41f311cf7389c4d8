"""Feature extraction, weighted and learned ranking of targets.

Ranking works either as a weighted sum over the three loss totals
(lower scores rank higher) or through a trained pairwise linear model
(logistic loss on ordered pairs; higher scores rank higher). Label
aggregation, ranking-monotonicity checking and quintile sampling for
labeling campaigns live here too.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    DegenerateDataError,
    IncompatibleFeaturesError,
    MissingPairError,
    SchemaError,
)
from .model import ChartSpec
from .report import LossReport

MEASURES = ("identification", "comparison", "trend")
CHANNEL_SLOTS = ("x", "y", "color", "size", "shape")
MODEL_SLOTS = ("y_on_x", "color_on_xy", "size_on_xy")
FAMILIES = ("A", "D", "B1", "B2")
_BIG = 1e9  # stand-in for flagged infinite components inside feature math


@dataclass(frozen=True)
class FeatureVector:
    names: tuple[str, ...]
    values: tuple[float, ...]
    family: str

    def __post_init__(self):
        if len(self.names) != len(self.values):
            raise SchemaError("feature names and values must align")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class PairSample:
    a: FeatureVector
    b: FeatureVector
    mapping: str  # "difference" | "concatenate"
    label: int  # +1: a ranks higher, -1: b ranks higher

    def __post_init__(self):
        if self.a.names != self.b.names:
            raise IncompatibleFeaturesError("pair members use different feature sets")
        if self.label not in (-1, 1):
            raise SchemaError("pair labels must be -1 or +1")
        if self.mapping not in ("difference", "concatenate"):
            raise SchemaError(f"unknown mapping {self.mapping!r}")


@dataclass(frozen=True)
class RankModel:
    """Linear pairwise model plus the item-feature normalization stats.

    Difference-mapped models carry no bias so predictions stay exactly
    antisymmetric; concatenate-mapped models train a bias.
    """

    mapping: str
    feature_names: tuple[str, ...]
    means: tuple[float, ...]
    stddevs: tuple[float, ...]  # 0 marks a dropped (constant) feature
    weights: tuple[float, ...]
    bias: float
    seed: int

    def normalize(self, vector: FeatureVector) -> np.ndarray:
        if vector.names != self.feature_names:
            raise IncompatibleFeaturesError("feature names do not match the model")
        arr = vector.as_array()
        out = np.zeros_like(arr)
        for i, (m, s) in enumerate(zip(self.means, self.stddevs)):
            if s > 0:
                out[i] = (arr[i] - m) / s
        return out


# ---------------------------------------------------------------------------
# Features


def _fold(per: dict, slots: tuple[str, ...]) -> dict:
    """Fold per-channel entries into fixed slots; unmatched-channel keys
    ("-ch" source-only, "+ch" target-only) fold into the channel slot."""
    out = {slot: 0.0 for slot in slots}
    present = {slot: False for slot in slots}
    for key, value in per.items():
        slot = key.lstrip("+-")
        if slot not in out:
            raise SchemaError(f"unknown loss component key {key!r}")
        v = float(value)
        if not math.isfinite(v):
            v = _BIG
        out[slot] += v
        present[slot] = True
    return {"values": out, "present": present}


def _is_transposed(source: ChartSpec, target: ChartSpec) -> bool:
    sx, sy = source.encodings["x"].field, source.encodings["y"].field
    tx, ty = target.encodings["x"].field, target.encodings["y"].field
    return sx != sy and (tx, ty) == (sy, sx)


def extract_features(
    report: LossReport, source_spec: ChartSpec, target_spec: ChartSpec, family: str
) -> FeatureVector:
    """Feature vector for one target under the requested family.

    Families compose with "+" (e.g. "A+B1"). A holds the three loss
    totals; D the per-channel / per-model components (absent slots are
    zero, with 0/1 presence masks); B1 the chart size deltas; B2 the
    transposed flag.
    """
    parts = family.split("+")
    for part in parts:
        if part not in FAMILIES:
            raise SchemaError(f"unknown feature family {part!r}")
    names: list[str] = []
    values: list[float] = []
    for part in parts:
        if part == "A":
            for measure, component in zip(
                MEASURES, (report.identification, report.comparison, report.trend)
            ):
                names.append(f"{measure}_total")
                total = float(component.total)
                values.append(total if math.isfinite(total) else _BIG)
        elif part == "D":
            ident = _fold(report.identification.per, CHANNEL_SLOTS)
            comp = _fold(report.comparison.per, CHANNEL_SLOTS)
            trend = _fold(report.trend.per, MODEL_SLOTS)
            for slot in CHANNEL_SLOTS:
                names.append(f"identification_{slot}")
                values.append(ident["values"][slot])
            for slot in CHANNEL_SLOTS:
                names.append(f"comparison_{slot}")
                values.append(comp["values"][slot])
            for slot in MODEL_SLOTS:
                names.append(f"trend_{slot}")
                values.append(trend["values"][slot])
            for slot in CHANNEL_SLOTS:
                names.append(f"has_{slot}")
                values.append(1.0 if ident["present"][slot] or comp["present"][slot] else 0.0)
            for slot in MODEL_SLOTS:
                names.append(f"has_{slot}")
                values.append(1.0 if trend["present"][slot] else 0.0)
        elif part == "B1":
            names.extend(["d_width", "d_height"])
            values.extend(
                [
                    float(target_spec.width - source_spec.width),
                    float(target_spec.height - source_spec.height),
                ]
            )
        elif part == "B2":
            names.append("transposed")
            values.append(1.0 if _is_transposed(source_spec, target_spec) else 0.0)
    return FeatureVector(names=tuple(names), values=tuple(values), family=family)


def pair_map(a: FeatureVector, b: FeatureVector, mapping: str) -> np.ndarray:
    """Combine a pair of feature vectors: elementwise difference or
    concatenation."""
    if a.names != b.names:
        raise IncompatibleFeaturesError("cannot map feature vectors with different names")
    if mapping == "difference":
        return a.as_array() - b.as_array()
    if mapping == "concatenate":
        return np.concatenate([a.as_array(), b.as_array()])
    raise SchemaError(f"unknown mapping {mapping!r}")


# ---------------------------------------------------------------------------
# Scoring and ranking


def score(model: RankModel, features: FeatureVector) -> float:
    """Per-item scalar score; higher scores rank higher.

    For difference mapping, comparing scores reproduces the pairwise
    classifier exactly. For concatenate mapping the antisymmetric part
    of the weights is used.
    """
    nf = model.normalize(features)
    w = np.asarray(model.weights)
    if model.mapping == "difference":
        return float(w @ nf)
    d = len(model.feature_names)
    return float(0.5 * (w[:d] - w[d:]) @ nf)


def predict_pair(model: RankModel, a: FeatureVector, b: FeatureVector) -> int:
    """+1 if `a` is predicted to rank higher than `b`, else -1."""
    na = model.normalize(a)
    nb = model.normalize(b)
    w = np.asarray(model.weights)
    if model.mapping == "difference":
        z = float(w @ (na - nb))
    else:
        z = float(w @ np.concatenate([na, nb]) + model.bias)
    return 1 if z >= 0 else -1


def weighted_score(report: LossReport, weights) -> float:
    """Weighted sum of the three loss totals; lower is better."""
    w = [float(x) for x in weights]
    if len(w) != 3 or any(x < 0 for x in w):
        raise SchemaError("weights must be three non-negative numbers")
    totals = [t if math.isfinite(t) else _BIG for t in report.totals]
    return math.fsum(wi * ti for wi, ti in zip(w, totals))


def rank_by_weighted_sum(items: list[tuple[str, LossReport]], weights) -> list[tuple[str, float]]:
    """(view_id, score) ascending by score, ties broken by view_id."""
    scored = [(view_id, weighted_score(report, weights)) for view_id, report in items]
    return sorted(scored, key=lambda pair: (pair[1], pair[0]))


def rank_by_model(model: RankModel, items: list[tuple[str, FeatureVector]]) -> list[tuple[str, float]]:
    """(view_id, score) descending by model score, ties broken by view_id."""
    scored = [(view_id, score(model, features)) for view_id, features in items]
    return sorted(scored, key=lambda pair: (-pair[1], pair[0]))


# ---------------------------------------------------------------------------
# Training


def _item_matrix(pairs: list[PairSample]) -> np.ndarray:
    rows = []
    for pair in pairs:
        rows.append(pair.a.as_array())
        rows.append(pair.b.as_array())
    return np.vstack(rows)


def train(
    pairs: list[PairSample],
    epochs: int = 300,
    learning_rate: float = 0.5,
    seed: int = 0,
) -> RankModel:
    """Fit the pairwise linear model by full-batch gradient descent on
    the logistic loss. Deterministic: zero-initialized weights, fixed
    epoch count, no stochastic steps (the seed is recorded for
    provenance)."""
    if len(pairs) < 2:
        raise DegenerateDataError("need at least 2 training pairs")
    labels = {pair.label for pair in pairs}
    if labels != {-1, 1}:
        raise DegenerateDataError("training pairs must include both labels")
    mapping = pairs[0].mapping
    if any(pair.mapping != mapping for pair in pairs):
        raise SchemaError("all pairs must share one mapping")
    names = pairs[0].a.names
    if any(pair.a.names != names for pair in pairs):
        raise IncompatibleFeaturesError("all pairs must share one feature set")

    items = _item_matrix(pairs)
    means = items.mean(axis=0)
    stds = items.std(axis=0)
    stds = np.where(stds > 0, stds, 0.0)

    def norm(arr: np.ndarray) -> np.ndarray:
        out = np.zeros_like(arr)
        mask = stds > 0
        out[mask] = (arr[mask] - means[mask]) / stds[mask]
        return out

    z_rows = []
    for pair in pairs:
        na, nb = norm(pair.a.as_array()), norm(pair.b.as_array())
        z_rows.append(na - nb if mapping == "difference" else np.concatenate([na, nb]))
    Z = np.vstack(z_rows)
    y = np.array([pair.label for pair in pairs], dtype=float)

    use_bias = mapping == "concatenate"
    w = np.zeros(Z.shape[1])
    bias = 0.0
    n = len(pairs)
    for _ in range(epochs):
        margin = Z @ w + (bias if use_bias else 0.0)
        p = 1.0 / (1.0 + np.exp(-np.clip(margin, -500, 500)))
        residual = p - (y + 1.0) / 2.0
        w -= learning_rate * (Z.T @ residual) / n
        if use_bias:
            bias -= learning_rate * float(residual.mean())

    return RankModel(
        mapping=mapping,
        feature_names=names,
        means=tuple(float(v) for v in means),
        stddevs=tuple(float(v) for v in stds),
        weights=tuple(float(v) for v in w),
        bias=float(bias),
        seed=seed,
    )


def training_accuracy(model: RankModel, pairs: list[PairSample]) -> float:
    hits = sum(1 for pair in pairs if predict_pair(model, pair.a, pair.b) == pair.label)
    return hits / len(pairs)


def evaluate_loo(pairs: list[PairSample], epochs: int = 300, learning_rate: float = 0.5) -> float:
    """Mean held-out accuracy over leave-one-out folds."""
    if len(pairs) < 3:
        raise DegenerateDataError("leave-one-out needs at least 3 pairs")
    hits = 0
    for i, held in enumerate(pairs):
        fold = pairs[:i] + pairs[i + 1 :]
        model = train(fold, epochs=epochs, learning_rate=learning_rate)
        if predict_pair(model, held.a, held.b) == held.label:
            hits += 1
    return hits / len(pairs)


# ---------------------------------------------------------------------------
# Labels and monotonicity


def aggregate_labels(labels) -> int:
    """Majority sign of exactly three -1/+1 labels."""
    labels = list(labels)
    if len(labels) != 3 or any(v not in (-1, 1) for v in labels):
        raise SchemaError("expected exactly three labels in {-1, +1}")
    return 1 if sum(labels) > 0 else -1


@dataclass(frozen=True)
class MonotonicityResult:
    status: str  # "monotonic" | "partial" | "nonmonotonic"
    order: tuple[str, ...]
    misaligned: tuple[tuple[str, str], ...]
    cycle: Optional[tuple[str, str, str]] = None


def _label_lookup(pair_labels: dict):
    def prefers(u: str, v: str) -> bool:
        """True when the labels say u ranks higher than v."""
        if (u, v) in pair_labels:
            return pair_labels[(u, v)] == 1
        if (v, u) in pair_labels:
            return pair_labels[(v, u)] == -1
        raise MissingPairError(f"no label for pair ({u!r}, {v!r})")

    return prefers


def check_monotonic(targets: list[str], pair_labels: dict) -> MonotonicityResult:
    """Classify whether the pairwise labels admit a monotonic full ranking.

    The targets are comparison-sorted (fixed-pass bubble sort) with the
    labels as comparator; every consecutive pair of the produced order
    is then re-checked. No misalignment and no label cycle is
    monotonic; misaligned consecutive pairs make the order partial;
    a cycle that never surfaces as a consecutive misalignment is
    nonmonotonic (no consistent order exists at all).

    `pair_labels` maps ordered (a, b) tuples to +1 (a ranks higher) or
    -1; each unordered pair needs one entry.
    """
    prefers = _label_lookup(pair_labels)
    order = list(targets)
    n = len(order)
    for _ in range(max(0, n - 1)):
        for j in range(n - 1):
            if prefers(order[j + 1], order[j]):
                order[j], order[j + 1] = order[j + 1], order[j]

    misaligned = tuple(
        (order[i], order[i + 1])
        for i in range(n - 1)
        if not prefers(order[i], order[i + 1])
    )

    cycle = None
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                a, b, c = targets[i], targets[j], targets[k]
                for x, y, z in ((a, b, c), (a, c, b)):
                    if prefers(x, y) and prefers(y, z) and prefers(z, x):
                        cycle = (x, y, z)
                        break
                if cycle:
                    break
            if cycle:
                break
        if cycle:
            break

    if cycle is None:
        status = "monotonic"
    elif misaligned:
        status = "partial"
    else:
        status = "nonmonotonic"
    return MonotonicityResult(
        status=status, order=tuple(order), misaligned=misaligned, cycle=cycle
    )


# ---------------------------------------------------------------------------
# Quintile sampling


def quintile_sample(
    items: list[tuple[str, LossReport]],
    per_measure_top_k: int = 100,
    per_quintile: int = 2,
    seed: int = 0,
) -> list[str]:
    """Sample labeling candidates evenly across each measure's loss ranking.

    Per measure: targets are sorted ascending by that loss total, the
    top K are split into five quintiles and `per_quintile` ids are drawn
    uniformly from each. Measures with fewer than five distinct values
    in the top K are sampled proportionately per distinct value. The
    union over measures is returned sorted (deduplicated).
    """
    if not items:
        raise DegenerateDataError("quintile_sample needs at least one target")
    rng = np.random.default_rng(seed)
    chosen: set[str] = set()
    totals = {
        "identification": lambda r: r.identification.total,
        "comparison": lambda r: r.comparison.total,
        "trend": lambda r: r.trend.total,
    }
    draw_total = 5 * per_quintile
    for measure in MEASURES:
        key = totals[measure]
        ranked = sorted(items, key=lambda item: (key(item[1]), item[0]))
        top = ranked[: min(per_measure_top_k, len(ranked))]
        values = [key(report) for _, report in top]
        if len(set(values)) < 5:
            # proportional largest-remainder allocation per distinct value
            groups: dict[float, list[str]] = {}
            for (view_id, _), value in zip(top, values):
                groups.setdefault(value, []).append(view_id)
            ordered_vals = sorted(groups)
            quotas = [draw_total * len(groups[v]) / len(top) for v in ordered_vals]
            alloc = [math.floor(q) for q in quotas]
            remainder = draw_total - sum(alloc)
            by_frac = sorted(
                range(len(ordered_vals)),
                key=lambda i: (-(quotas[i] - alloc[i]), i),
            )
            for i in by_frac[:remainder]:
                alloc[i] += 1
            for value, count in zip(ordered_vals, alloc):
                ids = groups[value]
                take = min(count, len(ids))
                if take:
                    picks = rng.choice(len(ids), size=take, replace=False)
                    chosen.update(ids[p] for p in sorted(picks))
        else:
            buckets = np.array_split(np.arange(len(top)), 5)
            for bucket in buckets:
                take = min(per_quintile, len(bucket))
                if take:
                    picks = rng.choice(bucket, size=take, replace=False)
                    chosen.update(top[p][0] for p in sorted(picks))
    return sorted(chosen)


# ---------------------------------------------------------------------------
# Model file round-trip


def model_to_jsonable(model: RankModel) -> dict:
    return {
        "mapping": model.mapping,
        "featureNames": list(model.feature_names),
        "means": list(model.means),
        "stddevs": list(model.stddevs),
        "weights": list(model.weights),
        "bias": model.bias,
        "seed": model.seed,
    }


def model_from_json(text: str) -> RankModel:
    obj = json.loads(text)
    try:
        return RankModel(
            mapping=obj["mapping"],
            feature_names=tuple(obj["featureNames"]),
            means=tuple(float(v) for v in obj["means"]),
            stddevs=tuple(float(v) for v in obj["stddevs"]),
            weights=tuple(float(v) for v in obj["weights"]),
            bias=float(obj["bias"]),
            seed=int(obj.get("seed", 0)),
        )
    except KeyError as exc:
        raise SchemaError(f"model file missing key {exc}") from None
