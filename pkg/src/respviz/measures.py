"""Identification and comparison losses between two rendered views.

Identification loss is the summed absolute difference of per-channel
Shannon entropies of rendered values. Comparison loss is the summed
1-Wasserstein distance between per-channel discriminability
distributions (all pairwise perceptual distances between rendered
values).

Channels are matched across views by (field, aggregate) identity, not
by channel name, so x in a source matches y in a transposed target.
A channel whose binding exists in only one view contributes its full
entropy to identification loss (keys "-ch" for source-only, "+ch" for
target-only) and nothing to comparison loss.
"""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .color import distance_color
from .errors import (
    AmbiguousMatchError,
    DegenerateViewError,
    SchemaError,
    UnknownShapeError,
)
from .model import CHANNELS
from .render import RenderedView

SCALAR_CHANNELS = ("x", "y", "size")


# ---------------------------------------------------------------------------
# Perceptual kernel


@dataclass(frozen=True)
class PerceptualKernel:
    """Symmetric matrix of pairwise shape discriminability in [0, 1]."""

    shape_ids: tuple[str, ...]
    matrix: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        n = len(self.shape_ids)
        if len(self.matrix) != n or any(len(row) != n for row in self.matrix):
            raise SchemaError("perceptual kernel matrix must be square")
        for i in range(n):
            if self.matrix[i][i] != 0.0:
                raise SchemaError("perceptual kernel diagonal must be zero")
            for j in range(n):
                if self.matrix[i][j] != self.matrix[j][i]:
                    raise SchemaError("perceptual kernel must be symmetric")
                if not 0.0 <= self.matrix[i][j] <= 1.0:
                    raise SchemaError("perceptual kernel entries must lie in [0, 1]")

    def distance(self, a: str, b: str) -> float:
        try:
            i = self.shape_ids.index(a)
            j = self.shape_ids.index(b)
        except ValueError as exc:
            raise UnknownShapeError(f"shape {exc} not in kernel") from None
        return self.matrix[i][j]


def load_kernel(text: str) -> PerceptualKernel:
    """Parse a kernel CSV: first row/column are shape ids, body is the matrix."""
    rows = list(csv.reader(io.StringIO(text)))
    if len(rows) < 2:
        raise SchemaError("kernel CSV needs a header row and at least one shape")
    ids = tuple(h.strip() for h in rows[0][1:])
    matrix = []
    for row in rows[1:]:
        if row[0].strip() != ids[len(matrix)]:
            raise SchemaError("kernel CSV row ids must mirror the header order")
        matrix.append(tuple(float(v) for v in row[1 : len(ids) + 1]))
    return PerceptualKernel(shape_ids=ids, matrix=tuple(matrix))


def default_kernel() -> PerceptualKernel:
    text = resources.files("respviz").joinpath("assets/shape_kernel.csv").read_text()
    return load_kernel(text)


# ---------------------------------------------------------------------------
# Entropy / identification


@dataclass(frozen=True)
class ChannelDistribution:
    channel: str
    values: tuple


def quantize_value(channel: str, value):
    """On-screen identifiability grid: 1 px for positions and sizes, 1 unit per Lab axis."""
    if channel in SCALAR_CHANNELS:
        return float(np.rint(value))
    if channel == "color":
        return tuple(float(np.rint(c)) for c in value)
    return value  # shape ids are already discrete


def channel_distribution(view: RenderedView, channel: str) -> ChannelDistribution:
    return ChannelDistribution(channel=channel, values=tuple(view.rendered(channel)))


def channel_entropy(dist: ChannelDistribution) -> float:
    """Shannon entropy (bits) of the quantized rendered-value distribution."""
    if not dist.values:
        raise DegenerateViewError("entropy of an empty channel")
    counts = Counter(quantize_value(dist.channel, v) for v in dist.values)
    n = len(dist.values)
    h = -math.fsum((c / n) * math.log2(c / n) for c in counts.values())
    return abs(h)  # normalize -0.0


@dataclass(frozen=True)
class ChannelMatch:
    pairs: tuple[tuple[str, str], ...]
    unmatched_source: tuple[str, ...]
    unmatched_target: tuple[str, ...]


def _binding_map(view: RenderedView, side: str) -> dict:
    bindings = {}
    for channel in CHANNELS:
        if channel not in view.channel_field_map:
            continue
        binding = view.channel_field_map[channel]
        if binding in bindings:
            raise AmbiguousMatchError(
                f"{side} view: binding {binding!r} on both "
                f"{bindings[binding]!r} and {channel!r}"
            )
        bindings[binding] = channel
    return bindings


def match_channels(source: RenderedView, target: RenderedView) -> ChannelMatch:
    """Match channels across views by (field, aggregate) identity."""
    src = _binding_map(source, "source")
    tgt = _binding_map(target, "target")
    pairs = []
    unmatched_source = []
    for channel in CHANNELS:
        if channel not in source.channel_field_map:
            continue
        binding = source.channel_field_map[channel]
        if binding in tgt:
            pairs.append((channel, tgt[binding]))
        else:
            unmatched_source.append(channel)
    matched_targets = {ct for _, ct in pairs}
    unmatched_target = tuple(
        c for c in CHANNELS if c in target.channel_field_map and c not in matched_targets
    )
    return ChannelMatch(
        pairs=tuple(pairs),
        unmatched_source=tuple(unmatched_source),
        unmatched_target=unmatched_target,
    )


def identification_loss(source: RenderedView, target: RenderedView) -> tuple[dict, float]:
    """Per-channel absolute entropy differences and their sum.

    Matched pairs are keyed by the source channel name; channels present
    in only one view contribute their full entropy under "-ch" / "+ch".
    """
    match = match_channels(source, target)
    per = {}
    for cs, ct in match.pairs:
        hs = channel_entropy(channel_distribution(source, cs))
        ht = channel_entropy(channel_distribution(target, ct))
        per[cs] = abs(hs - ht)
    for cs in match.unmatched_source:
        per[f"-{cs}"] = channel_entropy(channel_distribution(source, cs))
    for ct in match.unmatched_target:
        per[f"+{ct}"] = channel_entropy(channel_distribution(target, ct))
    return per, math.fsum(per.values())


# ---------------------------------------------------------------------------
# Distances / discriminability


def distance_position(a: float, b: float) -> float:
    return abs(a - b)


def distance_size(a: float, b: float) -> float:
    """Absolute size difference raised to the Stevens exponent for area."""
    return abs(a - b) ** 0.7


def distance_shape(a: str, b: str, kernel: PerceptualKernel) -> float:
    return kernel.distance(a, b)


@dataclass(frozen=True)
class DiscriminabilityDistribution:
    channel: str
    distances: tuple


def discriminability(
    view: RenderedView, channel: str, kernel: PerceptualKernel
) -> DiscriminabilityDistribution:
    """All n*(n-1)/2 unordered-pair distances in the channel's metric."""
    values = view.rendered(channel)
    n = len(values)
    if n < 2:
        raise DegenerateViewError(f"channel {channel!r} has {n} rendered values")
    iu, ju = np.triu_indices(n, k=1)
    if channel in ("x", "y"):
        arr = np.asarray(values, dtype=float)
        dists = np.abs(arr[iu] - arr[ju])
    elif channel == "size":
        arr = np.asarray(values, dtype=float)
        dists = np.abs(arr[iu] - arr[ju]) ** 0.7
    elif channel == "color":
        arr = np.asarray(values, dtype=float)
        dists = np.sqrt(((arr[iu] - arr[ju]) ** 2).sum(axis=1))
    elif channel == "shape":
        try:
            codes = np.array([kernel.shape_ids.index(v) for v in values])
        except ValueError as exc:
            raise UnknownShapeError(f"shape {exc} not in kernel") from None
        matrix = np.asarray(kernel.matrix)
        dists = matrix[codes[iu], codes[ju]]
    else:
        raise SchemaError(f"unknown channel {channel!r}")
    return DiscriminabilityDistribution(channel=channel, distances=tuple(float(d) for d in dists))


def emd_1d(p, q) -> float:
    """1-Wasserstein distance between two empirical distributions.

    Computed as the integral of |F_p - F_q| over the merged support;
    each multiset is mass-normalized, so sizes may differ.
    """
    p = np.sort(np.asarray(list(p), dtype=float))
    q = np.sort(np.asarray(list(q), dtype=float))
    if p.size == 0 or q.size == 0:
        raise DegenerateViewError("emd_1d needs non-empty inputs")
    support = np.sort(np.concatenate([p, q]))
    deltas = np.diff(support)
    cdf_p = np.searchsorted(p, support[:-1], side="right") / p.size
    cdf_q = np.searchsorted(q, support[:-1], side="right") / q.size
    return float(np.sum(np.abs(cdf_p - cdf_q) * deltas))


def comparison_loss(
    source: RenderedView, target: RenderedView, kernel: PerceptualKernel
) -> tuple[dict, float]:
    """Per matched channel pair, the EMD between discriminability distributions.

    Keys follow the source channel name. Sides with fewer than two
    rendered values have no pairwise distances and contribute zero.
    """
    match = match_channels(source, target)
    per = {}
    for cs, ct in match.pairs:
        if len(source.tuples) < 2 or len(target.tuples) < 2:
            per[cs] = 0.0
            continue
        bs = discriminability(source, cs, kernel)
        bt = discriminability(target, ct, kernel)
        per[cs] = emd_1d(bs.distances, bt.distances)
    return per, math.fsum(per.values())
