"""Deterministic renderer: resolves (Dataset, ChartSpec) to rendered values.

Produces one rendered tuple per datum (disaggregated) or per group
(aggregated), with pixel positions, pixel-area sizes, CIELAB colors and
shape ids. No axes, ticks or raster output: downstream measures consume
data-mark values only.

Scale conventions (documented substitutes for a chart runtime's
internals):
  * linear position scales map the domain to [0, width] for x and to
    [height, 0] for y (screen-down);
  * binned channels render at bucket midpoints and their scale domain is
    the bin extent (first edge to last edge);
  * bar marks extend the domain of their measure axis to include zero,
    so bar lengths are proportional to the encoded values;
  * degenerate domains (min == max) render at the range midpoint;
  * nominal position channels render at band centers in sorted value
    order; nominal color/shape assignment is also by sorted value so the
    output is invariant under row permutation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .color import categorical_palette, resolve_color, srgb_to_lab
from .errors import EmptyDataError, SchemaError, UnsupportedSpecError
from .model import CHANNELS, COUNT, ChartSpec, Dataset

SHAPE_PALETTE = ("circle", "square", "triangle-up", "cross", "diamond")
DEFAULT_SIZE_RANGE = (16.0, 400.0)  # mark area in px^2; configurable per call
DEFAULT_SCHEME = "viridis"
NICE_STEPS = (1.0, 2.0, 2.5, 5.0, 10.0)


@dataclass(frozen=True)
class RenderedTuple:
    """Rendered values of one mark in channel-specific spaces.

    `values` keeps the underlying (pre-scale) domain value per channel;
    the trend measure needs it to order colors by data value.
    """

    x: float
    y: float
    color: Optional[tuple[float, float, float]] = None
    size: Optional[float] = None
    shape: Optional[str] = None
    group_key: Optional[str] = None
    source_row_ids: frozenset = frozenset()
    values: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RenderedView:
    spec: ChartSpec
    tuples: tuple[RenderedTuple, ...]
    channel_field_map: dict  # channel -> (field, aggregate)

    def rendered(self, channel: str) -> list:
        """Rendered values of one encoded channel, one per tuple."""
        if channel not in self.channel_field_map:
            raise SchemaError(f"channel {channel!r} is not encoded in this view")
        attr = {"x": "x", "y": "y", "color": "color", "size": "size", "shape": "shape"}[channel]
        return [getattr(t, attr) for t in self.tuples]

    def domain_values(self, channel: str) -> list:
        return [t.values[channel] for t in self.tuples]


# ---------------------------------------------------------------------------
# Binning


@dataclass(frozen=True)
class BinResult:
    assignments: tuple[int, ...]
    edges: tuple[float, ...]  # len = bucket count + 1, except degenerate (lo == hi)

    @property
    def midpoints(self) -> tuple[float, ...]:
        if len(self.edges) == 2 and self.edges[0] == self.edges[1]:
            return (self.edges[0],)
        return tuple(
            (self.edges[i] + self.edges[i + 1]) / 2.0 for i in range(len(self.edges) - 1)
        )

    @property
    def extent(self) -> tuple[float, float]:
        return (self.edges[0], self.edges[-1])


def nice_step(raw: float) -> float:
    """Smallest step from {1, 2, 2.5, 5, 10} x 10^k that is >= raw."""
    if raw <= 0:
        return 1.0
    k = math.floor(math.log10(raw))
    for m in NICE_STEPS:
        step = m * 10.0**k
        if step >= raw * (1.0 - 1e-12):
            return step
    return 10.0 ** (k + 1)  # unreachable; the 10 entry always matches


def bin_values(values, maxbins: int) -> BinResult:
    """Assign values to nice-edged buckets; actual count never exceeds maxbins.

    Buckets are half-open [lo, hi) with the final bucket closed. A
    degenerate domain (all values equal) yields a single bucket.
    """
    if maxbins < 2:
        raise SchemaError("maxbins must be >= 2")
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise EmptyDataError("bin_values: no values")
    if not np.all(np.isfinite(arr)):
        raise SchemaError("bin_values: values must be finite")
    vmin, vmax = float(arr.min()), float(arr.max())
    if vmin == vmax:
        return BinResult(assignments=tuple(0 for _ in range(arr.size)), edges=(vmin, vmin))
    step = nice_step((vmax - vmin) / maxbins)
    lo = math.floor(vmin / step) * step
    count = max(1, math.ceil((vmax - lo) / step - 1e-9))
    edges = tuple(lo + i * step for i in range(count + 1))
    idx = np.floor((arr - lo) / step).astype(int)
    idx = np.clip(idx, 0, count - 1)
    return BinResult(assignments=tuple(int(i) for i in idx), edges=edges)


def aggregate_groups(values, aggregate: str) -> float:
    """Aggregate one group's values; median of even groups averages the middle two."""
    if aggregate == "count":
        return float(len(values))
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise EmptyDataError("aggregate over an empty group")
    if aggregate == "mean":
        return float(math.fsum(arr) / arr.size)
    if aggregate == "median":
        return float(np.median(arr))
    if aggregate == "sum":
        return float(math.fsum(arr))
    raise SchemaError(f"unknown aggregate {aggregate!r}")


# ---------------------------------------------------------------------------
# Scales


def _linear_px(value: float, domain: tuple[float, float], extent: float, flip: bool) -> float:
    lo, hi = domain
    if hi == lo:
        px = extent / 2.0
    else:
        px = (value - lo) / (hi - lo) * extent
    return extent - px if flip else px


def _band_px(value: str, categories: list, extent: float, flip: bool) -> float:
    i = categories.index(value)
    px = (i + 0.5) / len(categories) * extent
    return extent - px if flip else px


def _size_px2(value: float, domain: tuple[float, float], size_range: tuple[float, float]) -> float:
    lo, hi = domain
    rlo, rhi = size_range
    if hi == lo:
        return (rlo + rhi) / 2.0
    return rlo + (value - lo) / (hi - lo) * (rhi - rlo)


# ---------------------------------------------------------------------------
# Rendering


def _check_spec_against_data(spec: ChartSpec, data: Dataset):
    names = {f.name for f in data.fields}
    kinds = {f.name: f.kind for f in data.fields}
    for channel, enc in spec.encodings.items():
        if enc.is_count:
            continue
        if enc.field not in names:
            raise SchemaError(f"encoding.{channel}: field {enc.field!r} not in dataset")
        declared = spec.data.field_kind(enc.field)
        if kinds[enc.field] != declared:
            raise SchemaError(
                f"encoding.{channel}: field {enc.field!r} kind mismatch "
                f"({kinds[enc.field]} vs {declared})"
            )


def _field_kind(spec: ChartSpec, enc) -> str:
    return "count" if enc.is_count else spec.data.field_kind(enc.field)


def _zero_extended(domain: tuple[float, float]) -> tuple[float, float]:
    return (min(0.0, domain[0]), max(0.0, domain[1]))


def render(data: Dataset, spec: ChartSpec, size_range: tuple[float, float] = DEFAULT_SIZE_RANGE) -> RenderedView:
    """Resolve a dataset and spec into a RenderedView.

    Pure and deterministic: identical inputs give bit-identical output,
    and row permutations change only tuple order.
    """
    _check_spec_against_data(spec, data)
    channels = [c for c in CHANNELS if c in spec.encodings]

    # Rows usable for this view: no nulls in any encoded field.
    encoded_fields = sorted({e.field for e in spec.encodings.values() if not e.is_count})
    usable = [
        (i, row)
        for i, row in enumerate(data.rows)
        if all(row[f] is not None for f in encoded_fields)
    ]
    if not usable:
        raise EmptyDataError("no rows with complete values for the encoded fields")

    # Per-row domain value per channel, with binned channels replaced by
    # bucket midpoints. COUNT channels have no per-row value.
    row_values: dict[str, list] = {}
    bins: dict[str, BinResult] = {}
    for channel in channels:
        enc = spec.encodings[channel]
        if enc.is_count:
            continue
        col = [row[enc.field] for _, row in usable]
        if enc.binned:
            result = bin_values(col, enc.maxbins)
            bins[channel] = result
            mids = result.midpoints
            row_values[channel] = [mids[b] for b in result.assignments]
        else:
            row_values[channel] = col

    aggregated = any(e.aggregate is not None for e in spec.encodings.values())
    records: list[dict] = []
    if aggregated:
        group_channels = [c for c in channels if spec.encodings[c].aggregate is None]
        groups: dict[tuple, list[int]] = {}
        for pos in range(len(usable)):
            key = tuple(row_values[c][pos] for c in group_channels)
            groups.setdefault(key, []).append(pos)
        for key in sorted(groups.keys()):
            positions = groups[key]
            rec = {c: key[j] for j, c in enumerate(group_channels)}
            for channel in channels:
                enc = spec.encodings[channel]
                if enc.aggregate is None:
                    continue
                if enc.is_count:
                    rec[channel] = aggregate_groups(positions, "count")
                else:
                    raw = [usable[p][1][enc.field] for p in positions]
                    rec[channel] = aggregate_groups(raw, enc.aggregate)
            rec["_rows"] = frozenset(usable[p][0] for p in positions)
            records.append(rec)
    else:
        for pos, (i, _row) in enumerate(usable):
            rec = {c: row_values[c][pos] for c in channels}
            rec["_rows"] = frozenset([i])
            records.append(rec)

    # Resolve scales channel by channel.
    nominal_group_channels = []
    resolved: dict[str, list] = {}
    for channel in channels:
        enc = spec.encodings[channel]
        kind = _field_kind(spec, enc)
        vals = [rec[channel] for rec in records]
        if channel in ("x", "y"):
            extent = float(spec.width if channel == "x" else spec.height)
            flip = channel == "y"
            if kind == "nominal" and enc.aggregate is None:
                cats = sorted(set(vals))
                resolved[channel] = [_band_px(v, cats, extent, flip) for v in vals]
            else:
                if channel in bins:
                    domain = bins[channel].extent
                else:
                    domain = (min(vals), max(vals))
                measure = enc.aggregate is not None or (kind == "continuous" and not enc.binned)
                if spec.mark == "bar" and measure:
                    domain = _zero_extended(domain)
                resolved[channel] = [_linear_px(v, domain, extent, flip) for v in vals]
        elif channel == "color":
            if kind == "nominal":
                cats = sorted(set(vals))
                palette = categorical_palette()
                if len(cats) > len(palette):
                    raise UnsupportedSpecError(
                        f"encoding.color: {len(cats)} categories exceed the palette"
                    )
                labs = {c: srgb_to_lab(palette[i]) for i, c in enumerate(cats)}
                resolved[channel] = [labs[v] for v in vals]
                nominal_group_channels.append(channel)
            else:
                scheme = enc.scheme or DEFAULT_SCHEME
                domain = (min(vals), max(vals))
                resolved[channel] = [resolve_color(v, domain, scheme) for v in vals]
        elif channel == "size":
            domain = (min(vals), max(vals))
            resolved[channel] = [_size_px2(v, domain, size_range) for v in vals]
        elif channel == "shape":
            cats = sorted(set(vals))
            if len(cats) > len(SHAPE_PALETTE):
                raise UnsupportedSpecError(
                    f"encoding.shape: {len(cats)} categories exceed the shape palette"
                )
            ids = {c: SHAPE_PALETTE[i] for i, c in enumerate(cats)}
            resolved[channel] = [ids[v] for v in vals]
            nominal_group_channels.append(channel)

    tuples = []
    for idx, rec in enumerate(records):
        group_parts = [str(rec[c]) for c in nominal_group_channels]
        tuples.append(
            RenderedTuple(
                x=resolved["x"][idx],
                y=resolved["y"][idx],
                color=resolved.get("color", [None] * len(records))[idx],
                size=resolved.get("size", [None] * len(records))[idx],
                shape=resolved.get("shape", [None] * len(records))[idx],
                group_key="|".join(group_parts) if group_parts else None,
                source_row_ids=rec["_rows"],
                values={c: rec[c] for c in channels},
            )
        )

    channel_field_map = {
        c: (spec.encodings[c].field, spec.encodings[c].aggregate) for c in channels
    }
    return RenderedView(spec=spec, tuples=tuple(tuples), channel_field_map=channel_field_map)


def view_to_jsonable(view: RenderedView) -> dict:
    """Rendered-view dump consumed by the gallery UI and test oracles."""
    from .model import spec_to_jsonable

    tuples = []
    for t in view.tuples:
        entry: dict = {"x": t.x, "y": t.y}
        if t.color is not None:
            entry["lab"] = list(t.color)
        if t.size is not None:
            entry["size"] = t.size
        if t.shape is not None:
            entry["shape"] = t.shape
        if t.group_key is not None:
            entry["group"] = t.group_key
        tuples.append(entry)
    return {"spec": spec_to_jsonable(view.spec), "tuples": tuples}
