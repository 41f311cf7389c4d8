"""Target enumeration: the constrained search space of small-screen specs.

A source spec is first reduced to a partial spec that preserves the data
reference, field associations and existing aggregates while freeing the
mark, chart size and channel assignments. Targets are then generated as
the product of height options, transposition, density strategies and
mark changes, filtered by well-formedness predicates, so every produced
spec validates and renders by construction.

Density strategies by source shape:
  * disaggregated scatterplots: optional 2D binning with a count channel
    (count renders on size for point marks, on color for the point->rect
    change), or x-binning with a y aggregate;
  * already-binned sources: bin-size replacement only;
  * line charts: none (no aggregation or binning can be added).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .errors import EmptySpaceError
from .model import COUNT, ChartSpec, DataRef, Encoding, spec_to_jsonable, validate_spec

MAXBINS_OPTIONS = (25, 15, 5)
VALUE_AGGREGATES = ("mean", "median", "sum")
HEIGHT_STEP = 50
DEFAULT_TARGET_WIDTH = 300


@dataclass(frozen=True)
class TransformDescriptor:
    """Strategy bundle producing one target from the source."""

    height: int
    transposed: bool = False
    maxbins: Optional[int] = None
    aggregate: Optional[str] = None
    mark_change: Optional[str] = None  # only "rect" is reachable

    def slug(self) -> str:
        parts = [f"h{self.height}"]
        if self.transposed:
            parts.append("tr")
        if self.maxbins is not None:
            parts.append(f"b{self.maxbins}")
        if self.aggregate is not None:
            parts.append(self.aggregate)
        if self.mark_change is not None:
            parts.append(self.mark_change)
        return "-".join(parts)


@dataclass(frozen=True)
class TargetEntry:
    view_id: str
    descriptor: TransformDescriptor
    spec: ChartSpec


@dataclass(frozen=True)
class TargetSet:
    source_id: str
    targets: tuple[TargetEntry, ...]


@dataclass(frozen=True)
class PartialSpec:
    """Source pieces preserved across all targets plus the freed options."""

    data: DataRef
    source_mark: str
    source_width: int
    source_height: int
    encodings: dict  # preserved field associations and existing aggregates
    density_mode: str  # "scatter" | "rebin" | "fixed"
    bin2d_count_marks: tuple  # marks usable for the 2D-bin-plus-count strategy
    value_aggregate_ok: bool


def _kind(spec: ChartSpec, enc: Encoding) -> str:
    return "count" if enc.is_count else spec.data.field_kind(enc.field)


def to_partial_spec(source: ChartSpec) -> PartialSpec:
    """Open the mark, size and channel slots subject to source constraints."""
    binned_any = any(e.binned for e in source.encodings.values())
    if source.mark == "line":
        mode = "fixed"  # a line chart admits no added binning or aggregation
    elif binned_any:
        mode = "rebin"
    elif source.mark == "point":
        mode = "scatter"
    else:
        mode = "fixed"

    bin2d_marks: list[str] = []
    value_agg_ok = False
    if mode == "scatter":
        x, y = source.encodings["x"], source.encodings["y"]
        xy_binnable = all(
            not e.binned and not e.is_count and _kind(source, e) in ("continuous", "temporal")
            for e in (x, y)
        )
        no_aggregates = all(e.aggregate is None for e in source.encodings.values())
        extras = {c: e for c, e in source.encodings.items() if c not in ("x", "y")}
        extras_nominal = all(_kind(source, e) == "nominal" for e in extras.values())
        if xy_binnable and no_aggregates and extras_nominal:
            if "size" not in extras:
                bin2d_marks.append("point")  # count renders on size
            if "color" not in extras:
                bin2d_marks.append("rect")  # count renders on color
            value_agg_ok = (
                _kind(source, y) == "continuous" and "size" not in extras
            )
        if not bin2d_marks and not value_agg_ok:
            mode = "fixed"

    return PartialSpec(
        data=source.data,
        source_mark=source.mark,
        source_width=source.width,
        source_height=source.height,
        encodings=dict(source.encodings),
        density_mode=mode,
        bin2d_count_marks=tuple(bin2d_marks),
        value_aggregate_ok=value_agg_ok,
    )


def enumerate_heights(source_w: int, source_h: int, target_w: int) -> list[int]:
    """Heights from proportionate rescaling to the inverse aspect ratio,
    in 50 px steps with both endpoints included."""
    if source_w <= 0 or source_h <= 0 or target_w <= 0:
        raise EmptySpaceError("chart sizes must be positive")
    proportionate = round(target_w * source_h / source_w)
    inverse = round(target_w * source_w / source_h)
    lo, hi = sorted((proportionate, inverse))
    heights = list(range(lo, hi + 1, HEIGHT_STEP))
    if heights[-1] != hi:
        heights.append(hi)
    return heights


# Strategy records: (maxbins, aggregate, mark_change)
_NO_CHANGE = (None, None, None)


def _strategies(partial: PartialSpec) -> list[tuple]:
    out = [_NO_CHANGE]
    if partial.density_mode == "rebin":
        # Skip a maxbins option that would reproduce the source binning
        # exactly; the identity strategy already covers that spec.
        source_bins = {e.maxbins for e in partial.encodings.values() if e.binned}
        for mb in MAXBINS_OPTIONS:
            if source_bins == {mb}:
                continue
            out.append((mb, None, None))
    if partial.density_mode == "scatter":
        for mb in MAXBINS_OPTIONS:
            for mark in partial.bin2d_count_marks:
                out.append((mb, "count", "rect" if mark == "rect" else None))
        if partial.value_aggregate_ok:
            for mb in MAXBINS_OPTIONS:
                for agg in VALUE_AGGREGATES:
                    out.append((mb, agg, None))
    return out


def _apply_strategy(partial: PartialSpec, maxbins, aggregate, mark_change) -> tuple[str, dict]:
    mark = partial.source_mark
    encodings = dict(partial.encodings)
    if maxbins is None:
        return mark, encodings
    if partial.density_mode == "rebin":
        for channel, enc in encodings.items():
            if enc.binned:
                encodings[channel] = replace(enc, maxbins=maxbins)
        return mark, encodings
    # scatter strategies
    if aggregate == "count":
        encodings["x"] = replace(encodings["x"], maxbins=maxbins)
        encodings["y"] = replace(encodings["y"], maxbins=maxbins)
        count_enc = Encoding(field=COUNT, aggregate="count")
        if mark_change == "rect":
            mark = "rect"
            encodings["color"] = count_enc
        else:
            encodings["size"] = count_enc
    else:
        encodings["x"] = replace(encodings["x"], maxbins=maxbins)
        encodings["y"] = replace(encodings["y"], aggregate=aggregate)
    return mark, encodings


def build_target(source: ChartSpec, target_w: int, descriptor: TransformDescriptor) -> ChartSpec:
    """Materialize (and validate) the spec one descriptor describes."""
    partial = to_partial_spec(source)
    mark, encodings = _apply_strategy(
        partial, descriptor.maxbins, descriptor.aggregate, descriptor.mark_change
    )
    if descriptor.transposed:
        encodings = dict(encodings)
        encodings["x"], encodings["y"] = encodings["y"], encodings["x"]
    spec = ChartSpec(
        mark=mark,
        width=target_w,
        height=descriptor.height,
        data=partial.data,
        encodings=encodings,
    )
    return validate_spec(spec)


def generate_targets(
    source: ChartSpec, target_w: int = DEFAULT_TARGET_WIDTH, source_id: str = "source"
) -> TargetSet:
    """Deterministic constrained enumeration of the target design space."""
    partial = to_partial_spec(source)
    heights = enumerate_heights(source.width, source.height, target_w)
    strategies = _strategies(partial)
    entries = []
    index = 0
    for height in heights:
        for transposed in (False, True):
            for maxbins, aggregate, mark_change in strategies:
                descriptor = TransformDescriptor(
                    height=height,
                    transposed=transposed,
                    maxbins=maxbins,
                    aggregate=aggregate,
                    mark_change=mark_change,
                )
                spec = build_target(source, target_w, descriptor)
                view_id = f"t{index:04d}-{descriptor.slug()}"
                entries.append(TargetEntry(view_id=view_id, descriptor=descriptor, spec=spec))
                index += 1
    if not entries:
        raise EmptySpaceError("no valid targets for this source")
    return TargetSet(source_id=source_id, targets=tuple(entries))


def descriptor_to_jsonable(descriptor: TransformDescriptor) -> dict:
    return {
        "height": descriptor.height,
        "transposed": descriptor.transposed,
        "maxbins": descriptor.maxbins,
        "aggregate": descriptor.aggregate,
        "markChange": descriptor.mark_change,
    }


def target_set_to_jsonable(target_set: TargetSet) -> dict:
    return {
        "source": target_set.source_id,
        "targets": [
            {
                "id": entry.view_id,
                "descriptor": descriptor_to_jsonable(entry.descriptor),
                "spec": spec_to_jsonable(entry.spec),
            }
            for entry in target_set.targets
        ],
    }
