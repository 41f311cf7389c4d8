"""Chart and dataset model: typed views over spec JSON and data files.

A view is described by a dataset plus a declarative chart spec (mark,
chart size, channel encodings). Everything here is immutable after
construction and validated on the way in, so downstream stages never see
a partially valid object.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Optional

from .errors import EmptyDataError, SchemaError, SpecSyntaxError

MARKS = ("point", "bar", "line", "rect")
CHANNELS = ("x", "y", "color", "size", "shape")
POSITION_CHANNELS = ("x", "y")
AGGREGATES = ("count", "mean", "median", "sum")
FIELD_KINDS = ("continuous", "nominal", "temporal")

#: Sentinel field name for count-of-rows encodings.
COUNT = "__count__"


@dataclass(frozen=True)
class FieldDef:
    name: str
    kind: str  # one of FIELD_KINDS

    def __post_init__(self):
        if not self.name:
            raise SchemaError("field name must be non-empty")
        if self.kind not in FIELD_KINDS:
            raise SchemaError(f"field {self.name!r}: unknown kind {self.kind!r}")


@dataclass(frozen=True)
class DataRef:
    """Pointer to the dataset file plus its field schema."""

    url: str
    fields: tuple[FieldDef, ...]

    def __post_init__(self):
        names = [f.name for f in self.fields]
        if len(set(names)) != len(names):
            raise SchemaError("data.fields: duplicate field names")
        if not self.fields:
            raise SchemaError("data.fields: at least one field required")

    def field_kind(self, name: str) -> str:
        for f in self.fields:
            if f.name == name:
                return f.kind
        raise SchemaError(f"unknown field {name!r}")


@dataclass(frozen=True)
class Encoding:
    field: str
    maxbins: Optional[int] = None
    aggregate: Optional[str] = None
    scheme: Optional[str] = None

    @property
    def binned(self) -> bool:
        return self.maxbins is not None

    @property
    def is_count(self) -> bool:
        return self.field == COUNT


@dataclass(frozen=True)
class ChartSpec:
    mark: str
    width: int
    height: int
    data: DataRef
    encodings: dict[str, Encoding] = field(default_factory=dict)

    def encoding(self, channel: str) -> Optional[Encoding]:
        return self.encodings.get(channel)

    def with_size(self, width: int, height: int) -> "ChartSpec":
        return replace(self, width=width, height=height)


@dataclass(frozen=True)
class Dataset:
    name: str
    fields: tuple[FieldDef, ...]
    rows: tuple[dict, ...]
    dropped_rows: int = 0

    def column(self, name: str) -> list:
        return [row[name] for row in self.rows]


# ---------------------------------------------------------------------------
# Spec parsing


def _reject_duplicate_keys(pairs):
    obj = {}
    for key, value in pairs:
        if key in obj:
            raise SchemaError(f"duplicate key {key!r} in spec JSON")
        obj[key] = value
    return obj


def _require_keys(obj: dict, path: str, required: tuple, optional: tuple = ()):
    for key in obj:
        if key not in required and key not in optional:
            raise SchemaError(f"{path}: unknown key {key!r}")
    for key in required:
        if key not in obj:
            raise SchemaError(f"{path}: missing key {key!r}")


def _parse_encoding(channel: str, raw: dict, data: DataRef) -> Encoding:
    path = f"encoding.{channel}"
    if not isinstance(raw, dict):
        raise SchemaError(f"{path}: expected an object")
    _require_keys(raw, path, required=("field",), optional=("bin", "aggregate", "scheme"))

    fname = raw["field"]
    if not isinstance(fname, str) or not fname:
        raise SchemaError(f"{path}.field: expected a non-empty string")

    maxbins = None
    if "bin" in raw:
        bin_obj = raw["bin"]
        if not isinstance(bin_obj, dict):
            raise SchemaError(f"{path}.bin: expected an object like {{'maxbins': n}}")
        _require_keys(bin_obj, f"{path}.bin", required=("maxbins",))
        maxbins = bin_obj["maxbins"]
        if not isinstance(maxbins, int) or isinstance(maxbins, bool) or maxbins < 2:
            raise SchemaError(f"{path}.bin.maxbins: expected an integer >= 2")

    aggregate = raw.get("aggregate")
    if aggregate is not None and aggregate not in AGGREGATES:
        raise SchemaError(f"{path}.aggregate: unknown aggregate {aggregate!r}")

    scheme = raw.get("scheme")
    if scheme is not None:
        if channel != "color":
            raise SchemaError(f"{path}.scheme: scheme is only valid on the color channel")
        if not isinstance(scheme, str) or not scheme:
            raise SchemaError(f"{path}.scheme: expected a non-empty string")

    if fname == COUNT:
        if aggregate is None:
            aggregate = "count"
        elif aggregate != "count":
            raise SchemaError(f"{path}: {COUNT} requires aggregate 'count'")
        if maxbins is not None:
            raise SchemaError(f"{path}: {COUNT} cannot be binned")
    else:
        kind = data.field_kind(fname)  # raises SchemaError on unknown field
        if aggregate == "count":
            raise SchemaError(f"{path}: aggregate 'count' requires field {COUNT!r}")
        if aggregate is not None and kind != "continuous":
            raise SchemaError(f"{path}: aggregate {aggregate!r} requires a continuous field")
        if maxbins is not None and kind not in ("continuous", "temporal"):
            raise SchemaError(f"{path}: bin requires a continuous or temporal field")

    return Encoding(field=fname, maxbins=maxbins, aggregate=aggregate, scheme=scheme)


def _positional_ok_for_rect(enc: Encoding, data: DataRef) -> bool:
    if enc.is_count:
        return False
    return enc.binned or data.field_kind(enc.field) == "nominal"


def validate_spec(spec: ChartSpec) -> ChartSpec:
    """Check all cross-field invariants; returns the spec unchanged.

    Raises SchemaError naming the offending path. Used both by the
    parser and by the target enumerator to guarantee closure.
    """
    if spec.mark not in MARKS:
        raise SchemaError(f"mark: unknown mark {spec.mark!r}")
    for dim, value in (("width", spec.width), ("height", spec.height)):
        if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
            raise SchemaError(f"{dim}: expected a positive integer")

    for channel in spec.encodings:
        if channel not in CHANNELS:
            raise SchemaError(f"encoding.{channel}: unknown channel")
    for channel in POSITION_CHANNELS:
        if channel not in spec.encodings:
            raise SchemaError(f"encoding: missing required channel {channel!r}")

    for channel in ("shape", "size"):
        if channel in spec.encodings and spec.mark != "point":
            raise SchemaError(f"encoding.{channel}: only valid on point marks")

    if "shape" in spec.encodings:
        enc = spec.encodings["shape"]
        if enc.is_count or spec.data.field_kind(enc.field) != "nominal":
            raise SchemaError("encoding.shape: requires a nominal field")
    if "size" in spec.encodings:
        enc = spec.encodings["size"]
        if not enc.is_count and spec.data.field_kind(enc.field) == "nominal":
            raise SchemaError("encoding.size: requires a continuous field or a count")

    if spec.mark == "rect":
        for channel in POSITION_CHANNELS:
            if not _positional_ok_for_rect(spec.encodings[channel], spec.data):
                raise SchemaError(
                    f"encoding.{channel}: rect marks require binned or nominal x and y"
                )

    seen_bindings = {}
    for channel, enc in spec.encodings.items():
        binding = (enc.field, enc.aggregate)
        if binding in seen_bindings:
            raise SchemaError(
                f"encoding.{channel}: field binding {binding!r} already used "
                f"on channel {seen_bindings[binding]!r}"
            )
        seen_bindings[binding] = channel

    return spec


def parse_spec(raw: str) -> ChartSpec:
    """Parse chart spec JSON text into a validated ChartSpec."""
    try:
        obj = json.loads(raw, object_pairs_hook=_reject_duplicate_keys)
    except json.JSONDecodeError as exc:
        raise SpecSyntaxError(f"spec is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise SchemaError("spec: expected a JSON object at the top level")
    _require_keys(obj, "spec", required=("mark", "width", "height", "data", "encoding"))

    data_obj = obj["data"]
    if not isinstance(data_obj, dict):
        raise SchemaError("data: expected an object")
    _require_keys(data_obj, "data", required=("url", "fields"))
    if not isinstance(data_obj["url"], str):
        raise SchemaError("data.url: expected a string")
    if not isinstance(data_obj["fields"], list):
        raise SchemaError("data.fields: expected a list")
    fields = []
    for i, fobj in enumerate(data_obj["fields"]):
        if not isinstance(fobj, dict):
            raise SchemaError(f"data.fields[{i}]: expected an object")
        _require_keys(fobj, f"data.fields[{i}]", required=("name", "kind"))
        fields.append(FieldDef(name=fobj["name"], kind=fobj["kind"]))
    data = DataRef(url=data_obj["url"], fields=tuple(fields))

    enc_obj = obj["encoding"]
    if not isinstance(enc_obj, dict):
        raise SchemaError("encoding: expected an object")
    encodings = {}
    for channel, raw_enc in enc_obj.items():
        if channel not in CHANNELS:
            raise SchemaError(f"encoding.{channel}: unknown channel")
        encodings[channel] = _parse_encoding(channel, raw_enc, data)

    spec = ChartSpec(
        mark=obj["mark"],
        width=obj["width"],
        height=obj["height"],
        data=data,
        encodings=encodings,
    )
    return validate_spec(spec)


def spec_to_jsonable(spec: ChartSpec) -> dict:
    """ChartSpec as plain JSON-ready objects (inverse of parse_spec)."""
    encoding = {}
    for channel in CHANNELS:  # stable channel order
        enc = spec.encodings.get(channel)
        if enc is None:
            continue
        entry: dict = {"field": enc.field}
        if enc.maxbins is not None:
            entry["bin"] = {"maxbins": enc.maxbins}
        if enc.aggregate is not None:
            entry["aggregate"] = enc.aggregate
        if enc.scheme is not None:
            entry["scheme"] = enc.scheme
        encoding[channel] = entry
    return {
        "mark": spec.mark,
        "width": spec.width,
        "height": spec.height,
        "data": {
            "url": spec.data.url,
            "fields": [{"name": f.name, "kind": f.kind} for f in spec.data.fields],
        },
        "encoding": encoding,
    }


def serialize_spec(spec: ChartSpec) -> str:
    """Compact, key-sorted JSON text; parse_spec(serialize_spec(s)) == s."""
    return json.dumps(spec_to_jsonable(spec), sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# Dataset loading


def _parse_temporal(value) -> float:
    """Temporal value to milliseconds since epoch (naive dates read as UTC)."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        if not math.isfinite(float(value)):
            raise ValueError("non-finite timestamp")
        return float(value)
    text = str(value).strip()
    try:
        return float(text)
    except ValueError:
        pass
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp() * 1000.0


def _parse_value(value, kind: str):
    """Typed value or None for null; raises ValueError when unparseable."""
    if value is None:
        return None
    if isinstance(value, str) and value.strip() == "":
        return None
    if kind == "continuous":
        if isinstance(value, bool):
            raise ValueError("boolean is not a number")
        out = float(value)
        if not math.isfinite(out):
            raise ValueError("non-finite number")
        return out
    if kind == "temporal":
        return _parse_temporal(value)
    return str(value)


def _rows_from_text(raw: str) -> list[dict]:
    stripped = raw.lstrip()
    if stripped.startswith("["):
        try:
            records = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise SpecSyntaxError(f"dataset is not valid JSON: {exc}") from exc
        if not isinstance(records, list) or not all(isinstance(r, dict) for r in records):
            raise SchemaError("dataset JSON: expected an array of flat objects")
        return records
    reader = csv.DictReader(io.StringIO(raw))
    if reader.fieldnames is None:
        raise EmptyDataError("dataset CSV has no header row")
    return list(reader)


def load_dataset(raw: str, schema: tuple[FieldDef, ...] | list[FieldDef], name: str = "data") -> Dataset:
    """Parse CSV or JSON text into a typed Dataset.

    Rows with unparseable values in any schema field are dropped and
    counted; explicit nulls are kept as None. Row order is preserved.
    """
    schema = tuple(schema)
    records = _rows_from_text(raw)
    if records:
        present = set().union(*(set(r.keys()) for r in records))
        for fdef in schema:
            if fdef.name not in present:
                raise SchemaError(f"dataset: missing column {fdef.name!r}")
    rows = []
    dropped = 0
    for record in records:
        row = {}
        ok = True
        for fdef in schema:
            try:
                row[fdef.name] = _parse_value(record.get(fdef.name), fdef.kind)
            except (ValueError, TypeError):
                ok = False
                break
        if ok:
            rows.append(row)
        else:
            dropped += 1
    if not rows:
        raise EmptyDataError("dataset has 0 usable rows")
    return Dataset(name=name, fields=schema, rows=tuple(rows), dropped_rows=dropped)
