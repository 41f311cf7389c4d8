"""Independent target-count oracle for the bundled fixture sources.

Recomputes the expected size of each enumerated target set straight
from the documented search-space rules (height range arithmetic times
transposition times density strategies times mark options), without
importing the package. The acceptance suite cross-checks the enumerator
against these numbers.

Usage: python3 scripts/count_oracle.py [--json]
"""

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
TARGET_WIDTH = 300
MAXBINS_OPTIONS = (25, 15, 5)
VALUE_AGGREGATES = 3  # mean, median, sum
HEIGHT_STEP = 50
FIXTURES = ("scatter", "histogram", "line", "scatter_color", "scatter_shapes", "heatmap")


def height_count(source_w: int, source_h: int, target_w: int) -> int:
    proportionate = round(target_w * source_h / source_w)
    inverse = round(target_w * source_w / source_h)
    lo, hi = min(proportionate, inverse), max(proportionate, inverse)
    span = hi - lo
    count = span // HEIGHT_STEP + 1
    if span % HEIGHT_STEP != 0:
        count += 1  # the far endpoint is always included
    return count


def strategy_count(spec: dict) -> int:
    mark = spec["mark"]
    enc = spec["encoding"]
    kinds = {f["name"]: f["kind"] for f in spec["data"]["fields"]}

    def kind(e):
        return "count" if e["field"] == "__count__" else kinds[e["field"]]

    if mark == "line":
        return 1  # no binning or aggregation can be added to a line chart

    binned = [c for c, e in enc.items() if "bin" in e]
    if binned:
        source_mbs = {enc[c]["bin"]["maxbins"] for c in binned}
        skip = 1 if len(source_mbs) == 1 and next(iter(source_mbs)) in MAXBINS_OPTIONS else 0
        return 1 + len(MAXBINS_OPTIONS) - skip

    if mark != "point":
        return 1

    extras = {c: e for c, e in enc.items() if c not in ("x", "y")}
    xy_binnable = all(
        kind(enc[c]) in ("continuous", "temporal")
        and "bin" not in enc[c]
        and "aggregate" not in enc[c]
        for c in ("x", "y")
    )
    no_aggregates = all("aggregate" not in e for e in enc.values())
    extras_nominal = all(kind(e) == "nominal" for e in extras.values())

    count = 1
    if xy_binnable and no_aggregates and extras_nominal:
        count_marks = (0 if "size" in extras else 1) + (0 if "color" in extras else 1)
        count += len(MAXBINS_OPTIONS) * count_marks
        if kind(enc["y"]) == "continuous" and "size" not in extras:
            count += len(MAXBINS_OPTIONS) * VALUE_AGGREGATES
    return count


def expected_count(spec: dict, target_w: int = TARGET_WIDTH) -> int:
    return height_count(spec["width"], spec["height"], target_w) * 2 * strategy_count(spec)


def all_counts() -> dict:
    out = {}
    for name in FIXTURES:
        spec = json.loads((ROOT / "specs" / f"{name}.json").read_text())
        out[name] = expected_count(spec)
    return out


if __name__ == "__main__":
    counts = all_counts()
    if "--json" in sys.argv:
        print(json.dumps(counts, sort_keys=True))
    else:
        for name, count in counts.items():
            print(f"{name}: {count}")
