"""Regenerate the bundled fixture datasets and source specs.

The data is synthetic but shaped for the test suite:
  * country indicator values sit on coarse grids (gini on integers,
    growth on a 0.25 grid) whose pixel scales are exactly representable
    at the fixture chart sizes, so rescaling and transposing preserve
    rendered-value distributions exactly;
  * gdp_per_capita is placed bucket by bucket so maxbins=25 yields
    exactly 23 nice buckets with a fixed count pattern, and the count
    sums at maxbins=15 and maxbins=5 are pairwise distinct.

Run once; outputs under data/ and specs/ are committed.
"""

import json
import math
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "data"
SPECS = ROOT / "specs"

N_ROWS = 166
REGIONS = ("Africa", "Americas", "Asia", "Europe")

# Per-bucket row counts for the 23-bucket gdp_per_capita histogram
# (bucket width 5000 starting at 0). Grouped sums must stay distinct:
#   pairs of two  -> the 12 buckets seen at maxbins=15 (width 10000)
#   runs of five  -> the 5 buckets seen at maxbins=5 (width 25000)
GDP_BUCKET_COUNTS = (
    21, 19, 17, 15, 14,
    12, 11, 9, 8, 7,
    6, 5, 4, 3, 3,
    2, 2, 2, 1, 1,
    1, 2, 1,
)


def gdp_values(rng) -> list[int]:
    assert sum(GDP_BUCKET_COUNTS) == N_ROWS
    values = []
    for bucket, count in enumerate(GDP_BUCKET_COUNTS):
        lo = bucket * 5000
        for j in range(count):
            offset = 400 + (j + 1) * 4200 // (count + 1) + int(rng.integers(0, 350))
            values.append(lo + offset)
    values[0] = 600  # pin the domain endpoints
    values[-1] = 112400
    assert min(values) == 600 and max(values) == 112400
    for bucket, value in zip(
        [b for b, c in enumerate(GDP_BUCKET_COUNTS) for _ in range(c)], values
    ):
        assert bucket * 5000 <= value < (bucket + 1) * 5000
    return values


def make_countries(rng) -> list[dict]:
    gdp = gdp_values(rng)
    order = rng.permutation(N_ROWS)
    rows = []
    for i in range(N_ROWS):
        g = float(np.clip(np.round(rng.normal(38, 9)), 20, 68))
        growth = float(np.clip(np.round((38 - g) * 0.15 + rng.normal(0, 1.5), 2), -4, 8))
        growth = round(growth * 4) / 4  # 0.25 grid
        gdp_pc = gdp[order[i]]
        rel = math.log(gdp_pc / 600) / math.log(112400 / 600)
        life = round(float(np.clip(38 + 46 * rel + rng.normal(0, 2.5), 35, 85)), 1)
        co2 = round(float(np.clip(0.2 + 38 * rel**1.4 + rng.normal(0, 1.2), 0.1, 40)), 1)
        pop = int(10 ** rng.uniform(5.0, 9.15) // 1000 * 1000)
        rows.append(
            {
                "country": f"C{i + 1:03d}",
                "region": REGIONS[int(rng.integers(0, 4))],
                "gini": int(g),
                "gdp_growth": growth,
                "gdp_per_capita": gdp_pc,
                "life_exp": life,
                "co2": co2,
                "population": pop,
            }
        )
    # Pin gini and growth domain endpoints on distinct rows.
    rows[3]["gini"] = 20
    rows[7]["gini"] = 68
    rows[11]["gdp_growth"] = -4.0
    rows[19]["gdp_growth"] = 8.0
    return rows


def make_life_expectancy(rng) -> list[dict]:
    base = {"Africa": 36.0, "Americas": 52.0, "Asia": 43.0, "Europe": 60.0}
    gain = {"Africa": 27.0, "Americas": 25.0, "Asia": 32.0, "Europe": 21.0}
    rows = []
    for year in range(1950, 2020):
        t = (year - 1950) / 69.0
        for region in REGIONS:
            curve = base[region] + gain[region] * (1 - math.exp(-2.2 * t)) / (1 - math.exp(-2.2))
            value = round(curve + float(rng.normal(0, 0.4)), 1)
            rows.append({"year": f"{year}-01-01", "region": region, "life_exp": value})
    return rows


def check_gdp_buckets(rows):
    values = [r["gdp_per_capita"] for r in rows]
    for step, expect_n in ((5000, 23), (10000, 12), (25000, 5)):
        counts = {}
        for v in values:
            counts[v // step] = counts.get(v // step, 0) + 1
        assert len(counts) == expect_n, (step, len(counts))
        assert sum(counts.values()) == N_ROWS
        if step != 5000:
            assert len(set(counts.values())) == expect_n, (step, sorted(counts.values()))
    counts23 = [0] * 23
    for v in values:
        counts23[v // 5000] += 1
    assert tuple(counts23) == GDP_BUCKET_COUNTS


def spec(mark, width, height, url, fields, encoding):
    return {
        "mark": mark,
        "width": width,
        "height": height,
        "data": {"url": url, "fields": fields},
        "encoding": encoding,
    }


def write_specs():
    countries = "../data/countries.json"
    f = lambda name, kind: {"name": name, "kind": kind}
    specs = {
        "scatter": spec(
            "point", 600, 300, countries,
            [f("gini", "continuous"), f("gdp_growth", "continuous")],
            {"x": {"field": "gini"}, "y": {"field": "gdp_growth"}},
        ),
        "histogram": spec(
            "bar", 600, 300, countries,
            [f("gdp_per_capita", "continuous")],
            {
                "x": {"field": "gdp_per_capita", "bin": {"maxbins": 25}},
                "y": {"field": "__count__", "aggregate": "count"},
            },
        ),
        "line": spec(
            "line", 600, 300, "../data/life_expectancy.json",
            [f("year", "temporal"), f("life_exp", "continuous"), f("region", "nominal")],
            {
                "x": {"field": "year"},
                "y": {"field": "life_exp"},
                "color": {"field": "region"},
            },
        ),
        "scatter_color": spec(
            "point", 600, 300, countries,
            [f("gdp_per_capita", "continuous"), f("life_exp", "continuous"), f("co2", "continuous")],
            {
                "x": {"field": "gdp_per_capita"},
                "y": {"field": "life_exp"},
                "color": {"field": "co2", "scheme": "viridis"},
            },
        ),
        "scatter_shapes": spec(
            "point", 600, 300, countries,
            [
                f("gdp_per_capita", "continuous"),
                f("life_exp", "continuous"),
                f("population", "continuous"),
                f("region", "nominal"),
            ],
            {
                "x": {"field": "gdp_per_capita"},
                "y": {"field": "life_exp"},
                "size": {"field": "population"},
                "shape": {"field": "region"},
            },
        ),
        "heatmap": spec(
            "rect", 600, 300, countries,
            [f("gini", "continuous"), f("gdp_growth", "continuous")],
            {
                "x": {"field": "gini", "bin": {"maxbins": 15}},
                "y": {"field": "gdp_growth", "bin": {"maxbins": 15}},
                "color": {"field": "__count__", "aggregate": "count", "scheme": "viridis"},
            },
        ),
    }
    for name, obj in specs.items():
        path = SPECS / f"{name}.json"
        path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
        print(f"wrote {path}")


def main():
    rng = np.random.default_rng(20210731)
    DATA.mkdir(exist_ok=True)
    SPECS.mkdir(exist_ok=True)

    countries = make_countries(rng)
    check_gdp_buckets(countries)
    assert min(r["gini"] for r in countries) == 20
    assert max(r["gini"] for r in countries) == 68
    assert min(r["gdp_growth"] for r in countries) == -4.0
    assert max(r["gdp_growth"] for r in countries) == 8.0
    assert all(abs(r["gdp_growth"] * 4 - round(r["gdp_growth"] * 4)) < 1e-12 for r in countries)
    path = DATA / "countries.json"
    path.write_text(json.dumps(countries, indent=1) + "\n")
    print(f"wrote {path} ({len(countries)} rows)")

    life = make_life_expectancy(rng)
    path = DATA / "life_expectancy.json"
    path.write_text(json.dumps(life, indent=1) + "\n")
    print(f"wrote {path} ({len(life)} rows)")

    write_specs()


if __name__ == "__main__":
    main()
