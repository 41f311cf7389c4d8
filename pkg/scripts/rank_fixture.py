"""Rank the small-screen candidates for one bundled fixture and print a table.

Usage: python3 scripts/rank_fixture.py [fixture] [--weights i,c,t] [--top N]
Fixtures: scatter, histogram, line, scatter_color, scatter_shapes, heatmap.
"""

import argparse
from pathlib import Path

from respviz.model import load_dataset, parse_spec
from respviz.ranker import rank_by_weighted_sum
from respviz.render import render
from respviz.report import compute_loss_report
from respviz.targets import generate_targets

ROOT = Path(__file__).resolve().parents[1]


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("fixture", nargs="?", default="scatter")
    parser.add_argument("--weights", default="1,1,1")
    parser.add_argument("--target-width", type=int, default=300)
    parser.add_argument("--top", type=int, default=15)
    args = parser.parse_args()

    spec_path = ROOT / "specs" / f"{args.fixture}.json"
    spec = parse_spec(spec_path.read_text())
    data_path = (spec_path.parent / spec.data.url).resolve()
    data = load_dataset(data_path.read_text(), spec.data.fields, args.fixture)
    weights = tuple(float(w) for w in args.weights.split(","))

    source = render(data, spec)
    target_set = generate_targets(spec, args.target_width)
    print(f"{args.fixture}: {len(data.rows)} rows, {len(target_set.targets)} targets")

    items = []
    reports = {}
    for entry in target_set.targets:
        report = compute_loss_report(source, render(data, entry.spec))
        reports[entry.view_id] = (entry, report)
        items.append((entry.view_id, report))
    ranked = rank_by_weighted_sum(items, weights)

    header = f"{'rank':>4}  {'target':<28}{'ident':>9}{'comp':>10}{'trend':>9}{'score':>10}"
    print(header)
    print("-" * len(header))
    for position, (view_id, score) in enumerate(ranked[: args.top], start=1):
        entry, report = reports[view_id]
        print(
            f"{position:>4}  {view_id:<28}"
            f"{report.identification.total:>9.3f}"
            f"{report.comparison.total:>10.3f}"
            f"{report.trend.total:>9.3f}"
            f"{score:>10.3f}"
        )


if __name__ == "__main__":
    main()
