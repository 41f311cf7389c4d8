"""Command line entry points: enumerate, rank, train, serve.

Exit codes: 0 success, 2 configuration error, 3 spec or schema error,
4 model file mismatch, 5 degenerate training labels. Error messages go
to stderr; all JSON artifacts are written with stable key order.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .errors import (
    DegenerateDataError,
    EmptyDataError,
    IncompatibleFeaturesError,
    RespvizError,
    SchemaError,
    SpecSyntaxError,
)
from .measures import default_kernel, load_kernel
from .model import parse_spec
from .pipeline import (
    RunConfig,
    dumps_stable,
    enumerate_bundle,
    guard_dataset_size,
    load_dataset_for_spec,
    rank_bundle,
)
from .ranker import (
    PairSample,
    aggregate_labels,
    evaluate_loo,
    extract_features,
    model_from_json,
    model_to_jsonable,
    train,
)
from .render import render
from .report import compute_loss_report
from .targets import generate_targets

EXIT_CONFIG = 2
EXIT_SCHEMA = 3
EXIT_MODEL = 4
EXIT_LABELS = 5


def _fail(code: int, message: str) -> int:
    print(f"respviz: {message}", file=sys.stderr)
    return code


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_inputs(args):
    spec = parse_spec(_read(args.spec))
    if args.data:
        data_path = Path(args.data)
    else:
        data_path = (Path(args.spec).parent / spec.data.url).resolve()
    data = load_dataset_for_spec(spec, data_path.read_text(encoding="utf-8"), data_path.stem)
    data = guard_dataset_size(data, subsample=args.subsample, seed=args.seed)
    return spec, data


def _parse_weights(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError("expected three comma-separated weights i,c,t")
    weights = tuple(float(p) for p in parts)
    if any(w < 0 for w in weights):
        raise ValueError("weights must be non-negative")
    return weights


def _write_out(args, text: str):
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def cmd_enumerate(args) -> int:
    spec = parse_spec(_read(args.spec))
    config = RunConfig(target_width=args.target_width, seed=args.seed)
    _write_out(args, dumps_stable(enumerate_bundle(spec, config)))
    return 0


def cmd_rank(args) -> int:
    spec, data = _load_inputs(args)
    config = RunConfig(target_width=args.target_width, weights=args.weights, seed=args.seed)
    model = None
    if args.model:
        model = model_from_json(_read(args.model))
    kernel = load_kernel(_read(args.kernel)) if args.kernel else default_kernel()
    bundle = rank_bundle(spec, data, config, model=model, kernel=kernel)
    _write_out(args, dumps_stable(bundle))
    return 0


def _read_label_rows(path: str) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    required = {"source_id", "target_a", "target_b", "label", "labeler_id"}
    if rows and not required.issubset(rows[0].keys()):
        raise SchemaError(f"label file must have columns {sorted(required)}")
    return rows


def _has_directed_cycle(edges) -> bool:
    graph: dict[str, set] = {}
    for winner, loser in edges:
        graph.setdefault(winner, set()).add(loser)
    state: dict[str, int] = {}  # 1 = on stack, 2 = done

    def dfs(node) -> bool:
        state[node] = 1
        for nxt in graph.get(node, ()):
            mark = state.get(nxt)
            if mark == 1 or (mark is None and dfs(nxt)):
                return True
        state[node] = 2
        return False

    return any(node not in state and dfs(node) for node in list(graph))


def cmd_train(args) -> int:
    rows = _read_label_rows(args.labels)
    if not rows:
        raise DegenerateDataError("label file is empty")
    spec, data = _load_inputs(args)
    config = RunConfig(target_width=args.target_width, seed=args.seed)
    kernel = load_kernel(_read(args.kernel)) if args.kernel else default_kernel()

    source_view = render(data, spec)
    target_set = generate_targets(spec, config.target_width)
    feature_of = {}
    for entry in target_set.targets:
        view = render(data, entry.spec)
        report = compute_loss_report(source_view, view, kernel)
        feature_of[entry.view_id] = extract_features(report, spec, entry.spec, args.family)

    # Majority-aggregate the (usually triplicate) labels per pair, grouped
    # by trial (trial_id column when present, else source_id).
    votes: dict[tuple[str, str, str], list[int]] = {}
    for row in rows:
        trial = row.get("trial_id") or row["source_id"]
        votes.setdefault((trial, row["target_a"], row["target_b"]), []).append(int(row["label"]))
    by_trial: dict[str, list[tuple[str, str, int]]] = {}
    for (trial, a, b), labels in sorted(votes.items()):
        if a not in feature_of or b not in feature_of:
            raise SchemaError(f"label references unknown target {a!r} or {b!r}")
        label = aggregate_labels(labels) if len(labels) == 3 else (1 if sum(labels) > 0 else -1)
        by_trial.setdefault(trial, []).append((a, b, label))

    # Irreparably cyclic trials cannot yield a monotonic ranking; drop them.
    pairs = []
    dropped = 0
    for trial, trial_pairs in sorted(by_trial.items()):
        edges = [(a, b) if label == 1 else (b, a) for a, b, label in trial_pairs]
        if _has_directed_cycle(edges):
            dropped += 1
            continue
        for a, b, label in trial_pairs:
            pairs.append(
                PairSample(a=feature_of[a], b=feature_of[b], mapping=args.mapping, label=label)
            )
    if dropped:
        print(f"dropped_cyclic_trials={dropped}")
    if not pairs:
        raise DegenerateDataError("all label trials were cyclic")

    model = train(pairs, epochs=args.epochs, learning_rate=args.learning_rate, seed=args.seed)
    accuracy = evaluate_loo(pairs, epochs=args.epochs, learning_rate=args.learning_rate)
    print(f"loo_accuracy={accuracy:.4f}")
    _write_out(args, dumps_stable(model_to_jsonable(model)))
    return 0


def cmd_serve(args) -> int:
    from .server import serve

    kernel = load_kernel(_read(args.kernel)) if args.kernel else default_kernel()
    serve(port=args.port, kernel=kernel, static_dir=args.static, data_root=args.data_root)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="respviz",
        description="Enumerate, evaluate and rank responsive chart transformations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, data=True):
        p.add_argument("--spec", required=True, help="chart spec JSON path")
        if data:
            p.add_argument("--data", help="dataset path (defaults to the spec's data.url)")
            p.add_argument("--subsample", type=int, help="subsample oversized datasets to N rows")
        p.add_argument("--target-width", type=int, default=300)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="output path (stdout when omitted)")

    p = sub.add_parser("enumerate", help="write the TargetSet JSON for a source spec")
    common(p, data=False)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("rank", help="compute losses, rank targets, write the gallery bundle")
    common(p)
    p.add_argument("--weights", type=_parse_weights, default=(1.0, 1.0, 1.0), metavar="i,c,t")
    p.add_argument("--model", help="trained rank model JSON path")
    p.add_argument("--kernel", help="perceptual kernel CSV path")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("train", help="train the pairwise rank model from a label CSV")
    common(p)
    p.add_argument("--labels", required=True, help="label CSV path")
    p.add_argument("--family", default="A", help="feature family, e.g. A, D, A+B1")
    p.add_argument("--mapping", choices=("difference", "concatenate"), default="difference")
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--learning-rate", type=float, default=0.5)
    p.add_argument("--kernel", help="perceptual kernel CSV path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("serve", help="serve the ranking API and the gallery")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--kernel", help="perceptual kernel CSV path")
    p.add_argument("--static", help="static directory for the gallery build")
    p.add_argument("--data-root", help="directory for dataUrl resolution", default=".")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        return _fail(EXIT_CONFIG, f"file not found: {exc.filename}")
    except (SpecSyntaxError, SchemaError, EmptyDataError) as exc:
        return _fail(EXIT_SCHEMA, str(exc))
    except IncompatibleFeaturesError as exc:
        return _fail(EXIT_MODEL, f"model file mismatch: {exc}")
    except DegenerateDataError as exc:
        return _fail(EXIT_LABELS, f"degenerate labels: {exc}")
    except RespvizError as exc:
        return _fail(EXIT_SCHEMA, str(exc))


if __name__ == "__main__":
    sys.exit(main())
