import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from respviz.errors import AmbiguousMatchError, DegenerateViewError, UnknownShapeError
from respviz.measures import (
    ChannelDistribution,
    PerceptualKernel,
    channel_distribution,
    channel_entropy,
    comparison_loss,
    default_kernel,
    discriminability,
    distance_position,
    distance_shape,
    distance_size,
    emd_1d,
    identification_loss,
    load_kernel,
    match_channels,
)
from respviz.model import FieldDef, load_dataset, parse_spec
from respviz.render import render
from respviz.report import compute_loss_report

from analogs import HISTOGRAM_ANALOGS, SCATTER_ANALOGS
from respviz.targets import build_target


def make_view(mark, width, height, fields, encoding, rows):
    obj = {
        "mark": mark,
        "width": width,
        "height": height,
        "data": {"url": "inline.json", "fields": [{"name": n, "kind": k} for n, k in fields]},
        "encoding": encoding,
    }
    spec = parse_spec(json.dumps(obj))
    data = load_dataset(json.dumps(rows), [FieldDef(n, k) for n, k in fields])
    return render(data, spec)


XY = [("a", "continuous"), ("b", "continuous")]


def xy_view(pairs, width=300, height=100):
    rows = [{"a": a, "b": b} for a, b in pairs]
    return make_view("point", width, height, XY, {"x": {"field": "a"}, "y": {"field": "b"}}, rows)


class TestEntropy:
    def test_identical_values_zero(self):
        assert channel_entropy(ChannelDistribution("x", (5.0, 5.0, 5.0))) == 0.0

    def test_four_distinct_two_bits(self):
        assert channel_entropy(ChannelDistribution("x", (0.0, 100.0, 200.0, 300.0))) == 2.0

    def test_two_one_third_split(self):
        # brute force: -(1/3)log2(1/3) - (2/3)log2(2/3)
        h = channel_entropy(ChannelDistribution("x", (0.0, 0.0, 50.0, 50.0, 50.0, 50.0)))
        assert abs(h - 0.9182958340544896) < 1e-4

    def test_quantization_merges_subpixel(self):
        h = channel_entropy(ChannelDistribution("x", (10.0, 10.2, 20.0)))
        assert h == channel_entropy(ChannelDistribution("x", (10.0, 10.0, 20.0)))

    def test_uniform_maximizes(self):
        uniform = channel_entropy(ChannelDistribution("x", (0.0, 10.0, 20.0, 30.0)))
        skewed = channel_entropy(ChannelDistribution("x", (0.0, 0.0, 20.0, 30.0)))
        assert uniform == 2.0
        assert skewed < uniform

    def test_entropy_bounds(self):
        values = tuple(float(v) for v in range(17))
        h = channel_entropy(ChannelDistribution("x", values))
        assert 0.0 <= h <= math.log2(len(values)) + 1e-12


class TestDistances:
    def test_position(self):
        assert distance_position(10, 4) == 6
        assert distance_position(3.5, 3.5) == 0
        assert distance_position(0, 300) == 300

    def test_size_stevens(self):
        assert abs(distance_size(25, 9) - 16**0.7) < 1e-3
        assert distance_size(5, 5) == 0
        assert distance_size(1, 0) == 1.0

    def test_shape_kernel(self):
        kernel = default_kernel()
        assert distance_shape("circle", "circle", kernel) == 0.0
        assert distance_shape("circle", "square", kernel) == kernel.matrix[0][1]
        for a in kernel.shape_ids:
            for b in kernel.shape_ids:
                assert distance_shape(a, b, kernel) == distance_shape(b, a, kernel)

    def test_unknown_shape(self):
        with pytest.raises(UnknownShapeError):
            distance_shape("hexagon", "circle", default_kernel())

    def test_kernel_csv_round_trip(self):
        kernel = default_kernel()
        assert kernel.shape_ids == ("circle", "square", "triangle-up", "cross", "diamond")
        text = "shape,circle,square\ncircle,0,0.5\nsquare,0.5,0\n"
        small = load_kernel(text)
        assert small.distance("circle", "square") == 0.5

    def test_asymmetric_kernel_rejected(self):
        from respviz.errors import SchemaError
        with pytest.raises(SchemaError):
            PerceptualKernel(("a", "b"), ((0.0, 0.3), (0.4, 0.0)))


class TestDiscriminability:
    def test_three_point_distances(self):
        view = xy_view([(0, 0), (100, 0), (200, 0)], width=200)
        # x renders at 0, 150, 300 after scaling 0..200 -> 0..200? width=200: values 0,100,200 -> px 0,100,200
        dist = discriminability(view, "x", default_kernel())
        assert sorted(dist.distances) == [100.0, 100.0, 200.0]

    def test_two_identical(self):
        view = xy_view([(5, 1), (5, 2)])
        dist = discriminability(view, "x", default_kernel())
        assert dist.distances == (0.0,)

    def test_pair_count(self):
        view = xy_view([(i, i) for i in range(50)])
        dist = discriminability(view, "x", default_kernel())
        assert len(dist.distances) == 50 * 49 // 2

    def test_degenerate_view(self):
        view = xy_view([(1, 1), (2, 2)])
        single = type(view)(spec=view.spec, tuples=view.tuples[:1], channel_field_map=view.channel_field_map)
        with pytest.raises(DegenerateViewError):
            discriminability(single, "x", default_kernel())


class TestMatchChannels:
    def test_transposed_pairs(self, fixtures):
        spec, data = fixtures["scatter"]
        source = render(data, spec)
        target = render(data, build_target(spec, 300, SCATTER_ANALOGS["ta2"]))
        match = match_channels(source, target)
        assert set(match.pairs) == {("x", "y"), ("y", "x")}
        assert match.unmatched_source == ()
        assert match.unmatched_target == ()

    def test_count_moves_to_color(self):
        rows = [{"a": float(i), "b": float(i % 3)} for i in range(12)]
        source = make_view(
            "bar", 300, 100, XY,
            {"x": {"field": "a", "bin": {"maxbins": 5}}, "y": {"field": "__count__", "aggregate": "count"}},
            rows,
        )
        target = make_view(
            "rect", 300, 100, XY,
            {
                "x": {"field": "a", "bin": {"maxbins": 5}},
                "y": {"field": "b", "bin": {"maxbins": 3}},
                "color": {"field": "__count__", "aggregate": "count"},
            },
            rows,
        )
        match = match_channels(source, target)
        assert ("y", "color") in match.pairs

    def test_disjoint_fields(self):
        a = xy_view([(1, 2), (3, 4)])
        fields = [("c", "continuous"), ("d", "continuous")]
        b = make_view("point", 300, 100, fields,
                      {"x": {"field": "c"}, "y": {"field": "d"}},
                      [{"c": 1, "d": 2}, {"c": 3, "d": 4}])
        match = match_channels(a, b)
        assert match.pairs == ()
        assert match.unmatched_source == ("x", "y")
        assert match.unmatched_target == ("x", "y")

    def test_ambiguous_binding(self):
        view = xy_view([(1, 2), (3, 4)])
        broken = type(view)(
            spec=view.spec,
            tuples=view.tuples,
            channel_field_map={"x": ("a", None), "size": ("a", None), "y": ("b", None)},
        )
        with pytest.raises(AmbiguousMatchError):
            match_channels(broken, view)


class TestIdentificationLoss:
    def test_identity(self, rendered):
        for name, view in rendered.items():
            per, total = identification_loss(view, view)
            assert total == 0.0, name
            assert all(v == 0.0 for v in per.values())

    def test_unmatched_contributes_full_entropy(self):
        a = xy_view([(1, 2), (3, 4), (5, 6)])
        fields = XY + [("g", "nominal")]
        b = make_view(
            "point", 300, 100, fields,
            {"x": {"field": "a"}, "y": {"field": "b"}, "shape": {"field": "g"}},
            [{"a": 1, "b": 2, "g": "u"}, {"a": 3, "b": 4, "g": "v"}, {"a": 5, "b": 6, "g": "w"}],
        )
        per, total = identification_loss(a, b)
        assert per["+shape"] == pytest.approx(math.log2(3))
        back_per, back_total = identification_loss(b, a)
        assert back_per["-shape"] == per["+shape"]
        assert back_total == total

    def test_histogram_rebin_ordering(self, fixtures):
        spec, data = fixtures["histogram"]
        source = render(data, spec)
        r4 = identification_loss(source, render(data, build_target(spec, 300, HISTOGRAM_ANALOGS["tb4"])))[1]
        r5 = identification_loss(source, render(data, build_target(spec, 300, HISTOGRAM_ANALOGS["tb5"])))[1]
        assert r5 >= r4 > 0.0


class TestComparisonLoss:
    def test_identity(self, rendered):
        kernel = default_kernel()
        for name, view in rendered.items():
            per, total = comparison_loss(view, view, kernel)
            assert total == 0.0, name

    def test_transposed_square_equivalent_zero(self, fixtures):
        spec, data = fixtures["scatter"]
        source = render(data, spec)
        target = render(data, build_target(spec, 300, SCATTER_ANALOGS["ta2"]))
        per, _total = comparison_loss(source, target, default_kernel())
        assert per["x"] == 0.0 and per["y"] == 0.0

    def test_halved_range_example(self):
        source = xy_view([(0, 0), (100, 1)], width=100)   # x rendered {0, 100}
        target = xy_view([(0, 0), (100, 1)], width=50)    # x rendered {0, 50}
        per, _ = comparison_loss(source, target, default_kernel())
        assert per["x"] == pytest.approx(50.0)

    def test_translation_invariance(self):
        base = [(0, 0), (20, 1), (45, 2), (80, 3)]
        a = xy_view(base, width=100)
        shifted = xy_view([(x + 30, y) for x, y in base], width=100)
        # same pixel spread (domain shifts, range identical)
        da = discriminability(a, "x", default_kernel())
        db = discriminability(shifted, "x", default_kernel())
        assert sorted(da.distances) == pytest.approx(sorted(db.distances))

    def test_symmetry_on_fixture_targets(self, fixtures):
        kernel = default_kernel()
        spec, data = fixtures["scatter"]
        source = render(data, spec)
        for key in ("ta1", "ta3", "ta5"):
            target = render(data, build_target(spec, 300, SCATTER_ANALOGS[key]))
            f = comparison_loss(source, target, kernel)[1]
            b = comparison_loss(target, source, kernel)[1]
            assert abs(f - b) < 1e-9


class TestLossReport:
    def test_report_serialization(self, fixtures):
        spec, data = fixtures["scatter"]
        source = render(data, spec)
        target = render(data, build_target(spec, 300, SCATTER_ANALOGS["ta3"]))
        report = compute_loss_report(source, target)
        obj = json.loads(json.dumps({"r": __import__("respviz.report", fromlist=["report_to_jsonable"]).report_to_jsonable(report)}))
        body = obj["r"]
        for key in ("identification", "comparison", "trend"):
            assert set(body[key].keys()) == {"perChannel", "total"}
            assert body[key]["total"] >= 0

    def test_score_independence_across_evaluation_order(self, fixtures):
        # no cross-target state: evaluating targets in any order gives
        # identical reports
        from respviz.targets import generate_targets

        spec, data = fixtures["histogram"]
        source = render(data, spec)
        entries = generate_targets(spec, 300).targets[:8]
        forward = [compute_loss_report(source, render(data, e.spec)) for e in entries]
        backward = [compute_loss_report(source, render(data, e.spec)) for e in reversed(entries)]
        for r1, r2 in zip(forward, reversed(backward)):
            assert r1 == r2

    def test_permutation_invariance_of_losses(self, fixtures):
        spec, data = fixtures["scatter"]
        rng = np.random.default_rng(3)
        perm = rng.permutation(len(data.rows))
        shuffled = type(data)(name=data.name, fields=data.fields,
                              rows=tuple(data.rows[i] for i in perm), dropped_rows=0)
        target_spec = build_target(spec, 300, SCATTER_ANALOGS["ta4"])
        r1 = compute_loss_report(render(data, spec), render(data, target_spec))
        r2 = compute_loss_report(render(shuffled, spec), render(shuffled, target_spec))
        assert r1.identification.total == pytest.approx(r2.identification.total, abs=1e-12)
        assert r1.comparison.total == pytest.approx(r2.comparison.total, abs=1e-9)
        assert r1.trend.total == pytest.approx(r2.trend.total, abs=1e-9)


finite_lists = st.lists(st.floats(-1e4, 1e4, allow_nan=False), min_size=1, max_size=24)


@given(finite_lists, finite_lists)
def test_emd_symmetric_nonnegative(p, q):
    d = emd_1d(p, q)
    assert d >= 0
    assert math.isclose(d, emd_1d(q, p), rel_tol=0, abs_tol=1e-9)


@given(finite_lists)
def test_emd_identity(p):
    assert emd_1d(p, p) == 0.0


@given(finite_lists, st.floats(-100, 100, allow_nan=False))
def test_emd_translation_shifts_mass(p, shift):
    q = [v + shift for v in p]
    assert emd_1d(p, q) == pytest.approx(abs(shift), abs=1e-6)
