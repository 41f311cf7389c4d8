import math

import numpy as np
import pytest

from respviz.model import parse_spec
from respviz.render import render
from respviz.targets import TransformDescriptor, build_target
from respviz.trend import (
    BREAKPOINTS_2D,
    GRID_3D,
    TrendCurve,
    TrendSurface,
    _grid_surface,
    area_between_curves,
    linearize_color,
    loess_fit_2d,
    loess_fit_3d,
    standardize_and_interpolate,
    trend_loss,
    volume_between_surfaces,
)

from analogs import HISTOGRAM_ANALOGS, SCATTER_ANALOGS


def ols_fit(xs, ys):
    """Closed-form simple least squares (independent of the LOESS path)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    xbar, ybar = xs.mean(), ys.mean()
    sxx = ((xs - xbar) ** 2).sum()
    slope = 0.0 if sxx == 0 else ((xs - xbar) * (ys - ybar)).sum() / sxx
    return ybar - slope * xbar, slope


class TestLoess2D:
    def test_collinear_reproduced(self):
        pts = [(x, 2 * x + 1) for x in range(8)]
        fitted = loess_fit_2d(pts)
        assert max(abs(f - (2 * x + 1)) for (x, _y), f in zip(pts, fitted)) < 1e-6

    def test_constant(self):
        pts = [(x, 3.25) for x in range(6)]
        assert loess_fit_2d(pts) == pytest.approx([3.25] * 6)

    def test_five_point_zigzag_bandwidth_one(self):
        pts = [(0, 0), (1, 1), (2, 0), (3, 1), (4, 0)]
        fitted = loess_fit_2d(pts, bandwidth=1.0)
        # global OLS of the zigzag: slope 0, intercept 0.4
        assert fitted == pytest.approx([0.4] * 5, abs=1e-9)

    def test_bandwidth_one_equals_global_ols(self):
        rng = np.random.default_rng(11)
        xs = rng.uniform(0, 600, size=40)
        ys = 0.3 * xs + rng.normal(0, 25, size=40)
        fitted = loess_fit_2d(list(zip(xs, ys)), bandwidth=1.0)
        intercept, slope = ols_fit(xs, ys)
        expected = intercept + slope * xs
        assert np.max(np.abs(np.asarray(fitted) - expected)) < 1e-9

    def test_permutation_invariant(self):
        rng = np.random.default_rng(5)
        pts = [(float(x), float(rng.normal())) for x in rng.uniform(0, 100, 25)]
        fitted = loess_fit_2d(pts)
        perm = rng.permutation(len(pts))
        shuffled = [pts[i] for i in perm]
        fitted_shuffled = loess_fit_2d(shuffled)
        for pos, i in enumerate(perm):
            assert fitted_shuffled[pos] == pytest.approx(fitted[i], abs=1e-12)


class TestLoess3D:
    def test_plane_reproduced(self):
        pts = [((x, y), x + 2 * y) for x in range(4) for y in range(4)]
        fitted = loess_fit_3d(pts)
        assert max(abs(f - z) for ((_x, _y), z), f in zip(pts, fitted)) < 1e-6

    def test_constant(self):
        pts = [((x, y), 7.0) for x in range(3) for y in range(3)]
        assert loess_fit_3d(pts) == pytest.approx([7.0] * 9)

    def test_grid_xy_product_matches_normal_equation_oracle(self):
        pts = [((float(x), float(y)), float(x * y)) for x in range(3) for y in range(3)]
        fitted = loess_fit_3d(pts)

        # independent oracle: same neighbor rule, normal-equation solve
        coords = np.array([p[0] for p in pts])
        zs = np.array([p[1] for p in pts])
        order = sorted(range(9), key=lambda i: (coords[i][0], coords[i][1], zs[i]))
        c = coords[order]
        z = zs[order]
        std = c.std(axis=0)
        norm = (c - c.mean(axis=0)) / std
        k = math.ceil(0.5 * 9)
        expected = np.empty(9)
        for i in range(9):
            d2 = ((norm - norm[i]) ** 2).sum(axis=1)
            idx = np.argsort(d2, kind="stable")[:k]
            A = np.column_stack([np.ones(k), norm[idx] - norm[i]])
            beta = np.linalg.solve(A.T @ A, A.T @ z[idx])
            expected[i] = beta[0]
        for pos, i in enumerate(order):
            assert fitted[i] == pytest.approx(expected[pos], abs=1e-9)


class TestStandardize:
    def test_identical_curves(self):
        curve = [(x, math.sin(x / 20) * 50 + 100) for x in range(0, 301, 10)]
        a, b = standardize_and_interpolate(curve, curve, 300, 300)
        assert a == b
        assert len(a.breakpoints) == BREAKPOINTS_2D

    def test_proportionate_rescale_coincides(self):
        curve = [(x, 0.4 * x + 30) for x in range(0, 601, 20)]
        half = [(x * 0.5, (0.4 * x + 30) * 0.5) for x in range(0, 601, 20)]
        a, b = standardize_and_interpolate(curve, half, 600, 300)
        assert np.max(np.abs(np.asarray(a.fitted) - np.asarray(b.fitted))) < 1e-6
        assert area_between_curves(a, b) < 1e-6

    def test_disproportionate_y_halving(self):
        curve = [(x, 0.4 * x + 30) for x in range(0, 301, 10)]
        halved = [(x, (0.4 * x + 30) / 2) for x in range(0, 301, 10)]
        a, b = standardize_and_interpolate(curve, halved, 300, 300)
        assert np.asarray(b.fitted) == pytest.approx(np.asarray(a.fitted) / 2)

    def test_no_overlap(self):
        from respviz.errors import NoOverlapError
        with pytest.raises(NoOverlapError):
            standardize_and_interpolate([(0, 1), (10, 1)], [(500, 1), (600, 1)], 300, 300)


class TestAreaVolume:
    def test_identical_zero(self):
        bp = tuple(np.linspace(0, 300, BREAKPOINTS_2D))
        a = TrendCurve(bp, tuple(np.linspace(0, 300, BREAKPOINTS_2D)))
        assert area_between_curves(a, a) == 0.0

    def test_halved_line(self):
        bp = np.linspace(0, 300, BREAKPOINTS_2D)
        a = TrendCurve(tuple(bp), tuple(bp))
        b = TrendCurve(tuple(bp), tuple(bp / 2))
        assert area_between_curves(a, b) == pytest.approx(0.5, abs=1e-12)

    def test_constant_offset(self):
        bp = np.linspace(0, 300, BREAKPOINTS_2D)
        a = TrendCurve(tuple(bp), tuple(np.full_like(bp, 100.0)))
        b = TrendCurve(tuple(bp), tuple(np.full_like(bp, 150.0)))
        assert area_between_curves(a, b) == pytest.approx(0.5)

    def test_volume_identical_zero(self):
        g = np.linspace(0, 10, GRID_3D)
        surf = TrendSurface(g, g, np.ones((GRID_3D, GRID_3D)))
        assert volume_between_surfaces(surf, surf) == 0.0

    def test_volume_constants(self):
        g = np.linspace(0, 10, GRID_3D)
        a = TrendSurface(g, g, np.full((GRID_3D, GRID_3D), 2.0))
        b = TrendSurface(g, g, np.full((GRID_3D, GRID_3D), 1.0))
        assert volume_between_surfaces(a, b) == pytest.approx(0.5)

    def test_volume_doubled_plane(self):
        g = np.linspace(1, 10, GRID_3D)
        xx, yy = np.meshgrid(g, g, indexing="ij")
        a = TrendSurface(g, g, xx + yy)
        b = TrendSurface(g, g, 2 * (xx + yy))
        assert volume_between_surfaces(a, b) == pytest.approx(1.0)


def test_curve_debug_dump_serializable():
    import json

    from respviz.trend import curve_to_jsonable

    curve = [(x, 0.5 * x) for x in range(0, 301, 10)]
    a, b = standardize_and_interpolate(curve, curve, 300, 300)
    dump = curve_to_jsonable(a)
    assert len(dump["breakpoints"]) == BREAKPOINTS_2D
    json.dumps(dump)


class TestLinearizeColor:
    def test_single(self):
        assert linearize_color([(50, 0, 0)]).cumulative == (0.0,)

    def test_equidistant_stops(self):
        colors = [(0, 0, 0), (5, 0, 0), (10, 0, 0), (15, 0, 0)]
        assert linearize_color(colors).cumulative == (0.0, 5.0, 10.0, 15.0)

    def test_repeated_identical(self):
        colors = [(30, 5, 5)] * 4
        assert linearize_color(colors).cumulative == (0.0, 0.0, 0.0, 0.0)

    def test_non_decreasing_and_duplicate_append(self):
        rng = np.random.default_rng(2)
        colors = [tuple(rng.uniform(0, 100, 3)) for _ in range(10)]
        scale = linearize_color(colors)
        assert all(b >= a for a, b in zip(scale.cumulative, scale.cumulative[1:]))
        extended = linearize_color(colors + [colors[-1]])
        assert extended.cumulative[:-1] == scale.cumulative
        assert extended.cumulative[-1] == scale.cumulative[-1]


class TestGridSurface:
    def test_shape_and_hull_extension(self):
        coords = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0], [10.0, 10.0]])
        fitted = np.array([1.0, 2.0, 3.0, 4.0])
        gx = np.linspace(-5, 15, GRID_3D)
        gy = np.linspace(-5, 15, GRID_3D)
        surf = _grid_surface(coords, fitted, gx, gy)
        assert surf.fitted.shape == (GRID_3D, GRID_3D)
        assert np.all(np.isfinite(surf.fitted))
        assert surf.fitted.min() >= 1.0 and surf.fitted.max() <= 4.0


class TestTrendLoss:
    def test_identity_exact_zero(self, rendered):
        for name, view in rendered.items():
            per, total, flags = trend_loss(view, view)
            assert total == 0.0, name
            assert not [f for f in flags if "no_overlap" in f]

    def test_resize_beats_transpose(self, fixtures):
        spec, data = fixtures["scatter"]
        source = render(data, spec)
        t1 = trend_loss(source, render(data, build_target(spec, 300, SCATTER_ANALOGS["ta1"])))[1]
        t2 = trend_loss(source, render(data, build_target(spec, 300, SCATTER_ANALOGS["ta2"])))[1]
        assert t1 + 1e-9 < t2

    def test_coarse_proportionate_beats_fine_distorted(self, fixtures):
        spec, data = fixtures["scatter"]
        source = render(data, spec)
        t3 = trend_loss(source, render(data, build_target(spec, 300, SCATTER_ANALOGS["ta3"])))[1]
        t4 = trend_loss(source, render(data, build_target(spec, 300, SCATTER_ANALOGS["ta4"])))[1]
        assert t3 + 1e-9 < t4

    def test_histogram_rebin_transposed_ordering(self, fixtures):
        spec, data = fixtures["histogram"]
        source = render(data, spec)
        t4 = trend_loss(source, render(data, build_target(spec, 300, HISTOGRAM_ANALOGS["tb4"])))[1]
        t5 = trend_loss(source, render(data, build_target(spec, 300, HISTOGRAM_ANALOGS["tb5"])))[1]
        assert t5 + 1e-9 < t4

    @pytest.mark.parametrize("k", [0.5, 2.0])
    def test_proportionate_rescale_invariance(self, fixtures, k):
        spec, data = fixtures["scatter"]
        scaled = spec.with_size(int(spec.width * k), int(spec.height * k))
        per, _total, _flags = trend_loss(render(data, spec), render(data, scaled))
        assert per["y_on_x"] < 1e-6

    def test_transposed_target_finite_and_defined(self, fixtures):
        for name in ("scatter", "histogram", "line"):
            spec, data = fixtures[name]
            source = render(data, spec)
            transposed = build_target(spec, 300, TransformDescriptor(height=600, transposed=True))
            per, total, _flags = trend_loss(source, render(data, transposed))
            assert math.isfinite(total) and "y_on_x" in per, name

    def test_subgroup_average_within_bounds(self, fixtures):
        spec, data = fixtures["line"]
        source = render(data, spec)
        target = render(data, build_target(spec, 300, TransformDescriptor(height=400)))
        per, _total, flags = trend_loss(source, target)
        assert not flags

        # recompute per-subgroup relative ABC through the public pieces
        groups = sorted({t.values["color"] for t in source.tuples})
        per_group = []
        for g in groups:
            src = [(t.x, t.y) for t in source.tuples if t.values["color"] == g]
            tgt = [(t.x, t.y) for t in target.tuples if t.values["color"] == g]
            a, b = standardize_and_interpolate(
                list(zip([u for u, _ in src], loess_fit_2d(src))),
                list(zip([u for u, _ in tgt], loess_fit_2d(tgt))),
                source.spec.width,
                target.spec.width,
            )
            per_group.append(area_between_curves(a, b))
        assert min(per_group) - 1e-12 <= per["y_on_x"] <= max(per_group) + 1e-12
        assert per["y_on_x"] == pytest.approx(sum(per_group) / len(per_group))

    def test_color_model_on_heatmap(self, fixtures):
        spec, data = fixtures["heatmap"]
        source = render(data, spec)
        target = render(data, build_target(spec, 300, TransformDescriptor(height=150, maxbins=25)))
        per, total, _flags = trend_loss(source, target)
        assert "color_on_xy" in per and per["color_on_xy"] >= 0
        assert math.isfinite(total)

    def test_size_model_only_when_shared(self, fixtures):
        spec, data = fixtures["scatter"]
        source = render(data, spec)
        ta4 = render(data, build_target(spec, 300, SCATTER_ANALOGS["ta4"]))
        per, _total, _flags = trend_loss(source, ta4)
        assert "size_on_xy" not in per  # source has no size channel
