"""Trend loss: LOESS trend estimation and relative area/volume comparison.

Three trend models are supported per view pair: y on x (2D), continuous
color on (x, y), and continuous size on (x, y) (both 3D). A model
applies to a pair when both views carry it on matched channels. Curves
are compared after uniformly rescaling the target by the chart-width
ratio and interpolating both onto 300 shared breakpoints (300 x 300 for
surfaces). When a matched nominal color/shape splits the data, losses
are computed per matched subgroup and averaged.

Rendered pixel values are used as-is (y is screen-down); a transposed
target is compared on the channels carrying the same fields, which
penalizes the mirrored geometry rather than erroring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import LinearNDInterpolator, NearestNDInterpolator
from scipy.spatial import QhullError

from .color import distance_color
from .errors import DegenerateViewError, NoOverlapError
from .measures import match_channels
from .render import RenderedView

BREAKPOINTS_2D = 300
GRID_3D = 300
DEFAULT_BANDWIDTH = 0.5
DEGENERATE_AREA_EPS = 1e-9

MODEL_Y_ON_X = "y_on_x"
MODEL_COLOR_ON_XY = "color_on_xy"
MODEL_SIZE_ON_XY = "size_on_xy"


@dataclass(frozen=True)
class TrendCurve:
    """A fitted trend sampled on equally spaced breakpoints."""

    breakpoints: tuple
    fitted: tuple


@dataclass(frozen=True)
class TrendSurface:
    grid_x: np.ndarray
    grid_y: np.ndarray
    fitted: np.ndarray  # (GRID_3D, GRID_3D)


@dataclass(frozen=True)
class LinearizedColorScale:
    ordered_values: tuple
    cumulative: tuple


# ---------------------------------------------------------------------------
# LOESS


def loess_fit_2d(points, bandwidth: float = DEFAULT_BANDWIDTH) -> list[float]:
    """Local degree-1 fit with uniform weights at each observed x.

    The neighborhood of each point is the ceil(bandwidth * n) nearest
    observations by |dx|. Returns fitted values aligned with the input
    order; neighbor selection is canonicalized so the result is
    invariant under input permutation.
    """
    pts = [(float(x), float(y)) for x, y in points]
    n = len(pts)
    if n < 3:
        raise DegenerateViewError("loess_fit_2d needs at least 3 points")
    if not 0.0 < bandwidth <= 1.0:
        raise ValueError("bandwidth must be in (0, 1]")
    order = sorted(range(n), key=lambda i: pts[i])
    xs = np.array([pts[i][0] for i in order])
    ys = np.array([pts[i][1] for i in order])
    k = max(2, min(n, math.ceil(bandwidth * n)))
    fitted_sorted = np.empty(n)
    for i in range(n):
        idx = np.argsort(np.abs(xs - xs[i]), kind="stable")[:k]
        nx = xs[idx] - xs[i]
        ny = ys[idx]
        if nx.max() == nx.min():
            fitted_sorted[i] = float(np.mean(ny))  # all neighbors share one x
            continue
        design = np.column_stack([np.ones(k), nx])
        beta, _, _, _ = np.linalg.lstsq(design, ny, rcond=None)
        fitted_sorted[i] = float(beta[0])
    out = [0.0] * n
    for pos, i in enumerate(order):
        out[i] = float(fitted_sorted[pos])
    return out


def loess_fit_3d(points, bandwidth: float = DEFAULT_BANDWIDTH) -> list[float]:
    """Local plane fit (degree 1 in two predictors) with uniform weights.

    `points` is a sequence of ((x, y), z). Neighborhoods use Euclidean
    distance in per-axis standardized coordinates; singular local
    systems fall back to the neighbor mean.
    """
    pts = [((float(x), float(y)), float(z)) for (x, y), z in points]
    n = len(pts)
    if n < 4:
        raise DegenerateViewError("loess_fit_3d needs at least 4 points")
    order = sorted(range(n), key=lambda i: (pts[i][0][0], pts[i][0][1], pts[i][1]))
    coords = np.array([pts[i][0] for i in order])
    zs = np.array([pts[i][1] for i in order])
    std = coords.std(axis=0)
    std[std == 0.0] = 1.0
    norm = (coords - coords.mean(axis=0)) / std
    k = max(3, min(n, math.ceil(bandwidth * n)))
    fitted_sorted = np.empty(n)
    for i in range(n):
        d2 = ((norm - norm[i]) ** 2).sum(axis=1)
        idx = np.argsort(d2, kind="stable")[:k]
        local = norm[idx] - norm[i]
        nz = zs[idx]
        design = np.column_stack([np.ones(len(idx)), local])
        beta, _, rank, _ = np.linalg.lstsq(design, nz, rcond=None)
        if rank < 3:
            fitted_sorted[i] = float(np.mean(nz))
        else:
            fitted_sorted[i] = float(beta[0])
    out = [0.0] * n
    for pos, i in enumerate(order):
        out[i] = float(fitted_sorted[pos])
    return out


# ---------------------------------------------------------------------------
# Standardization and comparison


def _collapse_curve(curve) -> tuple[np.ndarray, np.ndarray]:
    """Sort by abscissa and average fitted values at duplicate abscissae."""
    by_u: dict[float, list[float]] = {}
    for u, v in curve:
        by_u.setdefault(float(u), []).append(float(v))
    us = sorted(by_u)
    vs = [math.fsum(by_u[u]) / len(by_u[u]) for u in us]
    return np.array(us), np.array(vs)


def standardize_and_interpolate(
    curve_source, curve_target, width_source: float, width_target: float
) -> tuple[TrendCurve, TrendCurve]:
    """Rescale the target curve by widthS/widthT on both axes, then
    interpolate both curves onto 300 breakpoints over the shared extent."""
    us, vs = _collapse_curve(curve_source)
    ut, vt = _collapse_curve(curve_target)
    scale = float(width_source) / float(width_target)
    ut = ut * scale
    vt = vt * scale
    lo = max(us[0], ut[0])
    hi = min(us[-1], ut[-1])
    if lo > hi:
        raise NoOverlapError(f"standardized extents [{us[0]}, {us[-1]}] and [{ut[0]}, {ut[-1]}] are disjoint")
    bp = np.linspace(lo, hi, BREAKPOINTS_2D)
    fa = np.interp(bp, us, vs)
    fb = np.interp(bp, ut, vt)
    return (
        TrendCurve(breakpoints=tuple(bp), fitted=tuple(fa)),
        TrendCurve(breakpoints=tuple(bp), fitted=tuple(fb)),
    )


def _relative_area(a: TrendCurve, b: TrendCurve) -> tuple[float, bool]:
    bp = np.asarray(a.breakpoints)
    fa = np.asarray(a.fitted)
    fb = np.asarray(b.fitted)
    dx = (bp[-1] - bp[0]) / (len(bp) - 1) if len(bp) > 1 else 0.0
    abc = math.fsum(np.abs(fa - fb)) * dx
    source_area = math.fsum(np.abs(fa)) * dx
    if source_area < DEGENERATE_AREA_EPS:
        return abc, True
    return abc / source_area, False


def area_between_curves(a: TrendCurve, b: TrendCurve) -> float:
    """Relative area between aligned curves (unnormalized when the
    source area is degenerate; see trend_loss flags)."""
    value, _ = _relative_area(a, b)
    return value


def _relative_volume(a: TrendSurface, b: TrendSurface) -> tuple[float, bool]:
    fa = np.asarray(a.fitted)
    fb = np.asarray(b.fitted)
    gx = np.asarray(a.grid_x)
    gy = np.asarray(a.grid_y)
    dx = (gx[-1] - gx[0]) / (len(gx) - 1) if len(gx) > 1 else 0.0
    dy = (gy[-1] - gy[0]) / (len(gy) - 1) if len(gy) > 1 else 0.0
    cell = dx * dy
    vbs = float(np.abs(fa - fb).sum()) * cell
    source_volume = float(np.abs(fa).sum()) * cell
    if source_volume < DEGENERATE_AREA_EPS:
        return vbs, True
    return vbs / source_volume, False


def volume_between_surfaces(a: TrendSurface, b: TrendSurface) -> float:
    value, _ = _relative_volume(a, b)
    return value


def curve_to_jsonable(curve: TrendCurve) -> dict:
    """Debug dump of a fitted trend curve (gallery trend-overlay input)."""
    return {
        "breakpoints": [float(v) for v in curve.breakpoints],
        "fitted": [float(v) for v in curve.fitted],
    }


def linearize_color(colors) -> LinearizedColorScale:
    """Cumulative CIELAB arc length over a data-ordered color sequence."""
    colors = [tuple(float(c) for c in lab) for lab in colors]
    if not colors:
        raise DegenerateViewError("linearize_color needs at least one color")
    cumulative = [0.0]
    for prev, cur in zip(colors, colors[1:]):
        cumulative.append(cumulative[-1] + distance_color(prev, cur))
    return LinearizedColorScale(ordered_values=tuple(colors), cumulative=tuple(cumulative))


# ---------------------------------------------------------------------------
# Trend loss over view pairs


def _is_quantitative(view: RenderedView, channel: str) -> bool:
    enc = view.spec.encodings.get(channel)
    if enc is None:
        return False
    if enc.is_count:
        return True
    return view.spec.data.field_kind(enc.field) in ("continuous", "temporal")


def _grid_surface(coords: np.ndarray, fitted: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> TrendSurface:
    """Interpolate scattered fitted values onto the grid; cells outside
    the convex hull take the nearest fitted value."""
    uniq: dict[tuple[float, float], list[float]] = {}
    for (x, y), z in zip(coords, fitted):
        uniq.setdefault((float(x), float(y)), []).append(float(z))
    pts = np.array(sorted(uniq.keys()))
    vals = np.array([math.fsum(uniq[tuple(p)]) / len(uniq[tuple(p)]) for p in pts])
    xx, yy = np.meshgrid(gx, gy, indexing="ij")
    grid = np.full(xx.shape, np.nan)
    if len(pts) >= 4:
        try:
            grid = LinearNDInterpolator(pts, vals)(xx, yy)
        except QhullError:
            pass
    mask = np.isnan(grid)
    if mask.any():
        nearest = NearestNDInterpolator(pts, vals)
        grid[mask] = nearest(xx[mask], yy[mask])
    return TrendSurface(grid_x=gx, grid_y=gy, fitted=grid)


def _linearized_color_by_tuple(view: RenderedView, channel: str) -> list[float]:
    """Per-tuple cumulative color value, ordered by the underlying data value."""
    order = sorted(
        range(len(view.tuples)),
        key=lambda i: (view.tuples[i].values[channel], view.tuples[i].x, view.tuples[i].y),
    )
    labs = [view.tuples[i].color for i in order]
    scale = linearize_color(labs)
    out = [0.0] * len(view.tuples)
    for pos, i in enumerate(order):
        out[i] = scale.cumulative[pos]
    return out


def _subgroup_keys(view: RenderedView, channels: tuple[str, ...]):
    return [tuple(t.values[c] for c in channels) for t in view.tuples]


def _loss_2d(pts_s, pts_t, width_s, width_t, flags, tag) -> float | None:
    if len(pts_s) < 3 or len(pts_t) < 3:
        flags.append(f"{tag}:skipped_few_points")
        return None
    fitted_s = loess_fit_2d(pts_s)
    fitted_t = loess_fit_2d(pts_t)
    curve_s = [(u, f) for (u, _v), f in zip(pts_s, fitted_s)]
    curve_t = [(u, f) for (u, _v), f in zip(pts_t, fitted_t)]
    try:
        a, b = standardize_and_interpolate(curve_s, curve_t, width_s, width_t)
    except NoOverlapError:
        flags.append(f"{tag}:no_overlap")
        return math.inf
    value, degenerate = _relative_area(a, b)
    if degenerate:
        flags.append(f"{tag}:degenerate_source")
    return value


def _loss_3d(coords_s, z_s, coords_t, z_t, width_s, width_t, flags, tag) -> float | None:
    if len(coords_s) < 4 or len(coords_t) < 4:
        flags.append(f"{tag}:skipped_few_points")
        return None
    fitted_s = np.array(loess_fit_3d(list(zip(coords_s, z_s))))
    fitted_t = np.array(loess_fit_3d(list(zip(coords_t, z_t))))
    scale = float(width_s) / float(width_t)
    cs = np.asarray(coords_s, dtype=float)
    ct = np.asarray(coords_t, dtype=float) * scale
    lo_x = max(cs[:, 0].min(), ct[:, 0].min())
    hi_x = min(cs[:, 0].max(), ct[:, 0].max())
    lo_y = max(cs[:, 1].min(), ct[:, 1].min())
    hi_y = min(cs[:, 1].max(), ct[:, 1].max())
    if lo_x > hi_x or lo_y > hi_y:
        flags.append(f"{tag}:no_overlap")
        return math.inf
    gx = np.linspace(lo_x, hi_x, GRID_3D)
    gy = np.linspace(lo_y, hi_y, GRID_3D)
    surf_s = _grid_surface(cs, fitted_s, gx, gy)
    surf_t = _grid_surface(ct, fitted_t, gx, gy)
    value, degenerate = _relative_volume(surf_s, surf_t)
    if degenerate:
        flags.append(f"{tag}:degenerate_source")
    return value


def trend_loss(source: RenderedView, target: RenderedView) -> tuple[dict, float, list[str]]:
    """Per-model relative ABC/VBS between the views and their sum.

    Returns (per_model, total, flags); NoOverlap models contribute an
    infinite component and are flagged.
    """
    flags: list[str] = []
    per: dict[str, float] = {}
    match = match_channels(source, target)
    tgt_of = dict(match.pairs)
    tx = tgt_of.get("x")
    ty = tgt_of.get("y")
    if tx not in ("x", "y") or ty not in ("x", "y"):
        return per, 0.0, flags

    models = []
    if all(_is_quantitative(v, c) for v, c in ((source, "x"), (source, "y"), (target, tx), (target, ty))):
        models.append(MODEL_Y_ON_X)
    for dep, name in (("color", MODEL_COLOR_ON_XY), ("size", MODEL_SIZE_ON_XY)):
        if (
            tgt_of.get(dep) == dep
            and _is_quantitative(source, dep)
            and _is_quantitative(target, dep)
        ):
            models.append(name)

    # Matched nominal color/shape channels split the views into subgroups.
    nominal_s = tuple(
        cs for cs, ct in match.pairs
        if cs in ("color", "shape") and not _is_quantitative(source, cs)
    )
    nominal_t = tuple(tgt_of[c] for c in nominal_s)

    if nominal_s:
        keys_s = _subgroup_keys(source, nominal_s)
        keys_t = _subgroup_keys(target, nominal_t)
        shared = sorted(set(keys_s) & set(keys_t))
        groups = [
            (
                [i for i, k in enumerate(keys_s) if k == key],
                [i for i, k in enumerate(keys_t) if k == key],
            )
            for key in shared
        ]
    else:
        groups = [(list(range(len(source.tuples))), list(range(len(target.tuples))))]

    color_z_s = color_z_t = None
    if MODEL_COLOR_ON_XY in models:
        color_z_s = _linearized_color_by_tuple(source, "color")
        color_z_t = _linearized_color_by_tuple(target, "color")

    rendered_t = {c: target.rendered(c) for c in (tx, ty)}

    for model in models:
        values = []
        for gi, (idx_s, idx_t) in enumerate(groups):
            tag = model if len(groups) == 1 else f"{model}[{gi}]"
            su = [source.tuples[i].x for i in idx_s]
            sv = [source.tuples[i].y for i in idx_s]
            tu = [rendered_t[tx][i] for i in idx_t]
            tv = [rendered_t[ty][i] for i in idx_t]
            if model == MODEL_Y_ON_X:
                value = _loss_2d(
                    list(zip(su, sv)), list(zip(tu, tv)),
                    source.spec.width, target.spec.width, flags, tag,
                )
            else:
                if model == MODEL_COLOR_ON_XY:
                    zs = [color_z_s[i] for i in idx_s]
                    zt = [color_z_t[i] for i in idx_t]
                else:
                    zs = [source.tuples[i].size for i in idx_s]
                    zt = [target.tuples[i].size for i in idx_t]
                value = _loss_3d(
                    list(zip(su, sv)), zs, list(zip(tu, tv)), zt,
                    source.spec.width, target.spec.width, flags, tag,
                )
            if value is not None:
                values.append(value)
        if values:
            per[model] = math.fsum(values) / len(values) if all(map(math.isfinite, values)) else math.inf
        else:
            per[model] = 0.0
            flags.append(f"{model}:skipped")
    total = math.fsum(per.values()) if per else 0.0
    return per, total, flags
