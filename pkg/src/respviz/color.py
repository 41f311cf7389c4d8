"""sRGB to CIELAB conversion and bundled color scheme interpolation.

Continuous color scales are resolved by min-max normalizing the data
value, linearly interpolating between the scheme's sRGB stops, and
converting the result to CIELAB (D65, 2 degree observer). All distance
math downstream happens on the Lab triples.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

import numpy as np

from .errors import UnknownSchemeError

# sRGB (linear) -> XYZ, D65 white point. Rows sum exactly to the white point.
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_WHITE = _RGB_TO_XYZ.sum(axis=1)  # (Xn, Yn, Zn)

_XYZ_TO_RGB = np.linalg.inv(_RGB_TO_XYZ)

_EPS = 216.0 / 24389.0
_KAPPA = 24389.0 / 27.0


def srgb_to_lab(rgb) -> tuple[float, float, float]:
    """sRGB components in [0, 1] to (L*, a*, b*)."""
    rgb = np.asarray(rgb, dtype=float)
    linear = np.where(rgb > 0.04045, ((rgb + 0.055) / 1.055) ** 2.4, rgb / 12.92)
    xyz = _RGB_TO_XYZ @ linear
    t = xyz / _WHITE
    f = np.where(t > _EPS, np.cbrt(t), (_KAPPA * t + 16.0) / 116.0)
    L = 116.0 * f[1] - 16.0
    a = 500.0 * (f[0] - f[1])
    b = 200.0 * (f[1] - f[2])
    return (float(L), float(a), float(b))


def lab_to_srgb(lab) -> tuple[float, float, float]:
    """(L*, a*, b*) back to sRGB in [0, 1], clipped to gamut."""
    L, a, b = (float(v) for v in lab)
    fy = (L + 16.0) / 116.0
    fx = fy + a / 500.0
    fz = fy - b / 200.0

    def finv(f):
        f3 = f**3
        return f3 if f3 > _EPS else (116.0 * f - 16.0) / _KAPPA

    xyz = _WHITE * np.array([finv(fx), finv(fy), finv(fz)])
    linear = _XYZ_TO_RGB @ xyz
    linear = np.clip(linear, 0.0, 1.0)
    srgb = np.where(linear > 0.0031308, 1.055 * linear ** (1 / 2.4) - 0.055, 12.92 * linear)
    return tuple(float(v) for v in np.clip(srgb, 0.0, 1.0))


def hex_to_srgb(code: str) -> tuple[float, float, float]:
    code = code.lstrip("#")
    return tuple(int(code[i : i + 2], 16) / 255.0 for i in (0, 2, 4))


def srgb_to_hex(rgb) -> str:
    return "#" + "".join(f"{round(c * 255):02x}" for c in rgb)


@lru_cache(maxsize=None)
def scheme_stops(name: str) -> tuple[tuple[float, float, float], ...]:
    """sRGB stop list of a bundled scheme (at least viridis, magma, blues)."""
    try:
        text = resources.files("respviz").joinpath(f"assets/scheme_{name}.json").read_text()
    except FileNotFoundError:
        raise UnknownSchemeError(name) from None
    return tuple(hex_to_srgb(code) for code in json.loads(text))


@lru_cache(maxsize=None)
def categorical_palette() -> tuple[tuple[float, float, float], ...]:
    """Fixed palette for nominal color encodings."""
    text = resources.files("respviz").joinpath("assets/scheme_category10.json").read_text()
    return tuple(hex_to_srgb(code) for code in json.loads(text))


def interpolate_scheme(name: str, t: float) -> tuple[float, float, float]:
    """sRGB color at position t in [0, 1] along the scheme's stops."""
    stops = scheme_stops(name)
    t = min(max(float(t), 0.0), 1.0)
    pos = t * (len(stops) - 1)
    lo = int(pos)
    if lo >= len(stops) - 1:
        return stops[-1]
    frac = pos - lo
    a, b = stops[lo], stops[lo + 1]
    return tuple(a[i] + (b[i] - a[i]) * frac for i in range(3))


def resolve_color(value: float, domain: tuple[float, float], scheme: str) -> tuple[float, float, float]:
    """Continuous value to a CIELAB triple via the named scheme.

    The value is min-max normalized into [0, 1] over `domain`; a
    degenerate domain (lo == hi) resolves to the scheme midpoint.
    """
    lo, hi = domain
    if hi > lo:
        t = (value - lo) / (hi - lo)
    else:
        t = 0.5
    return srgb_to_lab(interpolate_scheme(scheme, t))


def distance_color(a, b) -> float:
    """Euclidean distance between two CIELAB triples."""
    return float(np.linalg.norm(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)))
