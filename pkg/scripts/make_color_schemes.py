"""Regenerate the bundled color scheme stop lists.

Samples well-known matplotlib colormaps at 17 evenly spaced positions
and freezes them as sRGB hex stops. Run once; outputs are committed.
"""

import json
from pathlib import Path

from matplotlib import colormaps
import numpy as np

ASSETS = Path(__file__).resolve().parents[1] / "src" / "respviz" / "assets"

SCHEMES = {"viridis": "viridis", "magma": "magma", "blues": "Blues"}

CATEGORY10 = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]


def to_hex(rgb):
    return "#" + "".join(f"{int(round(c * 255)):02x}" for c in rgb[:3])


def main():
    ASSETS.mkdir(parents=True, exist_ok=True)
    for name, mpl_name in SCHEMES.items():
        cmap = colormaps[mpl_name]
        stops = [to_hex(cmap(t)) for t in np.linspace(0, 1, 17)]
        path = ASSETS / f"scheme_{name}.json"
        path.write_text(json.dumps(stops, indent=1) + "\n")
        print(f"wrote {path} ({len(stops)} stops)")
    path = ASSETS / "scheme_category10.json"
    path.write_text(json.dumps(CATEGORY10, indent=1) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
