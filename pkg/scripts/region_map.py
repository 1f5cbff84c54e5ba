"""Tabulate regions and the H(gamma) curve over a (p1, p2) grid, optionally plotting the region map.

    python3 scripts/region_map.py --alpha 2 --plot regions.png
"""
import argparse
from dataclasses import dataclass

import numpy as np

from levyfield.errors import AssumptionViolation
from levyfield.exponents import classify_region, profile_from_p

CODES = {"R11": 0, "R12": 1, "R21": 2, "R22": 3}


@dataclass
class MapConfig:
    alpha: float = 2.0
    p_min: float = 0.6
    p_max: float = 4.0
    n: int = 200


def region_grid(cfg: MapConfig):
    p = np.linspace(cfg.p_min, cfg.p_max, cfg.n)
    out = np.full((cfg.n, cfg.n), np.nan)
    for i, p1 in enumerate(p):
        for j, p2 in enumerate(p):
            try:
                prof = profile_from_p(p1, p2, cfg.alpha)
                if cfg.alpha / (1 + cfg.alpha) < prof.P < cfg.alpha:
                    out[i, j] = CODES[classify_region(prof).region]
            except AssumptionViolation:
                pass  # boundary point
    return p, out


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--alpha", type=float, default=2.0)
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--plot")
    a = ap.parse_args()
    p, grid = region_grid(MapConfig(alpha=a.alpha, n=a.n))
    for name, code in CODES.items():
        print(f"{name}: {np.mean(grid == code):.3f} of the grid")
    print(f"inadmissible: {np.mean(np.isnan(grid)):.3f}")
    if a.plot:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        fig, ax = plt.subplots(figsize=(5, 4.5))
        ax.pcolormesh(p, p, grid.T, cmap="tab10", vmin=0, vmax=9, shading="nearest")
        ax.set_xlabel("p1")
        ax.set_ylabel("p2")
        ax.set_title(f"regions, alpha={a.alpha}")
        fig.savefig(a.plot, dpi=120)
