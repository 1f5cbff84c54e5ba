"""Recover (p1, p2) from H estimated on two anisotropic grids, one on each side of gamma0.

Descriptive only: there is no consistency result for this estimator.

    python3 scripts/two_grid.py --kernel heat
"""
import argparse
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from levyfield.errors import AssumptionViolation
from levyfield.exponents import profile_from_p, rectangent_normalization
from levyfield.kernels import FractionalHeat, FractionalLevy
from levyfield.levy_basis import LevyBasisSpec
from levyfield.scaling_lab import ExperimentSpec, estimate_H

KERNELS = {"fractional-levy": lambda: FractionalLevy(H=0.5), "heat": lambda: FractionalHeat(chi=-0.5)}


@dataclass
class TwoGridConfig:
    kernel: str = "heat"
    low_factor: float = 0.5
    high_factor: float = 2.0
    ladder_exponents: tuple = tuple(range(8, 17))
    reps: int = 500
    seed: int = 1


def invert(gammas, H, alpha, starts=np.linspace(0.8, 4.0, 5)):
    """Least-squares (p1, p2) matching the H curve at the given gammas."""
    def resid(p):
        try:
            prof = profile_from_p(p[0], p[1], alpha)
            return [rectangent_normalization(prof, g) - h for g, h in zip(gammas, H)]
        except (AssumptionViolation, ValueError):
            return [10.0] * len(gammas)

    best = None
    for a in starts:
        for b in starts:
            r = least_squares(resid, [a, b], bounds=([0.3, 0.3], [10, 10]))
            if best is None or r.cost < best.cost:
                best = r
    return best.x, best.cost


def run(cfg: TwoGridConfig):
    kernel = KERNELS[cfg.kernel]()
    prof = kernel.profile()
    g0 = prof.gamma0
    gammas = (cfg.low_factor * g0, cfg.high_factor * g0)
    spec = ExperimentSpec(kernel, LevyBasisSpec.gaussian(1.0), gammas=gammas,
                          lambdas=tuple(2.0 ** -k for k in cfg.ladder_exponents), replications=cfg.reps,
                          seed=cfg.seed)
    H = [estimate_H(spec, g)[0] for g in gammas]
    (p1, p2), cost = invert(gammas, H, prof.alpha)
    print(f"gammas {gammas}  H_hat {np.round(H, 4)}")
    print(f"estimated (p1, p2) = ({p1:.3f}, {p2:.3f}), true ({prof.p1:.3f}, {prof.p2:.3f}), residual {cost:.2e}")
    return p1, p2


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--kernel", choices=sorted(KERNELS), default="heat")
    ap.add_argument("--reps", type=int, default=500)
    ap.add_argument("--seed", type=int, default=1)
    a = ap.parse_args()
    run(TwoGridConfig(kernel=a.kernel, reps=a.reps, seed=a.seed))
