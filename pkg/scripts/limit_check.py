"""Compare rescaled increments with the predicted limit field at several gammas.

    python3 scripts/limit_check.py --samples 10000
"""
import argparse
import json
from dataclasses import dataclass

from levyfield.kernels import FractionalLevy
from levyfield.levy_basis import LevyBasisSpec
from levyfield.scaling_lab import ExperimentSpec, verify_limit_distribution


@dataclass
class LimitConfig:
    H: float = 0.5
    gammas: tuple = (0.5, 1.0, 2.0)
    samples: int = 10_000
    seed: int = 1


def run(cfg: LimitConfig):
    spec = ExperimentSpec(FractionalLevy(H=cfg.H), LevyBasisSpec.gaussian(1.0), gammas=(0.5, 0.75, 1.0, 1.5, 2.0),
                          seed=cfg.seed)
    rows = [verify_limit_distribution(spec, g, n_samples=cfg.samples) for g in cfg.gammas]
    for r in rows:
        print(f"gamma={r['gamma']:<5} limit={r['limit']:<6} H={r['H']:.3f} CF distance={r['cf_distance']:.4f} "
              f"var {r['var_increment']:.3f} vs {r['var_limit']:.3f}  {'ok' if r['passed'] else 'FAIL'}")
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--json", action="store_true")
    a = ap.parse_args()
    rows = run(LimitConfig(samples=a.samples, seed=a.seed))
    if a.json:
        print(json.dumps(rows, indent=2, default=float))
