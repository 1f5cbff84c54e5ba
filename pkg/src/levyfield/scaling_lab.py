"""Monte-Carlo estimation of local scaling exponents.

For each gamma and each lambda of a dyadic ladder, increments over the
rectangles (t0, t0 + diag(lambda, lambda^gamma) t] (or ordinary increments in
tangent mode) are drawn on graded meshes; the slope of log scale(lambda) against
log lambda estimates H(gamma). A shape-constrained two-segment fit locates the
kink gamma0, with a bootstrap CI over replications.
"""
import json
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from . import rng as rngmod
from .charfn import DEFAULT_THETA, cf_distance, empirical_cf
from .errors import AssumptionViolation, DegenerateScale, ParameterError, TooFewSamples
from .exponents import (UPS1, UPS1T, UPS2, UPS2T, classify_region, rectangent_normalization,
                        tangent_normalization, validate_assumptions)
from .field_sim import increment_mesh
from .kernels import Kernel
from .levy_basis import LevyBasisSpec
from .limit_fields import sample_tangent0, sample_upsilon, sample_walpha
from .quadrature import MeshOptions, sample_integrals
from .scalestat import default_statistic, scale_statistic

RECTANGENT = "rectangent"
TANGENT = "tangent"
DEFAULT_LADDER = tuple(2.0 ** -k for k in range(3, 10))

# shape classes of H(gamma) per side of the kink
CONST, AFFINE1, LINEAR0, SLOPE1 = "constant", "1+b*gamma", "c*gamma", "gamma+d"


@dataclass
class ExperimentSpec:
    kernel: Kernel
    basis: LevyBasisSpec
    mode: str = RECTANGENT
    gammas: Sequence[float] = (0.5, 0.75, 1.0, 1.5, 2.0)
    lambdas: Sequence[float] = DEFAULT_LADDER
    t0_ensemble: int = 1
    replications: int = 500
    statistic: Optional[str] = None
    t: tuple = (1.0, 1.0)
    seed: int = 0
    fine: int = 256
    threads: int = 1
    bootstrap: int = 200
    discard_transient: bool = True

    def __post_init__(self):
        lam = np.asarray(self.lambdas, float)
        if lam.size < 3 or np.any(lam <= 0) or np.any(lam >= 1) or np.any(np.diff(lam) >= 0):
            raise ParameterError("lambda-ladder must be strictly decreasing in (0,1) with >= 3 rungs")
        if self.replications < 200:
            raise ParameterError("replications must be >= 200")
        if self.mode not in (RECTANGENT, TANGENT):
            raise ParameterError(f"unknown mode {self.mode!r}")
        if self.t0_ensemble < 1:
            raise ParameterError("t0_ensemble must be >= 1")
        if self.statistic is None:
            self.statistic = default_statistic(self.basis.alpha)

    @property
    def mesh_options(self) -> MeshOptions:
        return MeshOptions(fine=self.fine)

    def t0_points(self):
        """Well separated base points (1 + 5k, 1 + 3k)."""
        return [(1.0 + 5.0 * k, 1.0 + 3.0 * k) for k in range(self.t0_ensemble)]

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k not in ("kernel", "basis", "threads")}
        d["kernel"] = self.kernel.to_config()
        d["basis"] = self.basis.to_config()
        d["gammas"] = [float(g) for g in self.gammas]
        d["lambdas"] = [float(x) for x in self.lambdas]
        d["t"] = [float(x) for x in self.t]
        return d


@dataclass
class GammaResult:
    gamma: float
    H_hat: float
    stderr: float
    H_theory: Optional[float]
    scales: list
    used: list
    verdict: Optional[bool] = None


@dataclass
class ScalingReport:
    spec: dict
    results: list
    kink: Optional[dict] = None
    cf: Optional[dict] = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"spec": self.spec, "results": [asdict(r) for r in self.results], "kink": self.kink,
                "cf": self.cf, "extra": self.extra}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def summary_csv(self) -> str:
        lines = ["gamma,H_hat,stderr,H_theory,verdict"]
        for r in self.results:
            th = "" if r.H_theory is None else repr(float(r.H_theory))
            v = "" if r.verdict is None else ("pass" if r.verdict else "fail")
            lines.append(f"{r.gamma!r},{r.H_hat!r},{r.stderr!r},{th},{v}")
        return "\n".join(lines) + "\n"


# theory ----------------------------------------------------------------------

def theoretical_H(spec: ExperimentSpec, gamma: float) -> Optional[float]:
    k = spec.kernel
    if not k.has_power_form:
        return None
    prof = k.profile(spec.basis.alpha)
    if spec.mode == TANGENT:
        return tangent_normalization(prof, gamma)
    return rectangent_normalization(prof, gamma)


def _check(spec: ExperimentSpec):
    if spec.kernel.has_power_form:
        v = validate_assumptions(spec.kernel.profile(spec.basis.alpha), spec.mode)
        if v:
            raise AssumptionViolation("; ".join(v))


# sampling --------------------------------------------------------------------

def increment_ensemble(spec: ExperimentSpec, gamma: float, lam: float, gamma_index: int, lam_index: int,
                       points: Optional[Sequence] = None) -> np.ndarray:
    """Increments pooled over the t0-ensemble: shape (t0_ensemble * replications, len(points))."""
    pts = [spec.t] if points is None else list(points)
    mode = "rectangular" if spec.mode == RECTANGENT else "ordinary"
    out = []
    for j, t0 in enumerate(spec.t0_points()):
        mesh, W = increment_mesh(spec.kernel, spec.basis.alpha, t0, lam, gamma, pts, mode, spec.mesh_options)
        out.append(sample_integrals(W, mesh.areas(), spec.basis, spec.seed,
                                    (rngmod.INCREMENT, gamma_index, lam_index, j), spec.replications,
                                    spec.threads))
    return np.concatenate(out, axis=0)


def _slope(x, y):
    """Least-squares slope and its standard error."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    X = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    res = y - X @ coef
    dof = max(x.size - 2, 1)
    s2 = float(res @ res) / dof
    se = np.sqrt(s2 / np.sum((x - x.mean()) ** 2))
    return float(coef[1]), float(se), res


def fit_H(lambdas, scales, discard_transient: bool = True):
    """Slope of log scale on log lambda; the largest lambda is dropped when its
    leave-one-out residual exceeds 3 predicted standard errors. Returns (H, se, used mask)."""
    lam = np.asarray(lambdas, float)
    s = np.asarray(scales, float)
    if np.any(~(s > 0)):
        raise DegenerateScale("a scale statistic is zero")
    x, y = np.log(lam), np.log(s)
    used = np.ones(lam.size, bool)
    if discard_transient and lam.size >= 5:
        k = int(np.argmax(lam))
        rest = np.arange(lam.size) != k
        b, se, res = _slope(x[rest], y[rest])
        a = np.mean(y[rest] - b * x[rest])
        dof = max(rest.sum() - 2, 1)
        sig = np.sqrt(res @ res / dof)
        xr = x[rest]
        pred_se = sig * np.sqrt(1 + 1 / rest.sum() + (x[k] - xr.mean()) ** 2 / np.sum((xr - xr.mean()) ** 2))
        if abs(y[k] - (a + b * x[k])) > 3 * pred_se:
            used = rest
    H, se, _ = _slope(x[used], y[used])
    return H, se, used


def _scales(samples: Sequence[np.ndarray], statistic: str):
    return [scale_statistic(v, statistic) for v in samples]


def estimate_H(spec: ExperimentSpec, gamma: float, gamma_index: int = 0, samples=None):
    """(H_hat, stderr) for one gamma; `samples` can pass precomputed per-lambda increments."""
    _check(spec)
    if samples is None:
        samples = [increment_ensemble(spec, gamma, lam, gamma_index, i)[:, 0]
                   for i, lam in enumerate(spec.lambdas)]
    H, se, _ = fit_H(spec.lambdas, _scales(samples, spec.statistic), spec.discard_transient)
    return H, se


# kink fitting ------------------------------------------------------------------

def shape_class(spec: ExperimentSpec):
    """(lower, upper) shape of H(gamma) around the kink."""
    if spec.mode == TANGENT:
        # unused by the tangent design, which is linear through 0 and then constant
        return LINEAR0, CONST
    lab = classify_region(spec.kernel.profile(spec.basis.alpha))
    lower = AFFINE1 if lab.v_minus_kind == UPS2T else CONST
    upper = SLOPE1 if lab.v_plus_kind == UPS1T else LINEAR0
    return lower, upper


def _design(gammas, beta, shapes, mode):
    """Model H = base + theta * slope, linear in the single free parameter theta."""
    g = np.asarray(gammas, float)
    lo = g <= beta
    if mode == TANGENT:
        # H = c * min(1, gamma / beta)
        return np.zeros_like(g), np.minimum(1.0, g / beta)
    lower, upper = shapes
    base = np.zeros_like(g)
    slope = np.zeros_like(g)
    if lower == CONST and upper == LINEAR0:      # theta = level a
        slope = np.where(lo, 1.0, g / beta)
    elif lower == CONST and upper == SLOPE1:     # theta = a, upper gamma - beta + a
        base = np.where(lo, 0.0, g - beta)
        slope = np.ones_like(g)
    elif lower == AFFINE1 and upper == SLOPE1:   # theta = b, upper gamma - beta + 1 + b beta
        base = np.where(lo, 1.0, g - beta + 1.0)
        slope = np.where(lo, g, beta)
    elif lower == AFFINE1 and upper == LINEAR0:  # theta = b, upper gamma / beta + b gamma
        base = np.where(lo, 1.0, g / beta)
        slope = g
    return base, slope


def fit_kink(gammas, H, se, shapes, mode=RECTANGENT, grid: Optional[np.ndarray] = None):
    """Weighted least-squares breakpoint over a fine grid inside the gamma range."""
    g = np.asarray(gammas, float)
    H = np.asarray(H, float)
    w = 1.0 / np.maximum(np.asarray(se, float), 1e-6) ** 2
    if grid is None:
        grid = np.linspace(g.min(), g.max(), 801)[1:-1]
    best = (np.inf, None, None)
    for beta in grid:
        base, slope = _design(g, beta, shapes, mode)
        denom = np.sum(w * slope * slope)
        if denom <= 0:
            continue
        theta = np.sum(w * slope * (H - base)) / denom
        rss = np.sum(w * (H - base - theta * slope) ** 2)
        if rss < best[0]:
            best = (rss, float(beta), float(theta))
    return best[1], best[2], best[0]


def free_fit_rss(gammas, H, se) -> float:
    """RSS of an unconstrained continuous two-segment fit (breakpoint, 3 linear coefficients)."""
    g = np.asarray(gammas, float)
    w = 1.0 / np.maximum(np.asarray(se, float), 1e-6) ** 2
    best = np.inf
    for beta in np.linspace(g.min(), g.max(), 801)[1:-1]:
        X = np.column_stack([np.ones_like(g), g, np.maximum(g - beta, 0)])
        sw = np.sqrt(w)
        coef, *_ = np.linalg.lstsq(X * sw[:, None], H * sw, rcond=None)
        best = min(best, float(np.sum(w * (H - X @ coef) ** 2)))
    return best


# scans ------------------------------------------------------------------------

def _check_bracket(spec):
    if not spec.kernel.has_power_form:
        return
    g0 = spec.kernel.profile(spec.basis.alpha).gamma0
    g = np.asarray(spec.gammas, float)
    if np.sum(g <= g0 + 1e-12) < 3 or np.sum(g >= g0 - 1e-12) < 3:
        raise ParameterError("the gamma-list must bracket gamma0 with at least 3 points on each side")


def collect(spec: ExperimentSpec):
    """Increments per (gamma, lambda): nested list [gamma][lambda] of 1-D arrays."""
    _check(spec)
    return [[increment_ensemble(spec, g, lam, i, j)[:, 0] for j, lam in enumerate(spec.lambdas)]
            for i, g in enumerate(spec.gammas)]


def scan_gamma(spec: ExperimentSpec, data=None, kink: bool = True) -> ScalingReport:
    """H_hat(gamma) for every gamma with theory and verdicts, plus the kink estimate."""
    if kink:
        _check_bracket(spec)
    data = collect(spec) if data is None else data
    results = []
    for g, per_lam in zip(spec.gammas, data):
        H, se, used = fit_H(spec.lambdas, _scales(per_lam, spec.statistic), spec.discard_transient)
        th = theoretical_H(spec, g)
        verdict = None if th is None else bool(abs(H - th) <= 2 * se + 0.05)
        results.append(GammaResult(float(g), H, se, th, _scales(per_lam, spec.statistic),
                                   [bool(u) for u in used], verdict))
    rep = ScalingReport(spec.to_dict(), results)
    if kink and spec.kernel.has_power_form:
        rep.kink = kink_with_bootstrap(spec, data, results)
    return rep


def kink_with_bootstrap(spec: ExperimentSpec, data, results) -> dict:
    shapes = shape_class(spec)
    H = [r.H_hat for r in results]
    se = [r.stderr for r in results]
    beta, theta, rss = fit_kink(spec.gammas, H, se, shapes, spec.mode)
    boots = []
    for b in range(spec.bootstrap):
        gen = rngmod.stream(spec.seed, rngmod.BOOTSTRAP, b)
        Hb, seb = [], []
        for per_lam in data:
            sc = [scale_statistic(v[gen.integers(0, v.size, v.size)], spec.statistic) for v in per_lam]
            h, s, _ = fit_H(spec.lambdas, sc, spec.discard_transient)
            Hb.append(h)
            seb.append(s)
        boots.append(fit_kink(spec.gammas, Hb, se, shapes, spec.mode)[0])
    lo, hi = np.quantile(boots, [0.025, 0.975])
    g0 = spec.kernel.profile(spec.basis.alpha).gamma0
    free = free_fit_rss(spec.gammas, H, se)
    n = len(spec.gammas)
    # F-test of the 2-parameter shape class against the free 4-parameter fit
    if n > 4 and free > 0:
        F = max(rss - free, 0.0) / 2 / (free / (n - 4))
        p_shape = float(stats.f.sf(F, 2, n - 4))
    else:
        p_shape = None
    return {"gamma0_hat": beta, "parameter": theta, "ci": [float(lo), float(hi)], "gamma0": g0,
            "contains_gamma0": bool(lo <= g0 <= hi), "shape": list(shapes), "rss_constrained": float(rss),
            "rss_free": float(free), "shape_p_value": p_shape}


# limit identification ----------------------------------------------------------

def predicted_limit(spec: ExperimentSpec, gamma: float) -> str:
    prof = spec.kernel.profile(spec.basis.alpha)
    g0 = prof.gamma0
    at = abs(gamma - g0) <= 1e-12 * max(1.0, g0)
    if spec.mode == TANGENT:
        return "T0" if at else ("T+" if gamma > g0 else "T-")
    if at:
        return "Ups0"
    lab = classify_region(prof)
    kind = lab.v_plus_kind if gamma > g0 else lab.v_minus_kind
    return {UPS1: "Ups1", UPS2: "Ups2", UPS1T: "Ups1t", UPS2T: "Ups2t"}[kind]


def sample_limit(spec: ExperimentSpec, kind: str, points, n: int, seed: int) -> np.ndarray:
    a = spec.basis.alpha
    opts = MeshOptions(fine=64)
    if kind in ("T0", "T+", "T-"):
        return sample_tangent0(spec.kernel, a, points, n, seed, spec.basis, opts, which=kind).values
    return sample_upsilon(kind, spec.kernel, a, points, n, seed, spec.basis, opts).values


def verify_limit_distribution(spec: ExperimentSpec, gamma: float, n_samples: int = 10_000,
                              theta=DEFAULT_THETA, tol: float = 0.05) -> dict:
    """CF distance between lambda_min^-H(gamma) * increments at t and the predicted limit at t."""
    _check(spec)
    H = theoretical_H(spec, gamma)
    kind = predicted_limit(spec, gamma)
    reps = int(np.ceil(n_samples / spec.t0_ensemble))
    sub = ExperimentSpec(**{**spec.__dict__, "replications": max(reps, 200)})
    lam = spec.lambdas[-1]
    gi = 1000 + int(round(gamma * 1000))
    x = increment_ensemble(sub, gamma, lam, gi, len(spec.lambdas) - 1)[:n_samples, 0] * lam ** -H
    y = sample_limit(spec, kind, [spec.t], n_samples, spec.seed + 1)[:, 0]
    d = cf_distance(empirical_cf(x, theta), empirical_cf(y, theta))
    return {"gamma": float(gamma), "limit": kind, "H": H, "lambda": float(lam), "cf_distance": d,
            "var_increment": float(np.var(x)), "var_limit": float(np.var(y)), "passed": bool(d <= tol)}


# degenerate scenarios ------------------------------------------------------------

def degenerate_scenarios(kind: str, spec: ExperimentSpec, points=((1.0, 1.0), (2.0, 0.5))) -> dict:
    """product_limit: H_hat(gamma) = 1 + gamma and increments proportional to t1 t2 within a
    replication; levy_sheet_limit: H_hat(gamma) = (1 + gamma)/alpha and CF match to g[0] W."""
    a = spec.basis.alpha
    out = {"kind": kind, "gammas": [float(g) for g in spec.gammas]}
    if kind == "product_limit":
        target = [1 + g for g in spec.gammas]
    elif kind == "levy_sheet_limit":
        target = [(1 + g) / a for g in spec.gammas]
    else:
        raise ParameterError(f"unknown scenario {kind!r}")
    H, se, cv = [], [], []
    for i, g in enumerate(spec.gammas):
        per_lam = []
        for j, lam in enumerate(spec.lambdas):
            x = increment_ensemble(spec, g, lam, i, j, points)
            per_lam.append(x[:, 0])
            if kind == "product_limit" and j == len(spec.lambdas) - 1:
                p = np.asarray(points, float)
                r = x / (p[:, 0] * p[:, 1])[None, :]
                # pooled within-replication spread relative to the typical ratio
                cv.append(float(np.sqrt(np.mean(r.var(axis=1))) / np.sqrt(np.mean(r.mean(axis=1) ** 2))))
        h, s, _ = fit_H(spec.lambdas, _scales(per_lam, spec.statistic), spec.discard_transient)
        H.append(h)
        se.append(s)
    out.update(H_hat=H, stderr=se, H_target=target,
               H_ok=bool(all(abs(h - t) <= 0.05 for h, t in zip(H, target))))
    if kind == "product_limit":
        out.update(ratio_cv=cv, cv_ok=bool(all(c < 0.05 for c in cv)))
        out["passed"] = out["H_ok"] and out["cv_ok"]
    else:
        g = spec.gammas[0]
        lam = spec.lambdas[-1]
        n = 10_000
        sub = ExperimentSpec(**{**spec.__dict__, "replications": n, "t0_ensemble": 1})
        x = increment_ensemble(sub, g, lam, 500, len(spec.lambdas) - 1)[:, 0] * lam ** (-(1 + g) / a)
        g00 = getattr(spec.kernel, "g_origin", 1.0)
        y = g00 * sample_walpha(a, [spec.t], n, spec.seed + 1, spec.basis).values[:, 0]
        d = cf_distance(empirical_cf(x), empirical_cf(y))
        out.update(cf_distance=d, cf_ok=bool(d <= 0.05))
        out["passed"] = out["H_ok"] and out["cf_ok"]
    return out
