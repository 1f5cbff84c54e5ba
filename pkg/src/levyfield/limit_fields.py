"""Samplers of the scaling-limit random fields.

All non-Gaussian limits are stochastic integrals of g0-built kernels against an
alpha-stable measure W; they are drawn as sum_c h(u_c) W(c) on graded meshes
(see quadrature.py), with W(c) exact stable variables. Fractional Brownian
sheets, including the degenerate indices H = 0 and H = 1, are drawn exactly from
their product covariance.
"""
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import rng as rngmod
from .errors import NotPSD, ParameterError, RegionError, TangentInapplicable
from .exponents import UPS1, UPS1T, UPS2, UPS2T, hurst_indices, hurst_pair, validate_assumptions
from .kernels import Kernel, limit_kernel
from .levy_basis import LevyBasisSpec
from .quadrature import MeshOptions, build_mesh, sample_integrals
from .scalestat import default_statistic, scale_statistic

KINDS = ("Walpha", "FBS", "Y1", "Y2", "Y1t", "Y2t", "Ups1", "Ups2", "Ups1t", "Ups2t", "Ups0", "Tangent0",
         "TangentPlus", "TangentMinus")
# integer tags for random streams
_KIND_CODE = {k: i for i, k in enumerate(KINDS)}
_UPS_NAME = {"Ups1": UPS1, "Ups2": UPS2, "Ups1t": UPS1T, "Ups2t": UPS2T}


@dataclass
class LimitFieldSample:
    points: np.ndarray
    values: np.ndarray
    kind: str
    hurst: Optional[tuple] = None
    meta: dict = field(default_factory=dict)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("t1,t2,replication,value\n")
            for r in range(self.values.shape[0]):
                for (a, b), v in zip(self.points, self.values[r]):
                    fh.write(f"{float(a)!r},{float(b)!r},{r},{float(v)!r}\n")


def _points(points):
    p = np.asarray(points, float).reshape(-1, 2)
    if np.any(p < 0):
        raise ParameterError("points must lie in the closed positive quadrant")
    return p


def _limit_basis(alpha, basis):
    basis = LevyBasisSpec.stable(alpha) if basis is None else basis.stable_limit()
    if basis.alpha != alpha:
        raise ParameterError("basis and alpha disagree")
    return basis


# fractional Brownian sheets ---------------------------------------------------

def fbm_cov(H: float, t, s):
    """R_H(t,s); for H = 0 the degenerate 1 - I(t != s)/2."""
    t, s = np.asarray(t, float), np.asarray(s, float)
    if H == 0:
        return 1.0 - 0.5 * (t != s)
    return 0.5 * (t ** (2 * H) + s ** (2 * H) - np.abs(t - s) ** (2 * H))


@dataclass(frozen=True)
class FbsSpec:
    H1: float
    H2: float

    def __post_init__(self):
        if not (0 <= self.H1 <= 1 and 0 <= self.H2 <= 1):
            raise ParameterError("FBS indices must lie in [0,1]")

    def covariance(self, points) -> np.ndarray:
        p = _points(points)
        a, b = p[:, 0], p[:, 1]
        return fbm_cov(self.H1, a[:, None], a[None, :]) * fbm_cov(self.H2, b[:, None], b[None, :])


def psd_factor(C: np.ndarray) -> np.ndarray:
    """L with L L^T = C, from an eigendecomposition with tiny negative eigenvalues clipped."""
    C = 0.5 * (C + C.T)
    w, V = np.linalg.eigh(C)
    floor = -1e-10 * max(np.trace(C), 1e-300)
    if w.min() < floor:
        raise NotPSD(f"covariance has eigenvalue {w.min():.3e}")
    return V * np.sqrt(np.clip(w, 0, None))


def sample_fbs(spec: FbsSpec, points, n_reps: int, seed: int) -> LimitFieldSample:
    p = _points(points)
    if len({tuple(x) for x in p}) != len(p):
        raise ParameterError("points must be distinct")
    L = psd_factor(spec.covariance(p))
    Z = rngmod.stream(seed, rngmod.FBS).standard_normal((n_reps, len(p)))
    return LimitFieldSample(p, Z @ L.T, "FBS", (spec.H1, spec.H2))


# stable sheet -----------------------------------------------------------------

def sample_walpha(alpha: float, points, n_reps: int, seed: int, basis: Optional[LevyBasisSpec] = None
                  ) -> LimitFieldSample:
    """W_alpha((0,t]) at the points, built from the cells of the grid spanned by their coordinates."""
    basis = _limit_basis(alpha, basis)
    p = _points(points)
    x = np.unique(np.concatenate([[0.0], p[:, 0]]))
    y = np.unique(np.concatenate([[0.0], p[:, 1]]))
    areas = np.outer(np.diff(x), np.diff(y))
    i = np.searchsorted(x, p[:, 0])
    j = np.searchsorted(y, p[:, 1])
    nx, ny = areas.shape
    # column k sums the cells below and left of point k
    W = np.zeros((nx * ny, len(p)))
    for k in range(len(p)):
        mask = np.zeros((nx, ny))
        mask[:i[k], :j[k]] = 1.0
        W[:, k] = mask.ravel()
    vals = np.zeros((n_reps, len(p)))
    keep = areas.ravel() > 0
    if keep.any():
        vals = sample_integrals(W[keep], areas.ravel()[keep], basis, seed,
                                (rngmod.LIMIT, _KIND_CODE["Walpha"]), n_reps)
    return LimitFieldSample(p, vals, "Walpha", (1 / alpha, 1 / alpha))


# one-parameter processes ---------------------------------------------------------

_Y_KERNEL = {"Y1": "h1", "Y2": "h2", "Y1t": "h1_tilde", "Y2t": "h2_tilde"}


def _check_region(kind, profile):
    pm, pp = profile.P_minus, profile.P_plus
    ok = {"Y1": pm < 1, "Y2t": pm > 1, "Y2": pp < 1, "Y1t": pp > 1}[kind]
    if not ok:
        raise RegionError(f"{kind} is not defined for this parameter region")
    v = [x for x in validate_assumptions(profile, "rectangent") if "≠" not in x]
    if v:
        raise RegionError("; ".join(v))


def y_hurst(kind, profile) -> float:
    hi = hurst_indices(profile)
    return {"Y1": hi.H_a1, "Y2": hi.H_a2, "Y1t": hi.Ht_a1, "Y2t": hi.Ht_a2}[kind]


def _y_mesh(kind, kernel, alpha, times, opts):
    """Mesh and weights for Y-kind integrands at the given times (one column each)."""
    name = _Y_KERNEL[kind]
    on_first = kind in ("Y1", "Y1t")
    funcs, b1, b2, sing = [], {0.0}, {0.0}, [(0.0, 0.0)]
    for t in times:
        funcs.append(lambda u1, u2, t=t: limit_kernel(name, kernel, t, u1, u2))
        (b1 if on_first else b2).add(float(t))
        sing.append((t, 0.0) if on_first else (0.0, t))
    return build_mesh(funcs, sorted(b1), sorted(b2), kernel.q, alpha, sing, opts)


def _draw_columns(kind, kernel, alpha, times, n_reps, seed, key, basis, opts):
    times = [float(t) for t in times]
    out = np.zeros((n_reps, len(times)))
    nz = [k for k, t in enumerate(times) if t > 0]
    if nz:
        tt = [times[k] for k in nz]
        mesh, W = _y_mesh(kind, kernel, alpha, tt, opts)
        out[:, nz] = sample_integrals(W, mesh.areas(), basis, seed, key, n_reps)
    return out


def sample_Y(kind: str, kernel: Kernel, alpha: float, times: Sequence[float], n_reps: int, seed: int,
             basis: Optional[LevyBasisSpec] = None, opts: MeshOptions = MeshOptions(fine=64),
             copy: int = 0) -> LimitFieldSample:
    """Joint draws of Y_i(t) or Y~_i(t), i = 1, 2, at the given times (t = 0 gives 0)."""
    if kind not in _Y_KERNEL:
        raise ParameterError(f"unknown process {kind!r}")
    profile = kernel.profile(alpha)
    _check_region(kind, profile)
    basis = _limit_basis(alpha, basis)
    vals = _draw_columns(kind, kernel, alpha, times, n_reps, seed, (rngmod.LIMIT, _KIND_CODE[kind], copy),
                         basis, opts)
    pts = np.column_stack([times, np.zeros(len(times))])
    return LimitFieldSample(pts, vals, kind, (y_hurst(kind, profile),))


# random fields ------------------------------------------------------------------

def _group_copies(coord):
    """Copy index per point: points sharing the grouping coordinate share a copy (1-based)."""
    levels = np.unique(coord)
    return np.searchsorted(levels, coord) + 1, levels.size


def sample_upsilon(kind: str, kernel: Kernel, alpha: float, points, n_reps: int, seed: int,
                   basis: Optional[LevyBasisSpec] = None, opts: MeshOptions = MeshOptions(fine=64)
                   ) -> LimitFieldSample:
    """Finite-dimensional draws of the limit fields Ups1, Ups2, Ups1t, Ups2t and Ups0."""
    p = _points(points)
    profile = kernel.profile(alpha)
    basis = _limit_basis(alpha, basis)
    code = _KIND_CODE.get(kind)
    if kind == "Ups0":
        v = [x for x in validate_assumptions(profile, "rectangent") if "≠" not in x]
        if v:
            raise RegionError("; ".join(v))
        funcs, b1, b2, sing = [], {0.0}, {0.0}, [(0.0, 0.0)]
        for t in p:
            funcs.append(lambda u1, u2, t=tuple(t): limit_kernel("h0", kernel, t, u1, u2))
            b1.add(float(t[0]))
            b2.add(float(t[1]))
            sing += [tuple(t), (t[0], 0.0), (0.0, t[1])]
        vals = np.zeros((n_reps, len(p)))
        nz = np.nonzero((p[:, 0] > 0) & (p[:, 1] > 0))[0]
        if nz.size:
            mesh, W = build_mesh([funcs[k] for k in nz], sorted(b1), sorted(b2), kernel.q, alpha, sing, opts)
            vals[:, nz] = sample_integrals(W, mesh.areas(), basis, seed, (rngmod.LIMIT, code), n_reps)
        return LimitFieldSample(p, vals, kind, None)
    if kind not in _UPS_NAME:
        raise ParameterError(f"unknown field kind {kind!r}")
    hurst = hurst_pair(_UPS_NAME[kind], hurst_indices(profile))
    first = kind in ("Ups1", "Ups1t")
    along, other = (p[:, 0], p[:, 1]) if first else (p[:, 1], p[:, 0])
    if kind in ("Ups1t", "Ups2t"):
        # line extension: one Y~ draw per replication, scaled by the other coordinate
        ykind = "Y1t" if first else "Y2t"
        times, inv = np.unique(along, return_inverse=True)
        y = sample_Y(ykind, kernel, alpha, times, n_reps, seed, basis, opts).values
        return LimitFieldSample(p, other[None, :] * y[:, inv], kind, hurst)
    ykind = "Y1" if first else "Y2"
    copies, m = _group_copies(other)
    times, inv = np.unique(along, return_inverse=True)
    base = sample_Y(ykind, kernel, alpha, times, n_reps, seed, basis, opts, copy=0).values
    vals = np.empty((n_reps, len(p)))
    for j in range(1, m + 1):
        idx = np.nonzero(copies == j)[0]
        tj, invj = np.unique(along[idx], return_inverse=True)
        yj = sample_Y(ykind, kernel, alpha, tj, n_reps, seed, basis, opts, copy=j).values
        vals[:, idx] = yj[:, invj] - base[:, inv[idx]]
    return LimitFieldSample(p, vals, kind, hurst)


def sample_tangent0(kernel: Kernel, alpha: float, points, n_reps: int, seed: int,
                    basis: Optional[LevyBasisSpec] = None, opts: MeshOptions = MeshOptions(fine=64),
                    which: str = "T0") -> LimitFieldSample:
    """Draws of T0(t) = int {g0(t - u) - g0(-u)} W(du), or of the one-coordinate
    restrictions T+(t) = T0(t1, 0) and T-(t) = T0(0, t2) (which = "T+" / "T-")."""
    p = _points(points)
    profile = kernel.profile(alpha)
    if validate_assumptions(profile, "tangent"):
        raise TangentInapplicable("; ".join(validate_assumptions(profile, "tangent")))
    basis = _limit_basis(alpha, basis)
    if which == "T+":
        q = np.column_stack([p[:, 0], np.zeros(len(p))])
    elif which == "T-":
        q = np.column_stack([np.zeros(len(p)), p[:, 1]])
    elif which == "T0":
        q = p
    else:
        raise ParameterError(f"unknown tangent field {which!r}")
    uq, inv = np.unique(q, axis=0, return_inverse=True)
    inv = np.asarray(inv).ravel()
    vals = np.zeros((n_reps, len(uq)))
    nz = np.nonzero(np.any(uq > 0, axis=1))[0]
    if nz.size:
        funcs = [lambda u1, u2, t=tuple(uq[k]): limit_kernel("tangent0", kernel, t, u1, u2) for k in nz]
        b1 = sorted({0.0, *uq[nz, 0]})
        b2 = sorted({0.0, *uq[nz, 1]})
        sing = [(0.0, 0.0)] + [tuple(uq[k]) for k in nz]
        mesh, W = build_mesh(funcs, b1, b2, kernel.q, alpha, sing, opts)
        vals[:, nz] = sample_integrals(W, mesh.areas(), basis, seed, (rngmod.LIMIT, _KIND_CODE["Tangent0"]), n_reps)
    kind = {"T0": "Tangent0", "T+": "TangentPlus", "T-": "TangentMinus"}[which]
    return LimitFieldSample(p, vals[:, inv], kind, None)


# multi-self-similarity ------------------------------------------------------------

def mss_check(sampler, hurst: tuple, lambdas, t, n_reps: int, seed: int, statistic: Optional[str] = None,
              alpha: float = 2.0, tol: float = 0.15) -> dict:
    """Compare scale(V(l1 t1, l2 t2)) / scale(V(t)) with l1^H1 l2^H2.

    `sampler(points, n_reps, seed)` returns a LimitFieldSample; both points are
    drawn jointly.
    """
    l1, l2 = lambdas
    t = (float(t[0]), float(t[1]))
    s = sampler([t, (l1 * t[0], l2 * t[1])], n_reps, seed)
    stat = statistic or default_statistic(alpha)
    ratio = scale_statistic(s.values[:, 1], stat) / scale_statistic(s.values[:, 0], stat)
    expected = l1 ** hurst[0] * l2 ** hurst[1]
    return {"ratio": ratio, "expected": expected, "relative_error": abs(ratio / expected - 1),
            "passed": bool(abs(ratio / expected - 1) <= tol), "statistic": stat}
