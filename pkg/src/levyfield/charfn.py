"""Characteristic functions of stochastic integrals.

For a discretized integrand (weights w_c on cells of area A_c) the log-CF of
sum_c w_c M(c) is sum_c A_c psi(theta w_c), psi being the Levy exponent of the
basis. For a stable basis psi(s) = -|s|^alpha omega(s) in closed form; for the
other kinds psi is computed by quadrature over the Levy measure.
"""
import csv
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, interpolate, stats

from .errors import NormDivergence, ParameterError, QuadratureFailure, TooFewSamples
from .levy_basis import COMPOUND, GAUSSIAN, STABLE, TRUNCATED, LevyBasisSpec
from .quadrature import MeshOptions, alpha_norms, build_mesh

DEFAULT_THETA = (0.1, 0.2, 0.5, 1.0, 2.0, 5.0)
ANALYTIC = "analytic-stable"
NUMERIC = "numeric-ID"
EMPIRICAL = "empirical"


@dataclass
class CfProfile:
    theta: np.ndarray
    values: np.ndarray
    provenance: str

    def __post_init__(self):
        self.theta = np.asarray(self.theta, float)
        self.values = np.asarray(self.values, complex)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["theta", "re", "im", "provenance"])
            for t, v in zip(self.theta, self.values):
                w.writerow([repr(float(t)), repr(float(v.real)), repr(float(v.imag)), self.provenance])


# stable integrals ------------------------------------------------------------

def stable_exponent(basis: LevyBasisSpec, s) -> np.ndarray:
    """Levy exponent -|s|^alpha omega(s) of the stable measure sharing the basis' omega."""
    s = np.asarray(s, float)
    return -np.abs(s) ** basis.alpha * basis.omega(s)


def weighted_stable_exponent(W, areas, basis: LevyBasisSpec, theta) -> np.ndarray:
    """sum_c A_c psi(theta w_c) for the stable limit measure, one value per theta."""
    theta = np.atleast_1d(np.asarray(theta, float))
    w = np.asarray(W, float).ravel()
    a = np.asarray(areas, float).ravel()
    out = np.empty(theta.size, complex)
    for k, th in enumerate(theta):
        out[k] = np.sum(a * stable_exponent(basis, th * w))
    return out


def integrand_weights(f, breaks1=(0.0,), breaks2=(0.0,), q=(1.0, 1.0), alpha=2.0, singular=(),
                      opts: Optional[MeshOptions] = None):
    """Discretize a callable integrand on a graded mesh; returns (W, areas)."""
    opts = opts or MeshOptions(fine=64, tol=1e-2)
    mesh, W = build_mesh([f], breaks1, breaks2, q, alpha, singular, opts)
    return W[:, 0], mesh.areas()


def stable_integral_cf(f, basis: LevyBasisSpec, theta: Sequence[float] = DEFAULT_THETA, weights=None,
                       **mesh_kw) -> CfProfile:
    """CF of int f dW_alpha where W_alpha is the stable measure with the basis' omega.

    `f` is a callable integrand discretized on a graded mesh (keywords as in
    `integrand_weights`), or pass `weights=(W, areas)` directly.
    """
    W, A = weights if weights is not None else integrand_weights(f, alpha=basis.alpha, **mesh_kw)
    expo = weighted_stable_exponent(W, A, basis.stable_limit(), theta)
    if basis.symmetric:
        expo = expo.real + 0j
    return CfProfile(theta, np.exp(expo), ANALYTIC)


def stable_cf(basis: LevyBasisSpec, theta=DEFAULT_THETA, scale: float = 1.0) -> CfProfile:
    """CF of scale * W_alpha(unit cell)."""
    return stable_integral_cf(None, basis, theta, weights=(np.array([scale]), np.array([1.0])))


# infinitely divisible integrals ----------------------------------------------

def _sin_minus_x(x):
    """(sin x - x) / x^3 without cancellation."""
    if x < 0.1:
        x2 = x * x
        return -1 / 6 + x2 / 120 - x2 * x2 / 5040
    return (np.sin(x) - x) / x ** 3


def _power_pieces(alpha: float, a: float, b: float):
    """Real and imaginary parts of int_a^b (e^{ix} - 1 - i x c) x^(-1-alpha) dx, where
    the centering c is 1 for alpha > 1 and 0 otherwise (alpha = 1 is only used
    symmetrically, so its imaginary part is left at 0)."""
    centred = alpha > 1
    re = im = 0.0
    kw = dict(limit=400, epsabs=1e-13, epsrel=1e-10)
    lo_end = min(b, 1.0)
    if a < lo_end:
        if a == 0.0:
            re += integrate.quad(lambda x: -0.5 * np.sinc(x / (2 * np.pi)) ** 2,
                                 0.0, lo_end, weight="alg", wvar=(1 - alpha, 0), **kw)[0]
            if centred:
                im += integrate.quad(_sin_minus_x, 0.0, lo_end, weight="alg", wvar=(2 - alpha, 0), **kw)[0]
            elif alpha < 1:
                im += integrate.quad(lambda x: np.sinc(x / np.pi), 0.0, lo_end, weight="alg",
                                     wvar=(-alpha, 0), **kw)[0]
        else:
            re += integrate.quad(lambda x: (np.cos(x) - 1) * x ** (-1 - alpha), a, lo_end, **kw)[0]
            im += integrate.quad(lambda x: (np.sin(x) - centred * x) * x ** (-1 - alpha), a, lo_end, **kw)[0]
    hi_start = max(a, 1.0)
    if hi_start < b:
        p = lambda x: x ** (-1 - alpha)
        if np.isinf(b):
            c = integrate.quad(p, hi_start, np.inf, weight="cos", wvar=1.0, limlst=200)[0]
            s = integrate.quad(p, hi_start, np.inf, weight="sin", wvar=1.0, limlst=200)[0]
            mass = hi_start ** -alpha / alpha
            first = hi_start ** (1 - alpha) / (alpha - 1) if centred else 0.0
        else:
            c = integrate.quad(p, hi_start, b, weight="cos", wvar=1.0, limit=2000)[0]
            s = integrate.quad(p, hi_start, b, weight="sin", wvar=1.0, limit=2000)[0]
            mass = (hi_start ** -alpha - b ** -alpha) / alpha
            first = ((hi_start ** (1 - alpha) - b ** (1 - alpha)) / (alpha - 1)) if centred else 0.0
        re += c - mass
        im += s - first
    if not (np.isfinite(re) and np.isfinite(im)):
        raise QuadratureFailure("Levy-measure quadrature failed")
    return re, im


def _power_side(alpha, lo, hi, s):
    """int_lo^hi (e^{isy} - 1 - i s y c) y^(-1-alpha) dy for s > 0."""
    re, im = _power_pieces(alpha, s * lo, s * hi)
    return s ** alpha * complex(re, im)


def levy_exponent(basis: LevyBasisSpec, s) -> np.ndarray:
    """psi(s) of the basis, elementwise; numeric for the non-stable kinds."""
    s = np.atleast_1d(np.asarray(s, float))
    if basis.strictly_stable:
        return stable_exponent(basis, s)
    a = basis.alpha
    if basis.kind == TRUNCATED:
        lo, hi, kp, km = 0.0, 1.0, 1.0, 1.0
    elif basis.kind == COMPOUND:
        lo, hi = basis.tail_scale, np.inf
        k = basis.rate * a * basis.tail_scale ** a
        kp, km = k * basis.p_plus, k * (1 - basis.p_plus)
    else:
        raise ParameterError(f"no Levy exponent for {basis.kind}")
    out = np.zeros(s.shape, complex)
    for i, x in enumerate(s):
        if x == 0:
            continue
        J = _power_side(a, lo, hi, abs(x))
        val = kp * J + km * np.conj(J)
        out[i] = val if x > 0 else np.conj(val)
    return out


def _interpolated_exponent(basis: LevyBasisSpec, s: np.ndarray, per_decade: int = 24):
    """psi on many arguments via a cubic spline of psi(s)/s^alpha in log s."""
    s = np.asarray(s, float)
    out = np.zeros(s.shape, complex)
    nz = s != 0
    if not np.any(nz):
        return out
    mag = np.abs(s[nz])
    lo, hi = np.log10(mag.min()), np.log10(mag.max())
    n = max(8, int(np.ceil((hi - lo) * per_decade)) + 1)
    grid = np.logspace(lo - 0.01, hi + 0.01, n)
    vals = levy_exponent(basis, grid) / grid ** basis.alpha
    re = interpolate.CubicSpline(np.log(grid), vals.real)
    im = interpolate.CubicSpline(np.log(grid), vals.imag)
    z = (re(np.log(mag)) + 1j * im(np.log(mag))) * mag ** basis.alpha
    z = np.where(s[nz] > 0, z, np.conj(z))
    out[nz] = z
    return out


def id_integral_cf(f, basis: LevyBasisSpec, theta: Sequence[float] = DEFAULT_THETA, weights=None,
                   **mesh_kw) -> CfProfile:
    """CF of int f dM for an infinitely divisible basis M, by quadrature over cells and
    over the Levy measure."""
    W, A = weights if weights is not None else integrand_weights(f, alpha=basis.alpha, **mesh_kw)
    W = np.asarray(W, float).ravel()
    A = np.asarray(A, float).ravel()
    theta = np.atleast_1d(np.asarray(theta, float))
    expo = np.empty(theta.size, complex)
    for k, th in enumerate(theta):
        gauss = -0.5 * basis.sigma ** 2 * th ** 2 * np.sum(A * W ** 2) if basis.kind != STABLE else 0.0
        if basis.kind == GAUSSIAN:
            expo[k] = gauss
        elif basis.strictly_stable:
            expo[k] = np.sum(A * stable_exponent(basis, th * W))
        else:
            expo[k] = np.sum(A * _interpolated_exponent(basis, th * W))
    if basis.symmetric:
        expo = expo.real + 0j
    return CfProfile(theta, np.exp(expo), NUMERIC)


# empirical side ---------------------------------------------------------------

def empirical_cf(samples, theta: Sequence[float] = DEFAULT_THETA) -> CfProfile:
    x = np.asarray(samples, float).ravel()
    if x.size < 100:
        raise TooFewSamples("an empirical CF needs at least 100 samples")
    theta = np.asarray(theta, float)
    return CfProfile(theta, np.exp(1j * np.outer(theta, x)).mean(axis=1), EMPIRICAL)


def cf_distance(a: CfProfile, b: CfProfile) -> float:
    """Sup over the common theta grid of |a - b|."""
    if a.theta.shape != b.theta.shape or not np.allclose(a.theta, b.theta):
        raise ParameterError("CF profiles live on different theta grids")
    return float(np.max(np.abs(a.values - b.values)))


# L_alpha convergence diagnostic ----------------------------------------------

def rescaled_function(f_lam: Callable, lam: float, mu, alpha: float) -> Callable:
    """f_dagger(u) = lam^((mu1 + mu2)/alpha) f_lam(lam^mu1 u1, lam^mu2 u2)."""
    c = lam ** ((mu[0] + mu[1]) / alpha)
    s1, s2 = lam ** mu[0], lam ** mu[1]
    return lambda u1, u2: c * f_lam(s1 * np.asarray(u1), s2 * np.asarray(u2))


def lalpha_convergence_check(f_family: Callable[[float], Callable], h: Callable, alpha: float, mu,
                             lambdas: Sequence[float], breaks1=(0.0,), breaks2=(0.0,), q=(1.0, 1.0),
                             singular=(), opts: Optional[MeshOptions] = None) -> dict:
    """Table of ||f_dagger_lambda - h||_alpha over a lambda-ladder.

    `f_family(lam)` returns the unscaled integrand f_lambda; breakpoints and
    singular points refer to the rescaled coordinates. Verdict passes when the
    final norm is below 10% of the first and the Spearman correlation of norm
    against ladder position is below -0.9 (an identically zero sequence passes).
    """
    opts = opts or MeshOptions(fine=64, tol=1e-3)
    norms = []
    hnorm = None
    for lam in lambdas:
        fd = rescaled_function(f_family(lam), lam, mu, alpha)
        diff = lambda u1, u2, fd=fd: fd(u1, u2) - h(u1, u2)
        mesh, W = build_mesh([diff, h], breaks1, breaks2, q, alpha, singular, opts)
        n = alpha_norms(W, mesh.areas(), alpha)
        if not np.all(np.isfinite(n)):
            raise NormDivergence("alpha-norm is not finite")
        norms.append(float(n[0] ** (1 / alpha)))
        hnorm = float(n[1] ** (1 / alpha))
    norms = np.array(norms)
    zero = bool(np.all(norms <= 1e-12 * max(hnorm, 1e-300)))
    if zero:
        rho, ok = float("nan"), True
    else:
        rho = float(stats.spearmanr(np.arange(norms.size), norms)[0])
        ok = bool(norms[-1] < 0.1 * norms[0] and rho < -0.9)
    return {"lambdas": [float(x) for x in lambdas], "norms": norms.tolist(), "h_norm": hnorm,
            "spearman": rho, "identically_zero": zero, "passed": ok}
