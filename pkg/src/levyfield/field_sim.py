"""Discretized stochastic integration of moving-average fields.

Two routes are provided:

* `simulate_field` synthesizes a whole lattice from one noise grid. The raw
  convolution Z(s) = sum_c g(s - u_c) M(c) is computed by FFT from a
  translation-indexed kernel table; fields and increments are combinations of Z.
* `increment_samples` draws increments over a single (shrinking) rectangle on a
  graded mesh refined around its corners. This is the path used by the
  scaling experiments.
"""
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import signal

from . import rng as rngmod
from .errors import OutOfDomain, ParameterError, TailTruncationError, AssumptionViolation
from .exponents import validate_assumptions
from .grid import GridField
from .kernels import ALL_ZERO, G12_EQUALS_G, G12_MINUS_G, Kernel, ordinary_increment_g, rect_increment_g
from .levy_basis import CELL_BUDGET, LevyBasisSpec, noise_grid
from .quadrature import MeshOptions, build_mesh, cell_average, refined_average, sample_integrals

RECT_SHEET = "RectIncrementSheet"
ORDINARY = "OrdinaryIncrementField"
FIELD = "Field"
REPRESENTATIONS = (RECT_SHEET, ORDINARY, FIELD)


@dataclass(frozen=True)
class UniformLattice:
    """Output points (i h1, j h2), 0 <= i <= n1, 0 <= j <= n2, and integration cells of
    size (h1/fine, h2/fine) covering the output box padded by pad_i cells on each side."""

    n1: int
    n2: int
    h1: float
    h2: float
    pad1: int
    pad2: int
    fine: int = 1

    @property
    def d1(self):
        return self.h1 / self.fine

    @property
    def d2(self):
        return self.h2 / self.fine

    @property
    def cells(self):
        return (self.n1 * self.fine + 2 * self.pad1, self.n2 * self.fine + 2 * self.pad2)

    def cell_edges(self):
        m1, m2 = self.cells
        e1 = (np.arange(m1 + 1) - self.pad1) * self.d1
        e2 = (np.arange(m2 + 1) - self.pad2) * self.d2
        return e1, e2


def _avg_near_origin(kernel, lo1, hi1, lo2, hi2):
    return refined_average(kernel.g, lo1, hi1, lo2, hi2)


def kernel_table(kernel: Kernel, lat: UniformLattice) -> np.ndarray:
    """T[m1, m2] = weight of g for argument cell [(m-1)d, m d], m ranging over all offsets."""
    f, (m1, m2) = lat.fine, lat.cells
    k1 = np.arange(-lat.n1 * f - lat.pad1 + 1, lat.n1 * f + lat.pad1 + 1)
    k2 = np.arange(-lat.n2 * f - lat.pad2 + 1, lat.n2 * f + lat.pad2 + 1)
    A1, A2 = np.meshgrid((k1 - 0.5) * lat.d1, (k2 - 0.5) * lat.d2, indexing="ij")
    T = kernel.g(A1, A2).astype(float)
    if kernel.unbounded:
        i1 = np.nonzero((k1 >= -1) & (k1 <= 2))[0]
        i2 = np.nonzero((k2 >= -1) & (k2 <= 2))[0]
        I1, I2 = np.meshgrid(i1, i2, indexing="ij")
        I1, I2 = I1.ravel(), I2.ravel()
        T[I1, I2] = _avg_near_origin(kernel, (k1[I1] - 1) * lat.d1, k1[I1] * lat.d1,
                                     (k2[I2] - 1) * lat.d2, k2[I2] * lat.d2)
    return T, k1[0], k2[0]


def raw_convolution_fft(kernel: Kernel, lat: UniformLattice, noise: np.ndarray) -> np.ndarray:
    """Z at the output points via FFT convolution."""
    T, k1min, k2min = kernel_table(kernel, lat)
    C = signal.fftconvolve(noise, T, mode="full")
    f = lat.fine
    p1 = np.arange(lat.n1 + 1) * f + lat.pad1 - k1min
    p2 = np.arange(lat.n2 + 1) * f + lat.pad2 - k2min
    return C[np.ix_(p1, p2)]


def point_weights(kernel: Kernel, lat: UniformLattice, s) -> np.ndarray:
    """Weights of g(s - u_c) over all integration cells for one point s (direct route)."""
    e1, e2 = lat.cell_edges()
    lo1, hi1 = s[0] - e1[1:], s[0] - e1[:-1]
    lo2, hi2 = s[1] - e2[1:], s[1] - e2[:-1]
    A1, A2 = np.meshgrid(0.5 * (lo1 + hi1), 0.5 * (lo2 + hi2), indexing="ij")
    W = kernel.g(A1, A2).astype(float)
    if kernel.unbounded:
        near1 = np.nonzero((hi1 > -1.5 * lat.d1) & (lo1 < 1.5 * lat.d1))[0]
        near2 = np.nonzero((hi2 > -1.5 * lat.d2) & (lo2 < 1.5 * lat.d2))[0]
        if near1.size and near2.size:
            I1, I2 = np.meshgrid(near1, near2, indexing="ij")
            I1, I2 = I1.ravel(), I2.ravel()
            W[I1, I2] = _avg_near_origin(kernel, lo1[I1], hi1[I1], lo2[I2], hi2[I2])
    return W


def raw_convolution_direct(kernel: Kernel, lat: UniformLattice, noise: np.ndarray, points) -> np.ndarray:
    """Z(s) = sum_c w_c(s) M(c) by explicit summation, one point at a time."""
    return np.array([np.sum(point_weights(kernel, lat, s) * noise) for s in points])


def _combine(Z, representation, initial_functions):
    if representation == RECT_SHEET or (representation == FIELD and initial_functions == G12_EQUALS_G):
        return Z - Z[:1, :] - Z[:, :1] + Z[0, 0]
    if representation == ORDINARY or (representation == FIELD and initial_functions == G12_MINUS_G):
        return Z - Z[0, 0]
    if representation == FIELD and initial_functions == ALL_ZERO:
        return Z.copy()
    raise ParameterError(f"unknown representation {representation!r}")


def default_truncation_radius(kernel: Kernel, basis: LevyBasisSpec, extent, representation=RECT_SHEET,
                              eps_tail: float = 1e-4) -> float:
    """Radius beyond which the alpha-norm of the increment kernel over the whole
    output box changes by less than eps_tail under doubling."""
    T = (float(extent[0]), float(extent[1]))
    if representation == RECT_SHEET:
        f = lambda u1, u2: rect_increment_g(kernel, u1, u2, T)
        sing = [(0.0, 0.0), T, (0.0, T[1]), (T[0], 0.0)]
    else:
        f = lambda u1, u2: ordinary_increment_g(kernel, u1, u2, T)
        sing = [(0.0, 0.0), T]
    q = kernel.q if kernel.has_power_form else (1.0, 1.0)
    try:
        mesh, _ = build_mesh([f], [0.0, T[0]], [0.0, T[1]], q, basis.alpha,
                             sing if kernel.unbounded else (), MeshOptions(fine=8, tol=eps_tail, max_doublings=30))
    except Exception as exc:
        raise TailTruncationError(f"tail tolerance {eps_tail} cannot be met: {exc}") from exc
    return float(max(-mesh.e1[0], mesh.e1[-1] - T[0], -mesh.e2[0], mesh.e2[-1] - T[1]))


def _check_assumptions(kernel, basis, representation):
    if not kernel.has_power_form:
        return
    mode = "rectangent" if representation == RECT_SHEET else "tangent"
    if representation == FIELD:
        return
    v = validate_assumptions(kernel.profile(basis.alpha), mode)
    # P = 1 etc only matter for limit theorems, not for the field itself
    v = [x for x in v if "≠" not in x]
    if v:
        raise AssumptionViolation("; ".join(v))


def simulate_field(kernel: Kernel, basis: LevyBasisSpec, grid, truncation_radius: Optional[float] = None,
                   seed: int = 0, representation: str = RECT_SHEET, fine: int = 1, replication: int = 0,
                   eps_tail: float = 1e-4, budget: int = CELL_BUDGET) -> GridField:
    """Field on the lattice (i h1, j h2), i <= n1, j <= n2, driven by one noise grid.

    The integration cells have size (h1/fine, h2/fine) and cover the output box
    padded by `truncation_radius`.
    """
    n1, n2, h1, h2 = grid
    n1, n2, fine = int(n1), int(n2), int(fine)
    if n1 < 1 or n2 < 1 or h1 <= 0 or h2 <= 0 or fine < 1:
        raise ParameterError("grid needs n_i >= 1, h_i > 0 and fine >= 1")
    if representation not in REPRESENTATIONS:
        raise ParameterError(f"unknown representation {representation!r}")
    _check_assumptions(kernel, basis, representation)
    if truncation_radius is None:
        truncation_radius = default_truncation_radius(kernel, basis, (n1 * h1, n2 * h2), representation, eps_tail)
    d1, d2 = h1 / fine, h2 / fine
    lat = UniformLattice(n1, n2, float(h1), float(h2), int(np.ceil(truncation_radius / d1)),
                         int(np.ceil(truncation_radius / d2)), fine)
    m1, m2 = lat.cells
    if m1 * m2 > budget:
        raise TailTruncationError(f"integration lattice {m1}x{m2} exceeds the cell budget; "
                                  "lower eps_tail or pass a smaller truncation radius")
    noise = noise_grid(basis, (m1, m2, d1, d2), seed, replication, budget)
    Z = raw_convolution_fft(kernel, lat, noise)
    values = _combine(Z, representation, kernel.initial_functions)
    meta = {"kernel": _kernel_meta(kernel), "basis": basis.to_config(), "seed": int(seed),
            "replication": int(replication), "truncation_radius": float(truncation_radius),
            "representation": representation, "fine": fine}
    return GridField(values, (0.0, 0.0), (float(h1), float(h2)), meta, raw=Z, noise=noise, lattice=lat)


def _kernel_meta(kernel):
    try:
        return kernel.to_config()
    except Exception:
        return {"family": kernel.family}


def rect_increments(field: GridField) -> np.ndarray:
    """Increments over the lattice cells, computed from the raw convolution so that
    initial functions never enter."""
    Z = field.raw if field.raw is not None else field.values
    return Z[1:, 1:] - Z[:-1, 1:] - Z[1:, :-1] + Z[:-1, :-1]


def _corners(t0, lam, gamma, t):
    r1, r2 = lam * t[0], lam ** gamma * t[1]
    return (t0[0], t0[1]), (t0[0] + r1, t0[1] + r2), r1, r2


def _field_Z(field: GridField, kernel: Kernel, s):
    """Z at s, from the lattice when s is a lattice point, else by direct summation."""
    lat = field.lattice
    i, j = s[0] / lat.h1, s[1] / lat.h2
    ri, rj = round(i), round(j)
    if abs(i - ri) < 1e-9 and abs(j - rj) < 1e-9 and 0 <= ri <= lat.n1 and 0 <= rj <= lat.n2:
        return field.raw[ri, rj]
    return raw_convolution_direct(kernel, lat, field.noise, [s])[0]


def anisotropic_increment(field: GridField, kernel: Kernel, t0, lam: float, gamma: float, t,
                          mode: str = "rectangular") -> float:
    """Rectangular increment X((t0, t0 + diag(lam, lam^gamma) t]) or ordinary increment
    X(t0 + ...) - X(t0) of a simulated field."""
    if field.lattice is None:
        raise ParameterError("field carries no noise; simulate it in this session")
    (a1, a2), (b1, b2), _, _ = _corners(t0, lam, gamma, t)
    lat = field.lattice
    top1, top2 = lat.n1 * lat.h1, lat.n2 * lat.h2
    eps = 1e-12 * max(top1, top2)
    if min(a1, a2, b1, b2) < -eps or max(a1, b1) > top1 + eps or max(a2, b2) > top2 + eps:
        raise OutOfDomain("increment leaves the simulated box")
    Z = lambda p: _field_Z(field, kernel, p)
    if mode == "rectangular":
        return float(Z((b1, b2)) - Z((a1, b2)) - Z((b1, a2)) + Z((a1, a2)))
    if mode == "ordinary":
        return float(Z((b1, b2)) - Z((a1, a2)))
    raise ParameterError(f"unknown mode {mode!r}")


# graded-mesh route ----------------------------------------------------------

def increment_kernel(kernel: Kernel, t0, r, mode: str):
    """Integrand u -> weight of the increment with lower corner t0 and sides r."""
    a1, a2 = t0
    if mode == "rectangular":
        return lambda u1, u2: rect_increment_g(kernel, u1 - a1, u2 - a2, r)
    if mode == "ordinary":
        return lambda u1, u2: ordinary_increment_g(kernel, u1 - a1, u2 - a2, r)
    raise ParameterError(f"unknown mode {mode!r}")


def increment_mesh(kernel: Kernel, alpha: float, t0, lam: float, gamma: float, points: Sequence,
                   mode: str = "rectangular", opts: MeshOptions = MeshOptions()):
    """Graded mesh and weights for the increments at `points` (one column each).

    Increment kernels depend on u only through u - t0, so the mesh is built in
    coordinates relative to t0; this keeps tiny rectangles resolvable in floating
    point. The returned mesh is in those local coordinates.
    """
    zero = (0.0, 0.0)
    funcs, sing, b1, b2 = [], [], {0.0}, {0.0}
    for t in points:
        r = (lam * t[0], lam ** gamma * t[1])
        funcs.append(increment_kernel(kernel, zero, r, mode))
        corners = [r]
        if mode == "rectangular":
            corners += [(r[0], 0.0), (0.0, r[1])]
        for c in corners:
            b1.add(c[0])
            b2.add(c[1])
        sing += corners
    sing.append(zero)
    q = kernel.q if kernel.has_power_form else (1.0, 1.0)
    return build_mesh(funcs, sorted(b1), sorted(b2), q, alpha, sing if kernel.unbounded else (), opts)


def increment_samples(kernel: Kernel, basis: LevyBasisSpec, t0, lam: float, gamma: float, points: Sequence,
                      n_reps: int, seed: int, key: Sequence[int] = (), mode: str = "rectangular",
                      opts: MeshOptions = MeshOptions(), threads: int = 1) -> np.ndarray:
    """Joint draws of the increments at `points`, shape (n_reps, len(points))."""
    mesh, W = increment_mesh(kernel, basis.alpha, t0, lam, gamma, points, mode, opts)
    return sample_integrals(W, mesh.areas(), basis, seed, (rngmod.INCREMENT, *key), n_reps, threads)


def increment_variance(kernel: Kernel, t0, lam, gamma, t, mode="rectangular", sigma=1.0,
                       opts: MeshOptions = MeshOptions()) -> float:
    """Variance of the discretized increment under a Gaussian basis."""
    mesh, W = increment_mesh(kernel, 2.0, t0, lam, gamma, [t], mode, opts)
    return float(sigma ** 2 * np.sum(W[:, 0] ** 2 * mesh.areas()))


def direct_increment_sample(kernel: Kernel, basis: LevyBasisSpec, t0, lam: float, gamma: float, t,
                            fine_factor: int = 128, seed: int = 0, mode: str = "rectangular",
                            replication: int = 0, field: Optional[GridField] = None) -> float:
    """One increment draw by direct summation.

    With `field`, the field's own lattice and noise are reused (so the value equals
    `anisotropic_increment`); otherwise a graded mesh with `fine_factor` cells across
    the smallest side of the rectangle is built around it.
    """
    if field is not None:
        lat = field.lattice
        (a1, a2), (b1, b2), _, _ = _corners(t0, lam, gamma, t)
        Z = lambda p: raw_convolution_direct(kernel, lat, field.noise, [p])[0]
        if mode == "rectangular":
            return float(Z((b1, b2)) - Z((a1, b2)) - Z((b1, a2)) + Z((a1, a2)))
        return float(Z((b1, b2)) - Z((a1, a2)))
    if fine_factor < 1:
        raise ParameterError("fine_factor must be >= 1")
    opts = MeshOptions(fine=int(fine_factor))
    draws = increment_samples(kernel, basis, t0, lam, gamma, [t], replication + 1, seed, (0,), mode, opts)
    return float(draws[replication, 0])
