"""Graded tensor meshes for discretized stochastic integrals.

An integral int f dM is approximated by sum_c f_c M(c) over the cells c of a
tensor mesh. The mesh is fine near a set of breakpoints on each axis (the
coordinates of the kernel's singular points) and grows geometrically away from
them, so shrinking rectangles cost only logarithmically many cells. Cells
within one cell of a singular point use the cell average of f instead of the
midpoint value.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import rng as rngmod
from .errors import NormDivergence, ResolutionError, SingularCellError
from .levy_basis import LevyBasisSpec, sample_cells

MIN_CELLS_PER_SIDE = 8


def _graded_side(h, length, ratio):
    """Offsets 0 < s_1 < ... < s_m = length with first step h and growth `ratio`."""
    if length <= h:
        return np.array([length])
    steps = [h]
    total = h
    while total < length:
        steps.append(steps[-1] * ratio)
        total += steps[-1]
    s = np.cumsum(steps)
    s = s[s < length]
    if length - s[-1] < 0.5 * (s[-1] - (s[-2] if len(s) > 1 else 0.0)):
        s = s[:-1]
    return np.append(s, length)


def graded_edges(breaks: Sequence[float], h: float, lo: float, hi: float, ratio: float = 1.2) -> np.ndarray:
    """Cell edges on [lo, hi] containing every breakpoint, spacing h next to each."""
    b = np.unique(np.asarray(breaks, float))
    if lo > b[0] or hi < b[-1]:
        raise ValueError("extent must contain all breakpoints")
    pts = [b]
    for left, right in zip(b[:-1], b[1:]):
        half = (right - left) / 2
        if half <= 2 * h:
            n = max(1, int(np.ceil((right - left) / h)))
            pts.append(left + (right - left) * np.arange(1, n) / n)
        else:
            s = _graded_side(h, half, ratio)
            pts.append(left + s)
            pts.append(right - s)
    if lo < b[0]:
        pts.append(b[0] - _graded_side(h, b[0] - lo, ratio))
    if hi > b[-1]:
        pts.append(b[-1] + _graded_side(h, hi - b[-1], ratio))
    e = np.unique(np.concatenate(pts))
    # drop slivers produced by meeting graded sequences
    keep = np.append(np.diff(e) > 1e-9 * h, True)
    keep[-1] = True
    return e[keep | (np.arange(e.size) == 0)]


@dataclass
class TensorMesh:
    e1: np.ndarray
    e2: np.ndarray

    @property
    def shape(self):
        return self.e1.size - 1, self.e2.size - 1

    @property
    def size(self):
        n1, n2 = self.shape
        return n1 * n2

    def centers(self):
        c1 = 0.5 * (self.e1[:-1] + self.e1[1:])
        c2 = 0.5 * (self.e2[:-1] + self.e2[1:])
        U1, U2 = np.meshgrid(c1, c2, indexing="ij")
        return U1.ravel(), U2.ravel()

    def areas(self):
        return np.outer(np.diff(self.e1), np.diff(self.e2)).ravel()


def cell_average(fun, x0, x1, y0, y1, sub):
    """Midpoint-rule average of fun over the rectangles [x0,x1]x[y0,y1] (arrays) on a sub x sub lattice."""
    s = (np.arange(sub) + 0.5) / sub
    X = x0[:, None, None] + (x1 - x0)[:, None, None] * s[None, :, None]
    Y = y0[:, None, None] + (y1 - y0)[:, None, None] * s[None, None, :]
    X, Y = np.broadcast_arrays(X, Y)
    return fun(X, Y).reshape(x0.size, -1).mean(axis=1)


def refined_average(fun, x0, x1, y0, y1, sub=16):
    """Cell average on a sub x sub lattice; refined once more where two levels differ by >1%."""
    coarse = cell_average(fun, x0, x1, y0, y1, sub // 2)
    fine = cell_average(fun, x0, x1, y0, y1, sub)
    bad = np.abs(fine - coarse) > 0.01 * np.abs(fine)
    if np.any(bad):
        fine[bad] = cell_average(fun, x0[bad], x1[bad], y0[bad], y1[bad], 2 * sub)
    if not np.all(np.isfinite(fine)):
        raise SingularCellError("cell averages near a singular point are not finite")
    return fine


def cell_weights(funcs: Sequence[Callable], mesh: TensorMesh, singular: Sequence = (), sub: int = 16):
    """Matrix W (cells x len(funcs)) of midpoint values, with cell averages near `singular` points."""
    U1, U2 = mesh.centers()
    W = np.empty((U1.size, len(funcs)))
    for k, f in enumerate(funcs):
        W[:, k] = f(U1, U2)
    if len(singular):
        n1, n2 = mesh.shape
        idx = set()
        for (s1, s2) in singular:
            i = int(np.searchsorted(mesh.e1, s1))
            j = int(np.searchsorted(mesh.e2, s2))
            for a in range(i - 2, i + 2):
                for b in range(j - 2, j + 2):
                    if 0 <= a < n1 and 0 <= b < n2:
                        idx.add(a * n2 + b)
        if idx:
            idx = np.array(sorted(idx))
            a, b = np.divmod(idx, n2)
            x0, x1, y0, y1 = mesh.e1[a], mesh.e1[a + 1], mesh.e2[b], mesh.e2[b + 1]
            for k, f in enumerate(funcs):
                W[idx, k] = refined_average(f, x0, x1, y0, y1, sub)
    if not np.all(np.isfinite(W)):
        raise SingularCellError("non-finite kernel weights")
    return W


@dataclass(frozen=True)
class MeshOptions:
    """Resolution controls: `fine` cells across the smallest feature, geometric `ratio`,
    relative tolerance `tol` for the tail of the alpha-norm under domain doubling."""

    fine: int = 256
    ratio: float = 1.15
    tol: float = 1e-4
    max_doublings: int = 48
    sub: int = 16


def _feature_scale(breaks1, breaks2, q):
    """Smallest breakpoint gap measured in rho units."""
    cands = []
    for b, qi in ((breaks1, q[0]), (breaks2, q[1])):
        d = np.diff(np.unique(b))
        if d.size:
            cands.append(d.min() ** qi)
    return min(cands) if cands else 1.0


def alpha_norms(W, areas, alpha):
    return (np.abs(W) ** alpha * areas[:, None]).sum(axis=0)


def build_mesh(funcs, breaks1, breaks2, q=(1.0, 1.0), alpha=2.0, singular=(),
               opts: MeshOptions = MeshOptions(), scale=None):
    """Mesh and weights for the integrands `funcs`, with the domain doubled (in rho units)
    until the alpha-norm of every integrand changes by less than opts.tol.

    Returns (mesh, W).
    """
    if opts.fine < MIN_CELLS_PER_SIDE:
        raise ResolutionError(f"need at least {MIN_CELLS_PER_SIDE} cells across the smallest feature")
    breaks1 = np.unique(np.asarray(breaks1, float))
    breaks2 = np.unique(np.asarray(breaks2, float))
    s = _feature_scale(breaks1, breaks2, q) if scale is None else scale
    h1, h2 = s ** (1 / q[0]) / opts.fine, s ** (1 / q[1]) / opts.fine
    c1, c2 = 0.5 * (breaks1[0] + breaks1[-1]), 0.5 * (breaks2[0] + breaks2[-1])
    spread = max(np.abs(breaks1 - c1).max() ** q[0], np.abs(breaks2 - c2).max() ** q[1], s)
    E = 4.0 * spread
    prev = None
    for _ in range(opts.max_doublings):
        R1, R2 = E ** (1 / q[0]), E ** (1 / q[1])
        mesh = TensorMesh(graded_edges(breaks1, h1, c1 - R1, c1 + R1, opts.ratio),
                          graded_edges(breaks2, h2, c2 - R2, c2 + R2, opts.ratio))
        W = cell_weights(funcs, mesh, singular, opts.sub)
        norms = alpha_norms(W, mesh.areas(), alpha)
        if prev is not None:
            ok = np.abs(norms - prev) <= opts.tol * np.maximum(np.abs(norms), 1e-300)
            # components at rounding level next to the others count as settled
            tiny = norms <= 1e-24 * norms.max()
            if np.all(ok | tiny):
                return mesh, W
        prev = norms
        E *= 2.0
    raise NormDivergence("alpha-norm did not settle under domain doubling")


def _pruned(W, areas):
    keep = np.any(W != 0, axis=1)
    return W[keep], areas[keep]


def sample_integrals(W, areas, basis: LevyBasisSpec, seed: int, key: Sequence[int], n_reps: int,
                     threads: int = 1, chunk: int = 64) -> np.ndarray:
    """Draws of sum_c W[c, k] M(c), shape (n_reps, k).

    Replication r uses the stream (seed, *key, r), so results do not depend on
    `threads` or `chunk`.
    """
    W, areas = _pruned(np.asarray(W, float), np.asarray(areas, float))
    out = np.zeros((n_reps, W.shape[1]))
    if W.shape[0] == 0 or n_reps == 0:
        return out
    if basis.alpha == 2 and basis.sigma == 0:
        return out
    stable = basis.strictly_stable
    Ws = W * basis.cell_scale(areas)[:, None] if stable else W
    n = W.shape[0]

    def work(lo):
        hi = min(lo + chunk, n_reps)
        block = np.empty((hi - lo, n))
        for r in range(lo, hi):
            gen = rngmod.stream(seed, *key, r)
            block[r - lo] = basis.unit_variates(gen, n) if stable else sample_cells(basis, areas, gen)
        out[lo:hi] = block @ Ws

    starts = range(0, n_reps, chunk)
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            list(ex.map(work, starts))
    else:
        for lo in starts:
            work(lo)
    return out
