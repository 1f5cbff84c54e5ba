"""Infinitely divisible random measures on rectangular cells.

A basis M assigns to a cell of area A an infinitely divisible variable with
log-characteristic function A * psi(theta). Four kinds are provided:

* Gaussian(sigma): psi = -sigma^2 theta^2 / 2 (alpha = 2)
* Stable(alpha, c+, c-): psi = -|theta|^alpha omega_alpha(theta)
* TruncatedStable(alpha): Levy density |y|^(-1-alpha) on |y| <= 1
* CompoundPoissonPareto(alpha, rate, tail_scale): finitely many Pareto jumps
"""
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import rng as rngmod
from .errors import ConfigError, InvalidArea, ParameterError
from .grid import GridField

GAUSSIAN = "Gaussian"
STABLE = "Stable"
TRUNCATED = "TruncatedStable"
COMPOUND = "CompoundPoissonPareto"
KINDS = (GAUSSIAN, STABLE, TRUNCATED, COMPOUND)

# expected number of explicitly simulated jumps per cell for the truncated measure
JUMPS_PER_CELL = 64
CELL_BUDGET = 50_000_000


@dataclass(frozen=True)
class LevyBasisSpec:
    kind: str
    alpha: float = 2.0
    sigma: float = 0.0
    c_plus: float = 0.0
    c_minus: float = 0.0
    rate: float = 1.0
    tail_scale: float = 1.0
    p_plus: float = 0.5

    def __post_init__(self):
        a = self.alpha
        if self.kind not in KINDS:
            raise ParameterError(f"unknown basis kind {self.kind!r}")
        if not 0 < a <= 2:
            raise ParameterError(f"alpha must lie in (0,2], got {a}")
        if self.kind == GAUSSIAN:
            if a != 2 or self.sigma < 0:
                raise ParameterError("Gaussian basis needs alpha = 2 and sigma >= 0")
        elif self.kind == STABLE:
            if a == 2:
                if self.sigma <= 0:
                    raise ParameterError("Stable basis with alpha = 2 needs sigma > 0")
            elif self.c_plus < 0 or self.c_minus < 0 or self.c_plus + self.c_minus <= 0:
                raise ParameterError("need c+, c- >= 0 with c+ + c- > 0")
        elif self.kind == TRUNCATED:
            if a >= 2:
                raise ParameterError("TruncatedStable needs alpha < 2")
            object.__setattr__(self, "c_plus", 1 / a)
            object.__setattr__(self, "c_minus", 1 / a)
        elif self.kind == COMPOUND:
            if a >= 2 or self.rate <= 0 or self.tail_scale <= 0 or not 0 <= self.p_plus <= 1:
                raise ParameterError("CompoundPoissonPareto needs alpha < 2, rate > 0, tail_scale > 0")
            s = self.rate * self.tail_scale ** a
            object.__setattr__(self, "c_plus", s * self.p_plus)
            object.__setattr__(self, "c_minus", s * (1 - self.p_plus))
        if a == 1 and self.kind != GAUSSIAN and self.c_plus != self.c_minus:
            raise ParameterError("alpha = 1 requires a symmetric Levy measure (c+ = c-)")

    # constructors
    @classmethod
    def gaussian(cls, sigma: float = 1.0):
        return cls(GAUSSIAN, 2.0, sigma=sigma)

    @classmethod
    def stable(cls, alpha: float, c_plus: float = 1.0, c_minus: float = 1.0, sigma: float = 1.0):
        """alpha-stable basis; at alpha = 2 the Gaussian with variance sigma^2 per unit area."""
        if alpha == 2:
            return cls(STABLE, 2.0, sigma=sigma)
        return cls(STABLE, alpha, c_plus=c_plus, c_minus=c_minus)

    @classmethod
    def truncated_stable(cls, alpha: float):
        return cls(TRUNCATED, alpha)

    @classmethod
    def compound_poisson(cls, alpha: float, rate: float = 1.0, tail_scale: float = 1.0, p_plus: float = 0.5):
        return cls(COMPOUND, alpha, rate=rate, tail_scale=tail_scale, p_plus=p_plus)

    @property
    def gaussian_like(self) -> bool:
        return self.alpha == 2

    @property
    def strictly_stable(self) -> bool:
        """Cell variables are exact rescalings of one standard law."""
        return self.kind in (GAUSSIAN, STABLE)

    @property
    def symmetric(self) -> bool:
        return self.gaussian_like or self.c_plus == self.c_minus

    def omega(self, theta):
        """Stability factor omega_alpha(theta) of the limit measure W_alpha."""
        theta = np.asarray(theta, float)
        a = self.alpha
        if a == 2:
            return np.full(theta.shape, self.sigma ** 2 / 2, dtype=complex)
        cp, cm = self.c_plus, self.c_minus
        if a == 1:
            return np.full(theta.shape, (cp + cm) * np.pi / 2, dtype=complex)
        k = special.gamma(2 - a) / (1 - a)
        return k * ((cp + cm) * np.cos(np.pi * a / 2)
                    - 1j * (cp - cm) * np.sign(theta) * np.sin(np.pi * a / 2))

    def tau(self, y):
        """Centering function used in the Levy-Khintchine exponent."""
        y = np.asarray(y, float)
        if self.alpha > 1:
            return y
        if self.alpha == 1:
            return y * (np.abs(y) <= 1)
        return np.zeros_like(y)

    def stable_limit(self) -> "LevyBasisSpec":
        """The alpha-stable measure W_alpha sharing this basis' omega_alpha."""
        if self.strictly_stable:
            return self
        return LevyBasisSpec(STABLE, self.alpha, c_plus=self.c_plus, c_minus=self.c_minus)

    # strictly stable cells are scale(A) * standard variate
    def cell_scale(self, area):
        area = np.asarray(area, float)
        a = self.alpha
        if a == 2:
            return self.sigma * np.sqrt(area)
        if not self.strictly_stable:
            raise ParameterError(f"{self.kind} cells are not rescalings of one law")
        return (area * self.omega(1.0).real) ** (1 / a)

    @property
    def beta(self) -> float:
        if self.alpha == 2:
            return 0.0
        return (self.c_plus - self.c_minus) / (self.c_plus + self.c_minus)

    def unit_variates(self, gen: np.random.Generator, n: int) -> np.ndarray:
        """Standard variates S with M(cell) = cell_scale(area) * S in law."""
        if self.alpha == 2:
            return gen.standard_normal(n)
        return standard_stable(self.alpha, self.beta, gen, n)

    def to_config(self) -> dict:
        p = {"alpha": self.alpha}
        if self.kind == GAUSSIAN:
            p = {"sigma": self.sigma}
        elif self.kind == STABLE:
            p.update(sigma=self.sigma) if self.alpha == 2 else p.update(c_plus=self.c_plus, c_minus=self.c_minus)
        elif self.kind == COMPOUND:
            p.update(rate=self.rate, tail_scale=self.tail_scale, p_plus=self.p_plus)
        return {"kind": self.kind, "params": p}


def basis_from_config(cfg: dict) -> LevyBasisSpec:
    kind = cfg.get("kind")
    p = dict(cfg.get("params", {}))
    try:
        if kind == GAUSSIAN:
            return LevyBasisSpec.gaussian(**p)
        if kind == STABLE:
            return LevyBasisSpec.stable(**p)
        if kind == TRUNCATED:
            return LevyBasisSpec.truncated_stable(**p)
        if kind == COMPOUND:
            return LevyBasisSpec.compound_poisson(**p)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {kind}: {exc}") from exc
    raise ConfigError(f"unknown basis kind {kind!r}")


def standard_stable(alpha: float, beta: float, gen: np.random.Generator, n: int) -> np.ndarray:
    """Chambers-Mallows-Stuck draws with characteristic function
    exp{-|t|^alpha (1 - i beta sgn(t) tan(pi alpha/2))} (for alpha = 1, beta = 0: exp{-|t|}).
    """
    V = gen.uniform(-np.pi / 2, np.pi / 2, n)
    W = gen.standard_exponential(n)
    if alpha == 1:
        return np.tan(V)
    zeta = -beta * np.tan(np.pi * alpha / 2)
    xi = np.arctan(-zeta) / alpha
    return ((1 + zeta * zeta) ** (1 / (2 * alpha)) * np.sin(alpha * (V + xi)) / np.cos(V) ** (1 / alpha)
            * (np.cos(V - alpha * (V + xi)) / W) ** ((1 - alpha) / alpha))


def truncation_level(alpha: float, area):
    """Small-jump cutoff eps for the truncated measure: about JUMPS_PER_CELL jumps above eps per cell."""
    area = np.asarray(area, float)
    return (1 + JUMPS_PER_CELL * alpha / (2 * area)) ** (-1 / alpha)


def _sum_by_cell(counts, jumps, n):
    idx = np.repeat(np.arange(n), counts)
    return np.bincount(idx, weights=jumps, minlength=n)


def sample_cells(spec: LevyBasisSpec, area, gen: np.random.Generator) -> np.ndarray:
    """Independent draws of M(cell) for cells of the given areas."""
    area = np.atleast_1d(np.asarray(area, float))
    if np.any(~(area > 0)):
        raise InvalidArea("cell areas must be positive")
    n = area.size
    a = spec.alpha
    if spec.strictly_stable:
        return spec.cell_scale(area) * spec.unit_variates(gen, n)
    if spec.kind == TRUNCATED:
        eps = truncation_level(a, area)
        lam = area * 2 * (eps ** -a - 1) / a
        counts = gen.poisson(lam)
        tot = int(counts.sum())
        e_rep = np.repeat(eps, counts)
        u = gen.uniform(size=tot)
        mag = (1 + u * (e_rep ** -a - 1)) ** (-1 / a)
        signs = np.where(gen.uniform(size=tot) < 0.5, -1.0, 1.0)
        big = _sum_by_cell(counts, signs * mag, n)
        small_var = area * 2 * eps ** (2 - a) / (2 - a)
        # symmetric measure: the centering terms vanish
        return big + np.sqrt(small_var) * gen.standard_normal(n)
    # compound Poisson with Pareto jumps
    counts = gen.poisson(spec.rate * area)
    tot = int(counts.sum())
    mag = spec.tail_scale * gen.uniform(size=tot) ** (-1 / a)
    signs = np.where(gen.uniform(size=tot) < spec.p_plus, 1.0, -1.0)
    out = _sum_by_cell(counts, signs * mag, n)
    if a > 1:
        out -= area * spec.rate * (2 * spec.p_plus - 1) * a * spec.tail_scale / (a - 1)
    return out


def sample_cell(spec: LevyBasisSpec, area: float, gen: np.random.Generator) -> float:
    return float(sample_cells(spec, [area], gen)[0])


def noise_grid(spec: LevyBasisSpec, grid, seed: int, replication: int = 0,
               budget: int = CELL_BUDGET) -> np.ndarray:
    """n1 x n2 independent cell variables of area h1*h2; row i uses its own stream."""
    n1, n2, h1, h2 = grid
    n1, n2 = int(n1), int(n2)
    if n1 < 1 or n2 < 1 or h1 <= 0 or h2 <= 0:
        raise ParameterError("grid needs n_i >= 1 and h_i > 0")
    if n1 * n2 > budget:
        raise OverflowError(f"{n1}x{n2} cells exceed the budget of {budget}")
    area = np.full(n2, h1 * h2)
    out = np.empty((n1, n2))
    for i in range(n1):
        out[i] = sample_cells(spec, area, rngmod.stream(seed, rngmod.NOISE_GRID, replication, i))
    return out


def levy_sheet(spec: LevyBasisSpec, grid, seed: int, replication: int = 0) -> GridField:
    """Cumulative sums M((0,t]) on the lattice points (i h1, j h2), zero on the axes."""
    n1, n2, h1, h2 = grid
    noise = noise_grid(spec, grid, seed, replication)
    vals = np.zeros((int(n1) + 1, int(n2) + 1))
    vals[1:, 1:] = noise.cumsum(0).cumsum(1)
    meta = {"basis": spec.to_config(), "seed": int(seed), "replication": int(replication),
            "representation": "LevySheet"}
    return GridField(vals, (0.0, 0.0), (float(h1), float(h2)), meta, noise=noise)
