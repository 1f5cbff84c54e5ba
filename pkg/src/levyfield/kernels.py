"""Moving-average kernels g, their small-scale forms g0 and derived limit kernels.

All evaluators are vectorized over arrays t1, t2 (broadcast together).
Supported families:

* FractionalLevy   g(t) = |t|^(H - 2/alpha)
* Matern           Bessel-type kernel with g0(t) = |t|^(2 chi)
* FractionalHeat   damped heat kernel, g0 = rho^chi L with rho = |t1| + t2^2
* QuadrantIndicator  piecewise constant on the four open quadrants
* Custom           user function, partials by central differences
"""
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special

from .errors import ConfigError, DomainError, OriginSingularity, ParameterError, QuadratureFailure
from .exponents import ExponentProfile, derive_exponents

ALL_ZERO = "AllZero"
G12_MINUS_G = "G12MinusG"
G12_EQUALS_G = "G12EqualsG"
INITIAL_FUNCTIONS = (ALL_ZERO, G12_MINUS_G, G12_EQUALS_G)


def bessel_k(nu, x):
    """Modified Bessel function of the second kind K_nu(x) for x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("bessel_k needs x > 0")
    out = special.kv(nu, x)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class RhoForm:
    """Quasi-norm rho(t) = |t1|^q1 + |t2|^q2."""

    q1: float
    q2: float

    def __call__(self, t1, t2):
        return np.abs(t1) ** self.q1 + np.abs(t2) ** self.q2


def rho_power_partials(q1, q2, chi, t1, t2):
    """Analytic partials of rho^chi written as rho^(chi - 1/q_i) * l_i(t).

    Returns (d1, d2, d12).
    """
    t1 = np.asarray(t1, float)
    t2 = np.asarray(t2, float)
    rho = np.abs(t1) ** q1 + np.abs(t2) ** q2
    z1 = np.abs(t1) / rho ** (1 / q1)
    z2 = np.abs(t2) / rho ** (1 / q2)
    l1 = chi * q1 * np.sign(t1) * z1 ** (q1 - 1)
    l2 = chi * q2 * np.sign(t2) * z2 ** (q2 - 1)
    l12 = chi * (chi - 1) * q1 * q2 * np.sign(t1) * np.sign(t2) * z1 ** (q1 - 1) * z2 ** (q2 - 1)
    return (rho ** (chi - 1 / q1) * l1,
            rho ** (chi - 1 / q2) * l2,
            rho ** (chi - 1 / q1 - 1 / q2) * l12)


def _arrays(t1, t2):
    return np.broadcast_arrays(np.asarray(t1, float), np.asarray(t2, float))


class Kernel:
    """Common interface of the kernel families."""

    family = "base"
    alpha = 2.0
    initial_functions = ALL_ZERO

    def g(self, t1, t2):
        raise NotImplementedError

    def g0(self, t1, t2):
        raise NotImplementedError(f"{self.family} kernel has no power-law limit form")

    def partials(self, t1, t2):
        return _fd_partials(self.g, t1, t2)

    def partials0(self, t1, t2):
        return _fd_partials(self.g0, t1, t2)

    @property
    def has_power_form(self) -> bool:
        """True when g0 = rho^chi L is available (orders q and exponent chi known)."""
        return getattr(self, "q", None) is not None and getattr(self, "chi", None) is not None

    @property
    def unbounded(self) -> bool:
        chi = getattr(self, "chi", None)
        return chi is not None and chi < 0

    def profile(self, alpha: Optional[float] = None) -> ExponentProfile:
        if not self.has_power_form:
            raise ParameterError(f"{self.family} kernel has no exponent profile")
        return derive_exponents(self.q[0], self.q[1], self.chi, self.alpha if alpha is None else alpha)

    def _check_origin(self, t1, t2):
        if self.unbounded and np.any((t1 == 0) & (t2 == 0)):
            raise OriginSingularity(f"{self.family} kernel is singular at the origin")

    def to_config(self) -> dict:
        raise NotImplementedError


def _fd_partials(f, t1, t2):
    """Central differences; first partials use h = 1e-6 max(1,|t|), the mixed one h = 1e-4 max(1,|t|)."""
    t1, t2 = _arrays(t1, t2)
    scale = np.maximum(1.0, np.hypot(t1, t2))
    h = 1e-6 * scale
    d1 = (f(t1 + h, t2) - f(t1 - h, t2)) / (2 * h)
    d2 = (f(t1, t2 + h) - f(t1, t2 - h)) / (2 * h)
    k = 1e-4 * scale
    d12 = (f(t1 + k, t2 + k) - f(t1 + k, t2 - k) - f(t1 - k, t2 + k) + f(t1 - k, t2 - k)) / (4 * k * k)
    return d1, d2, d12


@dataclass(frozen=True)
class FractionalLevy(Kernel):
    """g(t) = |t|^(H - 2/alpha), the isotropic fractional stable moving average."""

    H: float
    alpha: float = 2.0
    initial_functions: str = G12_MINUS_G
    family = "FractionalLevy"

    def __post_init__(self):
        if not 0 < self.H < 1:
            raise ParameterError(f"H must lie in (0,1), got {self.H}")
        if not 0 < self.alpha <= 2:
            raise ParameterError(f"alpha must lie in (0,2], got {self.alpha}")

    @property
    def q(self):
        return (2.0, 2.0)

    @property
    def chi(self):
        return self.H / 2 - 1 / self.alpha

    @property
    def exponent(self):
        return self.H - 2 / self.alpha

    def g(self, t1, t2):
        t1, t2 = _arrays(t1, t2)
        self._check_origin(t1, t2)
        return (t1 * t1 + t2 * t2) ** (self.exponent / 2)

    g0 = g

    def partials(self, t1, t2):
        t1, t2 = _arrays(t1, t2)
        self._check_origin(t1, t2)
        e = self.exponent
        r2 = t1 * t1 + t2 * t2
        base = e * r2 ** (e / 2 - 1)
        return base * t1, base * t2, e * (e - 2) * r2 ** (e / 2 - 2) * t1 * t2

    partials0 = partials

    def to_config(self):
        return {"family": self.family, "params": {"H": self.H, "alpha": self.alpha},
                "initial_functions": self.initial_functions}


@dataclass(frozen=True)
class Matern(Kernel):
    """Bessel-type kernel, g ~ |t|^(2 chi) near the origin and exponentially small far away."""

    chi: float
    c: float = 1.0
    alpha: float = 2.0
    initial_functions: Optional[str] = None
    family = "Matern"

    def __post_init__(self):
        a, chi = self.alpha, self.chi
        if not 0 < a <= 2:
            raise ParameterError(f"alpha must lie in (0,2], got {a}")
        if self.c <= 0:
            raise ParameterError("c must be positive")
        if chi == 0 or not -1 / a < chi < 1 - 1 / a:
            raise ParameterError(f"chi must lie in (-1/alpha, 1-1/alpha) without 0, got {chi}")
        if self.initial_functions is None:
            object.__setattr__(self, "initial_functions", ALL_ZERO if chi < 0 else G12_MINUS_G)

    @property
    def q(self):
        return (2.0, 2.0)

    @property
    def norm(self):
        chi = self.chi
        return 2 ** (1 + chi) / (self.c ** (2 * chi) * special.gamma(-chi))

    def g(self, t1, t2):
        t1, t2 = _arrays(t1, t2)
        self._check_origin(t1, t2)
        chi = self.chi
        x = self.c * np.hypot(t1, t2)
        with np.errstate(invalid="ignore", over="ignore"):
            v = x ** chi * special.kv(chi, x)
        if chi > 0:
            v = np.where(x == 0, special.gamma(chi) * 2 ** (chi - 1), v)
            v = v - special.gamma(chi) * 2 ** (chi - 1)
        v = np.where(x > 700, 0.0 if chi < 0 else -special.gamma(chi) * 2 ** (chi - 1), v)
        return self.norm * v

    def g0(self, t1, t2):
        t1, t2 = _arrays(t1, t2)
        self._check_origin(t1, t2)
        return (t1 * t1 + t2 * t2) ** self.chi

    def partials(self, t1, t2):
        t1, t2 = _arrays(t1, t2)
        self._check_origin(t1, t2)
        chi, c, C = self.chi, self.c, self.norm
        r = np.hypot(t1, t2)
        x = c * r
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            # d/dx [x^nu K_nu(x)] = -x^nu K_{nu-1}(x)
            radial = -C * c * x ** chi * special.kv(chi - 1, x) / r
            d12 = C * c ** 4 * x ** (chi - 2) * special.kv(chi - 2, x) * t1 * t2
        radial = np.where(x > 700, 0.0, radial)
        d12 = np.where(x > 700, 0.0, d12)
        return radial * t1, radial * t2, d12

    def partials0(self, t1, t2):
        t1, t2 = _arrays(t1, t2)
        self._check_origin(t1, t2)
        chi = self.chi
        r2 = t1 * t1 + t2 * t2
        base = 2 * chi * r2 ** (chi - 1)
        return base * t1, base * t2, 4 * chi * (chi - 1) * r2 ** (chi - 2) * t1 * t2

    def to_config(self):
        return {"family": self.family, "params": {"chi": self.chi, "c": self.c, "alpha": self.alpha},
                "initial_functions": self.initial_functions}


@dataclass(frozen=True)
class FractionalHeat(Kernel):
    """Damped heat kernel t1^chi exp(-c1 t1 - t2^2/(4 c2^2 t1)) for t1 > 0 (normalized)."""

    chi: float
    c1: float = 1.0
    c2: float = 1.0
    alpha: float = 2.0
    initial_functions: str = ALL_ZERO
    family = "FractionalHeat"

    def __post_init__(self):
        a, chi = self.alpha, self.chi
        if not 0 < a <= 2:
            raise ParameterError(f"alpha must lie in (0,2], got {a}")
        if self.c1 <= 0 or self.c2 <= 0:
            raise ParameterError("c1 and c2 must be positive")
        if chi == 0 or not -1.5 / a < chi < 1.5 * (1 - 1 / a):
            raise ParameterError(f"chi must lie in (-3/(2 alpha), 3/2 (1-1/alpha)) without 0, got {chi}")

    @property
    def q(self):
        return (1.0, 2.0)

    @property
    def norm(self):
        return 1 / (np.sqrt(2) * (2 * np.pi) ** 1.5 * self.c2 * special.gamma(self.chi + 1.5))

    def _value(self, t1, t2, c1):
        t1, t2 = _arrays(t1, t2)
        self._check_origin(t1, t2)
        pos = t1 > 0
        s = np.where(pos, t1, 1.0)
        arg = -c1 * s - t2 * t2 / (4 * self.c2 ** 2 * s)
        out = self.norm * s ** self.chi * np.exp(np.maximum(arg, -700.0))
        return np.where(pos & (arg > -700.0), out, 0.0)

    def g(self, t1, t2):
        return self._value(t1, t2, self.c1)

    def g0(self, t1, t2):
        return self._value(t1, t2, 0.0)

    def ell(self, t1, t2):
        """Angular factor of g0 = rho^chi * ell, written through z = t1/rho."""
        t1, t2 = _arrays(t1, t2)
        rho = np.abs(t1) + t2 * t2
        z = np.where(t1 > 0, t1 / rho, 1.0)
        v = self.norm * z ** self.chi * np.exp(np.maximum(-(1 / z - 1) / (4 * self.c2 ** 2), -700.0))
        return np.where(t1 > 0, v, 0.0)

    def _partials(self, t1, t2, c1):
        t1, t2 = _arrays(t1, t2)
        g = self._value(t1, t2, c1)
        s = np.where(t1 > 0, t1, 1.0)
        k = 2 * self.c2 ** 2
        a1 = self.chi / s - c1 + t2 * t2 / (2 * k * s * s)
        a2 = -t2 / (k * s)
        return g * a1, g * a2, g * (a1 * a2 + t2 / (k * s * s))

    def partials(self, t1, t2):
        return self._partials(t1, t2, self.c1)

    def partials0(self, t1, t2):
        return self._partials(t1, t2, 0.0)

    def to_config(self):
        return {"family": self.family,
                "params": {"chi": self.chi, "c1": self.c1, "c2": self.c2, "alpha": self.alpha},
                "initial_functions": self.initial_functions}


@dataclass(frozen=True)
class QuadrantIndicator(Kernel):
    """Constant g_ij on each open quadrant, i, j = sign of t1, t2 (zero counts as negative)."""

    g_pp: float
    g_pm: float
    g_mp: float
    g_mm: float
    alpha: float = 2.0
    initial_functions: str = G12_EQUALS_G
    family = "QuadrantIndicator"

    @property
    def g_origin(self) -> float:
        """Signed sum over quadrants of i j g_ij."""
        return self.g_pp - self.g_pm - self.g_mp + self.g_mm

    def g(self, t1, t2):
        t1, t2 = _arrays(t1, t2)
        p1, p2 = t1 > 0, t2 > 0
        return np.where(p1, np.where(p2, self.g_pp, self.g_pm), np.where(p2, self.g_mp, self.g_mm))

    def partials(self, t1, t2):
        z = np.zeros(np.broadcast(np.asarray(t1), np.asarray(t2)).shape)
        return z, z, z

    def to_config(self):
        return {"family": self.family,
                "params": {"g_pp": self.g_pp, "g_pm": self.g_pm, "g_mp": self.g_mp,
                           "g_mm": self.g_mm, "alpha": self.alpha},
                "initial_functions": self.initial_functions}


_EXPR_NAMESPACE = {name: getattr(np, name) for name in (
    "sqrt", "exp", "log", "abs", "sin", "cos", "tanh", "hypot", "pi", "where", "maximum", "minimum")}


@dataclass(frozen=True)
class Custom(Kernel):
    """User kernel given either as a callable or as a numpy expression in t1, t2.

    `q` and `chi` may be supplied when g behaves like rho^chi near the origin;
    `smooth=True` declares a kernel with integrable mixed partial (no limit form needed).
    """

    func: Optional[Callable] = None
    expression: Optional[str] = None
    q: Optional[tuple] = None
    chi: Optional[float] = None
    g0_func: Optional[Callable] = None
    alpha: float = 2.0
    smooth: bool = False
    initial_functions: str = G12_EQUALS_G
    family = "Custom"
    _compiled: Callable = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if (self.func is None) == (self.expression is None):
            raise ParameterError("Custom kernel needs exactly one of func or expression")
        f = self.func
        if f is None:
            code = compile(self.expression, "<kernel>", "eval")
            bad = [n for n in code.co_names if n not in _EXPR_NAMESPACE and n not in ("t1", "t2")]
            if bad:
                raise ConfigError(f"unknown names in kernel expression: {bad}")

            def f(t1, t2, _code=code):
                return eval(_code, {"__builtins__": {}}, {**_EXPR_NAMESPACE, "t1": t1, "t2": t2})
        object.__setattr__(self, "_compiled", f)

    def g(self, t1, t2):
        t1, t2 = _arrays(t1, t2)
        return np.broadcast_to(np.asarray(self._compiled(t1, t2), float), t1.shape)

    def g0(self, t1, t2):
        if self.g0_func is None:
            return super().g0(t1, t2)
        t1, t2 = _arrays(t1, t2)
        return np.asarray(self.g0_func(t1, t2), float)

    def to_config(self):
        if self.expression is None:
            raise ConfigError("callable Custom kernels cannot be serialized")
        params = {"expression": self.expression, "alpha": self.alpha, "smooth": self.smooth}
        if self.q is not None:
            params["q"] = list(self.q)
        if self.chi is not None:
            params["chi"] = self.chi
        return {"family": self.family, "params": params, "initial_functions": self.initial_functions}


FAMILIES = {
    "FractionalLevy": FractionalLevy,
    "Matern": Matern,
    "FractionalHeat": FractionalHeat,
    "QuadrantIndicator": QuadrantIndicator,
    "Custom": Custom,
}


def kernel_from_config(cfg: dict) -> Kernel:
    family = cfg.get("family")
    if family not in FAMILIES:
        raise ConfigError(f"unknown kernel family {family!r}")
    params = dict(cfg.get("params", {}))
    if "q" in params:
        params["q"] = tuple(params["q"])
    if cfg.get("initial_functions") is not None:
        if cfg["initial_functions"] not in INITIAL_FUNCTIONS:
            raise ConfigError(f"unknown initial_functions {cfg['initial_functions']!r}")
        params["initial_functions"] = cfg["initial_functions"]
    try:
        return FAMILIES[family](**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {family}: {exc}") from exc


# Module-level evaluators ----------------------------------------------------

def eval_g(kernel: Kernel, t1, t2):
    return kernel.g(t1, t2)


def eval_g0(kernel: Kernel, t1, t2):
    return kernel.g0(t1, t2)


def eval_partials(kernel: Kernel, t1, t2, limit: bool = False):
    """(d1 g, d2 g, d12 g), or the partials of g0 when `limit` is set."""
    return kernel.partials0(t1, t2) if limit else kernel.partials(t1, t2)


def rect_difference(f, u1, u2, t1, t2):
    """Four-point difference f(t-u) - f((0,t2)-u) - f((t1,0)-u) + f(-u)."""
    return f(t1 - u1, t2 - u2) - f(-u1, t2 - u2) - f(t1 - u1, -u2) + f(-u1, -u2)


def rect_increment_g(kernel: Kernel, u1, u2, t):
    """Kernel of the rectangular increment X((0,t])."""
    return rect_difference(kernel.g, u1, u2, t[0], t[1])


def ordinary_increment_g(kernel: Kernel, u1, u2, t):
    """Kernel of the ordinary increment X(t) - X(0)."""
    return kernel.g(t[0] - u1, t[1] - u2) - kernel.g(-u1, -u2)


LIMIT_KINDS = ("h0", "h1", "h2", "h1_tilde", "h2_tilde", "tangent0")


def limit_kernel(kind: str, kernel: Kernel, t, u1, u2):
    """Limit kernels built from g0.

    h1, h2, h1_tilde, h2_tilde take a scalar time t; h0 and tangent0 take a point.
    """
    g0 = kernel.g0
    if kind == "h1":
        return g0(t - u1, -u2) - g0(-u1, -u2)
    if kind == "h2":
        return g0(-u1, t - u2) - g0(-u1, -u2)
    if kind == "h1_tilde":
        return kernel.partials0(t - u1, -u2)[1] - kernel.partials0(-u1, -u2)[1]
    if kind == "h2_tilde":
        return kernel.partials0(-u1, t - u2)[0] - kernel.partials0(-u1, -u2)[0]
    if kind == "h0":
        return rect_difference(g0, u1, u2, t[0], t[1])
    if kind == "tangent0":
        return g0(t[0] - u1, t[1] - u2) - g0(-u1, -u2)
    raise ValueError(f"unknown limit kernel {kind!r}")


def heat_kernel_spectral_check(chi: float, c1: float, c2: float, x) -> tuple:
    """Squared modulus of the numerically computed Fourier transform of the heat kernel
    next to the closed form (2 pi)^-2 (x1^2 + (c1 + c2^2 x2^2)^2)^-(chi + 3/2).
    """
    if chi <= -0.75:
        raise ParameterError("the heat kernel is square integrable only for chi > -3/4")
    ker = FractionalHeat(chi=chi, c1=c1, c2=c2, alpha=2.0)
    x1, x2 = float(x[0]), float(x[1])

    def inner(t1):
        # transform in t2 of an even Gaussian-shaped profile
        width = 2 * c2 * np.sqrt(t1)
        val, err = integrate.quad(lambda s: ker.g(t1, s)[()], 0, 40 * width,
                                  weight="cos", wvar=x2, limit=200) if x2 else \
            integrate.quad(lambda s: ker.g(t1, s)[()], 0, 40 * width, limit=200)
        return 2 * val

    tmax = 60.0 / c1
    parts = []
    for w in ("cos", "sin"):
        if x1 == 0 and w == "sin":
            parts.append(0.0)
            continue
        total = 0.0
        for a, b in ((0.0, 1e-3), (1e-3, 1.0), (1.0, tmax)):
            kw = dict(weight=w, wvar=x1) if x1 else {}
            with np.errstate(all="ignore"):
                val, err = integrate.quad(inner, a, b, limit=400, epsabs=1e-11, epsrel=1e-9, **kw)
            if not np.isfinite(val):
                raise QuadratureFailure("Fourier quadrature did not converge")
            total += val
        parts.append(total)
    numeric = parts[0] ** 2 + parts[1] ** 2
    analytic = (2 * np.pi) ** -2 * (x1 ** 2 + (c1 + c2 ** 2 * x2 ** 2) ** 2) ** -(chi + 1.5)
    return numeric, analytic
