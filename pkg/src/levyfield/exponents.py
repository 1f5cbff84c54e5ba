"""Scaling exponents of the kernel family g0 = rho^chi * L.

With rho(t) = |t1|^q1 + |t2|^q2 and Q = 1/q1 + 1/q2 the derived exponents are
p_i = q_i (Q - chi), P = 1/p1 + 1/p2 and the critical ratio gamma0 = p1/p2.
Everything here is closed-form arithmetic.
"""
from dataclasses import dataclass

from .errors import (
    AssumptionViolation,
    BoundaryParameters,
    NonPositiveOrder,
    TangentInapplicable,
    ZeroChi,
)

TOL = 1e-12

UPS1 = "Upsilon1"
UPS2 = "Upsilon2"
UPS1T = "UpsilonTilde1"
UPS2T = "UpsilonTilde2"


@dataclass(frozen=True)
class ExponentProfile:
    q1: float
    q2: float
    chi: float
    alpha: float
    Q: float
    p1: float
    p2: float
    P: float
    gamma0: float

    def P_c(self, c1: float, c2: float) -> float:
        """Weighted sum c1/p1 + c2/p2."""
        return c1 / self.p1 + c2 / self.p2

    @property
    def P_minus(self) -> float:
        """P_{1/a,(1+a)/a}, decides the limit below gamma0."""
        a = self.alpha
        return self.P_c(1 / a, (1 + a) / a)

    @property
    def P_plus(self) -> float:
        """P_{(1+a)/a,1/a}, decides the limit above gamma0."""
        a = self.alpha
        return self.P_c((1 + a) / a, 1 / a)


@dataclass(frozen=True)
class HurstIndices:
    H_a1: float
    H_a2: float
    Ht_a1: float
    Ht_a2: float


@dataclass(frozen=True)
class RegionLabel:
    region: str
    v_plus_kind: str
    v_minus_kind: str
    hurst_pair_plus: tuple
    hurst_pair_minus: tuple


def derive_exponents(q1: float, q2: float, chi: float, alpha: float) -> ExponentProfile:
    if q1 <= 0 or q2 <= 0:
        raise NonPositiveOrder(f"orders must be positive, got q1={q1}, q2={q2}")
    if chi == 0:
        raise ZeroChi("chi must be nonzero")
    if not 0 < alpha <= 2:
        raise AssumptionViolation(f"alpha must lie in (0, 2], got {alpha}")
    Q = 1 / q1 + 1 / q2
    if chi >= Q:
        raise AssumptionViolation(f"need chi < Q = {Q}, got chi={chi}")
    p1 = q1 * (Q - chi)
    p2 = q2 * (Q - chi)
    return ExponentProfile(q1, q2, chi, alpha, Q, p1, p2, 1 / p1 + 1 / p2, p1 / p2)


def profile_from_p(p1: float, p2: float, alpha: float, scale: float = 1.0) -> ExponentProfile:
    """Profile with prescribed (p1, p2).

    The orders are q_i = p_i/scale, so Q - chi = scale and chi = scale (P - 1).
    """
    if p1 <= 0 or p2 <= 0:
        raise NonPositiveOrder(f"p must be positive, got ({p1}, {p2})")
    P = 1 / p1 + 1 / p2
    return derive_exponents(p1 / scale, p2 / scale, scale * (P - 1), alpha)


def validate_assumptions(profile: ExponentProfile, mode: str = "rectangent") -> list:
    """List of violated hypotheses; empty when the limit theorem applies."""
    pr, a = profile, profile.alpha
    out = []
    if mode == "rectangent":
        if not pr.P > a / (1 + a) + TOL:
            out.append("α/(1+α) < P")
        if not pr.P < a - TOL:
            out.append("P < α")
        if abs(pr.P - 1) <= TOL:
            out.append("P ≠ 1")
        if abs(pr.P_minus - 1) <= TOL:
            out.append("P_{1/α,(1+α)/α} ≠ 1")
        if abs(pr.P_plus - 1) <= TOL:
            out.append("P_{(1+α)/α,1/α} ≠ 1")
    elif mode == "tangent":
        if not pr.chi < 0:
            out.append("χ < 0")
        if not pr.chi > -pr.Q / a + TOL:
            out.append("-Q/α < χ")
        if not pr.chi < 1 / max(pr.q1, pr.q2) - pr.Q / a - TOL:
            out.append("χ < 1/max(q1,q2) - Q/α")
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return out


def hurst_indices(profile: ExponentProfile) -> HurstIndices:
    p1, p2, a = profile.p1, profile.p2, profile.alpha
    k = (1 + a) / a
    return HurstIndices(
        H_a1=k * (1 + p1 / p2) - p1,
        H_a2=k * (1 + p2 / p1) - p2,
        Ht_a1=k + p1 / (a * p2) - p1,
        Ht_a2=k + p2 / (a * p1) - p2,
    )


def _check_boundaries(profile):
    for name, v in (("P", profile.P), ("P_{1/α,(1+α)/α}", profile.P_minus),
                    ("P_{(1+α)/α,1/α}", profile.P_plus)):
        if abs(v - 1) <= TOL:
            raise BoundaryParameters(f"{name} = 1 lies on an excluded boundary")


def hurst_pair(kind: str, hi: HurstIndices) -> tuple:
    """Multi-self-similarity indices of an unbalanced limit kind."""
    return {
        UPS1T: (hi.Ht_a1, 1.0),
        UPS2T: (1.0, hi.Ht_a2),
        UPS1: (hi.H_a1, 0.0),
        UPS2: (0.0, hi.H_a2),
    }[kind]


def classify_region(profile: ExponentProfile) -> RegionLabel:
    _check_boundaries(profile)
    first = profile.P_minus > 1
    second = profile.P_plus > 1
    region = {(True, True): "R11", (False, True): "R12",
              (True, False): "R21", (False, False): "R22"}[(first, second)]
    v_minus = UPS2T if first else UPS1
    v_plus = UPS1T if second else UPS2
    hi = hurst_indices(profile)
    return RegionLabel(region, v_plus, v_minus, hurst_pair(v_plus, hi), hurst_pair(v_minus, hi))


def rectangent_normalization(profile: ExponentProfile, gamma: float) -> float:
    """Exponent H(gamma) of the rectangular-increment normalization.

    Above gamma0 the axis-exchanged formulas are used; they agree with the
    lower branch at gamma0.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    _check_boundaries(profile)
    a, g0 = profile.alpha, profile.gamma0
    hi = hurst_indices(profile)
    if abs(gamma - g0) <= TOL * max(1.0, g0):
        return (1 + g0) * (1 + a) / a - profile.p1
    if gamma < g0:
        return hi.H_a1 if profile.P_minus < 1 else 1 + gamma * hi.Ht_a2
    return gamma * hi.H_a2 if profile.P_plus < 1 else gamma + hi.Ht_a1


def tangent_normalization(profile: ExponentProfile, gamma: float) -> float:
    """Exponent (1 ^ gamma/gamma0) * ((1+gamma0)/alpha + chi q1) of ordinary increments."""
    if profile.chi >= 0:
        raise TangentInapplicable("ordinary-increment limits need chi < 0")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    h0 = (1 + profile.gamma0) / profile.alpha + profile.chi * profile.q1
    return min(1.0, gamma / profile.gamma0) * h0
