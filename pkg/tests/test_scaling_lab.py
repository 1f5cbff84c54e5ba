import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import admissible_profile
from levyfield import rng
from levyfield.errors import DegenerateScale, ParameterError, TooFewSamples
from levyfield.exponents import UPS1T, UPS2T, classify_region, profile_from_p, rectangent_normalization
from levyfield.kernels import FractionalHeat, FractionalLevy, Matern, QuadrantIndicator
from levyfield.levy_basis import LevyBasisSpec
from levyfield.scalestat import scale_statistic
from levyfield.scaling_lab import (AFFINE1, CONST, LINEAR0, SLOPE1, TANGENT, ExperimentSpec, estimate_H, fit_H,
                                   fit_kink, predicted_limit, scan_gamma)

GAUSS = LevyBasisSpec.gaussian()
SHEET = QuadrantIndicator(1.0, 0.0, 0.0, 0.0)


def test_scale_statistic_examples():
    assert scale_statistic(np.full(30, -2.5), "median-abs") == 2.5
    assert scale_statistic(np.tile([1.0, -1.0], 20), "rms") == 1.0
    x = rng.stream(0).standard_normal(100_000)
    assert scale_statistic(x, "median-abs") == pytest.approx(0.6745, abs=0.01)
    assert scale_statistic(x, "quantile(0.9)") == pytest.approx(1.6449, abs=0.03)
    with pytest.raises(TooFewSamples):
        scale_statistic(np.ones(10))


def test_fit_H_deterministic_slope():
    lam = 2.0 ** -np.arange(3, 10)
    base = np.abs(rng.stream(1).standard_normal(300))
    scales = [scale_statistic(l ** 0.7 * base) for l in lam]
    H, se, used = fit_H(lam, scales)
    assert H == pytest.approx(0.7, abs=1e-12)
    assert se < 1e-12
    with pytest.raises(DegenerateScale):
        fit_H(lam, [0.0] * lam.size)


def test_fit_H_discards_transient_rung():
    lam = 2.0 ** -np.arange(3, 10)
    noise = rng.stream(2).normal(0, 0.01, lam.size)
    s = np.exp(0.5 * np.log(lam) + noise)
    s[0] *= 3.0
    H, _, used = fit_H(lam, s)
    assert not used[0] and used[1:].all()
    assert H == pytest.approx(0.5, abs=0.02)


@pytest.mark.parametrize("p1, p2", [(2.5, 2.5), (1.5, 1.5), (1.2, 3.0), (3.0, 1.2), (2.0, 4.0)])
def test_fit_kink_recovers_exact_curve(p1, p2):
    prof = profile_from_p(p1, p2, 2.0)
    lab = classify_region(prof)
    shapes = (AFFINE1 if lab.v_minus_kind == UPS2T else CONST, SLOPE1 if lab.v_plus_kind == UPS1T else LINEAR0)
    g0 = prof.gamma0
    gammas = g0 * np.array([0.3, 0.6, 0.8, 1.0, 1.3, 1.6, 2.0])
    H = [rectangent_normalization(prof, g) for g in gammas]
    grid = np.linspace(gammas[0], gammas[-1], 4001)
    beta, *_ = fit_kink(gammas, H, [0.01] * len(H), shapes, grid=grid)
    assert beta == pytest.approx(g0, abs=2 * (grid[1] - grid[0]))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_fit_kink_random_profiles(seed):
    prof = admissible_profile(np.random.default_rng(seed))
    lab = classify_region(prof)
    shapes = (AFFINE1 if lab.v_minus_kind == UPS2T else CONST, SLOPE1 if lab.v_plus_kind == UPS1T else LINEAR0)
    g0 = prof.gamma0
    gammas = g0 * np.array([0.4, 0.7, 1.0, 1.4, 1.9])
    H = np.array([rectangent_normalization(prof, g) for g in gammas])
    slopes = np.abs(np.diff(H) / np.diff(gammas))
    if abs(slopes[1] - slopes[2]) < 0.05:
        return  # a barely visible kink cannot be located exactly
    beta, *_ = fit_kink(gammas, H, [0.01] * 5, shapes)
    assert beta == pytest.approx(g0, rel=0.01)


def test_fit_kink_tangent():
    g = np.array([0.2, 0.4, 0.5, 0.7, 1.0])
    H = 0.8 * np.minimum(1, g / 0.5)
    beta, theta, _ = fit_kink(g, H, [0.01] * 5, None, mode=TANGENT)
    assert beta == pytest.approx(0.5, abs=2e-3)
    assert theta == pytest.approx(0.8, abs=1e-2)


def test_spec_validation():
    with pytest.raises(ParameterError):
        ExperimentSpec(SHEET, GAUSS, lambdas=(0.5, 0.25, 0.5))
    with pytest.raises(ParameterError):
        ExperimentSpec(SHEET, GAUSS, replications=100)
    assert ExperimentSpec(SHEET, LevyBasisSpec.stable(1.5)).statistic == "median-abs"
    assert ExperimentSpec(SHEET, GAUSS).statistic == "rms"


def test_gamma_list_must_bracket():
    spec = ExperimentSpec(FractionalLevy(H=0.5), GAUSS, gammas=(0.5, 0.75, 1.5, 2.0), replications=200)
    with pytest.raises(ParameterError):
        scan_gamma(spec)


def test_brownian_sheet_slope():
    spec = ExperimentSpec(SHEET, GAUSS, replications=500, seed=1)
    H, se = estimate_H(spec, 1.0)
    assert H == pytest.approx(1.0, abs=0.05)


def test_fractional_levy_slope():
    spec = ExperimentSpec(FractionalLevy(H=0.5), GAUSS, replications=500, seed=2)
    H, se = estimate_H(spec, 1.0)
    assert H == pytest.approx(0.5, abs=0.1)


def test_stderr_shrinks_with_replications():
    def pooled(reps):
        se2 = []
        for seed in range(48):
            spec = ExperimentSpec(SHEET, GAUSS, replications=reps, seed=seed, discard_transient=False)
            se2.append(estimate_H(spec, 1.0)[1] ** 2)
        return np.sqrt(np.mean(se2))
    assert pooled(800) / pooled(400) == pytest.approx(1 / np.sqrt(2), rel=0.2)


def test_predicted_limits():
    spec = ExperimentSpec(FractionalLevy(H=0.5), GAUSS)
    assert [predicted_limit(spec, g) for g in (0.5, 1.0, 2.0)] == ["Ups1", "Ups0", "Ups2"]
    spec = ExperimentSpec(Matern(chi=0.25), GAUSS)
    assert [predicted_limit(spec, g) for g in (0.5, 2.0)] == ["Ups2t", "Ups1t"]
    spec = ExperimentSpec(FractionalHeat(chi=-0.5), GAUSS, mode=TANGENT)
    assert [predicted_limit(spec, g) for g in (0.25, 0.5, 1.0)] == ["T-", "T0", "T+"]


def test_report_is_reproducible():
    kw = dict(gammas=(0.5, 0.75, 1.0, 1.5, 2.0), lambdas=(2 ** -3, 2 ** -4, 2 ** -5), replications=200,
              bootstrap=10, seed=3, fine=64)
    a = scan_gamma(ExperimentSpec(FractionalLevy(H=0.5), GAUSS, **kw))
    b = scan_gamma(ExperimentSpec(FractionalLevy(H=0.5), GAUSS, threads=3, **kw))
    assert a.to_json() == b.to_json()
    d = json.loads(a.to_json())
    assert d["spec"]["seed"] == 3 and d["kink"] is not None
    assert a.summary_csv().splitlines()[0] == "gamma,H_hat,stderr,H_theory,verdict"
