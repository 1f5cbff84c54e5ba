import numpy as np
import pytest

from levyfield import rng
from levyfield.charfn import (DEFAULT_THETA, cf_distance, empirical_cf, id_integral_cf, lalpha_convergence_check,
                              levy_exponent, stable_cf, stable_exponent, stable_integral_cf)
from levyfield.errors import TooFewSamples
from levyfield.kernels import FractionalLevy, QuadrantIndicator, limit_kernel, rect_increment_g
from levyfield.levy_basis import LevyBasisSpec, sample_cells

THETA = np.asarray(DEFAULT_THETA)
UNIT = (np.array([1.0]), np.array([1.0]))


def test_unit_cell_gaussian():
    cf = stable_integral_cf(None, LevyBasisSpec.gaussian(1.0), weights=UNIT)
    assert np.allclose(cf.values, np.exp(-THETA ** 2 / 2), atol=1e-14)


def test_unit_cell_stable_matches_omega():
    b = LevyBasisSpec.stable(1.3, 1.0, 0.4)
    cf = stable_integral_cf(None, b, weights=UNIT)
    want = np.exp(-np.abs(THETA) ** 1.3 * b.omega(THETA))
    assert np.allclose(cf.values, want, atol=1e-14)


def test_exponent_homogeneity():
    b = LevyBasisSpec.stable(0.8, 1.0, 1.0)
    c = 2.5
    e1 = np.log(stable_integral_cf(None, b, weights=(np.array([1.0]), np.array([1.0]))).values)
    e2 = np.log(stable_integral_cf(None, b, weights=(np.array([c]), np.array([1.0]))).values)
    assert np.allclose(e2, c ** 0.8 * e1, rtol=1e-12)


def test_indicator_integral_by_mesh():
    b = LevyBasisSpec.gaussian(1.0)
    f = lambda u1, u2: ((u1 > 0) & (u1 < 1) & (u2 > 0) & (u2 < 2)).astype(float)
    cf = stable_integral_cf(f, b, breaks1=(0.0, 1.0), breaks2=(0.0, 2.0))
    assert np.allclose(cf.values, np.exp(-THETA ** 2), atol=1e-6)


def test_id_gaussian_exponent():
    W, A = np.array([0.5, -1.0, 2.0]), np.array([1.0, 0.5, 0.25])
    cf = id_integral_cf(None, LevyBasisSpec.gaussian(1.0), weights=(W, A))
    assert np.allclose(cf.values, np.exp(-0.5 * THETA ** 2 * np.sum(A * W ** 2)), atol=1e-14)


@pytest.mark.parametrize("alpha", [0.8, 1.0, 1.2, 1.5])
def test_truncated_stable_exponent(alpha):
    b = LevyBasisSpec.truncated_stable(alpha)
    psi = levy_exponent(b, [1e-3, 1e4])
    # symmetric measure: real exponent
    assert np.all(np.abs(psi.imag) <= 1e-10)
    # small s: Gaussian-like with variance int y^2 nu(dy) = 2/(2 - alpha)
    assert psi[0].real == pytest.approx(-1e-6 / (2 - alpha), rel=1e-3)
    # large s: the stable exponent takes over
    assert psi[1].real == pytest.approx(stable_exponent(b.stable_limit(), 1e4).real, rel=1e-3)


@pytest.mark.parametrize("basis", [LevyBasisSpec.truncated_stable(1.2),
                                   LevyBasisSpec.compound_poisson(1.5, rate=2.0, tail_scale=0.5, p_plus=0.8),
                                   LevyBasisSpec.compound_poisson(0.7, rate=2.0, tail_scale=0.5, p_plus=0.8)])
def test_id_cf_against_simulation(basis):
    x = sample_cells(basis, np.ones(200_000), rng.stream(1, 9))
    theta = (0.3, 1.0, 3.0)
    cf = id_integral_cf(None, basis, theta, weights=UNIT)
    assert cf_distance(empirical_cf(x, theta), cf) <= 0.02


def test_empirical_cf_basics():
    cf = empirical_cf(np.zeros(200))
    assert np.allclose(cf.values, 1.0)
    assert cf_distance(cf, cf) == 0.0
    with pytest.raises(TooFewSamples):
        empirical_cf(np.zeros(50))


def test_empirical_normal():
    x = rng.stream(3).standard_normal(100_000)
    assert cf_distance(empirical_cf(x), stable_cf(LevyBasisSpec.gaussian(1.0))) <= 0.02


def test_cf_csv(tmp_path):
    stable_cf(LevyBasisSpec.gaussian()).to_csv(tmp_path / "cf.csv")
    lines = (tmp_path / "cf.csv").read_text().splitlines()
    assert lines[0] == "theta,re,im,provenance"
    assert len(lines) == 1 + len(DEFAULT_THETA)


def test_convergence_levy_sheet_identically_zero():
    k = QuadrantIndicator(1.0, 0.0, 0.0, 0.0)
    t = (1.0, 1.0)
    fam = lambda lam: (lambda u1, u2: lam ** -1.0 * rect_increment_g(k, u1, u2, (lam * t[0], lam * t[1])))
    h = lambda u1, u2: rect_increment_g(k, u1, u2, t)
    r = lalpha_convergence_check(fam, h, 2.0, (1.0, 1.0), [2.0 ** -j for j in range(1, 5)], (0.0, 1.0), (0.0, 1.0))
    assert r["identically_zero"] and r["passed"]


def test_convergence_pure_power_kernel_exact():
    # for g = g0 the rescaled increment kernel equals the limit kernel for every lambda
    k = FractionalLevy(H=0.5)
    t, H = (1.0, 1.0), 0.5
    fam = lambda lam: (lambda u1, u2: lam ** -H * rect_increment_g(k, u1, u2, (lam * t[0], lam * t[1])))
    h = lambda u1, u2: limit_kernel("h0", k, t, u1, u2)
    r = lalpha_convergence_check(fam, h, 2.0, (1.0, 1.0), [2.0 ** -j for j in range(1, 9)], (0.0, 1.0), (0.0, 1.0),
                                 (2.0, 2.0), singular=[(0, 0), (1, 1), (0, 1), (1, 0)])
    assert max(r["norms"]) < 1e-6 * r["h_norm"]
    assert r["passed"]


def test_convergence_wrong_target_fails():
    k = FractionalLevy(H=0.5)
    t, H = (1.0, 1.0), 0.5
    fam = lambda lam: (lambda u1, u2: lam ** -H * rect_increment_g(k, u1, u2, (lam * t[0], lam * t[1])))
    zero = lambda u1, u2: np.zeros(np.broadcast(np.asarray(u1), np.asarray(u2)).shape)
    r = lalpha_convergence_check(fam, zero, 2.0, (1.0, 1.0), [2.0 ** -j for j in range(1, 5)], (0.0, 1.0),
                                 (0.0, 1.0), (2.0, 2.0), singular=[(0, 0), (1, 1), (0, 1), (1, 0)])
    assert not r["passed"]
