import numpy as np
import pytest
from scipy.special import gamma as G

from levyfield.errors import OutOfDomain, ParameterError
from levyfield.field_sim import (FIELD, RECT_SHEET, anisotropic_increment, direct_increment_sample,
                                 increment_samples, increment_variance, raw_convolution_direct, rect_increments,
                                 simulate_field)
from levyfield.grid import GridField
from levyfield.kernels import FractionalLevy, Matern, QuadrantIndicator
from levyfield.levy_basis import LevyBasisSpec
from levyfield.quadrature import MeshOptions, graded_edges

# E X(e1)^2 for the H = 1/2 Gaussian fractional field, in closed form
K_EX31 = (2 ** 1.5 * np.pi * G(0.75) / G(0.25)) ** 2 / np.pi


def rect_var_ex31(a, b):
    return 2 * K_EX31 * (a + b - np.hypot(a, b))


def test_closed_form_constant():
    assert K_EX31 == pytest.approx(2.871080044, rel=1e-9)


def test_quadrature_against_closed_form():
    k = FractionalLevy(H=0.5)
    assert increment_variance(k, (0.0, 0.0), 1.0, 1.0, (1.0, 0.0), "ordinary") == pytest.approx(K_EX31, rel=0.02)
    for lam, g in ((0.25, 0.5), (2 ** -6, 1.0), (2 ** -10, 2.0)):
        v = increment_variance(k, (1.0, 1.0), lam, g, (1.0, 1.0))
        assert v == pytest.approx(rect_var_ex31(lam, lam ** g), rel=0.02)


def test_variance_doubling_ratio():
    k = FractionalLevy(H=0.5)
    v1 = increment_variance(k, (0.0, 0.0), 1.0, 1.0, (1.0, 0.0), "ordinary")
    v2 = increment_variance(k, (0.0, 0.0), 1.0, 1.0, (2.0, 0.0), "ordinary")
    assert v2 / v1 == pytest.approx(2.0, rel=0.1)


def test_refinement_changes_little():
    k = Matern(chi=-0.3)
    a = increment_variance(k, (1.0, 1.0), 0.1, 1.5, (1.0, 1.0), opts=MeshOptions(fine=128))
    b = increment_variance(k, (1.0, 1.0), 0.1, 1.5, (1.0, 1.0), opts=MeshOptions(fine=256))
    assert abs(a / b - 1) < 0.02


def test_tiny_rectangles_resolved():
    k = FractionalLevy(H=0.5)
    lam = 2.0 ** -28
    assert increment_variance(k, (1.0, 1.0), lam, 2.0, (1.0, 1.0)) == pytest.approx(
        rect_var_ex31(lam, lam ** 2), rel=0.02)


def test_graded_edges_cover_breaks():
    e = graded_edges([0.0, 1.0], 0.01, -5.0, 6.0)
    assert e[0] == -5.0 and e[-1] == 6.0
    assert np.all(np.diff(e) > 0)
    assert 0.0 in e and 1.0 in e


@pytest.fixture(scope="module")
def ex31_field():
    return simulate_field(FractionalLevy(H=0.5), LevyBasisSpec.gaussian(), (8, 8, 0.125, 0.125),
                          truncation_radius=2.0, seed=3, fine=2)


def test_field_finite_and_axes_zero(ex31_field):
    v = ex31_field.values
    assert np.all(np.isfinite(v))
    assert np.all(v[0, :] == 0) and np.all(v[:, 0] == 0)


def test_fft_matches_direct(ex31_field):
    f = ex31_field
    pts = [(0.25, 0.5), (1.0, 1.0), (0.375, 0.0)]
    d = raw_convolution_direct(FractionalLevy(H=0.5), f.lattice, f.noise, pts)
    assert np.allclose(d, [f.raw[2, 4], f.raw[8, 8], f.raw[3, 0]], atol=1e-10)


def test_increment_agrees_with_direct(ex31_field):
    k = FractionalLevy(H=0.5)
    for t0 in ((0.25, 0.25), (0.3, 0.2)):
        a = anisotropic_increment(ex31_field, k, t0, 0.5, 1.0, (1.0, 1.0))
        b = direct_increment_sample(k, None, t0, 0.5, 1.0, (1.0, 1.0), field=ex31_field)
        assert a == pytest.approx(b, abs=1e-10)
    with pytest.raises(OutOfDomain):
        anisotropic_increment(ex31_field, k, (0.9, 0.9), 0.5, 1.0, (1.0, 1.0))


def test_unit_increment_is_field_value(ex31_field):
    k = FractionalLevy(H=0.5)
    v = direct_increment_sample(k, None, (0.0, 0.0), 1.0, 1.0, (1.0, 1.0), field=ex31_field)
    assert v == pytest.approx(ex31_field.values[8, 8], abs=1e-10)


def test_rectangle_additivity(ex31_field):
    k = FractionalLevy(H=0.5)
    whole = anisotropic_increment(ex31_field, k, (0.25, 0.25), 0.5, 1.0, (1.0, 1.0))
    left = anisotropic_increment(ex31_field, k, (0.25, 0.25), 0.25, 1.0, (1.0, 2.0))
    right = anisotropic_increment(ex31_field, k, (0.5, 0.25), 0.25, 1.0, (1.0, 2.0))
    assert whole == pytest.approx(left + right, abs=1e-10)


def test_quadrant_indicator_gives_scaled_sheet():
    k = QuadrantIndicator(1.0, 0.5, 0.25, 0.0)
    f = simulate_field(k, LevyBasisSpec.gaussian(), (4, 4, 0.25, 0.25), truncation_radius=1.0, seed=1)
    lat = f.lattice
    cells = f.noise[lat.pad1:lat.pad1 + 4, lat.pad2:lat.pad2 + 4]
    assert np.allclose(rect_increments(f), k.g_origin * cells, atol=1e-12)


def test_zero_noise_gives_zero_field():
    f = simulate_field(Matern(chi=0.25), LevyBasisSpec.gaussian(0.0), (4, 4, 0.25, 0.25), truncation_radius=1.0)
    assert np.all(f.values == 0)


def test_same_seed_same_field():
    a = simulate_field(Matern(chi=-0.25), LevyBasisSpec.stable(1.5), (6, 6, 0.2, 0.2), truncation_radius=1.0, seed=9)
    b = simulate_field(Matern(chi=-0.25), LevyBasisSpec.stable(1.5), (6, 6, 0.2, 0.2), truncation_radius=1.0, seed=9)
    assert np.array_equal(a.values, b.values)


def test_binary_round_trip(tmp_path, ex31_field):
    ex31_field.to_binary(tmp_path / "f.bin")
    g = GridField.from_binary(tmp_path / "f.bin")
    assert np.array_equal(g.values, ex31_field.values)
    assert g.meta["seed"] == 3


def test_bad_grid():
    with pytest.raises(ParameterError):
        simulate_field(Matern(chi=0.25), LevyBasisSpec.gaussian(), (0, 4, 0.25, 0.25), truncation_radius=1.0)


def test_increment_samples_variance():
    k = FractionalLevy(H=0.5)
    x = increment_samples(k, LevyBasisSpec.gaussian(), (1.0, 1.0), 0.1, 1.0, [(1.0, 1.0)], 4000, seed=2)
    want = rect_var_ex31(0.1, 0.1)
    assert x[:, 0].var() == pytest.approx(want, rel=0.08)


def test_field_representation_variance_ratio():
    # ordinary field X(t) = int g(t - u) M(du) minus its value at 0 scales like |t|^(2H)
    k = FractionalLevy(H=0.5)
    reps = [simulate_field(k, LevyBasisSpec.gaussian(), (8, 1, 0.25, 0.25), truncation_radius=6.0, seed=4,
                           representation=FIELD, replication=r) for r in range(300)]
    x1 = np.array([f.raw[4, 0] - f.raw[0, 0] for f in reps])
    x2 = np.array([f.raw[8, 0] - f.raw[0, 0] for f in reps])
    assert x2.var() / x1.var() == pytest.approx(2.0, rel=0.25)
