import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import gamma as G

from levyfield.errors import NotPSD, RegionError, TangentInapplicable
from levyfield.kernels import FractionalLevy, Matern
from levyfield.limit_fields import (FbsSpec, fbm_cov, mss_check, psd_factor, sample_fbs, sample_tangent0,
                                    sample_upsilon, sample_walpha, sample_Y)

K_EX31 = (2 ** 1.5 * np.pi * G(0.75) / G(0.25)) ** 2 / np.pi
EX31 = FractionalLevy(H=0.5)


def test_fbm_cov_degenerate():
    assert fbm_cov(0.0, 1.0, 1.0) == 1.0
    assert fbm_cov(0.0, 1.0, 7.0) == 0.5
    assert fbm_cov(1.0, 2.0, 3.0) == pytest.approx(6.0)
    assert fbm_cov(0.5, 1.0, 2.0) == pytest.approx(1.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.integers(0, 10_000))
def test_fbs_covariance_psd(H1, H2, seed):
    pts = np.random.default_rng(seed).uniform(0.1, 3, (6, 2))
    C = FbsSpec(H1, H2).covariance(pts)
    assert np.allclose(C, C.T)
    assert np.linalg.eigvalsh(C).min() >= -1e-10 * np.trace(C)


def test_fbs_rank_one():
    pts = [(1.0, 1.0), (2.0, 0.5), (0.5, 3.0)]
    s = sample_fbs(FbsSpec(1.0, 1.0), pts, 500, seed=1)
    p = np.asarray(pts)
    r = s.values / (p[:, 0] * p[:, 1])
    assert np.allclose(r, r[:, :1], atol=1e-10)


def test_fbs_variance_and_covariance():
    s = sample_fbs(FbsSpec(0.0, 0.5), [(1.0, 2.0), (3.0, 0.5)], 20_000, seed=2)
    assert s.values.var(axis=0) == pytest.approx([2.0, 0.5], rel=0.05)
    s = sample_fbs(FbsSpec(0.5, 0.5), [(1.0, 1.0), (1.0, 2.0)], 2000, seed=3)
    assert np.cov(s.values.T)[0, 1] == pytest.approx(1.0, rel=0.1)


def test_fbs_zero_index_half_correlation():
    s = sample_fbs(FbsSpec(0.0, 0.5), [(1.0, 1.0), (1.5, 1.0), (9.0, 1.0)], 20_000, seed=4)
    c = np.corrcoef(s.values.T)
    assert c[0, 1] == pytest.approx(0.5, abs=0.03)
    assert c[0, 2] == pytest.approx(0.5, abs=0.03)


def test_psd_factor_rejects():
    with pytest.raises(NotPSD):
        psd_factor(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_walpha_scaling():
    r = mss_check(lambda pts, n, sd: sample_walpha(1.5, pts, n, sd), (1 / 1.5, 1 / 1.5), (2.0, 3.0), (1.0, 1.0),
                  4000, seed=5, alpha=1.5)
    assert r["expected"] == pytest.approx(6 ** (1 / 1.5))
    assert r["passed"]


def test_y_gaussian_is_fbm():
    s = sample_Y("Y1", EX31, 2.0, [0.0, 1.0, 2.0], 8000, seed=6)
    assert np.all(s.values[:, 0] == 0)
    v = s.values.var(axis=0)
    assert v[1] == pytest.approx(K_EX31, rel=0.1)
    assert v[2] / v[1] == pytest.approx(2.0, rel=0.1)
    assert s.hurst == (pytest.approx(0.5),)


def test_region_errors():
    with pytest.raises(RegionError):
        sample_Y("Y2t", EX31, 2.0, [1.0], 10, seed=0)
    with pytest.raises(TangentInapplicable):
        sample_tangent0(Matern(chi=0.25), 2.0, [(1.0, 1.0)], 10, seed=0)


def test_upsilon1_variance_and_grouping():
    s = sample_upsilon("Ups1", EX31, 2.0, [(1.0, 1.0), (2.0, 1.0), (1.0, 3.0)], 8000, seed=1)
    assert s.hurst == (pytest.approx(0.5), 0.0)
    assert s.values.var(axis=0) == pytest.approx(2 * K_EX31 * np.array([1.0, 2.0, 1.0]), rel=0.1)


def test_upsilon1_tilde_line_extension():
    k = Matern(chi=0.25)
    s = sample_upsilon("Ups1t", k, 2.0, [(1.0, 1.0), (1.0, 2.5), (1.0, 4.0)], 300, seed=2)
    assert np.allclose(s.values[:, 1], 2.5 * s.values[:, 0], rtol=1e-12, atol=0)
    assert np.allclose(s.values[:, 2], 4.0 * s.values[:, 0], rtol=1e-12, atol=0)


def test_upsilon0_variance():
    s = sample_upsilon("Ups0", EX31, 2.0, [(1.0, 1.0)], 8000, seed=3)
    assert s.values[:, 0].var() == pytest.approx(2 * K_EX31 * (2 - np.sqrt(2)), rel=0.1)


def test_upsilon_mss():
    r = mss_check(lambda pts, n, sd: sample_upsilon("Ups1", EX31, 2.0, pts, n, sd), (0.5, 0.0), (1.0, 7.0),
                  (1.0, 1.0), 3000, seed=4)
    assert r["passed"]
    k = Matern(chi=0.25)
    r = mss_check(lambda pts, n, sd: sample_upsilon("Ups1t", k, 2.0, pts, n, sd), (0.0, 1.0), (1.0, 2.0),
                  (1.0, 1.0), 1000, seed=4)
    assert r["ratio"] == pytest.approx(2.0, rel=1e-9)


def test_tangent_fields():
    s = sample_tangent0(EX31, 2.0, [(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)], 8000, seed=5)
    assert np.all(s.values[:, 0] == 0)
    v = s.values.var(axis=0)
    assert v[2] / v[1] == pytest.approx(2.0, rel=0.1)
    s = sample_tangent0(EX31, 2.0, [(1.0, 1.0), (1.0, 3.0)], 200, seed=5, which="T+")
    assert np.array_equal(s.values[:, 0], s.values[:, 1])
    s = sample_tangent0(EX31, 2.0, [(1.0, 2.0), (3.0, 2.0)], 200, seed=5, which="T-")
    assert np.array_equal(s.values[:, 0], s.values[:, 1])


def test_sample_csv(tmp_path):
    s = sample_fbs(FbsSpec(0.5, 0.5), [(1.0, 1.0), (2.0, 1.0)], 3, seed=0)
    s.to_csv(tmp_path / "s.csv")
    assert len((tmp_path / "s.csv").read_text().splitlines()) == 1 + 6
