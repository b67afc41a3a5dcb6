"""Matern covariance, Nystrom eigenpairs, and KL field evaluation."""
import math

import numpy as np
import pytest

from conftest import fit_slope
from mlqmc.randomfield import (KLBasis, MaternParams, b_sequences,
                               kl_coefficient, matern_cov,
                               nystrom_eigendecomposition)


def params_1d(nu, sigma2=1.0, lc=1.0):
    return MaternParams(nu=nu, sigma2=sigma2, lambda_c=lc, d=1)


# ---------------------------------------------------------------- covariance

def test_matern_at_zero_lag():
    for nu in (0.5, 1.0, 2.0):
        assert matern_cov(0.0, params_1d(nu, sigma2=1.7)) == pytest.approx(1.7)


def test_matern_half_closed_form():
    p = params_1d(0.5, sigma2=2.0, lc=0.7)
    for r in (0.1, 1.0, 3.0):
        want = 2.0 * math.exp(-math.sqrt(2.0) * r / 0.7)
        assert matern_cov(r, p) == pytest.approx(want, rel=1e-12)


def test_matern_three_halves_closed_form():
    p = params_1d(1.5, sigma2=1.3, lc=0.9)
    for r in (0.05, 0.8, 2.5):
        x = math.sqrt(6.0) * r / 0.9
        want = 1.3 * (1.0 + x) * math.exp(-x)
        assert matern_cov(r, p) == pytest.approx(want, rel=1e-10)


def test_matern_five_halves_closed_form():
    p = params_1d(2.5, sigma2=0.8, lc=1.1)
    for r in (0.05, 0.8, 2.5):
        x = math.sqrt(10.0) * r / 1.1
        want = 0.8 * (1.0 + x + x * x / 3.0) * math.exp(-x)
        assert matern_cov(r, p) == pytest.approx(want, rel=1e-10)


def test_matern_monotone_decreasing():
    r = np.linspace(0.0, 4.0, 200)
    for nu in (0.5, 1.0, 2.0, 2.5):
        vals = matern_cov(r, params_1d(nu))
        assert np.all(np.diff(vals) < 1e-14)


def test_matern_positive_semidefinite_small_sets():
    rng = np.random.Generator(np.random.Philox(99))
    for nu in (1.0, 2.0):
        p = MaternParams(nu=nu, sigma2=1.5, lambda_c=0.8, d=2)
        pts = rng.random((5, 2))
        dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
        kmat = matern_cov(dist, p)
        assert np.linalg.eigvalsh(kmat).min() >= -1e-10 * 1.5


def test_matern_params_validation():
    with pytest.raises(ValueError):
        MaternParams(nu=-1.0, sigma2=1.0, lambda_c=1.0, d=1)
    with pytest.raises(ValueError):
        MaternParams(nu=1.0, sigma2=0.0, lambda_c=1.0, d=1)
    with pytest.raises(ValueError):
        MaternParams(nu=1.0, sigma2=1.0, lambda_c=1.0, d=3)


# ---------------------------------------------------------------- eigenpairs

def test_trace_identity_1d():
    basis = nystrom_eigendecomposition(params_1d(1.0), q_per_dim=64)
    assert basis.trace() == pytest.approx(1.0, abs=1e-6)


def test_trace_identity_2d():
    p = MaternParams(nu=1.0, sigma2=1.4, lambda_c=1.0, d=2)
    basis = nystrom_eigendecomposition(p, q_per_dim=24)
    assert basis.trace() == pytest.approx(1.4, abs=1e-5)


def test_eigenvalues_sorted_nonnegative(basis_nu1):
    mu = basis_nu1.mu
    assert np.all(np.diff(mu) <= 1e-15)
    assert np.all(mu >= 0.0)


def test_orthonormality_gram(basis_nu1):
    xi = basis_nu1.xi_nodes
    w = basis_nu1.weights
    gram = (xi * w[:, None]).T @ xi
    dev = np.linalg.norm(gram - np.eye(gram.shape[0]))
    assert dev < 1e-8


def test_eigenvalue_decay_slope(basis_nu1):
    # smoothness nu=1 in one dimension gives mu_j ~ j^(-3)
    j = np.arange(5, 41)
    slope = fit_slope(np.log(j), np.log(basis_nu1.mu[4:40]))
    assert -3.3 <= slope <= -2.7


def test_eigenfunction_fine_quadrature_orthonormality(basis_nu1):
    x, w = np.polynomial.legendre.leggauss(400)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    vals = basis_nu1.eigenfunction_values(x[:, None], 2)
    assert w @ (vals[:, 0] * vals[:, 0]) == pytest.approx(1.0, abs=1e-6)
    assert w @ (vals[:, 0] * vals[:, 1]) == pytest.approx(0.0, abs=1e-6)


def test_nystrom_interpolation_reproduces_nodes(basis_nu1):
    vals = basis_nu1.eigenfunction_values(basis_nu1.nodes, 5)
    np.testing.assert_allclose(vals, basis_nu1.xi_nodes[:, :5], atol=1e-8)


def test_sign_convention_deterministic(basis_nu1):
    again = nystrom_eigendecomposition(params_1d(1.0), q_per_dim=400)
    np.testing.assert_array_equal(basis_nu1.xi_nodes, again.xi_nodes)


def test_quadrature_order_validation():
    with pytest.raises(ValueError):
        nystrom_eigendecomposition(params_1d(1.0), q_per_dim=1)


# ---------------------------------------------------------------- field eval

def test_kl_coefficient_zero_vector(basis_nu1):
    pts = np.linspace(0.05, 0.95, 7)[:, None]
    vals = kl_coefficient(basis_nu1, np.zeros(4), pts)
    np.testing.assert_allclose(vals, 1.0, atol=1e-15)


def test_kl_coefficient_single_term_identity(basis_nu1):
    pts = np.asarray([[0.3], [0.62]])
    y1 = 0.8
    vals = kl_coefficient(basis_nu1, np.asarray([y1]), pts)
    xi1 = basis_nu1.eigenfunction_eval(0, pts)
    want = np.sqrt(basis_nu1.mu[0]) * xi1 * y1
    np.testing.assert_allclose(np.log(vals), want, atol=1e-12)


def test_kl_coefficient_positive(basis_nu1):
    rng = np.random.Generator(np.random.Philox(5))
    pts = np.linspace(0.01, 0.99, 21)[:, None]
    for _ in range(20):
        y = rng.standard_normal(30)
        vals = kl_coefficient(basis_nu1, y, pts, a0=0.5, a_star=0.1)
        assert np.all(vals > 0.0)


def test_mercer_partial_sums_bounded(basis_nu1):
    pts = np.linspace(0.02, 0.98, 33)[:, None]
    for s in (5, 20, 60):
        vals = basis_nu1.eigenfunction_values(pts, s)
        partial = (vals ** 2 * basis_nu1.mu[None, :s]).sum(axis=1)
        assert np.all(partial <= 1.0 + 1e-6)


def test_empirical_covariance_matches_mercer(basis_nu1):
    # two-point covariance of log a over MC samples vs the truncated
    # Mercer sum, 3-standard-error gate
    s = 40
    pts = np.asarray([[0.25], [0.7]])
    vals = basis_nu1.eigenfunction_values(pts, s)
    mercer = float((basis_nu1.mu[:s] * vals[0] * vals[1]).sum())
    rng = np.random.Generator(np.random.Philox(11))
    y = rng.standard_normal((10_000, s))
    fm = basis_nu1.field_matrix(pts, s)
    logs = y @ fm
    prods = logs[:, 0] * logs[:, 1]
    est = prods.mean()
    se = prods.std(ddof=1) / math.sqrt(prods.size)
    assert abs(est - mercer) <= 3.0 * se


# ---------------------------------------------------------------- decay data

def test_b_sequences_ordering(basis_nu1):
    b, b_bar = b_sequences(basis_nu1, s=30)
    assert np.all(b_bar >= b - 1e-12)
    assert np.all(b > 0.0)
    # sup-norm weighted amplitudes decay overall
    slope = fit_slope(np.log(np.arange(1, 31)), np.log(b))
    assert slope < -0.5


# ---------------------------------------------------------------- persistence

def test_save_load_bit_exact(tmp_path, basis_nu1):
    path = tmp_path / "basis.npz"
    basis_nu1.save(path)
    back = KLBasis.load(path)
    np.testing.assert_array_equal(back.mu, basis_nu1.mu)
    np.testing.assert_array_equal(back.nodes, basis_nu1.nodes)
    np.testing.assert_array_equal(back.weights, basis_nu1.weights)
    np.testing.assert_array_equal(back.xi_nodes, basis_nu1.xi_nodes)
    assert back.params == basis_nu1.params
    assert back.cache_key() == basis_nu1.cache_key()
