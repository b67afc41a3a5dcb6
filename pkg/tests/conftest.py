"""Shared fixtures: KL bases and PDE problems are expensive, build once."""
import numpy as np
import pytest

from mlqmc import (LognormalPde, MaternParams, bundled_vector,
                   nystrom_eigendecomposition)


def fit_slope(x, y):
    """Least-squares slope of y vs x (both already in log scale if needed)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.polyfit(x, y, 1)[0])


@pytest.fixture(scope="session")
def basis_nu1():
    return nystrom_eigendecomposition(MaternParams(nu=1.0, sigma2=1.0,
                                                   lambda_c=1.0, d=1),
                                      q_per_dim=400)


@pytest.fixture(scope="session")
def basis_nu2():
    return nystrom_eigendecomposition(MaternParams(nu=2.0, sigma2=1.0,
                                                   lambda_c=1.0, d=1),
                                      q_per_dim=400)


@pytest.fixture(scope="session")
def problem_nu1(basis_nu1):
    return LognormalPde(basis_nu1, kind="point1d", ell0=3, point=1.0 / 3.0)


@pytest.fixture(scope="session")
def problem_nu2(basis_nu2):
    return LognormalPde(basis_nu2, kind="point1d", ell0=3, point=1.0 / 3.0)


@pytest.fixture(scope="session")
def gen_vector():
    return bundled_vector()
