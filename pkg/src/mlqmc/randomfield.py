"""Matern covariance fields and their Karhunen-Loeve expansion.

The log of the diffusion coefficient is a centred Gaussian field with
Matern covariance

    rho(r) = sigma^2 * 2^(1-nu)/Gamma(nu) * (2*sqrt(nu)*r/lc)^nu
             * K_nu(2*sqrt(nu)*r/lc),

expanded on D = (0,1)^d as log a = sum_j sqrt(mu_j) * xi_j(x) * y_j with
i.i.d. standard normal y_j.  Eigenpairs come from a Nystrom discretisation
of the covariance operator on a tensor Gauss-Legendre grid: the quadrature-
symmetrised matrix W^(1/2) K W^(1/2) is diagonalised and eigenfunction
values anywhere in D follow from the Nystrom extension formula.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh
from scipy.special import gamma as gamma_fn
from scipy.special import kv


@dataclass(frozen=True)
class MaternParams:
    """Smoothness nu, variance sigma2, correlation length, and dimension."""

    nu: float
    sigma2: float
    lambda_c: float
    d: int

    def __post_init__(self) -> None:
        if self.nu <= 0.0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if self.sigma2 <= 0.0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        if self.lambda_c <= 0.0:
            raise ValueError(f"lambda_c must be positive, got {self.lambda_c}")
        if self.d not in (1, 2):
            raise ValueError(f"d must be 1 or 2, got {self.d}")


def matern_cov(r, params: MaternParams):
    """Covariance value(s) at distance r >= 0.

    Half-integer nu in {1/2, 3/2, 5/2} uses the exponential closed forms;
    other nu goes through the modified Bessel function.  r = 0 returns
    sigma2 exactly.
    """
    r_arr = np.asarray(r, dtype=np.float64)
    scalar = r_arr.ndim == 0
    r_arr = np.atleast_1d(r_arr)
    if np.any(r_arr < 0.0):
        raise ValueError("distances must be nonnegative")

    nu, s2 = params.nu, params.sigma2
    t = 2.0 * np.sqrt(nu) * r_arr / params.lambda_c
    two_nu = 2.0 * nu
    if two_nu in (1.0, 3.0, 5.0):
        if two_nu == 1.0:
            shape = np.ones_like(t)
        elif two_nu == 3.0:
            shape = 1.0 + t
        else:
            shape = 1.0 + t + t * t / 3.0
        out = s2 * shape * np.exp(-t)
    else:
        out = np.empty_like(t)
        small = t < 1e-8
        # t^nu * K_nu(t) -> Gamma(nu) * 2^(nu-1) as t -> 0
        out[small] = s2
        ts = t[~small]
        out[~small] = s2 * (2.0 ** (1.0 - nu) / gamma_fn(nu)) * ts ** nu * kv(nu, ts)
    return float(out[0]) if scalar else out


def _gauss_legendre_grid(q_per_dim: int, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss-Legendre nodes and weights on (0,1)^d."""
    x, w = np.polynomial.legendre.leggauss(q_per_dim)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    if d == 1:
        return x[:, None], w
    xx, yy = np.meshgrid(x, x, indexing="ij")
    nodes = np.column_stack([xx.ravel(), yy.ravel()])
    weights = np.outer(w, w).ravel()
    return nodes, weights


def _pairwise_dist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2))


class KLBasis:
    """Discrete Karhunen-Loeve eigenpairs with Nystrom evaluation.

    Eigenvalues are sorted descending and clamped at zero; eigenfunctions
    are L2(D)-normalised with the sign fixed so their integral over D is
    nonnegative (first-node sign decides near-zero-mean cases).
    """

    def __init__(self, params: MaternParams, q_per_dim: int, mu: np.ndarray,
                 nodes: np.ndarray, weights: np.ndarray, xi_nodes: np.ndarray):
        self.params = params
        self.q_per_dim = int(q_per_dim)
        self.mu = mu
        self.nodes = nodes
        self.weights = weights
        self.xi_nodes = xi_nodes

    @property
    def s_star(self) -> int:
        return int(self.mu.size)

    def trace(self) -> float:
        return float(np.sum(self.mu))

    def eigenfunction_values(self, points: np.ndarray, s: int) -> np.ndarray:
        """Nystrom extension: xi_j(x) for j < s at the given points, (n, s)."""
        if not 1 <= s <= self.s_star:
            raise ValueError(f"need 1 <= s <= {self.s_star}, got {s}")
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if pts.shape[1] != self.params.d:
            raise ValueError(f"points must have {self.params.d} columns")
        kmat = matern_cov(_pairwise_dist(pts, self.nodes), self.params)
        return (kmat * self.weights[None, :]) @ self.xi_nodes[:, :s] / self.mu[None, :s]

    def eigenfunction_eval(self, j: int, points: np.ndarray) -> np.ndarray:
        """Values of eigenfunction j (0-based) at the given points."""
        if not 0 <= j < self.s_star:
            raise ValueError(f"need 0 <= j < {self.s_star}, got {j}")
        vals = self.eigenfunction_values(points, j + 1)
        return vals[:, j]

    def field_matrix(self, points: np.ndarray, s: int) -> np.ndarray:
        """sqrt(mu_j) * xi_j(x) stacked as shape (s, n_points)."""
        vals = self.eigenfunction_values(points, s)
        return (vals * np.sqrt(self.mu[None, :s])).T

    def save(self, path) -> None:
        np.savez(path,
                 nu=self.params.nu, sigma2=self.params.sigma2,
                 lambda_c=self.params.lambda_c, d=self.params.d,
                 q_per_dim=self.q_per_dim, mu=self.mu, nodes=self.nodes,
                 weights=self.weights, xi_nodes=self.xi_nodes)

    @classmethod
    def load(cls, path) -> "KLBasis":
        with np.load(path) as data:
            params = MaternParams(nu=float(data["nu"]), sigma2=float(data["sigma2"]),
                                  lambda_c=float(data["lambda_c"]), d=int(data["d"]))
            return cls(params=params, q_per_dim=int(data["q_per_dim"]),
                       mu=data["mu"].copy(), nodes=data["nodes"].copy(),
                       weights=data["weights"].copy(), xi_nodes=data["xi_nodes"].copy())

    def cache_key(self) -> str:
        p = self.params
        return f"matern-nu{p.nu}-s2{p.sigma2}-lc{p.lambda_c}-d{p.d}-q{self.q_per_dim}"


def default_quadrature(d: int) -> int:
    return 200 if d == 1 else 48


def nystrom_eigendecomposition(params: MaternParams,
                               q_per_dim: int | None = None,
                               drop_tol: float = 1e-14) -> KLBasis:
    """Eigenpairs of the covariance operator on (0,1)^d.

    The kernel matrix at the quadrature nodes is symmetrised as
    W^(1/2) K W^(1/2); its orthonormal eigenvectors v give discrete
    eigenfunction values xi(x_k) = v_k / sqrt(w_k), which are exactly
    orthonormal under the quadrature inner product.  Eigenvalues below
    drop_tol * mu_1 are discarded (they are quadrature noise).
    """
    if q_per_dim is None:
        q_per_dim = default_quadrature(params.d)
    if q_per_dim < 2:
        raise ValueError(f"q_per_dim must be >= 2, got {q_per_dim}")
    nodes, weights = _gauss_legendre_grid(q_per_dim, params.d)
    kmat = matern_cov(_pairwise_dist(nodes, nodes), params)
    sq = np.sqrt(weights)
    sym = kmat * sq[:, None] * sq[None, :]
    sym = 0.5 * (sym + sym.T)
    vals, vecs = eigh(sym)
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order]

    keep = vals > max(drop_tol * vals[0], 0.0)
    vals = np.maximum(vals[keep], 0.0)
    xi = vecs[:, keep] / sq[:, None]

    # Sign convention: integral of xi_j over D nonnegative; fall back to the
    # value at the first node when the integral is numerically zero.
    integrals = weights @ xi
    signs = np.where(np.abs(integrals) > 1e-8, np.sign(integrals), np.sign(xi[0, :]))
    signs[signs == 0.0] = 1.0
    xi = xi * signs[None, :]

    return KLBasis(params=params, q_per_dim=q_per_dim, mu=vals,
                   nodes=nodes, weights=weights, xi_nodes=xi)


def kl_coefficient(basis: KLBasis, y: np.ndarray, points: np.ndarray,
                   a0=1.0, a_star=0.0) -> np.ndarray:
    """Diffusion coefficient a(x) = a_star(x) + a0(x) * exp(sum_j sqrt(mu_j) xi_j(x) y_j).

    a0 and a_star may be constants or callables of the evaluation points.
    The truncation order is the length of y.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1:
        raise ValueError("y must be a 1-d coefficient vector")
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    fm = basis.field_matrix(pts, y.size)
    log_part = y @ fm
    a0_vals = a0(pts) if callable(a0) else a0
    a_star_vals = a_star(pts) if callable(a_star) else a_star
    return a_star_vals + a0_vals * np.exp(log_part)


def b_sequences(basis: KLBasis, s: int | None = None,
                probe_factor: int | None = None,
                fd_step: float = 1e-5) -> tuple[np.ndarray, np.ndarray]:
    """Decay sequences b_j = sqrt(mu_j)*sup|xi_j| and the gradient-aware bbar_j.

    Sup norms are probed on a uniform grid probe_factor times finer than the
    quadrature spacing; gradients use central differences of the Nystrom
    extension.  Probes near the boundary are pulled inward by the
    differencing step.
    """
    if s is None:
        s = basis.s_star
    if probe_factor is None:
        probe_factor = 10 if basis.params.d == 1 else 3
    d = basis.params.d
    n1 = probe_factor * basis.q_per_dim
    axis = (np.arange(n1) + 0.5) / n1
    axis = np.clip(axis, fd_step, 1.0 - fd_step)
    if d == 1:
        probes = axis[:, None]
    else:
        xx, yy = np.meshgrid(axis, axis, indexing="ij")
        probes = np.column_stack([xx.ravel(), yy.ravel()])

    vals = basis.eigenfunction_values(probes, s)
    sup = np.max(np.abs(vals), axis=0)

    grad_sq = np.zeros((probes.shape[0], s))
    for ax in range(d):
        hi = probes.copy()
        lo = probes.copy()
        hi[:, ax] += fd_step
        lo[:, ax] -= fd_step
        dv = (basis.eigenfunction_values(hi, s) - basis.eigenfunction_values(lo, s))
        grad_sq += (dv / (2.0 * fd_step)) ** 2
    sup_grad = np.max(np.sqrt(grad_sq), axis=0)

    root_mu = np.sqrt(basis.mu[:s])
    b = root_mu * sup
    b_bar = root_mu * np.maximum(sup, sup_grad)
    return b, b_bar
