"""Piecewise-linear finite elements for -(a u')' = f on (0,1), u(0)=u(1)=0.

Uniform meshes of width h = 2^-(level+level0).  The coefficient is sampled
once per element at the midpoint, which keeps the element integrals exact
for the sampled (piecewise constant) coefficient and gives the tridiagonal
system

    A[i,i]   = (a_i + a_{i+1}) / h      (elements left/right of node i)
    A[i,i+1] = -a_{i+1} / h

solved by the Thomas algorithm.  All routines accept batches of coefficient
vectors so many samples share one sweep.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Mesh1D:
    level: int
    level0: int

    def __post_init__(self) -> None:
        if self.level < 0 or self.level0 < 0:
            raise ValueError("level and level0 must be nonnegative")
        if self.level + self.level0 < 1:
            raise ValueError("need at least two elements: level + level0 >= 1")

    @property
    def n_elems(self) -> int:
        return 1 << (self.level + self.level0)

    @property
    def h(self) -> float:
        return 1.0 / self.n_elems

    @property
    def n_interior(self) -> int:
        return self.n_elems - 1

    @property
    def midpoints(self) -> np.ndarray:
        n = self.n_elems
        return (np.arange(n) + 0.5) / n

    @property
    def interior_nodes(self) -> np.ndarray:
        n = self.n_elems
        return np.arange(1, n) / n


def thomas_solve(lower: np.ndarray, diag: np.ndarray, upper: np.ndarray,
                 rhs: np.ndarray) -> np.ndarray:
    """Tridiagonal solve by forward elimination and back substitution.

    All arguments may carry leading batch axes; the last axis is the
    equation index (lower/upper have one entry fewer than diag).
    """
    diag = np.array(diag, dtype=np.float64, copy=True)
    rhs = np.array(rhs, dtype=np.float64, copy=True)
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    m = diag.shape[-1]
    if lower.shape[-1] != m - 1 or upper.shape[-1] != m - 1 or rhs.shape[-1] != m:
        raise ValueError("inconsistent tridiagonal shapes")
    for i in range(1, m):
        w = lower[..., i - 1] / diag[..., i - 1]
        diag[..., i] -= w * upper[..., i - 1]
        rhs[..., i] -= w * rhs[..., i - 1]
    out = np.empty_like(rhs)
    out[..., m - 1] = rhs[..., m - 1] / diag[..., m - 1]
    for i in range(m - 2, -1, -1):
        out[..., i] = (rhs[..., i] - upper[..., i] * out[..., i + 1]) / diag[..., i]
    return out


def load_vector(mesh: Mesh1D, f) -> np.ndarray:
    """Midpoint-rule load: f constant gives the exact h*f per interior node."""
    h = mesh.h
    if callable(f):
        fm = np.asarray(f(mesh.midpoints), dtype=np.float64)
        return 0.5 * h * (fm[:-1] + fm[1:])
    return np.full(mesh.n_interior, h * float(f))


def assemble_solve(mesh: Mesh1D, a_mid: np.ndarray, f=1.0) -> np.ndarray:
    """Nodal interior values for coefficient batches a_mid of shape (..., n_elems)."""
    a = np.asarray(a_mid, dtype=np.float64)
    if a.shape[-1] != mesh.n_elems:
        raise ValueError(f"coefficient needs {mesh.n_elems} midpoint values")
    if np.any(a <= 0.0):
        raise ValueError("coefficient must be strictly positive")
    h = mesh.h
    diag = (a[..., :-1] + a[..., 1:]) / h
    off = -a[..., 1:-1] / h
    rhs = np.broadcast_to(load_vector(mesh, f), diag.shape)
    return thomas_solve(off, diag, off, rhs)


def residual_inf_norm(mesh: Mesh1D, a_mid: np.ndarray, u: np.ndarray, f=1.0) -> float:
    a = np.asarray(a_mid, dtype=np.float64)
    h = mesh.h
    diag = (a[..., :-1] + a[..., 1:]) / h
    off = -a[..., 1:-1] / h
    rhs = np.broadcast_to(load_vector(mesh, f), diag.shape)
    r = diag * u - rhs
    r[..., 1:] += off * u[..., :-1]
    r[..., :-1] += off * u[..., 1:]
    return float(np.max(np.abs(r)))


def point_eval_weights(mesh: Mesh1D, x0: float) -> tuple[int, float, float]:
    """Hat-function weights for evaluating u_h at x0 from interior nodal values.

    Returns (k, w_left, w_right) so that u_h(x0) = w_left*u[k-1] + w_right*u[k]
    with the convention u[-1] = u[M] = 0 handled by zero weights.
    """
    if not 0.0 < x0 < 1.0:
        raise ValueError(f"evaluation point must lie in (0,1), got {x0}")
    n = mesh.n_elems
    k = min(int(np.floor(x0 * n)), n - 1)  # element index, nodes k and k+1
    t = x0 * n - k
    # interior nodal indices: node j sits at (j+1)*h, j = 0..M-1
    w_left = (1.0 - t) if k >= 1 else 0.0
    w_right = t if k + 1 <= n - 1 else 0.0
    return k, w_left, w_right


def point_functional(mesh: Mesh1D, u: np.ndarray, x0: float):
    """u_h(x0) for single or batched nodal vectors."""
    k, wl, wr = point_eval_weights(mesh, x0)
    u = np.asarray(u, dtype=np.float64)
    out = np.zeros(u.shape[:-1])
    if wl != 0.0:
        out = out + wl * u[..., k - 1]
    if wr != 0.0:
        out = out + wr * u[..., k]
    return float(out) if out.ndim == 0 else out
