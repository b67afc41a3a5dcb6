"""P1 finite elements on a structured triangulation of the unit square.

Each mesh cell is split along its lower-left to upper-right diagonal; the
coefficient is sampled once per triangle at the centroid.  Two boundary
setups are supported:

* ``dirichlet``: u = 0 on the whole boundary, source f, output the average
  of u_h over a subregion.
* ``flowcell``: u = 1 on x1 = 0 and u = 0 on x1 = 1, no flow through the
  horizontal boundaries (natural), f = 0, output the flux through x1 = 1.

Systems are stored sparse (CSR) and solved by diagonally preconditioned
conjugate gradients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError, NumericalError

# Local stiffness matrices (unit coefficient) for the two triangle shapes of
# the structured split: (ll, lr, ur) and (ll, ur, ul).  Both are independent
# of the cell size because the P1 stiffness is scale invariant in 2d.
_K_LOWER = np.array([[0.5, -0.5, 0.0],
                     [-0.5, 1.0, -0.5],
                     [0.0, -0.5, 0.5]])
_K_UPPER = np.array([[0.5, 0.0, -0.5],
                     [0.0, 0.5, -0.5],
                     [-0.5, -0.5, 1.0]])
# P1 gradients on the reference cell of size g are these over g.
_GRAD_LOWER = np.array([[-1.0, 0.0], [1.0, -1.0], [0.0, 1.0]])
_GRAD_UPPER = np.array([[0.0, -1.0], [1.0, 0.0], [-1.0, 1.0]])


@dataclass(frozen=True)
class Mesh2D:
    level: int
    level0: int

    def __post_init__(self) -> None:
        if self.level < 0 or self.level0 < 1:
            raise ValueError("need level >= 0 and level0 >= 1")

    @property
    def cells_per_side(self) -> int:
        return 1 << (self.level + self.level0)

    @property
    def h(self) -> float:
        # Triangle diameter: the cell diagonal.
        return math.sqrt(2.0) / self.cells_per_side

    @property
    def n_nodes(self) -> int:
        return (self.cells_per_side + 1) ** 2

    @property
    def n_triangles(self) -> int:
        return 2 * self.cells_per_side ** 2

    def node_coords(self) -> np.ndarray:
        n = self.cells_per_side
        ax = np.arange(n + 1) / n
        xx, yy = np.meshgrid(ax, ax, indexing="xy")
        return np.column_stack([xx.ravel(), yy.ravel()])

    def triangles(self) -> np.ndarray:
        """Node triples, lower triangles first, both in cell raster order."""
        n = self.cells_per_side
        ix, iy = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
        ix = ix.ravel()
        iy = iy.ravel()
        ll = iy * (n + 1) + ix
        lr = ll + 1
        ul = ll + (n + 1)
        ur = ul + 1
        lower = np.column_stack([ll, lr, ur])
        upper = np.column_stack([ll, ur, ul])
        return np.vstack([lower, upper])

    def centroids(self) -> np.ndarray:
        coords = self.node_coords()
        tri = self.triangles()
        return coords[tri].mean(axis=1)

    def boundary_mask(self, kind: str) -> np.ndarray:
        """True at nodes carrying essential (Dirichlet) conditions."""
        n = self.cells_per_side
        ix = np.tile(np.arange(n + 1), n + 1)
        iy = np.repeat(np.arange(n + 1), n + 1)
        if kind == "dirichlet":
            return (ix == 0) | (ix == n) | (iy == 0) | (iy == n)
        if kind == "flowcell":
            return (ix == 0) | (ix == n)
        raise ConfigurationError(f"unknown boundary kind {kind!r}")

    def lift_values(self, kind: str) -> np.ndarray:
        """Essential boundary data interpolated at the constrained nodes only."""
        g = np.zeros(self.n_nodes)
        if kind == "flowcell":
            coords = self.node_coords()
            mask = self.boundary_mask(kind)
            g[mask] = 1.0 - coords[mask, 0]
        return g


@dataclass
class System2D:
    mesh: Mesh2D
    kind: str
    a_tri: np.ndarray
    matrix_free: sp.csr_matrix
    rhs_free: np.ndarray
    free_idx: np.ndarray
    lift: np.ndarray


@dataclass
class Solution2D:
    mesh: Mesh2D
    kind: str
    u: np.ndarray           # full nodal vector including boundary values
    a_tri: np.ndarray
    iterations: int


def assemble_full(mesh: Mesh2D, a_tri: np.ndarray) -> sp.csr_matrix:
    """Unconstrained stiffness matrix for per-triangle coefficients."""
    a_tri = np.asarray(a_tri, dtype=np.float64)
    if a_tri.shape != (mesh.n_triangles,):
        raise ValueError(f"need {mesh.n_triangles} triangle coefficients")
    if np.any(a_tri <= 0.0):
        raise ValueError("coefficient must be strictly positive")
    tri = mesh.triangles()
    half = mesh.cells_per_side ** 2
    rows = []
    cols = []
    data = []
    for sel, kloc in ((slice(0, half), _K_LOWER), (slice(half, None), _K_UPPER)):
        t = tri[sel]
        vals = a_tri[sel, None, None] * kloc[None, :, :]
        rows.append(np.repeat(t, 3, axis=1).ravel())
        cols.append(np.tile(t, (1, 3)).ravel())
        data.append(vals.ravel())
    n = mesh.n_nodes
    mat = sp.coo_matrix((np.concatenate(data),
                         (np.concatenate(rows), np.concatenate(cols))),
                        shape=(n, n))
    return mat.tocsr()


def load_full(mesh: Mesh2D, f) -> np.ndarray:
    """One-point (centroid) quadrature load vector on all nodes."""
    if callable(f):
        fc = np.asarray(f(mesh.centroids()), dtype=np.float64)
    else:
        fc = np.full(mesh.n_triangles, float(f))
    area = 0.5 / mesh.cells_per_side ** 2
    tri = mesh.triangles()
    b = np.zeros(mesh.n_nodes)
    np.add.at(b, tri.ravel(), np.repeat(fc * area / 3.0, 3))
    return b


def assemble(mesh: Mesh2D, a_tri: np.ndarray, f, kind: str) -> System2D:
    """Constrained system with the essential conditions eliminated.

    For the flow cell the lift g (boundary interpolant of 1 - x1, zero at
    interior nodes) moves to the right-hand side as -A*g.
    """
    a_full = assemble_full(mesh, a_tri)
    b = load_full(mesh, f)
    mask = mesh.boundary_mask(kind)
    free = np.flatnonzero(~mask)
    lift = mesh.lift_values(kind)
    if np.any(lift != 0.0):
        b = b - a_full @ lift
    mat_free = a_full[free][:, free].tocsr()
    return System2D(mesh=mesh, kind=kind, a_tri=np.asarray(a_tri, dtype=np.float64),
                    matrix_free=mat_free, rhs_free=b[free], free_idx=free, lift=lift)


def solve(system: System2D, tol: float = 1e-10) -> Solution2D:
    """Diagonally preconditioned CG down to relative residual tol.

    Raises NumericalError when 20*sqrt(M) iterations do not suffice.
    """
    amat = system.matrix_free
    b = system.rhs_free
    m = b.size
    max_iter = int(20.0 * math.sqrt(m)) + 1
    x = np.zeros(m)
    b_norm = float(np.linalg.norm(b))
    iterations = 0
    if b_norm > 0.0:
        inv_diag = 1.0 / amat.diagonal()
        r = b.copy()
        z = inv_diag * r
        p = z.copy()
        rz = float(r @ z)
        for iterations in range(1, max_iter + 1):
            ap = amat @ p
            alpha = rz / float(p @ ap)
            x += alpha * p
            r -= alpha * ap
            if float(np.linalg.norm(r)) <= tol * b_norm:
                break
            z = inv_diag * r
            rz_new = float(r @ z)
            p = z + (rz_new / rz) * p
            rz = rz_new
        else:
            raise NumericalError(
                f"CG failed to reach {tol:g} within {max_iter} iterations")

    u = system.lift.copy()
    u[system.free_idx] += x
    return Solution2D(mesh=system.mesh, kind=system.kind, u=u,
                      a_tri=system.a_tri, iterations=iterations)


def average_functional(mesh: Mesh2D, u: np.ndarray, region) -> float:
    """Mean of u_h over an axis-aligned rectangle made of whole cells.

    The rectangle corners must sit on mesh lines; P1 integration over each
    triangle is exact (area times vertex mean).
    """
    (x_lo, x_hi), (y_lo, y_hi) = region
    n = mesh.cells_per_side
    bounds = []
    for v in (x_lo, x_hi, y_lo, y_hi):
        scaled = v * n
        snapped = round(scaled)
        if abs(scaled - snapped) > 1e-9:
            raise ConfigurationError(
                f"region corner {v} does not lie on mesh lines at {n} cells per side")
        bounds.append(int(snapped))
    bx0, bx1, by0, by1 = bounds
    if not (0 <= bx0 < bx1 <= n and 0 <= by0 < by1 <= n):
        raise ConfigurationError("region must be a nonempty rectangle inside (0,1)^2")

    ix, iy = np.meshgrid(np.arange(bx0, bx1), np.arange(by0, by1), indexing="xy")
    cell = iy.ravel() * n + ix.ravel()
    tri = mesh.triangles()
    sel = np.concatenate([cell, cell + n * n])  # lower and upper triangle of each cell
    area = 0.5 / n ** 2
    integral = float(np.sum(u[tri[sel]].mean(axis=1)) * area)
    return integral / ((x_hi - x_lo) * (y_hi - y_lo))


def flux_functional(mesh: Mesh2D, u: np.ndarray, a_tri: np.ndarray) -> float:
    """Outflow through x1 = 1: minus the bilinear form A(u_h, phi).

    phi is the nodal indicator of the x1 = 1 boundary; only the last cell
    column contributes.  Computed element by element with the constant
    per-triangle gradients.
    """
    n = mesh.cells_per_side
    phi = np.zeros(mesh.n_nodes)
    ix = np.tile(np.arange(n + 1), n + 1)
    phi[ix == n] = 1.0
    tri = mesh.triangles()
    half = n * n
    total = 0.0
    for sel, grad in ((slice(0, half), _GRAD_LOWER), (slice(half, None), _GRAD_UPPER)):
        t = tri[sel]
        # gradients of nodal fields; the 1/g scaling cancels against the
        # triangle area g^2/2 except for one net factor of 1/2.
        gu = np.tensordot(u[t], grad, axes=([1], [0]))
        gp = np.tensordot(phi[t], grad, axes=([1], [0]))
        total += float(np.sum(a_tri[sel] * np.sum(gu * gp, axis=1)))
    return -0.5 * total


def export_triplets(path, matrix: sp.spmatrix) -> None:
    """Write the sparse matrix as ``row col value`` text lines."""
    coo = matrix.tocoo()
    with open(path, "w") as fh:
        for i, j, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{i} {j} {v!r}\n")


def work_units(iterations: int, nnz: int, s: int, n_triangles: int) -> float:
    """Cost model for one 2d solve: CG work plus field evaluation work."""
    return float(iterations) * float(nnz) + float(s) * float(n_triangles)
