"""Lognormal diffusion problems exposed as per-level integrands.

A problem couples a KL basis to a finite element discretisation and an
output functional.  Level ell uses mesh width h_ell = 2^-(ell+ell0) (times
sqrt(2) in 2d) and a truncation order s_ell; the multilevel correction at
ell >= 1 evaluates fine and coarse solution with the same Gaussian draw,
the coarse one seeing only the first s_{ell-1} components.

Evaluation is batched: Y has shape (n_samples, s).  Each call also returns
the model work it consumed, so estimators can report costs without timing
anything.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fem1d, fem2d
from .errors import ConfigurationError
from .randomfield import KLBasis

DEFAULT_REGION = ((0.75, 0.875), (0.875, 1.0))


@dataclass(frozen=True)
class LevelSpec:
    """One level of the telescoping sum: meshes and truncation orders."""

    ell: int
    s: int
    s_coarse: int | None  # None on level 0 (no coarse term)

    def __post_init__(self) -> None:
        if self.ell < 0:
            raise ValueError("level must be nonnegative")
        if self.s < 1:
            raise ValueError("truncation order must be >= 1")
        if self.ell == 0:
            if self.s_coarse is not None:
                raise ValueError("level 0 has no coarse term")
        elif self.s_coarse is None or not 1 <= self.s_coarse <= self.s:
            raise ValueError("need 1 <= s_coarse <= s on levels >= 1")


class LognormalPde:
    """Diffusion problem -div(a grad u) = f with lognormal a and one output.

    kind is one of ``point1d`` (u_h(x0) on (0,1)), ``average2d`` (mean of
    u_h over a subregion, homogeneous Dirichlet), ``flux2d`` (flow cell).
    """

    def __init__(self, basis: KLBasis, kind: str, ell0: int, f: float | None = None,
                 point: float = 1.0 / 3.0, region=DEFAULT_REGION,
                 cg_tol: float = 1e-10):
        if kind not in ("point1d", "average2d", "flux2d"):
            raise ConfigurationError(f"unknown problem kind {kind!r}")
        if kind == "point1d" and basis.params.d != 1:
            raise ConfigurationError("point1d needs a 1-d field")
        if kind != "point1d" and basis.params.d != 2:
            raise ConfigurationError(f"{kind} needs a 2-d field")
        self.basis = basis
        self.kind = kind
        self.ell0 = int(ell0)
        # Flow cells are driven by the boundary data alone.
        self.f = (0.0 if kind == "flux2d" else 1.0) if f is None else float(f)
        self.point = float(point)
        self.region = region
        self.cg_tol = float(cg_tol)
        self._meshes: dict[int, object] = {}
        self._field_cache: dict[tuple[int, int], np.ndarray] = {}

    @property
    def d(self) -> int:
        return self.basis.params.d

    def h(self, ell: int) -> float:
        return self.mesh(ell).h

    def mesh(self, ell: int):
        if ell not in self._meshes:
            if self.d == 1:
                self._meshes[ell] = fem1d.Mesh1D(level=ell, level0=self.ell0)
            else:
                self._meshes[ell] = fem2d.Mesh2D(level=ell, level0=self.ell0)
        return self._meshes[ell]

    def level_spec(self, ell: int, s: int, s_coarse: int | None = None) -> LevelSpec:
        return LevelSpec(ell=ell, s=s, s_coarse=s_coarse)

    def field_matrix(self, ell: int, s: int) -> np.ndarray:
        """sqrt(mu_j)*xi_j at the coefficient sampling points, shape (s, n_elem)."""
        key = (ell, s)
        if key not in self._field_cache:
            mesh = self.mesh(ell)
            if self.d == 1:
                pts = mesh.midpoints[:, None]
            else:
                pts = mesh.centroids()
            self._field_cache[key] = self.basis.field_matrix(pts, s)
        return self._field_cache[key]

    def coefficients(self, ell: int, y_batch: np.ndarray) -> np.ndarray:
        """Lognormal coefficient at the sampling points for a batch of draws."""
        y_batch = np.atleast_2d(np.asarray(y_batch, dtype=np.float64))
        fm = self.field_matrix(ell, y_batch.shape[1])
        return np.exp(y_batch @ fm)

    def functional_batch(self, ell: int, y_batch: np.ndarray) -> tuple[np.ndarray, float]:
        """F_ell at each draw plus the model work consumed."""
        y_batch = np.atleast_2d(np.asarray(y_batch, dtype=np.float64))
        a = self.coefficients(ell, y_batch)
        if self.d == 1:
            mesh = self.mesh(ell)
            u = fem1d.assemble_solve(mesh, a, self.f)
            vals = fem1d.point_functional(mesh, u, self.point)
            work = y_batch.shape[0] * self.unit_work(ell, y_batch.shape[1])
            return np.atleast_1d(vals), work
        return self._functional_2d(ell, a, y_batch.shape[1])

    def _functional_2d(self, ell: int, a_batch: np.ndarray, s: int) -> tuple[np.ndarray, float]:
        mesh = self.mesh(ell)
        kind = "flowcell" if self.kind == "flux2d" else "dirichlet"
        out = np.empty(a_batch.shape[0])
        work = 0.0
        for i in range(a_batch.shape[0]):
            system = fem2d.assemble(mesh, a_batch[i], self.f, kind)
            sol = fem2d.solve(system, tol=self.cg_tol)
            if self.kind == "average2d":
                out[i] = fem2d.average_functional(mesh, sol.u, self.region)
            else:
                out[i] = fem2d.flux_functional(mesh, sol.u, a_batch[i])
            work += fem2d.work_units(sol.iterations, system.matrix_free.nnz,
                                     s, mesh.n_triangles)
        return out, work

    def difference_batch(self, spec: LevelSpec, y_batch: np.ndarray) -> tuple[np.ndarray, float]:
        """F_ell - F_{ell-1} with shared draws; F_{-1} = 0.

        The reported 1d work follows the uniform per-sample model
        (2*s + 13)/h_ell regardless of level, so level-0 draws and
        difference draws are charged alike; 2d work is measured per solve.
        """
        y_batch = np.atleast_2d(np.asarray(y_batch, dtype=np.float64))
        if y_batch.shape[1] != spec.s:
            raise ValueError(f"draws must have {spec.s} components, got {y_batch.shape[1]}")
        fine, work = self.functional_batch(spec.ell, y_batch)
        if spec.ell == 0:
            return fine, work
        coarse, cwork = self.functional_batch(spec.ell - 1, y_batch[:, :spec.s_coarse])
        if self.d == 1:
            # one model charge per difference draw, not fine plus coarse
            cwork = 0.0
            work = y_batch.shape[0] * self.unit_work(spec.ell, spec.s)
        return fine - coarse, work + cwork

    def difference_integrand(self, spec: LevelSpec):
        def integrand(y_batch: np.ndarray) -> tuple[np.ndarray, float]:
            return self.difference_batch(spec, y_batch)
        return integrand

    def unit_work(self, ell: int, s: int) -> float:
        """Model work per draw at level ell: (2*s + 13)/h in 1d.

        2*s + 1 operations per mesh point for the KL sum plus 8 per unknown
        for the tridiagonal solves of both meshes (8/h + 4/h = 12/h).  In
        2d the work is data dependent (CG iterations); evaluators measure
        it instead, and this hint covers only the field part.
        """
        if self.d == 1:
            return (2.0 * s + 13.0) * self.mesh(ell).n_elems
        return float(s) * self.mesh(ell).n_triangles


def sample_difference(problem: LognormalPde, spec: LevelSpec, y: np.ndarray) -> float:
    """Single-draw multilevel correction F_ell(y) - F_{ell-1}(y)."""
    vals, _ = problem.difference_batch(spec, np.atleast_2d(y))
    return float(vals[0])
