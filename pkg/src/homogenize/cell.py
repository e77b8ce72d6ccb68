"""Periodic cell problems, the effective tensor and Voigt-Reuss bounds."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import fem
from .exceptions import SolverError
from .mesh import PeriodicMap, StructuredMesh, build_periodic_map, build_unit_square_mesh
from .microstructure import MicrostructureSpec, cell_coefficient
from .validation import check_points


@dataclass(frozen=True)
class CellSolutions:
    """Mean-zero periodic correctors as nodal fields on the cell mesh."""

    chi1: np.ndarray = field(repr=False)
    chi2: np.ndarray = field(repr=False)
    cell_mesh: StructuredMesh
    spec: MicrostructureSpec
    periodic_map: PeriodicMap = field(repr=False)
    reports: tuple = ()

    @property
    def chi(self) -> np.ndarray:
        return np.column_stack([self.chi1, self.chi2])

    def gradients(self) -> np.ndarray:
        """Per-triangle gradients, shape (T, 2 correctors, 2 components)."""
        return np.stack([fem.element_gradients(self.cell_mesh, self.chi1),
                         fem.element_gradients(self.cell_mesh, self.chi2)], axis=1)


@dataclass(frozen=True)
class EffectiveTensor:
    a0: np.ndarray

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(0.5 * (self.a0 + self.a0.T))

    @property
    def symmetry_defect(self) -> float:
        return float(abs(self.a0[0, 1] - self.a0[1, 0]))


def _alignment_warning(mesh: StructuredMesh, spec: MicrostructureSpec) -> None:
    if spec.kind in ("laminate", "checkerboard") and mesh.n % 2:
        warnings.warn(f"{spec.kind} interface at y = 0.5 does not align with an "
                      f"n = {mesh.n} cell mesh", RuntimeWarning, stacklevel=3)
    if spec.kind != "constant" and mesh.n < 8:
        warnings.warn(f"cell mesh n = {mesh.n} under-resolves the geometry",
                      RuntimeWarning, stacklevel=3)


def solve_cell_problems(cell_mesh: StructuredMesh, pmap: PeriodicMap,
                        spec: MicrostructureSpec, tol: float = 1e-12,
                        maxit: int | None = None) -> CellSolutions:
    """Solve -div a (grad chi^i + e^i) = 0 with periodic, mean-zero chi^i.

    The singular periodic system is consistent (its right-hand side is
    orthogonal to constants), so CG runs on it directly; the lumped mean is
    removed afterwards.
    """
    _alignment_warning(cell_mesh, spec)
    coeff = fem.element_coefficients(cell_mesh, cell_coefficient(spec))
    K = fem.assemble_stiffness(cell_mesh, coeff, pmap.dof, pmap.free_count)
    grads = cell_mesh.gradients()
    areas = cell_mesh.areas()
    tri_dof = pmap.dof[cell_mesh.triangles]
    mass = np.bincount(pmap.dof, weights=fem.assemble_mass_lumped(cell_mesh),
                       minlength=pmap.free_count)

    chis, reports = [], []
    for i in range(2):
        flux = coeff[:, :, i]  # a e^i per triangle
        local = -areas[:, None] * np.einsum("tka,ta->tk", grads, flux)
        rhs = np.bincount(tri_dof.ravel(), weights=local.ravel(), minlength=pmap.free_count)
        rhs -= rhs.mean()
        if np.linalg.norm(rhs) == 0.0:
            x = np.zeros(pmap.free_count)
            rep = fem.CgReport(0, 0.0, True)
        else:
            x, rep = fem.cg_solve(K, rhs, tol=tol, maxit=maxit)
            if not rep.converged:
                raise SolverError(f"cell problem {i + 1}: CG did not converge after "
                                  f"{rep.iterations} iterations", rep)
        x -= np.sum(mass * x) / np.sum(mass)
        chis.append(pmap.expand(x))
        reports.append(rep)
    return CellSolutions(chis[0], chis[1], cell_mesh, spec, pmap, tuple(reports))


def compute_effective_tensor(cells: CellSolutions) -> EffectiveTensor:
    """a0_ij = sum_T |T| (a_T (e^i + grad chi^i)) . (e^j + grad chi^j)."""
    mesh = cells.cell_mesh
    coeff = fem.element_coefficients(mesh, cell_coefficient(cells.spec))
    strains = np.eye(2)[None] + cells.gradients()  # (T, i, comp)
    a0 = np.einsum("t,tia,tab,tjb->ij", mesh.areas(), strains, coeff, strains)
    return EffectiveTensor(a0)


def voigt_reuss_bounds(spec: MicrostructureSpec, cell_mesh: StructuredMesh | None = None):
    """Harmonic (lower) and arithmetic (upper) means of the phase coefficients.

    Phase fractions are the exact areas of the geometry, or, when
    ``cell_mesh`` is given, the fractions seen by centroid sampling on it.
    """
    if spec.kind == "constant":
        return spec.a_matrix, spec.a_matrix
    if cell_mesh is None:
        theta = spec.inclusion_fraction()
    else:
        theta = float(spec.in_inclusion(cell_mesh.centroids()).mean())
    a_f, a_s = spec.a_matrix, spec.a_inclusion
    upper = (1 - theta) * a_f + theta * a_s
    lower = 1.0 / ((1 - theta) / a_f + theta / a_s)
    return lower, upper


def corrector_values(cells: CellSolutions, y) -> np.ndarray:
    """chi^i evaluated by P1 interpolation at cell points ``y``; shape (N, 2)."""
    y = np.asarray(y, dtype=float).reshape(-1, 2)
    return np.column_stack([cells.cell_mesh.interpolate(cells.chi1, y),
                            cells.cell_mesh.interpolate(cells.chi2, y)])


def corrector_gradient_values(cells: CellSolutions, y) -> np.ndarray:
    """grad_y chi^i at cell points ``y``; shape (N, 2 correctors, 2)."""
    tri, _ = cells.cell_mesh.locate(np.asarray(y, dtype=float).reshape(-1, 2))
    return cells.gradients()[tri]


class CellHomogenizer(TransformerMixin, BaseEstimator):
    """Estimator wrapper around the cell problems.

    ``fit`` solves both cell problems and stores the effective tensor;
    ``transform`` maps points of R^2 (read modulo the unit cell) to the
    corrector values (chi^1, chi^2).

    Parameters
    ----------
    microstructure : MicrostructureSpec
    cell_mesh_n : int
        Squares per side of the periodic cell mesh.
    tol : float
        Relative CG tolerance for the cell solves.

    Attributes
    ----------
    cells_ : CellSolutions
    effective_tensor_ : ndarray of shape (2, 2)
    bounds_ : tuple of float
        Voigt-Reuss (harmonic, arithmetic) means.
    """

    def __init__(self, microstructure=None, cell_mesh_n=128, tol=1e-12):
        self.microstructure = microstructure
        self.cell_mesh_n = cell_mesh_n
        self.tol = tol

    def fit(self, X=None, y=None):
        spec = self.microstructure if self.microstructure is not None else MicrostructureSpec()
        mesh = build_unit_square_mesh(self.cell_mesh_n)
        self.cells_ = solve_cell_problems(mesh, build_periodic_map(mesh), spec, self.tol)
        self.effective_tensor_ = compute_effective_tensor(self.cells_).a0
        self.bounds_ = voigt_reuss_bounds(spec)
        return self

    def transform(self, X):
        check_is_fitted(self, "cells_")
        X = check_points(X)
        return corrector_values(self.cells_, X - np.floor(X))
