"""P1 assembly, Jacobi-preconditioned CG and discrete norms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .exceptions import ConfigurationError, EvaluationError, SolverError
from .mesh import StructuredMesh


@dataclass(frozen=True)
class CgReport:
    iterations: int
    final_residual: float
    converged: bool


def element_coefficients(mesh: StructuredMesh, coeff) -> np.ndarray:
    """Resolve a coefficient provider into per-triangle 2x2 matrices.

    ``coeff`` may be a scalar, a (2, 2) matrix, a (T, 2, 2) array or a
    callable mapping centroids (T, 2) to one of those shapes.
    """
    if callable(coeff):
        coeff = coeff(mesh.centroids())
    c = np.asarray(coeff, dtype=float)
    nt = mesh.n_triangles
    if c.ndim == 0:
        c = c * np.eye(2)
    if c.shape == (2, 2):
        c = np.broadcast_to(c, (nt, 2, 2))
    if c.shape != (nt, 2, 2):
        raise ConfigurationError(f"coefficient has shape {c.shape}, expected ({nt}, 2, 2)")
    check_spd(c)
    return c


def check_spd(c: np.ndarray) -> None:
    if not np.all(np.isfinite(c)):
        raise ConfigurationError("coefficient samples must be finite")
    if np.any(np.abs(c[..., 0, 1] - c[..., 1, 0]) > 1e-12 * (1 + np.abs(c).max())):
        raise ConfigurationError("coefficient samples must be symmetric")
    # 2x2 symmetric: SPD iff a11 > 0 and det > 0
    det = c[..., 0, 0] * c[..., 1, 1] - c[..., 0, 1] * c[..., 1, 0]
    if np.any(c[..., 0, 0] <= 0) or np.any(det <= 0):
        raise ConfigurationError("coefficient samples must be positive definite")


def min_eigenvalue(c: np.ndarray) -> float:
    """Smallest eigenvalue over a stack of symmetric 2x2 matrices."""
    return float(np.linalg.eigvalsh(np.asarray(c).reshape(-1, 2, 2)).min())


def _scatter(mesh, local, dof=None, n_dof=None):
    tris = mesh.triangles if dof is None else dof[mesh.triangles]
    if n_dof is None:
        n_dof = mesh.n_nodes
    rows = np.repeat(tris, 3, axis=1).ravel()
    cols = np.tile(tris, (1, 3)).ravel()
    mat = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n_dof, n_dof))
    return mat.tocsr()


def local_stiffness(mesh: StructuredMesh, coeff) -> np.ndarray:
    c = element_coefficients(mesh, coeff)
    g = mesh.gradients()
    return mesh.areas()[:, None, None] * np.einsum("tia,tab,tjb->tij", g, c, g)


def assemble_stiffness(mesh: StructuredMesh, coeff, dof=None, n_dof=None) -> sp.csr_matrix:
    """Assemble ``A_ij = sum_T |T| (C_T grad phi_j) . grad phi_i``.

    With ``dof`` (a node -> class map, e.g. ``PeriodicMap.dof``) the matrix
    is assembled directly on the identified degrees of freedom.
    """
    return _scatter(mesh, local_stiffness(mesh, coeff), dof, n_dof)


def assemble_mass_lumped(mesh: StructuredMesh) -> np.ndarray:
    w = np.repeat(mesh.areas() / 3.0, 3)
    return np.bincount(mesh.triangles.ravel(), weights=w, minlength=mesh.n_nodes)


def evaluate_at_centroids(mesh: StructuredMesh, f) -> np.ndarray:
    c = mesh.centroids()
    if callable(f):
        vals = np.asarray(f(c), dtype=float)
    else:
        vals = np.asarray(f, dtype=float)
    vals = np.broadcast_to(vals, (mesh.n_triangles,))
    if not np.all(np.isfinite(vals)):
        raise EvaluationError("load function returned non-finite values at centroids")
    return vals


def assemble_load(mesh: StructuredMesh, f) -> np.ndarray:
    """Centroid-rule load vector ``b_i = sum_T f(c_T) |T| / 3``."""
    fc = evaluate_at_centroids(mesh, f)
    w = np.repeat(fc * mesh.areas() / 3.0, 3)
    return np.bincount(mesh.triangles.ravel(), weights=w, minlength=mesh.n_nodes)


def cg_solve(A, b, tol: float = 1e-10, maxit: int | None = None, x0=None):
    """Jacobi-preconditioned conjugate gradients.

    Stops once ``||b - A x|| <= tol * ||b||``. Returns ``(x, CgReport)``;
    non-convergence is reported, not raised.
    """
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    if maxit is None:
        maxit = 10 * max(n, 1)
    diag = A.diagonal() if sp.issparse(A) else np.diag(A).copy()
    if np.any(diag == 0):
        raise SolverError("Jacobi preconditioner failed: zero diagonal entry")
    inv_diag = 1.0 / diag
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = b - A @ x
    target = tol * np.linalg.norm(b)
    res = np.linalg.norm(r)
    if res <= target:
        return x, CgReport(0, float(res), True)
    z = inv_diag * r
    p = z.copy()
    rz = r @ z
    it = 0
    while it < maxit:
        it += 1
        Ap = A @ p
        pAp = p @ Ap
        if pAp <= 0:
            break
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        res = np.linalg.norm(r)
        if res <= target:
            return x, CgReport(it, float(res), True)
        z = inv_diag * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    res = float(np.linalg.norm(b - A @ x))
    return x, CgReport(it, res, res <= target)


def element_gradients(mesh: StructuredMesh, u: np.ndarray) -> np.ndarray:
    """Piecewise-constant gradient of the P1 field ``u``, shape (T, 2)."""
    return np.einsum("tka,tk->ta", mesh.gradients(), np.asarray(u)[mesh.triangles])


def l2_norm(mesh: StructuredMesh, u: np.ndarray) -> float:
    m = assemble_mass_lumped(mesh)
    return float(np.sqrt(np.sum(m * np.asarray(u) ** 2)))


def h1_seminorm(mesh: StructuredMesh, u: np.ndarray) -> float:
    return gradient_l2_norm(mesh, element_gradients(mesh, u))


def gradient_l2_norm(mesh: StructuredMesh, grads: np.ndarray) -> float:
    """L2 norm of a piecewise-constant vector field given per triangle."""
    return float(np.sqrt(np.sum(mesh.areas() * np.sum(grads ** 2, axis=1))))


def centroid_l2_norm(mesh: StructuredMesh, f) -> float:
    """L2 norm of a point-evaluable function by the centroid rule."""
    fc = evaluate_at_centroids(mesh, f)
    return float(np.sqrt(np.sum(mesh.areas() * fc ** 2)))
