"""Damped Newton / Picard solver for -div(A grad u) + g(u) = f, u = 0 on the boundary."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import fem
from .exceptions import ConfigurationError, SolverError
from .mesh import BoundaryMask, StructuredMesh, boundary_mask, build_unit_square_mesh
from .microstructure import (MicrostructureSpec, NonlinearitySpec, eval_g_prime,
                             epsilon_coefficient, make_nonlinearity)
from .validation import check_points

logger = logging.getLogger(__name__)

# Poincare constant of the unit square: ||u|| <= C_P ||grad u|| on H^1_0
POINCARE_UNIT_SQUARE = 1.0 / (np.pi * np.sqrt(2.0))


@dataclass(frozen=True)
class NewtonConfig:
    residual_tol: float = 1e-9
    max_newton: int = 50
    armijo_factor: float = 0.5
    min_step: float = 2.0 ** -20
    picard_fallback: bool = True
    picard_relaxation: float = 0.5
    max_picard: int = 2000
    cg_tol: float = 1e-10
    strategy: str = "newton"

    def __post_init__(self):
        if not self.residual_tol > 0:
            raise ConfigurationError("residual_tol must be positive")
        if self.strategy not in ("newton", "picard"):
            raise ConfigurationError(f"unknown strategy {self.strategy!r}")


@dataclass(frozen=True)
class SolveReport:
    newton_iters: int
    total_cg_iters: int
    final_residual: float
    used_picard: bool
    converged: bool
    picard_iters: int = 0
    residual_history: tuple = ()


class SemilinearProblem:
    """Discrete Dirichlet problem on a structured mesh of the unit square.

    ``coeff`` is any provider accepted by :func:`fem.element_coefficients`;
    the stiffness matrix, lumped mass and load are assembled once.
    """

    def __init__(self, mesh: StructuredMesh, coeff, g: NonlinearitySpec, f,
                 boundary: BoundaryMask | None = None):
        self.mesh = mesh
        self.boundary = boundary if boundary is not None else boundary_mask(mesh)
        self.g = g
        self.f = f
        self.coeff = fem.element_coefficients(mesh, coeff)
        self.lam = fem.min_eigenvalue(self.coeff)
        free = self.boundary.free
        self.free = free
        A = fem.assemble_stiffness(mesh, self.coeff)
        self.A = A[free][:, free].tocsr()
        self.mass = fem.assemble_mass_lumped(mesh)[free]
        self.load = fem.assemble_load(mesh, f)[free]

    def residual(self, u_free: np.ndarray) -> np.ndarray:
        return self.A @ u_free + self.mass * self.g(u_free) - self.load

    def to_nodal(self, u_free: np.ndarray) -> np.ndarray:
        u = np.zeros(self.mesh.n_nodes)
        u[self.free] = u_free
        return u


def solve_semilinear(p: SemilinearProblem, cfg: NewtonConfig | None = None,
                     initial_guess=None):
    """Solve the discrete problem to ``||F(u)|| <= cfg.residual_tol``.

    Returns the nodal solution (zero on the boundary) and a SolveReport.
    Newton is used when g has a derivative; stagnation of the Armijo line
    search falls back to relaxed Picard if allowed.
    """
    cfg = cfg or NewtonConfig()
    u = np.zeros(p.free.size) if initial_guess is None else np.asarray(initial_guess, float)[p.free].copy()
    cg_total = 0
    use_newton = cfg.strategy == "newton" and eval_g_prime(p.g, 0.0) is not None

    newton_iters = 0
    history = []
    if use_newton:
        F = p.residual(u)
        res = np.linalg.norm(F)
        history.append(float(res))
        stalled = False
        while res > cfg.residual_tol and newton_iters < cfg.max_newton:
            newton_iters += 1
            J = p.A + sp.diags(p.mass * eval_g_prime(p.g, u), format="csr")
            delta, rep = fem.cg_solve(J, -F, tol=cfg.cg_tol)
            cg_total += rep.iterations
            if not rep.converged:
                raise SolverError(f"CG failed in Newton step {newton_iters}",
                                  SolveReport(newton_iters, cg_total, float(res), False, False))
            t = 1.0
            while t >= cfg.min_step:
                trial = u + t * delta
                F_trial = p.residual(trial)
                res_trial = np.linalg.norm(F_trial)
                if res_trial <= (1.0 - 1e-4 * t) * res:
                    break
                t *= cfg.armijo_factor
            else:
                stalled = True
                break
            u, F, res = trial, F_trial, res_trial
            history.append(float(res))
            logger.debug("newton %d: step %.3g residual %.3e", newton_iters, t, res)
        if res <= cfg.residual_tol:
            return p.to_nodal(u), SolveReport(newton_iters, cg_total, float(res), False, True,
                                              residual_history=tuple(history))
        if not cfg.picard_fallback:
            why = "line search stagnated" if stalled else "iteration limit reached"
            raise SolverError(f"Newton failed ({why}), residual {res:.3e}",
                              SolveReport(newton_iters, cg_total, float(res), False, False))
        logger.info("Newton failed at residual %.3e; falling back to Picard", res)

    u, picard_iters, cg_picard, res = _picard(p, cfg, u, history)
    cg_total += cg_picard
    report = SolveReport(newton_iters, cg_total, float(res), True, bool(res <= cfg.residual_tol),
                         picard_iters, tuple(history))
    if not report.converged:
        raise SolverError(f"Picard iteration failed, residual {res:.3e}", report)
    return p.to_nodal(u), report


def _picard(p: SemilinearProblem, cfg: NewtonConfig, u: np.ndarray, history: list):
    omega = cfg.picard_relaxation
    cg_total = 0
    res = np.linalg.norm(p.residual(u))
    history.append(float(res))
    it = 0
    while res > cfg.residual_tol and it < cfg.max_picard:
        it += 1
        rhs = p.load - p.mass * p.g(u)
        w, rep = fem.cg_solve(p.A, rhs, tol=cfg.cg_tol, x0=u)
        cg_total += rep.iterations
        if not rep.converged:
            raise SolverError(f"CG failed in Picard step {it}",
                              SolveReport(0, cg_total, float(res), True, False, it))
        u = (1.0 - omega) * u + omega * w
        with np.errstate(over="ignore", invalid="ignore"):
            res = np.linalg.norm(p.residual(u))
        history.append(float(res))
        if not np.isfinite(res):
            break
    return u, it, cg_total, res


def apriori_check(u_h: np.ndarray, p: SemilinearProblem, slack: float = 1e-8):
    """Energy bound lam ||grad u|| <= C_P (||f|| + |g(0)|).

    Testing the weak form with u itself and using monotonicity of g,
    ellipticity and the Poincare inequality gives this bound with a
    constant that does not depend on the microstructure scale.
    """
    lhs = p.lam * fem.h1_seminorm(p.mesh, u_h)
    g0 = float(abs(p.g(np.array([0.0]))[0]))
    rhs = POINCARE_UNIT_SQUARE * (fem.centroid_l2_norm(p.mesh, p.f) + g0)
    return float(lhs), float(rhs), bool(lhs <= rhs + slack)


def uniqueness_probe(p: SemilinearProblem, cfg: NewtonConfig | None = None) -> float:
    """L2 distance between solutions started from 0 and from 5 sin(pi x) sin(pi y)."""
    x = p.mesh.node_coords
    bump = 5.0 * np.sin(np.pi * x[:, 0]) * np.sin(np.pi * x[:, 1])
    bump[p.boundary.is_boundary] = 0.0
    u0, _ = solve_semilinear(p, cfg, np.zeros(p.mesh.n_nodes))
    u1, _ = solve_semilinear(p, cfg, bump)
    return fem.l2_norm(p.mesh, u0 - u1)


def sine_bump(x):
    x = np.asarray(x, dtype=float)
    return np.sin(np.pi * x[..., 0]) * np.sin(np.pi * x[..., 1])


def make_load(kind: str = "one", value: float = 1.0, g: NonlinearitySpec | None = None):
    """Point-evaluable loads used by the experiments.

    ``manufactured`` returns f = 2 pi^2 s + g(s) with s = sin(pi x1) sin(pi x2),
    whose solution with the identity coefficient is s itself.
    """
    if kind == "one":
        return lambda x: np.ones(np.asarray(x).shape[:-1])
    if kind == "zero":
        return lambda x: np.zeros(np.asarray(x).shape[:-1])
    if kind == "constant":
        return lambda x: np.full(np.asarray(x).shape[:-1], float(value))
    if kind == "manufactured":
        g = g or make_nonlinearity("zero")

        def f(x):
            s = sine_bump(x)
            return 2.0 * np.pi ** 2 * s + g(s)
        return f
    raise ConfigurationError(f"unknown load kind {kind!r}")


def fine_scale_problem(mesh, spec: MicrostructureSpec, eps: float, g, f) -> SemilinearProblem:
    return SemilinearProblem(mesh, epsilon_coefficient(spec, eps), g, f)


def homogenized_problem(mesh, a0, g, f) -> SemilinearProblem:
    return SemilinearProblem(mesh, np.asarray(a0, dtype=float), g, f)


class SemilinearSolver(BaseEstimator):
    """Estimator front end: ``fit`` solves, ``predict`` evaluates u_h at points.

    Parameters
    ----------
    coefficient : scalar, (2, 2) array or callable
        Diffusion coefficient provider (e.g. a homogenized tensor or
        ``epsilon_coefficient(spec, eps)``).
    nonlinearity : NonlinearitySpec or str
    load : callable or str
        Point-evaluable right-hand side or a :func:`make_load` kind.
    n : int
        Mesh squares per side.
    """

    def __init__(self, coefficient=1.0, nonlinearity="zero", load="one", n=64,
                 residual_tol=1e-9, max_newton=50, strategy="newton", picard_fallback=True):
        self.coefficient = coefficient
        self.nonlinearity = nonlinearity
        self.load = load
        self.n = n
        self.residual_tol = residual_tol
        self.max_newton = max_newton
        self.strategy = strategy
        self.picard_fallback = picard_fallback

    def fit(self, X=None, y=None):
        g = self.nonlinearity
        if isinstance(g, str):
            g = make_nonlinearity(g)
        f = make_load(self.load, g=g) if isinstance(self.load, str) else self.load
        cfg = NewtonConfig(residual_tol=self.residual_tol, max_newton=self.max_newton,
                           strategy=self.strategy, picard_fallback=self.picard_fallback)
        self.mesh_ = build_unit_square_mesh(self.n)
        self.problem_ = SemilinearProblem(self.mesh_, self.coefficient, g, f)
        self.solution_, self.report_ = solve_semilinear(self.problem_, cfg)
        return self

    def predict(self, X):
        check_is_fitted(self, "solution_")
        return self.mesh_.interpolate(self.solution_, check_points(X, in_unit_square=True))
