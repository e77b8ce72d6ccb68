"""Epsilon sweeps, first-order correctors, two-scale pairing checks and output files."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from . import fem
from .cell import (CellSolutions, compute_effective_tensor, corrector_gradient_values,
                   corrector_values, solve_cell_problems)
from .exceptions import ConfigurationError, SolverError
from .mesh import StructuredMesh, build_periodic_map, build_unit_square_mesh
from .microstructure import MicrostructureSpec, NonlinearitySpec, cell_coordinates, make_nonlinearity
from .semilinear import (NewtonConfig, apriori_check, fine_scale_problem, homogenized_problem,
                         make_load, solve_semilinear)
from .validation import check_epsilon

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("eps", "h", "l2_error", "grad_error", "corrector_energy_error",
               "newton_iters", "cg_iters")


@dataclass(frozen=True)
class SweepConfig:
    spec: MicrostructureSpec = field(default_factory=MicrostructureSpec)
    g: NonlinearitySpec = field(default_factory=lambda: make_nonlinearity("cubic"))
    load: str = "one"
    load_value: float = 1.0
    eps_list: tuple = (1 / 4, 1 / 8, 1 / 16)
    cells_per_period: int = 16
    cell_mesh_n: int = 128
    reference_n: int = 128
    newton: NewtonConfig = field(default_factory=NewtonConfig)

    def __post_init__(self):
        if not self.eps_list:
            raise ConfigurationError("eps_list is empty")
        for eps in self.eps_list:
            check_epsilon(eps)
        if self.cells_per_period < 1:
            raise ConfigurationError("cells_per_period must be positive")

    def load_function(self):
        return make_load(self.load, self.load_value, self.g)

    def fine_n(self, eps: float) -> int:
        return self.cells_per_period * check_epsilon(eps)


@dataclass(frozen=True)
class ErrorRow:
    eps: float
    h: float
    l2_error: float
    grad_error: float
    corrector_energy_error: float
    newton_iters: int
    cg_iters: int


@dataclass
class ErrorTable:
    rows: list
    effective_tensor: np.ndarray | None = None
    # (eps or None for the homogenized solve, lhs, rhs, ok)
    apriori: list = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def __len__(self):
        return len(self.rows)


@dataclass(frozen=True)
class CorrectorField:
    """u0 + eps chi^i(x/eps) d_i u0 on the fine mesh, with its two-scale gradient."""

    values: np.ndarray = field(repr=False)
    gradients: np.ndarray = field(repr=False)
    recovered_gradient: np.ndarray = field(repr=False)


def recover_nodal_gradient(mesh: StructuredMesh, u: np.ndarray) -> np.ndarray:
    """Arithmetic average of the adjacent element gradients at each node."""
    grads = fem.element_gradients(mesh, u)
    tris = mesh.triangles.ravel()
    counts = np.bincount(tris, minlength=mesh.n_nodes)
    out = np.empty((mesh.n_nodes, 2))
    for a in range(2):
        out[:, a] = np.bincount(tris, weights=np.repeat(grads[:, a], 3),
                                minlength=mesh.n_nodes) / counts
    return out


def assemble_corrector(u0: np.ndarray, cells: CellSolutions, eps: float,
                       fine_mesh: StructuredMesh) -> CorrectorField:
    """Build the first-order corrector field on ``fine_mesh``.

    The corrected gradient is grad u0 + (d_i u0) grad_y chi^i(x/eps); the
    eps grad_x u1 contribution is left out.
    """
    du0 = recover_nodal_gradient(fine_mesh, u0)
    chi = corrector_values(cells, cell_coordinates(fine_mesh.node_coords, eps))
    values = u0 + eps * np.sum(du0 * chi, axis=1)

    du0_tri = du0[fine_mesh.triangles].mean(axis=1)
    y = cell_coordinates(fine_mesh.centroids(), eps)
    dchi = corrector_gradient_values(cells, y)  # (T, i, comp)
    grads = fem.element_gradients(fine_mesh, u0) + np.einsum("ti,tia->ta", du0_tri, dchi)
    return CorrectorField(values, grads, du0)


def corrector_energy_error(u_eps: np.ndarray, corr: CorrectorField,
                           fine_mesh: StructuredMesh) -> float:
    return fem.gradient_l2_norm(fine_mesh, fem.element_gradients(fine_mesh, u_eps) - corr.gradients)


def transfer(values: np.ndarray, source: StructuredMesh, target: StructuredMesh) -> np.ndarray:
    """Interpolate a P1 field from ``source`` onto the nodes of ``target``."""
    if source.n == target.n:
        return np.array(values, dtype=float)
    return source.interpolate(values, target.node_coords)


def inter_mesh_interpolation_error(w, mesh_a: StructuredMesh, mesh_b: StructuredMesh):
    """Distance between the P1 interpolants of ``w`` on two meshes.

    Measured on the finer mesh, in L2 and in the H1 seminorm.
    """
    fine, coarse = (mesh_a, mesh_b) if mesh_a.n >= mesh_b.n else (mesh_b, mesh_a)
    diff = w(fine.node_coords) - transfer(w(coarse.node_coords), coarse, fine)
    return fem.l2_norm(fine, diff), fem.h1_seminorm(fine, diff)


def run_epsilon_sweep(cfg: SweepConfig) -> ErrorTable:
    """Compare fine-scale solutions with the homogenized one for each eps.

    The cell problems and the homogenized problem are solved once; every
    eps row reuses them. Rows are ordered by decreasing eps.
    """
    f = cfg.load_function()
    cell_mesh = build_unit_square_mesh(cfg.cell_mesh_n)
    cells = solve_cell_problems(cell_mesh, build_periodic_map(cell_mesh), cfg.spec)
    a0 = compute_effective_tensor(cells).a0

    ref_mesh = build_unit_square_mesh(cfg.reference_n)
    hom = homogenized_problem(ref_mesh, a0, cfg.g, f)
    u0_ref, _ = solve_semilinear(hom, cfg.newton)
    apriori = [(None, *apriori_check(u0_ref, hom))]

    rows = []
    for eps in sorted(cfg.eps_list, reverse=True):
        mesh = build_unit_square_mesh(cfg.fine_n(eps))
        prob = fine_scale_problem(mesh, cfg.spec, eps, cfg.g, f)
        try:
            u_eps, rep = solve_semilinear(prob, cfg.newton)
        except SolverError as exc:
            raise SolverError(f"fine-scale solve failed at eps = {eps}: {exc}", exc.report) from exc
        apriori.append((eps, *apriori_check(u_eps, prob)))
        u0 = transfer(u0_ref, ref_mesh, mesh)
        corr = assemble_corrector(u0, cells, eps, mesh)
        rows.append(ErrorRow(
            eps=float(eps), h=mesh.h,
            l2_error=fem.l2_norm(mesh, u_eps - u0),
            grad_error=fem.h1_seminorm(mesh, u_eps - u0),
            corrector_energy_error=corrector_energy_error(u_eps, corr, mesh),
            newton_iters=rep.newton_iters, cg_iters=rep.total_cg_iters))
        logger.info("eps=%g: %s", eps, rows[-1])
    return ErrorTable(rows, a0, apriori)


def two_scale_pairing_check(phi, eps_list, points_per_period: int = 32):
    """Quadrature check of the admissibility identity for psi = phi(x) cos(2 pi y1).

    For each eps, integrates |phi(x) cos(2 pi x1 / eps)|^2 over the unit square
    with the centroid rule on a mesh of size eps / points_per_period and compares
    with the cell average 1/2 * int phi^2 (computed on the same mesh).

    Returns a list of (eps, lhs, rhs, gap).
    """
    out = []
    for eps in eps_list:
        k = check_epsilon(eps)
        mesh = build_unit_square_mesh(points_per_period * k)
        c = mesh.centroids()
        w = mesh.areas()
        ph = np.broadcast_to(np.asarray(phi(c), dtype=float), (mesh.n_triangles,))
        lhs = float(np.sum(w * (ph * np.cos(2 * np.pi * c[:, 0] / eps)) ** 2))
        rhs = 0.5 * float(np.sum(w * ph ** 2))
        out.append((float(eps), lhs, rhs, abs(lhs - rhs)))
    return out


def write_outputs(table: ErrorTable, path) -> None:
    if not len(table):
        raise ValueError("cannot write an empty error table")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in table.rows:
            writer.writerow([repr(float(r.eps)), repr(float(r.h)), repr(float(r.l2_error)),
                             repr(float(r.grad_error)), repr(float(r.corrector_energy_error)),
                             int(r.newton_iters), int(r.cg_iters)])


def read_outputs(path) -> ErrorTable:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        rows = [ErrorRow(float(d["eps"]), float(d["h"]), float(d["l2_error"]),
                         float(d["grad_error"]), float(d["corrector_energy_error"]),
                         int(d["newton_iters"]), int(d["cg_iters"])) for d in reader]
    return ErrorTable(rows)


PLOT_TEMPLATE = '''"""Log-log plot of homogenization errors against eps."""
import csv
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

CSV_PATH = {csv_path!r}

with open(CSV_PATH, newline="") as fh:
    data = list(csv.DictReader(fh))

eps = [float(d["eps"]) for d in data]
fig, ax = plt.subplots()
for col in ("l2_error", "grad_error", "corrector_energy_error"):
    ax.loglog(eps, [float(d[col]) for d in data], "o-", label=col)
ax.set_xlabel("eps")
ax.set_ylabel("error")
ax.legend()
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else "errors.png", dpi=150)
'''


def emit_plot_script(table: ErrorTable, path, csv_path: str = "errors.csv") -> None:
    """Write a matplotlib script that plots the sweep CSV on log-log axes."""
    if not len(table):
        raise ValueError("cannot plot an empty error table")
    with open(path, "w") as fh:
        fh.write(PLOT_TEMPLATE.format(csv_path=str(csv_path)))
