"""Command line entry point: ``homogenize cell|solve|sweep|pairing|verify``."""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys

import numpy as np

from .cell import compute_effective_tensor, solve_cell_problems, voigt_reuss_bounds
from .config import PAIRING_FACTORS, ExperimentConfig, load_config
from .exceptions import ConfigurationError, SolverError
from .experiments import emit_plot_script, run_epsilon_sweep, two_scale_pairing_check, write_outputs
from .mesh import build_periodic_map, build_unit_square_mesh, write_vtk
from .semilinear import apriori_check, fine_scale_problem, homogenized_problem, solve_semilinear
from .validation import check_epsilon

log = logging.getLogger("homogenize")


class Checks:
    def __init__(self):
        self.results = []

    def add(self, name, ok, detail=""):
        self.results.append((name, bool(ok)))
        print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else ""))

    @property
    def ok(self):
        return all(ok for _, ok in self.results)


def _out_path(out, default_name):
    if out is None:
        return None
    if out.endswith(".csv"):
        parent = os.path.dirname(out)
        if parent:
            os.makedirs(parent, exist_ok=True)
        return out
    os.makedirs(out, exist_ok=True)
    return os.path.join(out, default_name)


def cmd_cell(cfg: ExperimentConfig, args, checks: Checks):
    sweep = cfg.sweep
    mesh = build_unit_square_mesh(sweep.cell_mesh_n)
    cells = solve_cell_problems(mesh, build_periodic_map(mesh), sweep.spec, cfg.cell_tol)
    a0 = compute_effective_tensor(cells).a0
    lower, upper = voigt_reuss_bounds(sweep.spec)
    print("effective tensor a0:")
    for row in a0:
        print("  " + "  ".join(f"{v: .12f}" for v in row))
    print(f"Voigt-Reuss bounds: [{lower:.12f}, {upper:.12f}]")
    for i, rep in enumerate(cells.reports, 1):
        print(f"cell problem {i}: {rep.iterations} CG iterations, residual {rep.final_residual:.3e}")
    eig = np.linalg.eigvalsh(0.5 * (a0 + a0.T))
    checks.add("a0 symmetric", abs(a0[0, 1] - a0[1, 0]) <= 1e-12)
    checks.add("a0 within Voigt-Reuss bounds",
               eig.min() >= lower - 1e-10 and eig.max() <= upper + 1e-10,
               f"eigenvalues {eig.tolist()}")
    path = _out_path(args.out, "tensor.csv")
    if path:
        with open(path, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows([[repr(float(v)) for v in r] for r in a0])
    return a0


def cmd_solve(cfg: ExperimentConfig, args, checks: Checks):
    sweep = cfg.sweep
    f = sweep.load_function()
    if args.fine is not None:
        eps = args.fine
        mesh = build_unit_square_mesh(sweep.fine_n(eps))
        prob = fine_scale_problem(mesh, sweep.spec, eps, sweep.g, f)
        label = f"fine eps={eps:g}"
    else:
        cm = build_unit_square_mesh(sweep.cell_mesh_n)
        a0 = compute_effective_tensor(
            solve_cell_problems(cm, build_periodic_map(cm), sweep.spec, cfg.cell_tol)).a0
        mesh = build_unit_square_mesh(sweep.reference_n)
        prob = homogenized_problem(mesh, a0, sweep.g, f)
        label = "homogenized"
    u, rep = solve_semilinear(prob, sweep.newton)
    print(f"{label}: n={mesh.n}, newton={rep.newton_iters}, cg={rep.total_cg_iters}, "
          f"residual={rep.final_residual:.3e}, picard={rep.used_picard}")
    lhs, rhs, ok = apriori_check(u, prob)
    checks.add("a priori energy bound", ok, f"{lhs:.6g} <= {rhs:.6g}")
    path = _out_path(args.out, "solution.csv")
    if path:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["node", "x1", "x2", "u"])
            for k, ((x1, x2), val) in enumerate(zip(mesh.node_coords, u)):
                w.writerow([k, repr(float(x1)), repr(float(x2)), repr(float(val))])
        if args.vtk:
            write_vtk(mesh, os.path.splitext(path)[0] + ".vtk", point_data={"u": u})
    return u


def _sweep_checks(table, checks: Checks):
    for eps, lhs, rhs, ok in table.apriori:
        name = "homogenized" if eps is None else f"eps={eps:g}"
        checks.add(f"a priori bound ({name})", ok, f"{lhs:.6g} <= {rhs:.6g}")
    cols = ("l2_error", "grad_error", "corrector_energy_error")
    vals = np.array([[getattr(r, c) for c in cols] for r in table.rows])
    checks.add("error entries finite and nonnegative", np.all(np.isfinite(vals)) and np.all(vals >= 0))


def cmd_sweep(cfg: ExperimentConfig, args, checks: Checks):
    table = run_epsilon_sweep(cfg.sweep)
    print(",".join(("eps", "h", "l2_error", "grad_error", "corrector_energy_error",
                    "newton_iters", "cg_iters")))
    for r in table.rows:
        print(f"{r.eps:g},{r.h:g},{r.l2_error:.6e},{r.grad_error:.6e},"
              f"{r.corrector_energy_error:.6e},{r.newton_iters},{r.cg_iters}")
    _sweep_checks(table, checks)
    path = _out_path(args.out, "errors.csv")
    if path:
        write_outputs(table, path)
        emit_plot_script(table, os.path.join(os.path.dirname(path) or ".", "plot_errors.py"),
                         csv_path=os.path.basename(path))
    return table


def cmd_pairing(cfg: ExperimentConfig, args, checks: Checks):
    rows = two_scale_pairing_check(PAIRING_FACTORS[cfg.pairing_phi], cfg.pairing_eps,
                                   cfg.points_per_period)
    print("eps,lhs,rhs,gap")
    for eps, lhs, rhs, gap in rows:
        print(f"{eps:g},{lhs:.12g},{rhs:.12g},{gap:.3e}")
    checks.add("pairing values finite", all(np.isfinite(r[3]) for r in rows))
    path = _out_path(args.out, "pairing.csv")
    if path:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["eps", "lhs", "rhs", "gap"])
            w.writerows([[repr(v) for v in r] for r in rows])
    return rows


def cmd_verify(cfg: ExperimentConfig, args, checks: Checks):
    """Cell, sweep and pairing checks together, plus the convergence claims."""
    cmd_cell(cfg, argparse.Namespace(out=None), checks)
    table = cmd_sweep(cfg, args, checks)
    l2 = table.column("l2_error")
    ce = table.column("corrector_energy_error")
    ge = table.column("grad_error")
    if len(table) > 1:
        checks.add("l2 error strictly decreasing in eps", np.all(np.diff(l2) < 0), str(l2.tolist()))
        checks.add("corrector error strictly decreasing in eps", np.all(np.diff(ce) < 0),
                   str(ce.tolist()))
    checks.add("corrector error < 0.7 grad error at smallest eps", ce[-1] < 0.7 * ge[-1],
               f"{ce[-1]:.4g} vs {ge[-1]:.4g}")
    rows = cmd_pairing(cfg, argparse.Namespace(out=None), checks)
    gaps = [r[3] for r in rows]
    checks.add("pairing gap non-increasing",
               all(b <= a + 1e-6 for a, b in zip(gaps, gaps[1:])), str(gaps))


COMMANDS = {"cell": cmd_cell, "solve": cmd_solve, "sweep": cmd_sweep,
            "pairing": cmd_pairing, "verify": cmd_verify}


def build_parser():
    parser = argparse.ArgumentParser(prog="homogenize",
                                     description="Periodic homogenization of semilinear elliptic problems.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None, help="output directory (or .csv file)")
        if name == "solve":
            grp = p.add_mutually_exclusive_group()
            grp.add_argument("--fine", type=float, metavar="EPS")
            grp.add_argument("--homogenized", action="store_true")
            p.add_argument("--vtk", action="store_true", help="also write legacy VTK")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    checks = Checks()
    try:
        cfg = load_config(args.config)
        if getattr(args, "fine", None) is not None:
            check_epsilon(args.fine)
        COMMANDS[args.command](cfg, args, checks)
    except (ConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1
    return 0 if checks.ok else 1


if __name__ == "__main__":
    sys.exit(main())
