"""Periodic homogenization of -div(a(x/eps) grad u) + g(u) = f on the unit square."""

from .cell import (CellHomogenizer, CellSolutions, EffectiveTensor, compute_effective_tensor,
                   solve_cell_problems, voigt_reuss_bounds)
from .exceptions import ConfigurationError, EvaluationError, SolverError
from .experiments import (CorrectorField, ErrorTable, SweepConfig, assemble_corrector,
                          corrector_energy_error, run_epsilon_sweep, two_scale_pairing_check,
                          write_outputs)
from .mesh import boundary_mask, build_periodic_map, build_unit_square_mesh
from .microstructure import MicrostructureSpec, NonlinearitySpec, make_nonlinearity
from .semilinear import (NewtonConfig, SemilinearProblem, SemilinearSolver, apriori_check,
                         solve_semilinear, uniqueness_probe)

__version__ = "0.1.0"
