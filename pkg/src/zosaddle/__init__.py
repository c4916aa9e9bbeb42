"""Zeroth-order saddle-point optimization with one-point feedback."""

from .core import (BlockPoint, ConfigurationError, DimensionError, Direction,
                   NoiseModel, NOISELESS, Oracle, OutOfDomainError,
                   ProblemMetadata, ProblemSpec, SeededRng, flip_y,
                   sample_sphere)
from .estimators import (GradEstimate, ResidualState, estimate_kernel,
                         estimate_residual, estimate_standard,
                         smoothed_grad_mc, smoothed_value_mc)
from .geometry import (DomainSpec, GeometrySetup, a_q_squared,
                       bregman_diameter, dual_norm, project_simplex, prox_step)
from .kernels import (SmoothingKernel, build_legendre_kernel, kernel_constant,
                      kernel_moment)
from .problems import (MatrixGame, QuadraticSaddle, error_to_solution,
                       gen_matrix_game, load_matrix, make_quadratic_saddle,
                       matgame_gap, save_matrix)
from .solvers import (RunLog, StepSchedule, constant_schedule, derive_schedule,
                      kernel_thm_schedule, regularize, run_kernel_zospg,
                      run_zoopmd, theorem_envelope_kernel)

__version__ = "0.1.0"
