"""Inertial subgradient extragradient solvers for equilibrium problems."""

from .bifunctions import (Bifunction, LinearOpBifunction, QuadraticBifunction,
                          check_lipschitz_type, lipschitz_constants)
from .hilbert import axpy_combine, inner, norm
from .problems import (ProblemInstance, gen_nash_cournot, gen_skew,
                       gen_strongly_pseudomonotone, gen_volterra, load_instance, save_instance)
from .sets import Ball, Box, Halfspace, project_ball, project_box, project_halfspace
from .solver import (ParameterError, SolverParams, Trajectory, delta_lower_bound,
                     estimate_linear_rate, solve, solve_egm, validate_params)

__version__ = "0.1.0"
