"""Pseudo-spectral solver and estimate checks for the periodic Muskat equation."""

from .constants import ConstantSet
from .errors import ConfigurationError, NumericError, WeightError
from .functionals import (EnergyReport, besov_half_sq, energies, holder_c2beta, lipschitz_seminorm,
                          log_energy, make_report, q_functional, smallness_margin)
from .phi import PhiWeight, adapt_phi_to_data, make_log_phi, one_phi, validate_phi
from .quadrature import QuadratureSpec, make_quadrature
from .rhs import (BumpSpec, RegularizationParams, apply_R_eps, apply_T, bump_chi, chi_hat,
                  mollify_initial, rhs_full, rhs_regularized, slope_field)
from .spectral import Field, Grid, SymbolSpec, apply_multiplier, hs_sq, make_grid, sobolev_phi_norm
from .stepper import SolverState, StepperConfig, Trajectory, blowup_guard, evolve, local_time_horizon, step_etd

__version__ = "0.1.0"
