"""Fractional integral operators with rough variable kernels, local
Morrey/Campanato norms, and a numerical harness that verifies the
boundedness inequalities and weight-pair conditions behind them."""

__version__ = "0.1.0"

from .geometry import (Ball, LogGrid, SphereRule, SingularQuadrature,
                       QuadratureError, ball_volume, default_grid,
                       integrate_on_ball, integrate_singular, log_grid,
                       sphere_rule, unit_ball_volume, unit_sphere_measure)
from .catalog import (Catalog, ExponentSet, PhiWeight, RoughKernel, Symbol,
                      TestFunction, builtin_catalog, kernel_sphere_norm,
                      morrey_power_weight, phi_admissibility, power_weight,
                      power_log_weight, resolve_weight)
from .spaces import (NormProfile, ball_mean, campanato_norm, ess_inf_on_tail,
                     local_morrey_norm, lp_norm_on_ball, lp_profile,
                     max_on_tail, morrey_functional, oscillation_norm,
                     vanishing_trend)
from .operators import (OperatorConfig, OperatorField, fractional_integral,
                        fractional_maximal, majorant_potential,
                        maximal_commutator, maximal_domination_constant,
                        multilinear_commutator, sample_lattice)
from .checks import (RhsIntegralScheme, check_campanato_cross_mean,
                     check_campanato_mean_gap,
                     check_campanato_scaled_oscillation,
                     check_commutator_local_bound, check_kernel_shell_bound,
                     check_lebesgue_boundedness, check_local_operator_bound,
                     check_morrey_boundedness, check_size_condition,
                     check_vanishing_implication, check_weight_pair_condition,
                     check_weight_pair_vanishing)
from .report import CheckReport, build_report
