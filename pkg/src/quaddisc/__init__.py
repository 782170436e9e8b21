"""Quadratic discrepancies of random point sets, their generating
functions and densities, and the instanton analysis of their large-N limit."""
from .discrepancy import discrete_wiener_discrepancy, l2star_discrepancy, lego_discrepancy
from .errors import ConvergenceError, DomainError
from .genfun import GFSpec, exact_lego_gf, g0_lego, g0_wiener, mc_gf_estimate
from .inversion import InversionParams, bromwich_density, density_table
from .lego_instanton import (LegoBranchPoint, branch_point, find_vc, hessian_spectrum,
                             wall_threshold, y_branches)
from .points import CountVector, LegoWeights, PointSet, bin_counts, uniform_pointset
from .spectral import (LegoPropagator, RankOneProblem, lego_propagator, rank_one_eigenvalues,
                       wiener_covariance, wiener_eigenmode, wiener_propagator)
from .wiener_instanton import (AlphaSeries, EnergyPoint, InstantonProfile, action_S,
                               alpha_coeffs, asymptotics, instanton_profile, moment_T1,
                               period_T, series_eval, turning_points)

__version__ = "0.1.0"
