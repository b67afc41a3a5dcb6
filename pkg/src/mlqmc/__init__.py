"""Multilevel Quasi-Monte Carlo estimation for lognormal diffusion problems.

Randomly shifted rank-1 lattice rules (with component-by-component
construction in weighted spaces), Nyström Karhunen-Loève sampling of
Matérn fields, 1D/2D piecewise-linear finite elements, and single- and
multilevel MC/QMC estimators with adaptive sample allocation, plus an
experiment runner comparing their cost/accuracy trade-offs.
"""

from .construction import (CBCResult, ProductWeights, WeightSchedule,
                           cbc_construct, cbc_construct_embedded,
                           coordinate_rho, euler_totient, fubini_bound_holds,
                           fubini_number, lambda_from_summability, pod_weight,
                           variance_bound, zeta_direct)
from .errors import (ConfigurationError, LevelCapError, NumericalError,
                     ParseError)
from .estimators import (BalancedTruncation, BiasModel, ComplexityPrediction,
                         FixedTruncation, LevelEstimate, MLResult, McSampler,
                         ShiftedLatticeSampler, calibrate_bias, choose_sL,
                         complexity_predictor, cost_model_1d,
                         giles_sample_sizes, mc_level_estimate,
                         mc_single_level, mlmc_run, mlqmc_adaptive,
                         qmc_level_estimate, qmc_single_level,
                         relative_std_error, shift_variance)
from .experiment import (ExperimentConfig, ResultRow, build_problem,
                         calibrate, fit_cost_exponent, parse_config,
                         run_experiment, write_csv)
from .fem1d import Mesh1D, assemble_solve, point_functional, thomas_solve
from .fem2d import (Mesh2D, assemble, average_functional, export_triplets,
                    flux_functional, solve, work_units)
from .lattice import (GeneratingVector, Shift, bundled_vector, draw_shift,
                      embedded_increment, embedded_point_set,
                      inverse_norm_cdf, lattice_point, lattice_points,
                      load_generating_vector, map_to_gaussian,
                      save_generating_vector)
from .problems import LevelSpec, LognormalPde, sample_difference
from .randomfield import (KLBasis, MaternParams, b_sequences, kl_coefficient,
                          matern_cov, nystrom_eigendecomposition)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
