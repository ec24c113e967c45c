"""Heritability estimation by ensembling debiased Lasso and ridge fits."""

from .covariance import (BlockCovariance, BlockSpec, estimate_block_covariance,
                         whiten)
from .debias import check_df, debias_fit
from .ensemble import (GridConfig, LambdaGrid, build_grid, ensemble_tau,
                       ridge_lambda_range, run_hede, select_alpha)
from .errors import (ConstantColumn, DegenerateDf, DegenerateResponse,
                     DimensionMismatch, EmptyGrid, HedeError, NoBracket,
                     NonFiniteInput, NoNonzeros, NotConverged, SingularBlock,
                     TooFewSamples)
from .model import (DataSet, EnsembleChoice, FitResult, GroundTruth,
                    HeritabilityEstimate, TauEstimates, normalize_genotypes,
                    sample_variance)
from .simulation import SimConfig, simulate_dataset, simulate_genotypes, simulate_signal
from .solvers import (LassoConfig, RidgePathCache, build_ridge_cache, fit_lasso,
                      fit_ridge, lasso_lambda_max, lasso_path)
from .state_evolution import (FixedPointSolution, SignalPrior,
                              solve_joint_fixed_point, solve_ridge_scalar)
from .tau import estimate_taus

__version__ = "0.1.0"


def estimate_heritability(y, X, **grid_options) -> HeritabilityEstimate:
    """Convenience wrapper: ``run_hede(DataSet(y, X), GridConfig(**grid_options))``."""
    return run_hede(DataSet(y=y, X=X), GridConfig(**grid_options))
