"""Lasso, LS-boost and two-stage refitting estimators for sparse linear prediction."""

__version__ = "0.1.0"

from .boosting import BoostConfig, BoostPath, aicc_stop, boosting_df, forward_stagewise, ls_boost, subsample_steps
from .core import (
    ActiveSet,
    CoefVector,
    Dataset,
    StandardizedDataset,
    loss,
    loss_gradient,
    ls_solve,
    min_nonzero_eigenvalue,
    standardize,
)
from .kernels import BACKEND
from .lasso import LambdaGrid, LassoPath, active_sets, fit_lasso_path, kkt_check, lambda_max, make_lambda_grid
from .tuning import MetricsRecord, TuningSelection, mspe, oracle_select, validate_select
from .twostage import (
    FitSettings,
    PathFamily,
    fit_families,
    forward_stepwise,
    lasso_family,
    lassoed_boosting,
    lassoed_forward_stagewise,
    relaxed_lasso,
    twiced_boosting,
    twiced_lasso,
)
