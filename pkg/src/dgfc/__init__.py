"""Dynamic Gaussian factor copula modeling for heterogeneous multivariate
time series: rank-posterior Gibbs sampling, nonparametric margin inference,
and probabilistic multi-step forecasting."""

from .params import (CONTINUOUS, COUNT, DgfcParams, PriorHyper,
                     StationaryFunctionals, TimeSeriesPanel)
from .stationary import (identify_var_params, implied_functionals, is_stable,
                         rank_based_var_estimator, stationary_autocovariance)
from .rng import (RngStream, sample_gamma, sample_mniw,
                  sample_multivariate_normal, sample_truncated_normal,
                  standard_normal_cdf, standard_normal_quantile)
from .smoother import StateSpaceSpec, kalman_simulation_smoother
from .skewt import sample_skew_t, skew_t_cdf, skew_t_pdf, skew_t_quantile
from .margins import (StepCdf, ecdf, margin_adjustment, step_cdf_eval,
                      step_cdf_quantile)
from .gibbs import (LatentState, McmcConfig, PosteriorDraws, RankStructure,
                    gibbs_sweep, run_chain)
from .forecasting import (ForecastConfig, ForecastDraws,
                          forward_simulate_latent, posterior_predictive)
from .scoring import (MetricsReport, crps_sample, equal_tailed_interval,
                      evaluate_forecasts, hpd_interval, point_errors)
from .backtest import BacktestConfig, backtest
from .io import RunManifest, ingest_csv, load_draws, save_draws

__version__ = "0.1.0"

__all__ = [
    "BacktestConfig", "CONTINUOUS", "COUNT", "DgfcParams", "ForecastConfig",
    "ForecastDraws", "LatentState", "McmcConfig", "MetricsReport",
    "PosteriorDraws", "PriorHyper", "RankStructure", "RngStream",
    "RunManifest", "StateSpaceSpec", "StationaryFunctionals", "StepCdf",
    "TimeSeriesPanel", "backtest", "crps_sample", "ecdf",
    "equal_tailed_interval", "evaluate_forecasts", "forward_simulate_latent",
    "gibbs_sweep", "hpd_interval", "identify_var_params",
    "implied_functionals", "ingest_csv", "is_stable",
    "kalman_simulation_smoother", "load_draws", "margin_adjustment",
    "point_errors", "posterior_predictive", "rank_based_var_estimator",
    "run_chain", "sample_gamma", "sample_mniw", "sample_multivariate_normal",
    "sample_skew_t", "sample_truncated_normal", "save_draws", "skew_t_cdf",
    "skew_t_pdf", "skew_t_quantile", "standard_normal_cdf",
    "standard_normal_quantile", "stationary_autocovariance", "step_cdf_eval",
    "step_cdf_quantile",
]
