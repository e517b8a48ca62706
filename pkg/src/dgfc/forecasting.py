"""Posterior predictive simulation: per stored draw, propagate the factor
VAR forward, map to the latent panel scale, and push through that draw's
margin adjustment."""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as _k
from .errors import ValidationError
from .gibbs import PosteriorDraws
from .margins import step_cdf_quantile
from .params import DgfcParams
from .rng import RngStream
from .stationary import implied_functionals, psd_sqrt

FORECAST_STREAM_KEY = 0xF0CA57


@dataclass
class ForecastConfig:
    horizons: int = 1
    draw_indices: tuple = None   # default: every stored draw

    def validate(self):
        if self.horizons < 1:
            raise ValidationError("need at least one forecast horizon")
        return self


@dataclass
class ForecastDraws:
    """Posterior predictive sample paths, one per stored posterior draw."""

    values: np.ndarray        # (M, H, n)
    draw_indices: np.ndarray  # (M,) provenance: stored-draw index of each path
    names: tuple = ()
    kinds: tuple = ()
    seed: int = 0
    stream: int = 0
    origin: int = None        # training length; set by the backtest

    @property
    def n_paths(self):
        return self.values.shape[0]

    @property
    def horizons(self):
        return self.values.shape[1]


def forward_simulate_latent(rng, params: DgfcParams, eta_T, H, functionals=None):
    """Draw z_{T+1:T+H} given the final factor state and one parameter draw.

    Iterates the factor VAR forward, emits the latent panel, and rescales by
    the stationary standard deviations implied by the draw (pass precomputed
    `functionals` to skip the solve).
    """
    if H < 1:
        raise ValidationError("H must be >= 1")
    fun = functionals if functionals is not None else implied_functionals(params)
    sqrt_Sigma = psd_sqrt(params.Sigma)
    sd = np.sqrt(params.v)
    dinv = 1.0 / np.sqrt(fun.D0)
    eta = np.asarray(eta_T, dtype=float).copy()
    n = params.n
    z = np.empty((H, n))
    for h in range(H):
        eta = params.G @ eta + sqrt_Sigma @ rng.standard_normal(params.k)
        x = params.Lambda @ eta + sd * rng.standard_normal(n)
        z[h] = x * dinv
    return z


def posterior_predictive(stream: RngStream, draws: PosteriorDraws,
                         cfg: ForecastConfig = None) -> ForecastDraws:
    """One predictive path per stored draw (Monte Carlo posterior predictive).

    Each path owns a sub-stream keyed by its stored-draw index, so paths are
    reproducible independently of evaluation order.
    """
    cfg = (cfg or ForecastConfig()).validate()
    if draws.n_draws == 0:
        raise ValidationError("posterior draw set is empty")
    idx = np.arange(draws.n_draws) if cfg.draw_indices is None \
        else np.asarray(cfg.draw_indices, dtype=int)
    H, n = cfg.horizons, draws.n
    values = np.empty((idx.size, H, n))
    u_hi = np.nextafter(1.0, 0.0)
    for j, m in enumerate(idx):
        rng = stream.child(FORECAST_STREAM_KEY, int(m)).generator()
        params = draws.params_at(m)
        z = forward_simulate_latent(rng, params, draws.eta[m, -1], H)
        u = np.clip(_k.norm_cdf_v(z), 1e-300, u_hi)
        for i in range(n):
            values[:, :, i][j] = step_cdf_quantile(draws.margin_at(m, i), u[:, i])
    return ForecastDraws(values=values, draw_indices=idx,
                         names=draws.names, kinds=draws.kinds,
                         seed=stream.seed, stream=stream.stream)
