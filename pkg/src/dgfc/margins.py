"""Nonparametric margin inference: per-draw step-function CDFs built from
(observed value, latent CDF value) pairs, their generalized inverses, and
the empirical CDF diagnostic."""

from dataclasses import dataclass

import numpy as np

from ._kernels import norm_cdf_v
from .errors import InternalConsistencyError, ValidationError

_HEIGHT_FLOOR = 1e-300  # keep heights strictly positive when Phi underflows


@dataclass(frozen=True)
class StepCdf:
    """Right-continuous step CDF: zero below the first location, one at and
    above the last, with nondecreasing jump heights in between."""

    locations: np.ndarray
    heights: np.ndarray

    def __post_init__(self):
        loc = np.asarray(self.locations, dtype=float)
        h = np.asarray(self.heights, dtype=float)
        if loc.ndim != 1 or loc.shape != h.shape or loc.size == 0:
            raise ValidationError("locations and heights must be matching 1-d arrays")
        if np.any(np.diff(loc) <= 0):
            raise ValidationError("locations must be strictly increasing")
        if np.any(h <= 0) or np.any(h > 1) or np.any(np.diff(h) < 0):
            raise ValidationError("heights must be nondecreasing and in (0, 1]")
        if h[-1] != 1.0:
            raise ValidationError("terminal height must be one")
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "heights", h)


def margin_adjustment(y, z) -> StepCdf:
    """Step CDF through the pairs (y_t, Phi(z_t)).

    At tied observed values the height is the largest Phi(z_t) of the tie
    class; the terminal jump is pinned to one. Requires z to respect the
    ordering of y, as the Gibbs state guarantees.
    """
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if y.shape != z.shape or y.ndim != 1 or y.size == 0:
        raise ValidationError("y and z must be matching 1-d arrays")
    loc, inv = np.unique(y, return_inverse=True)
    zmax = np.full(loc.shape, -np.inf)
    np.maximum.at(zmax, inv, z)
    if np.any(np.diff(zmax) <= 0):
        raise InternalConsistencyError(
            "latent values do not respect the observed ordering")
    heights = norm_cdf_v(zmax)
    heights[-1] = 1.0
    heights = np.maximum.accumulate(np.clip(heights, _HEIGHT_FLOOR, 1.0))
    return StepCdf(loc, heights)


def step_cdf_eval(cdf: StepCdf, x):
    """F(x): zero below the support, else the height of the last jump <= x."""
    x = np.asarray(x, dtype=float)
    idx = np.searchsorted(cdf.locations, x, side="right")
    out = np.where(idx == 0, 0.0, cdf.heights[np.maximum(idx - 1, 0)])
    return out if out.ndim else float(out)


def step_cdf_quantile(cdf: StepCdf, u):
    """Generalized inverse inf{x : F(x) >= u} for u in (0, 1].

    Always returns an observed jump location, so draws pushed through this
    inverse stay inside the training support. u = 1 maps to the maximum
    location (needed for the right-continuity identity at the terminal jump).
    """
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0.0) or np.any(u > 1.0):
        raise ValidationError("quantile level must lie in (0, 1]")
    idx = np.searchsorted(cdf.heights, u, side="left")
    out = cdf.locations[idx]
    return out if out.ndim else float(out)


def ecdf(y) -> StepCdf:
    """Empirical CDF of a sample as a StepCdf."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size == 0:
        raise ValidationError("y must be a nonempty 1-d array")
    loc, counts = np.unique(y, return_counts=True)
    heights = np.cumsum(counts) / y.size
    heights[-1] = 1.0
    return StepCdf(loc, heights)


def posterior_mean_cdf(locations, heights_draws, x):
    """Average of step CDFs sharing locations, evaluated on a grid."""
    x = np.asarray(x, dtype=float)
    idx = np.searchsorted(locations, x, side="right")
    M = heights_draws.shape[0]
    out = np.zeros((M, x.size))
    nz = idx > 0
    out[:, nz] = heights_draws[:, idx[nz] - 1]
    return out.mean(axis=0)
