"""Kalman simulation smoother for the latent linear-Gaussian factor system."""

from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from .errors import NumericError, ValidationError


@dataclass
class StateSpaceSpec:
    """Observation x_t = Lambda eta_t + N(0, diag(v)); factor VAR(1) with
    transition G, innovation Sigma, and initial state eta_1 ~ N(0, Gamma0)."""

    Lambda: np.ndarray
    v: np.ndarray
    G: np.ndarray
    Sigma: np.ndarray
    Gamma0: np.ndarray

    def validate(self):
        n, k = self.Lambda.shape
        if self.v.shape != (n,) or np.any(self.v < 0):
            raise ValidationError("observation variances must be nonnegative length-n")
        for name, M in (("G", self.G), ("Sigma", self.Sigma), ("Gamma0", self.Gamma0)):
            if M.shape != (k, k):
                raise ValidationError(f"{name} must be k x k")
        return self


def smoother_conditional_mean(spec: StateSpaceSpec, x):
    """E[eta_{1:T} | x_{1:T}] by Kalman filtering plus the RTS backward pass."""
    spec.validate()
    x = np.ascontiguousarray(x, dtype=float)
    eh, bad_t = _k.kf_smooth_mean(
        np.ascontiguousarray(spec.Lambda, dtype=float),
        np.ascontiguousarray(spec.v, dtype=float),
        np.ascontiguousarray(spec.G, dtype=float),
        np.ascontiguousarray(spec.Sigma, dtype=float),
        np.ascontiguousarray(spec.Gamma0, dtype=float), x)
    if bad_t >= 0:
        raise NumericError(f"filter covariance lost positive definiteness at t={bad_t}")
    return eh


def kalman_simulation_smoother(rng, spec: StateSpaceSpec, x):
    """Exact draw from p(eta_{1:T} | x_{1:T}, theta).

    Mean-correction form: simulate an unconditional (eta+, x+) pair from the
    model, smooth the residual panel x - x+, and add the smoothed mean to
    eta+. Consumes `rng` deterministically.
    """
    spec.validate()
    x = np.ascontiguousarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != spec.Lambda.shape[0]:
        raise ValidationError("data panel must be T x n")
    try:
        eta, bad_t = _k.sim_smoother_draw(
            rng,
            np.ascontiguousarray(spec.Lambda, dtype=float),
            np.ascontiguousarray(spec.v, dtype=float),
            np.ascontiguousarray(spec.G, dtype=float),
            np.ascontiguousarray(spec.Sigma, dtype=float),
            np.ascontiguousarray(spec.Gamma0, dtype=float), x)
    except np.linalg.LinAlgError as exc:
        raise NumericError("state covariance factorization failed") from exc
    if bad_t >= 0:
        raise NumericError(f"filter covariance lost positive definiteness at t={bad_t}")
    return eta
