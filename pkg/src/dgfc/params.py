"""Parameter, prior, and data-panel types."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

CONTINUOUS = "continuous"
COUNT = "count"
KINDS = (CONTINUOUS, COUNT)

STABILITY_MARGIN = 1e-10  # required gap between the spectral radius and 1


@dataclass
class DgfcParams:
    """Copula parameters: factor VAR, loadings, variances, and shrinkage scales."""

    G: np.ndarray        # (k, k) factor transition
    Sigma: np.ndarray    # (k, k) factor innovation covariance
    Lambda: np.ndarray   # (n, k) loadings
    v: np.ndarray        # (n,) idiosyncratic variances
    Phi: np.ndarray      # (n, k) local scales
    tau: np.ndarray      # (k,) global scales (cumulative delta products)

    @property
    def n(self):
        return self.Lambda.shape[0]

    @property
    def k(self):
        return self.G.shape[0]

    def validate(self):
        from ._kernels import spectral_radius
        k, n = self.k, self.n
        if self.Sigma.shape != (k, k) or self.Lambda.shape != (n, k):
            raise ValidationError("parameter shapes are inconsistent")
        if self.v.shape != (n,) or self.Phi.shape != (n, k) or self.tau.shape != (k,):
            raise ValidationError("parameter shapes are inconsistent")
        if spectral_radius(self.G) >= 1.0 - STABILITY_MARGIN:
            raise ValidationError("factor transition is not stable")
        if np.any(np.linalg.eigvalsh(0.5 * (self.Sigma + self.Sigma.T)) <= 0):
            raise ValidationError("factor innovation covariance is not SPD")
        if np.any(self.v <= 0) or np.any(self.Phi <= 0) or np.any(self.tau <= 0):
            raise ValidationError("variances and scales must be positive")
        return self


@dataclass
class StationaryFunctionals:
    """Stationary moments implied by one parameter draw."""

    Gamma0: np.ndarray   # (k, k) stationary factor covariance
    Omega0: np.ndarray   # (n, n) stationary panel covariance
    D0: np.ndarray       # (n,) diag(Omega0)
    C0: np.ndarray       # (n, n) stationary correlation
    C1: np.ndarray       # (n, n) lag-1 cross-correlation corr(z_{t+1}, z_t)


@dataclass
class PriorHyper:
    """Prior hyperparameters; `default(n)` reproduces the package defaults."""

    k: int
    d0: float
    Psi0: np.ndarray
    Gbar0: np.ndarray
    O0: np.ndarray
    alpha0: float = 1.0
    beta0: float = 0.3
    nu0: float = 3.0
    a0: float = 2.0
    b0: float = 3.0

    @classmethod
    def default(cls, n, k=None):
        if k is None:
            k = math.ceil(0.7 * n)
        return cls(k=k, d0=k + 1, Psi0=np.eye(k), Gbar0=np.zeros((k, k)),
                   O0=np.eye(k))

    def validate(self):
        if self.k < 1:
            raise ValidationError("factor count k must be >= 1")
        if not self.d0 > self.k - 1:
            raise ValidationError("d0 must exceed k - 1")
        for name, M in (("Psi0", self.Psi0), ("O0", self.O0)):
            if M.shape != (self.k, self.k):
                raise ValidationError(f"{name} must be k x k")
            if np.any(np.linalg.eigvalsh(0.5 * (M + M.T)) <= 0):
                raise ValidationError(f"{name} must be symmetric positive definite")
        if self.Gbar0.shape != (self.k, self.k):
            raise ValidationError("Gbar0 must be k x k")
        if min(self.alpha0, self.beta0, self.nu0, self.a0, self.b0) <= 0:
            raise ValidationError("scalar hyperparameters must be positive")
        return self


@dataclass
class TimeSeriesPanel:
    """A T x n observed panel with per-variable data-kind tags."""

    values: np.ndarray
    names: tuple = ()
    kinds: tuple = ()

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValidationError("panel values must be a T x n array")
        T, n = self.values.shape
        if T < 2:
            raise ValidationError("panel needs at least two rows")
        if not self.names:
            self.names = tuple(f"y{i + 1}" for i in range(n))
        if not self.kinds:
            self.kinds = (CONTINUOUS,) * n
        self.names = tuple(self.names)
        self.kinds = tuple(self.kinds)
        if len(self.names) != n or len(self.kinds) != n:
            raise ValidationError("names/kinds length must match the column count")
        for kind in self.kinds:
            if kind not in KINDS:
                raise ValidationError(f"unknown data kind {kind!r}")
        if not np.all(np.isfinite(self.values)):
            t, i = np.argwhere(~np.isfinite(self.values))[0]
            raise ValidationError(f"missing or non-finite value at row {t + 1}, "
                                  f"column {self.names[i]!r}")
        for i, kind in enumerate(self.kinds):
            col = self.values[:, i]
            if kind == COUNT and (np.any(col < 0) or np.any(col != np.floor(col))):
                raise ValidationError(
                    f"count column {self.names[i]!r} must hold nonnegative integers")

    @property
    def T(self):
        return self.values.shape[0]

    @property
    def n(self):
        return self.values.shape[1]

    def head(self, t):
        """The first t rows as a new panel (backtest training prefix)."""
        return TimeSeriesPanel(self.values[:t].copy(), self.names, self.kinds)
