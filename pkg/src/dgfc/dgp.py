"""Synthetic data-generating processes with exact stationary-margin oracles,
used to test margin recovery and forecasting."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import _kernels as _k
from . import skewt
from .errors import GenerationError, ValidationError
from .gibbs import simulate_latent_panel
from .params import CONTINUOUS, COUNT, DgfcParams, TimeSeriesPanel
from .rng import sample_inverse_wishart
from .stationary import implied_functionals, is_stable, psd_sqrt, solve_lyapunov

DEFAULT_BURN = 500


# ---------------------------------------------------------------------------
# marginal stationary distribution oracles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PoissonMargin:
    lam: float = 5.0
    kind: str = COUNT

    def _table(self):
        pmf, cdf, k = math.exp(-self.lam), [], 0
        total = 0.0
        while total < 1.0 - 1e-15:
            total += pmf
            cdf.append(min(total, 1.0))
            k += 1
            pmf *= self.lam / k
        return np.array(cdf)

    def cdf(self, x):
        table = self._table()
        x = np.asarray(x, dtype=float)
        idx = np.floor(x).astype(int)
        out = np.where(idx < 0, 0.0,
                       table[np.clip(idx, 0, table.size - 1)])
        out = np.where(idx >= table.size, 1.0, out)
        return out if out.ndim else float(out)

    def quantile(self, u):
        table = self._table()
        u = np.asarray(u, dtype=float)
        out = np.searchsorted(table, u, side="left").astype(float)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class SkewTMargin:
    df: float = 3.0
    mu: float = 0.0
    sigma: float = 1.0
    alpha: float = 2.0
    kind: str = CONTINUOUS

    def cdf(self, x):
        return skewt.skew_t_cdf(x, self.df, self.mu, self.sigma, self.alpha)

    def quantile(self, u):
        interp = skewt.quantile_interp(self.df, self.mu, self.sigma, self.alpha)
        return interp.quantile(np.asarray(u, dtype=float))


@dataclass(frozen=True)
class GammaMargin:
    shape: float = 1.0
    rate: float = 1.0
    kind: str = CONTINUOUS

    def cdf(self, x):
        return stats.gamma.cdf(x, self.shape, scale=1.0 / self.rate)

    def quantile(self, u):
        return stats.gamma.ppf(u, self.shape, scale=1.0 / self.rate)


@dataclass(frozen=True)
class NormalMargin:
    mu: float = 0.0
    sigma: float = 1.0
    kind: str = CONTINUOUS

    def cdf(self, x):
        return stats.norm.cdf(x, self.mu, self.sigma)

    def quantile(self, u):
        return stats.norm.ppf(u, self.mu, self.sigma)


@dataclass(frozen=True)
class StudentTMargin:
    df: float
    scale: float = 1.0
    kind: str = CONTINUOUS

    def cdf(self, x):
        return stats.t.cdf(np.asarray(x, dtype=float) / self.scale, self.df)

    def quantile(self, u):
        return self.scale * stats.t.ppf(u, self.df)


# ---------------------------------------------------------------------------
# VARMA
# ---------------------------------------------------------------------------

@dataclass
class VarmaSpec:
    b0: np.ndarray                 # (n,)
    B: np.ndarray                  # (p, n, n) AR matrices
    C: np.ndarray                  # (q, n, n) MA matrices
    Sigma: np.ndarray              # (n, n) innovation covariance

    @property
    def n(self):
        return self.b0.shape[0]

    @property
    def p(self):
        return self.B.shape[0]

    @property
    def q(self):
        return self.C.shape[0]

    def companion(self):
        """Transition A and shock loading R of the stacked state
        [y-lags | innovation lags]; MA blocks are nilpotent, so the spectral
        radius of A equals that of the AR part."""
        n, p, q = self.n, self.p, self.q
        pe = max(p, 1)
        m = n * (pe + q)
        A = np.zeros((m, m))
        R = np.zeros((m, n))
        for l in range(p):
            A[:n, l * n:(l + 1) * n] = self.B[l]
        for j in range(q):
            A[:n, (pe + j) * n:(pe + j + 1) * n] = self.C[j]
        for r in range(1, pe):
            A[r * n:(r + 1) * n, (r - 1) * n:r * n] = np.eye(n)
        for j in range(1, q):
            blk = pe + j
            A[blk * n:(blk + 1) * n, (blk - 1) * n:blk * n] = np.eye(n)
        R[:n] = np.eye(n)
        if q > 0:
            R[pe * n:(pe + 1) * n] = np.eye(n)
        return A, R

    def is_stationary(self):
        return is_stable(self.companion()[0])


def random_varma_params(rng, n, p, q, cap=1000) -> VarmaSpec:
    """Random spec: Sigma ~ IW_n(n+1, I), C and b0 standard normal, B entries
    N(0, 0.1), with the AR matrices redrawn until the process is stationary."""
    if n < 1 or p < 0 or q < 0:
        raise ValidationError("need n >= 1 and nonnegative p, q")
    Sigma = sample_inverse_wishart(rng, n + 1, np.eye(n))
    C = rng.standard_normal((q, n, n))
    b0 = rng.standard_normal(n)
    for _ in range(cap):
        B = rng.normal(0.0, math.sqrt(0.1), (p, n, n))
        spec = VarmaSpec(b0=b0, B=B, C=C, Sigma=Sigma)
        if spec.is_stationary():
            return spec
    raise GenerationError(f"no stationary AR draw within {cap} attempts")


def varma_stationary_moments(spec: VarmaSpec):
    """Exact stationary (mean, covariance) via the companion-form Lyapunov solve."""
    A, R = spec.companion()
    if not is_stable(A):
        raise ValidationError("VARMA spec is not stationary")
    n = spec.n
    Q = R @ spec.Sigma @ R.T
    S = solve_lyapunov(A, Q)
    if spec.p > 0:
        mean = np.linalg.solve(np.eye(n) - spec.B.sum(axis=0), spec.b0)
    else:
        mean = spec.b0.copy()
    return mean, S[:n, :n]


def simulate_varma(rng, spec: VarmaSpec, T, burn=DEFAULT_BURN):
    """Simulate T observations after a burn-in, lags started at the mean."""
    if not spec.is_stationary():
        raise ValidationError("VARMA spec is not stationary")
    mean, _ = varma_stationary_moments(spec)
    L = psd_sqrt(spec.Sigma)
    return _k.varma_sim(rng, np.ascontiguousarray(spec.b0, dtype=float),
                        np.ascontiguousarray(spec.B, dtype=float),
                        np.ascontiguousarray(spec.C, dtype=float),
                        L, mean, int(T), int(burn))


# ---------------------------------------------------------------------------
# VARCH (multivariate-t conditional heteroskedasticity)
# ---------------------------------------------------------------------------

@dataclass
class VarchSpec:
    nu: float
    A: np.ndarray

    @property
    def n(self):
        return self.A.shape[0]

    def validate(self):
        if not self.nu > self.n + 2:
            raise ValidationError("VARCH requires nu > n + 2")
        if np.any(np.linalg.eigvalsh(0.5 * (self.A + self.A.T)) <= 0):
            raise ValidationError("VARCH scale matrix must be SPD")
        return self

    def margin(self, i) -> StudentTMargin:
        # stationary law is t_n(nu - 1, 0, A / (nu - 1)) coordinate-wise
        return StudentTMargin(df=self.nu - 1.0,
                              scale=math.sqrt(self.A[i, i] / (self.nu - 1.0)))


def random_varch_params(rng, n) -> VarchSpec:
    nu = n + 2.0 + rng.gamma(1.0, 1.0)
    A = sample_inverse_wishart(rng, n + 1, np.eye(n))
    return VarchSpec(nu=nu, A=A).validate()


def simulate_varch(rng, spec: VarchSpec, T, burn=DEFAULT_BURN):
    spec.validate()
    return _k.varch_sim(rng, np.ascontiguousarray(spec.A, dtype=float),
                        float(spec.nu), int(T), int(burn))


def varch_margin_cdf(spec: VarchSpec, i, x):
    return spec.margin(i).cdf(x)


# ---------------------------------------------------------------------------
# VARMA copula (latent Gaussian VARMA pushed through fixed margins)
# ---------------------------------------------------------------------------

def default_copula_margins(n):
    """Heterogeneous default: a Poisson(5) count margin followed by
    skew-t(3, 0, 1, 2) continuous margins."""
    margins = [PoissonMargin(5.0)]
    margins += [SkewTMargin(3.0, 0.0, 1.0, 2.0) for _ in range(n - 1)]
    return tuple(margins[:n])


@dataclass
class VarmaCopulaSpec:
    latent: VarmaSpec
    margins: tuple = ()

    def __post_init__(self):
        if not self.margins:
            self.margins = default_copula_margins(self.latent.n)
        if len(self.margins) != self.latent.n:
            raise ValidationError("one margin per latent coordinate required")

    @property
    def n(self):
        return self.latent.n

    @property
    def kinds(self):
        return tuple(m.kind for m in self.margins)


def simulate_varma_copula(rng, spec: VarmaCopulaSpec, T,
                          burn=DEFAULT_BURN) -> TimeSeriesPanel:
    """Latent VARMA standardized by its exact stationary moments, then pushed
    through the probability integral transform of each margin."""
    x = simulate_varma(rng, spec.latent, T, burn)
    mean, cov = varma_stationary_moments(spec.latent)
    sd = np.sqrt(np.diag(cov))
    z = np.where(sd[None, :] > 0, (x - mean[None, :]) / np.where(sd == 0, 1.0, sd)[None, :], 0.0)
    u = np.clip(_k.norm_cdf_v(z), 1e-300, np.nextafter(1.0, 0.0))
    cols = [np.asarray(spec.margins[i].quantile(u[:, i]))
            for i in range(spec.n)]
    return TimeSeriesPanel(np.column_stack(cols), kinds=spec.kinds)


def true_margin_cdf(spec: VarmaCopulaSpec, i, x):
    return spec.margins[i].cdf(x)


# ---------------------------------------------------------------------------
# self-simulation from the fitted model family
# ---------------------------------------------------------------------------

def simulate_dgfc_panel(rng, params: DgfcParams, T) -> TimeSeriesPanel:
    """Continuous panel drawn from the factor copula itself (identity margins
    on the z scale); useful for calibration and self-consistency checks."""
    _, x = simulate_latent_panel(rng, params, T)
    D0 = implied_functionals(params).D0
    return TimeSeriesPanel(x / np.sqrt(D0)[None, :])
