"""Seedable random primitives: stream management and distribution samplers.

All samplers take a ``numpy.random.Generator`` and consume it sequentially,
so a fixed ``RngStream`` reproduces draw sequences bit-for-bit. Parallel
work (chains, backtest origins, forecast paths) derives child streams
instead of sharing one generator.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from .errors import NumericError

_MASK64 = (1 << 64) - 1


def _splitmix64(z):
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class RngStream:
    """A (seed, stream id) pair naming one reproducible random sequence."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed & _MASK64,
                                    spawn_key=(self.stream & _MASK64,))
        return np.random.default_rng(ss)

    def child(self, *keys) -> "RngStream":
        """Derive a statistically independent stream keyed by integers."""
        s = self.stream & _MASK64
        for key in keys:
            s = _splitmix64(s ^ _splitmix64(int(key) & _MASK64))
        return RngStream(self.seed, s)


def standard_normal_cdf(x):
    """Phi(x); absolute error below 1e-12 on |x| <= 8."""
    return _k.norm_cdf_v(x)


def standard_normal_quantile(p):
    """Phi^{-1}(p) for p in (0, 1); returns -inf/+inf at p = 0/1.

    Functional inverse of the CDF to 1e-9 wherever p is not crowded against
    the representable neighbourhood of 1.
    """
    return _k.norm_ppf_v(p)


def sample_truncated_normal(rng, mu, sigma2, lower, upper):
    """One N(mu, sigma2) draw conditioned on (lower, upper), strictly inside."""
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    if not lower < upper:
        raise ValueError(f"truncation requires lower < upper, got ({lower}, {upper})")
    return _k.tn_draw(rng, mu, np.sqrt(sigma2), lower, upper)


def sample_truncated_normal_many(rng, mu, sigma2, lower, upper):
    """Vectorized independent truncated-normal draws (element-wise bounds)."""
    mu, sigma2, lower, upper = np.broadcast_arrays(
        *np.atleast_1d(mu, sigma2, lower, upper))
    if np.any(sigma2 <= 0):
        raise ValueError("sigma2 must be positive")
    if np.any(lower >= upper):
        raise ValueError("truncation requires lower < upper")
    out = np.empty(mu.shape[0])
    _k.tn_draw_many(rng, np.ascontiguousarray(mu, dtype=float),
                    np.sqrt(np.ascontiguousarray(sigma2, dtype=float)),
                    np.ascontiguousarray(lower, dtype=float),
                    np.ascontiguousarray(upper, dtype=float), out)
    return out


def sample_gamma(rng, shape, rate):
    """Gamma draw in shape/rate form (mean = shape/rate)."""
    if shape <= 0 or rate <= 0:
        raise ValueError("gamma shape and rate must be positive")
    return rng.gamma(shape, 1.0 / rate)


def sample_multivariate_normal(rng, mean, cov):
    """Draw N(mean, cov) via Cholesky; cov must be symmetric positive definite."""
    mean = np.asarray(mean, dtype=float)
    try:
        L = np.linalg.cholesky(np.asarray(cov, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise NumericError("covariance is not positive definite") from exc
    return mean + L @ rng.standard_normal(mean.shape[0])


def sample_inverse_wishart(rng, d, Psi):
    """IW(d, Psi) draw by the Bartlett decomposition; E = Psi / (d - k - 1)."""
    Psi = np.asarray(Psi, dtype=float)
    k = Psi.shape[0]
    if not d > k - 1:
        raise ValueError(f"inverse-Wishart needs d > k - 1, got d={d}, k={k}")
    try:
        L = np.linalg.cholesky(Psi)
    except np.linalg.LinAlgError as exc:
        raise NumericError("inverse-Wishart scale is not positive definite") from exc
    A = np.zeros((k, k))
    for i in range(k):
        A[i, i] = np.sqrt(rng.gamma(0.5 * (d - i), 2.0))
        A[i, :i] = rng.standard_normal(i)
    # Sigma = (A^{-1} L')' (A^{-1} L') is inverse of a Wishart(d, Psi^{-1}) draw
    M = np.linalg.solve(A, L.T)
    S = M.T @ M
    return 0.5 * (S + S.T)


def sample_mniw(rng, d, Psi, GbarT, Oinv):
    """Matrix-normal inverse-Wishart draw for a VAR(1) coefficient pair.

    Sigma ~ IW(d, Psi) and G' | Sigma ~ MN(GbarT, Oinv, Sigma), i.e. G has
    among-row covariance Sigma and among-column covariance Oinv.
    Returns (G, Sigma).
    """
    GbarT = np.asarray(GbarT, dtype=float)
    Sigma = sample_inverse_wishart(rng, d, Psi)
    try:
        Lo = np.linalg.cholesky(np.asarray(Oinv, dtype=float))
        Ls = np.linalg.cholesky(Sigma)
    except np.linalg.LinAlgError as exc:
        raise NumericError("MNIW covariance factor failed Cholesky") from exc
    k = GbarT.shape[0]
    GT = GbarT + Lo @ rng.standard_normal((k, k)) @ Ls.T
    return GT.T.copy(), Sigma
