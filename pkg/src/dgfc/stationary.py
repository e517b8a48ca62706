"""Deterministic stationary-process math: autocovariances, rescaling,
identification, stability, and the rank-based oracle estimator."""

import warnings

import numpy as np

from . import _kernels as _k
from .errors import IdentificationError, NumericError, StabilityError
from .params import STABILITY_MARGIN, DgfcParams, StationaryFunctionals, TimeSeriesPanel


def is_stable(G) -> bool:
    """True iff the spectral radius of G is below 1 - STABILITY_MARGIN."""
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ValueError("G must be square")
    return _k.spectral_radius(G) < 1.0 - STABILITY_MARGIN


def solve_lyapunov(A, Q):
    """Solve S = A S A' + Q by the direct Kronecker linear system."""
    A = np.asarray(A, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if not is_stable(A):
        raise StabilityError("transition matrix has spectral radius >= 1")
    try:
        return _k.lyapunov_kron(A, Q)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - near-unit radius
        raise NumericError("singular Kronecker system in Lyapunov solve") from exc


def stationary_autocovariance(G, Sigma, h=0):
    """Gamma_h = cov(eta_t, eta_{t-h}) = G^h Gamma_0 of a stable VAR(1)."""
    if h < 0:
        raise ValueError("lag h must be nonnegative")
    Gamma0 = solve_lyapunov(G, np.asarray(Sigma, dtype=float))
    return np.linalg.matrix_power(np.asarray(G, dtype=float), h) @ Gamma0


def implied_functionals(params: DgfcParams) -> StationaryFunctionals:
    """Stationary moments (Gamma0, Omega0, D0, C0, C1) of one parameter draw."""
    Gamma0 = solve_lyapunov(params.G, params.Sigma)
    Lam = params.Lambda
    Omega0 = Lam @ Gamma0 @ Lam.T + np.diag(params.v)
    D0 = np.diag(Omega0).copy()
    if np.any(D0 <= 0):
        raise NumericError("degenerate model: a stationary variance is nonpositive")
    s = 1.0 / np.sqrt(D0)
    C0 = s[:, None] * Omega0 * s[None, :]
    np.fill_diagonal(C0, 1.0)
    Gamma1 = params.G @ Gamma0
    C1 = s[:, None] * (Lam @ Gamma1 @ Lam.T) * s[None, :]
    return StationaryFunctionals(Gamma0=Gamma0, Omega0=Omega0, D0=D0, C0=C0, C1=C1)


def identify_var_params(C0, C1):
    """Invert (C0, C1) to the unit-variance VAR(1) parameters (Gtilde, SigmaTilde).

    Gtilde = C1 C0^{-1} and SigmaTilde = C0 - Gtilde C0 Gtilde'; raises
    IdentificationError when the pair does not come from a stable
    unit-variance VAR(1).
    """
    C0 = np.asarray(C0, dtype=float)
    C1 = np.asarray(C1, dtype=float)
    if np.any(np.linalg.eigvalsh(0.5 * (C0 + C0.T)) <= 0):
        raise IdentificationError("lag-0 correlation matrix is not positive definite")
    Gt = np.linalg.solve(C0.T, C1.T).T
    St = C0 - Gt @ C0 @ Gt.T
    St = 0.5 * (St + St.T)
    if np.any(np.linalg.eigvalsh(St) <= 0):
        raise IdentificationError(
            "inputs are not a valid lag-0/lag-1 pair: implied innovation "
            "covariance is not positive definite")
    if not is_stable(Gt):
        raise IdentificationError("implied transition matrix is not stable")
    return Gt, St


def psd_sqrt(S):
    """Symmetric square root of a positive semidefinite matrix."""
    w, V = np.linalg.eigh(0.5 * (S + S.T))
    return (V * np.sqrt(np.maximum(w, 0.0))) @ V.T


def nearest_correlation(C, floor=1e-8):
    """Project a symmetric matrix to the PD cone by eigenvalue clipping,
    then renormalize the diagonal to one."""
    C = 0.5 * (C + C.T)
    w, V = np.linalg.eigh(C)
    C = (V * np.maximum(w, floor)) @ V.T
    s = 1.0 / np.sqrt(np.diag(C))
    C = s[:, None] * C * s[None, :]
    np.fill_diagonal(C, 1.0)
    return C


def rank_based_var_estimator(panel: TimeSeriesPanel):
    """Consistent rank-based estimate of the identified VAR(1) parameters.

    Estimates the joint correlation of (z_t, z_{t+1}) by the entrywise sine
    transform of the pairwise-sign Kendall statistic over stacked
    (u_t, u_{t+1}) blocks, then applies `identify_var_params`. Diagnostics /
    test-oracle code: deliberately the O(T^2) pairwise sum.
    """
    y = panel.values
    T, n = y.shape
    if T < 3:
        raise ValueError("need T >= 3 observations")
    from scipy.stats import rankdata
    u = np.column_stack([rankdata(y[:, i]) / (T + 1.0) for i in range(n)])
    w = np.ascontiguousarray(np.hstack([u[:-1], u[1:]]))
    Tau = _k.kendall_stacked(w)
    C = np.sin(0.5 * np.pi * Tau)
    C0 = 0.5 * (C[:n, :n] + C[n:, n:])
    C1 = C[n:, :n]
    # ties shrink the diagonal below one; renormalize both blocks consistently
    d = np.diag(C0).copy()
    if np.any(d <= 0):
        raise NumericError("degenerate Kendall statistic (constant column?)")
    s = 1.0 / np.sqrt(d)
    C0 = s[:, None] * C0 * s[None, :]
    C1 = s[:, None] * C1 * s[None, :]
    np.fill_diagonal(C0, 1.0)
    if np.any(np.linalg.eigvalsh(0.5 * (C0 + C0.T)) <= 1e-8):
        warnings.warn("Kendall lag-0 block left the PD cone; projecting to the "
                      "nearest correlation matrix", RuntimeWarning)
        C0 = nearest_correlation(C0)
    return identify_var_params(C0, C1)
