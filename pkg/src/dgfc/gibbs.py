"""Rank-posterior Gibbs sampler: full-conditional blocks, sweep
orchestration, burn-in/thinning, and draw storage.

The chain state is the unscaled latent panel x (T x n) plus the factors
eta (T x k); z is never stored and is derived as x / sqrt(D0) when the
margin adjustment is attached to a stored draw. All blocks consume one
numpy Generator sequentially, so a (panel, prior, config) triple fully
determines the stored draws.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as _k
from .errors import NumericError, SamplerError, ValidationError
from .margins import StepCdf, margin_adjustment
from .params import DgfcParams, PriorHyper, TimeSeriesPanel
from .rng import RngStream, sample_mniw, sample_truncated_normal
from .smoother import StateSpaceSpec, kalman_simulation_smoother
from .stationary import implied_functionals, is_stable, solve_lyapunov

LATENT_STREAM_KEY = 0x1A7E57  # namespace for per-variable latent sub-streams


@dataclass
class RankStructure:
    """Per-variable value classes of the observed panel.

    Cells tied at the same observed value share a class and impose no
    mutual constraint; rank bounds for a cell come from the neighbouring
    classes only. Arrays are laid out for the compiled latent kernel.
    """

    uniques: list                # per-variable sorted unique observed values
    n_classes: np.ndarray        # (n,)
    class_of: np.ndarray         # (T, n) class index of each cell
    offsets: np.ndarray          # (n, T + 1) CSR offsets into members
    members: np.ndarray          # (n, T) time indices sorted by (class, time)

    @classmethod
    def from_values(cls, values) -> "RankStructure":
        values = np.asarray(values, dtype=float)
        T, n = values.shape
        uniques = []
        n_classes = np.zeros(n, dtype=np.int64)
        class_of = np.zeros((T, n), dtype=np.int64)
        offsets = np.zeros((n, T + 1), dtype=np.int64)
        members = np.zeros((n, T), dtype=np.int64)
        for i in range(n):
            uq, inv = np.unique(values[:, i], return_inverse=True)
            uniques.append(uq)
            n_classes[i] = uq.size
            class_of[:, i] = inv
            members[i] = np.argsort(inv, kind="stable")
            counts = np.bincount(inv, minlength=uq.size)
            offsets[i, 1:uq.size + 1] = np.cumsum(counts)
        return cls(uniques, n_classes, class_of, offsets, members)

    @classmethod
    def from_panel(cls, panel: TimeSeriesPanel) -> "RankStructure":
        return cls.from_values(panel.values)

    @property
    def T(self):
        return self.class_of.shape[0]

    @property
    def n(self):
        return self.class_of.shape[1]


@dataclass
class LatentState:
    """Unscaled latent panel and factors."""

    x: np.ndarray     # (T, n)
    eta: np.ndarray   # (T, k)

    def copy(self):
        return LatentState(self.x.copy(), self.eta.copy())


@dataclass
class McmcConfig:
    total: int = 10000
    burn: int = 5000
    thin: int = 5
    chains: int = 1
    seed: int = 0
    stability_cap: int = 1000
    latent_scan: str = "fixed"        # or "random"
    latent_streams: str = "shared"    # or "per-variable"

    def validate(self):
        if self.total < 1 or not 0 <= self.burn < self.total:
            raise ValidationError("need 0 <= burn < total")
        if self.thin < 1 or self.chains < 1 or self.stability_cap < 1:
            raise ValidationError("thin, chains and stability_cap must be >= 1")
        if self.latent_scan not in ("fixed", "random"):
            raise ValidationError("latent_scan must be 'fixed' or 'random'")
        if self.latent_streams not in ("shared", "per-variable"):
            raise ValidationError("latent_streams must be 'shared' or 'per-variable'")
        return self

    @property
    def n_stored(self):
        return (self.total - self.burn) // self.thin


@dataclass
class PosteriorDraws:
    """Stored post-burn-in draws of (theta, latent state, margins)."""

    G: np.ndarray             # (M, k, k)
    Sigma: np.ndarray         # (M, k, k)
    Lambda: np.ndarray        # (M, n, k)
    v: np.ndarray             # (M, n)
    Phi: np.ndarray           # (M, n, k)
    tau: np.ndarray           # (M, k)
    eta: np.ndarray           # (M, T, k)
    x: np.ndarray             # (M, T, n)
    margin_locations: list    # per variable, shared across draws
    margin_heights: list      # per variable, (M, C_i)
    names: tuple = ()
    kinds: tuple = ()
    config: dict = field(default_factory=dict)

    @property
    def n_draws(self):
        return self.G.shape[0]

    @property
    def n(self):
        return self.Lambda.shape[1]

    @property
    def k(self):
        return self.G.shape[1]

    @property
    def T(self):
        return self.x.shape[1]

    def params_at(self, m) -> DgfcParams:
        return DgfcParams(G=self.G[m], Sigma=self.Sigma[m], Lambda=self.Lambda[m],
                          v=self.v[m], Phi=self.Phi[m], tau=self.tau[m])

    def margin_at(self, m, i) -> StepCdf:
        return StepCdf(self.margin_locations[i], self.margin_heights[i][m])


# ---------------------------------------------------------------------------
# full-conditional blocks
# ---------------------------------------------------------------------------

def draw_var_block(rng, eta, prior: PriorHyper, cap=1000):
    """MNIW draw of (G, Sigma) given the factor path, rejected to stability."""
    eta = np.asarray(eta, dtype=float)
    Y = eta[1:]
    X = eta[:-1]
    dT = prior.d0 + eta.shape[0] - 1
    OT = X.T @ X + prior.O0
    Gbar0T = prior.Gbar0.T
    GbarTT = np.linalg.solve(OT, X.T @ Y + prior.O0 @ Gbar0T)
    R = Y - X @ GbarTT
    Dm = GbarTT - Gbar0T
    PsiT = prior.Psi0 + R.T @ R + Dm.T @ prior.O0 @ Dm
    PsiT = 0.5 * (PsiT + PsiT.T)
    OTinv = np.linalg.inv(OT)
    OTinv = 0.5 * (OTinv + OTinv.T)
    for _ in range(cap):
        G, Sigma = sample_mniw(rng, dT, PsiT, GbarTT, OTinv)
        if is_stable(G):
            return G, Sigma
    raise SamplerError(f"VAR block: stability rejection cap ({cap}) exhausted")


def draw_factors(rng, x, params: DgfcParams):
    """Simulation-smoother draw of the factor path given the latent panel."""
    Gamma0 = solve_lyapunov(params.G, params.Sigma)
    spec = StateSpaceSpec(Lambda=params.Lambda, v=params.v, G=params.G,
                          Sigma=params.Sigma, Gamma0=Gamma0)
    return kalman_simulation_smoother(rng, spec, x)


def draw_loadings(rng, x, eta, v, Phi, tau):
    """Row-wise Gaussian loadings draw under the diag(phi * tau) prior precision."""
    x = np.asarray(x, dtype=float)
    eta = np.asarray(eta, dtype=float)
    n = x.shape[1]
    k = eta.shape[1]
    NtN = eta.T @ eta
    Ntx = eta.T @ x
    Lam = np.empty((n, k))
    for i in range(n):
        A = NtN / v[i] + np.diag(Phi[i] * tau)
        try:
            La = np.linalg.cholesky(A)
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"loadings precision for series {i} is not PD") from exc
        mean = np.linalg.solve(A, Ntx[:, i] / v[i])
        Lam[i] = mean + np.linalg.solve(La.T, rng.standard_normal(k))
    return Lam


def draw_variances(rng, x, eta, Lam, alpha0, beta0):
    """Per-series gamma draw of the idiosyncratic precisions."""
    resid = np.asarray(x, dtype=float) - eta @ Lam.T
    rates = beta0 + 0.5 * (resid * resid).sum(axis=0)
    prec = rng.gamma(alpha0 + 0.5 * x.shape[0], 1.0 / rates)
    return 1.0 / prec


def draw_local_scales(rng, Lam, tau, nu0):
    rates = 0.5 * (nu0 + tau[None, :] * np.asarray(Lam) ** 2)
    return rng.gamma(0.5 * (nu0 + 1.0), 1.0 / rates)


def draw_global_scales(rng, Lam, Phi, delta, a0, b0):
    """Sequential update of the multiplicative-gamma increments delta.

    Each delta_s conditions on the current values of the others through the
    leave-one-out products; tau is recomputed as the cumulative product.
    """
    Lam = np.asarray(Lam, dtype=float)
    n, k = Lam.shape
    delta = np.array(delta, dtype=float, copy=True)
    w = np.sum(Phi * Lam ** 2, axis=0)
    for s in range(k):
        shape = a0 + 0.5 * n * k if s == 0 else b0 + 0.5 * n * (k - s)
        cp = np.cumprod(delta)
        rate = 1.0 + 0.5 * np.sum(cp[s:] / delta[s] * w[s:])
        delta[s] = rng.gamma(shape, 1.0 / rate)
    return delta, np.cumprod(delta)


def compute_rank_bounds(rank: RankStructure, x, t, i):
    """Truncation interval for cell (t, i): strictly between the current
    latent values of the neighbouring value classes of column i."""
    c = rank.class_of[t, i]
    off = rank.offsets[i]
    lo = -np.inf
    if c > 0:
        lo = x[rank.members[i, off[c - 1]:off[c]], i].max()
    hi = np.inf
    if c < rank.n_classes[i] - 1:
        hi = x[rank.members[i, off[c + 1]:off[c + 2]], i].min()
    return lo, hi


def draw_latent_cell(rng, rank, x, eta, params, t, i):
    """Truncated-normal redraw of one latent cell (does not modify x)."""
    lo, hi = compute_rank_bounds(rank, x, t, i)
    mu = params.Lambda[i] @ eta[t]
    return sample_truncated_normal(rng, mu, params.v[i], lo, hi)


def delta_from_tau(tau):
    """Recover the multiplicative increments from their cumulative products."""
    tau = np.asarray(tau, dtype=float)
    delta = tau.copy()
    delta[1:] = tau[1:] / tau[:-1]
    return delta


def _latent_sweep(rng, rank, x, eta, Lam, v, scan, latent_rngs):
    T, n = x.shape
    fixed_order = np.arange(T, dtype=np.int64)
    if latent_rngs is None:
        if scan == "fixed":
            _k.latent_block(rng, x, eta, Lam, v, rank.n_classes, rank.offsets,
                            rank.members, rank.class_of, fixed_order, 0, n)
        else:
            for i in range(n):
                order = rng.permutation(T).astype(np.int64)
                _k.latent_block(rng, x, eta, Lam, v, rank.n_classes, rank.offsets,
                                rank.members, rank.class_of, order, i, i + 1)
    else:
        # per-variable sub-streams: draws for column i depend only on its own
        # stream, so a parallel schedule would produce the identical panel
        for i in range(n):
            ri = latent_rngs[i]
            order = (fixed_order if scan == "fixed"
                     else ri.permutation(T).astype(np.int64))
            _k.latent_block(ri, x, eta, Lam, v, rank.n_classes, rank.offsets,
                            rank.members, rank.class_of, order, i, i + 1)


def gibbs_sweep(rng, state: LatentState, params: DgfcParams, rank: RankStructure,
                prior: PriorHyper, stability_cap=1000, scan="fixed",
                latent_rngs=None):
    """One full scan of all blocks, in the fixed order: VAR, factors,
    loadings, variances, local scales, global scales, latent cells.

    Mutates state.x in place and returns the refreshed (state, params).
    """
    x = state.x
    G, Sigma = draw_var_block(rng, state.eta, prior, cap=stability_cap)
    Gamma0 = solve_lyapunov(G, Sigma)
    spec = StateSpaceSpec(Lambda=params.Lambda, v=params.v, G=G, Sigma=Sigma,
                          Gamma0=Gamma0)
    eta = kalman_simulation_smoother(rng, spec, x)
    Lam = draw_loadings(rng, x, eta, params.v, params.Phi, params.tau)
    v = draw_variances(rng, x, eta, Lam, prior.alpha0, prior.beta0)
    Phi = draw_local_scales(rng, Lam, params.tau, prior.nu0)
    delta, tau = draw_global_scales(rng, Lam, Phi, delta_from_tau(params.tau),
                                    prior.a0, prior.b0)
    _latent_sweep(rng, rank, x, eta, Lam, v, scan, latent_rngs)
    new_params = DgfcParams(G=G, Sigma=Sigma, Lambda=Lam, v=v, Phi=Phi, tau=tau)
    return LatentState(x=x, eta=eta), new_params


# ---------------------------------------------------------------------------
# chain orchestration
# ---------------------------------------------------------------------------

def initialize_chain(panel: TimeSeriesPanel, prior: PriorHyper):
    """Deterministic start: normal scores of mid-ranks for x, principal
    components for the factors and loadings, floored residual variances,
    G = 0, Sigma = I, and shrinkage scales at their prior means."""
    from scipy.stats import rankdata
    T, n = panel.values.shape
    k = prior.k
    x = np.empty((T, n))
    for i in range(n):
        r = rankdata(panel.values[:, i], method="average")
        x[:, i] = _k.norm_ppf_v(r / (T + 1.0))
    U, s, Vt = np.linalg.svd(x, full_matrices=False)
    r_eff = min(k, s.size)
    eta = np.zeros((T, k))
    eta[:, :r_eff] = U[:, :r_eff] * s[:r_eff]
    Lam = np.zeros((n, k))
    Lam[:, :r_eff] = Vt[:r_eff].T
    v = np.maximum((x - eta @ Lam.T).var(axis=0), 0.05)
    delta = np.full(k, prior.b0)
    delta[0] = prior.a0
    params = DgfcParams(G=np.zeros((k, k)), Sigma=np.eye(k), Lambda=Lam, v=v,
                        Phi=np.ones((n, k)), tau=np.cumprod(delta))
    return LatentState(x=x, eta=eta), params


def margin_heights_for_state(rank: RankStructure, x, D0):
    """Margin-adjustment heights for every variable of the current state."""
    z = x / np.sqrt(D0)[None, :]
    heights = []
    for i in range(rank.n):
        zmax = np.full(rank.n_classes[i], -np.inf)
        np.maximum.at(zmax, rank.class_of[:, i], z[:, i])
        h = _k.norm_cdf_v(zmax)
        h[-1] = 1.0
        heights.append(np.maximum.accumulate(np.clip(h, 1e-300, 1.0)))
    return heights


def sample_params_from_prior(rng, n, prior: PriorHyper, cap=1000) -> DgfcParams:
    """One draw of theta from the prior (stability-truncated MNIW included)."""
    k = prior.k
    for _ in range(cap):
        G, Sigma = sample_mniw(rng, prior.d0, prior.Psi0, prior.Gbar0.T,
                               np.linalg.inv(prior.O0))
        if is_stable(G):
            break
    else:
        raise SamplerError(f"prior draw: stability rejection cap ({cap}) exhausted")
    v = 1.0 / rng.gamma(prior.alpha0, 1.0 / prior.beta0, n)
    Phi = rng.gamma(0.5 * prior.nu0, 2.0 / prior.nu0, (n, k))
    delta = np.empty(k)
    delta[0] = rng.gamma(prior.a0, 1.0)
    if k > 1:
        delta[1:] = rng.gamma(prior.b0, 1.0, k - 1)
    tau = np.cumprod(delta)
    Lam = rng.standard_normal((n, k)) / np.sqrt(Phi * tau[None, :])
    return DgfcParams(G=G, Sigma=Sigma, Lambda=Lam, v=v, Phi=Phi, tau=tau)


def simulate_latent_panel(rng, params: DgfcParams, T):
    """Simulate (eta, x) of length T from the latent model, started at the
    exact stationary law eta_1 ~ N(0, Gamma0)."""
    Gamma0 = solve_lyapunov(params.G, params.Sigma)
    Ls = np.linalg.cholesky(params.Sigma)
    Lg = np.linalg.cholesky(Gamma0)
    return _k.dfm_sim(rng, np.ascontiguousarray(params.G), Ls, Lg,
                      np.ascontiguousarray(params.Lambda),
                      np.ascontiguousarray(params.v), T, 0)


def run_chain(panel: TimeSeriesPanel, prior: PriorHyper = None,
              mcmc: McmcConfig = None, stream: int = 0) -> PosteriorDraws:
    """Run one chain of the rank-posterior sampler and store every
    thin-th post-burn-in state together with its margin adjustment."""
    if prior is None:
        prior = PriorHyper.default(panel.n)
    prior.validate()
    mcmc = (mcmc or McmcConfig()).validate()
    T, n = panel.values.shape
    k = prior.k
    rank = RankStructure.from_panel(panel)
    base = RngStream(mcmc.seed, stream)
    rng = base.generator()
    latent_rngs = None
    if mcmc.latent_streams == "per-variable":
        latent_rngs = [base.child(LATENT_STREAM_KEY, i).generator()
                       for i in range(n)]
    state, params = initialize_chain(panel, prior)

    M = mcmc.n_stored
    out = PosteriorDraws(
        G=np.empty((M, k, k)), Sigma=np.empty((M, k, k)),
        Lambda=np.empty((M, n, k)), v=np.empty((M, n)),
        Phi=np.empty((M, n, k)), tau=np.empty((M, k)),
        eta=np.empty((M, T, k)), x=np.empty((M, T, n)),
        margin_locations=[u.copy() for u in rank.uniques],
        margin_heights=[np.empty((M, rank.n_classes[i])) for i in range(n)],
        names=panel.names, kinds=panel.kinds,
        config={"total": mcmc.total, "burn": mcmc.burn, "thin": mcmc.thin,
                "seed": mcmc.seed, "stream": stream, "k": k,
                "latent_scan": mcmc.latent_scan,
                "latent_streams": mcmc.latent_streams})
    m = 0
    for it in range(1, mcmc.total + 1):
        try:
            state, params = gibbs_sweep(rng, state, params, rank, prior,
                                        stability_cap=mcmc.stability_cap,
                                        scan=mcmc.latent_scan,
                                        latent_rngs=latent_rngs)
        except SamplerError as exc:
            raise SamplerError(f"iteration {it}: {exc}") from exc
        if it > mcmc.burn and (it - mcmc.burn) % mcmc.thin == 0:
            out.G[m] = params.G
            out.Sigma[m] = params.Sigma
            out.Lambda[m] = params.Lambda
            out.v[m] = params.v
            out.Phi[m] = params.Phi
            out.tau[m] = params.tau
            out.eta[m] = state.eta
            out.x[m] = state.x
            D0 = implied_functionals(params).D0
            for i, h in enumerate(margin_heights_for_state(rank, state.x, D0)):
                out.margin_heights[i][m] = h
            m += 1
    return out
