import numpy as np
import pytest

from dgfc.gibbs import sample_params_from_prior, simulate_latent_panel
from dgfc.params import PriorHyper, TimeSeriesPanel
from dgfc.stationary import implied_functionals


def random_stable_var(rng, k, scale=0.5):
    """A random stable (G, Sigma) pair."""
    while True:
        G = rng.normal(0.0, scale / np.sqrt(k), (k, k))
        if np.max(np.abs(np.linalg.eigvals(G))) < 0.95:
            break
    A = rng.normal(size=(k, k))
    Sigma = A @ A.T + 0.1 * np.eye(k)
    return G, Sigma


def dgfc_selfsim_panel(seed, n, k, T):
    """Panel simulated from the factor copula itself (y on the z scale)."""
    rng = np.random.default_rng(seed)
    prior = PriorHyper.default(n, k=k)
    params = sample_params_from_prior(rng, n, prior)
    _, x = simulate_latent_panel(rng, params, T)
    D0 = implied_functionals(params).D0
    return TimeSeriesPanel(x / np.sqrt(D0)[None, :]), params


@pytest.fixture(scope="session")
def small_fit():
    """One small but real posterior fit shared by cheap consumers."""
    from dgfc.gibbs import McmcConfig, run_chain
    panel, params = dgfc_selfsim_panel(421, n=2, k=1, T=80)
    draws = run_chain(panel, PriorHyper.default(2, k=1),
                      McmcConfig(total=600, burn=200, thin=2, seed=17))
    return panel, params, draws
