import numpy as np
import pytest

from dgfc.errors import SamplerError
from dgfc.gibbs import (LatentState, McmcConfig, RankStructure,
                        compute_rank_bounds, gibbs_sweep, initialize_chain,
                        margin_heights_for_state, run_chain)
from dgfc.margins import margin_adjustment
from dgfc.params import DgfcParams, PriorHyper, TimeSeriesPanel
from dgfc.rng import RngStream
from dgfc.smoother import StateSpaceSpec, kalman_simulation_smoother
from dgfc.stationary import implied_functionals, is_stable, solve_lyapunov

from conftest import dgfc_selfsim_panel


def small_panel(seed=51, T=40, n=2):
    rng = np.random.default_rng(seed)
    vals = np.column_stack([rng.standard_normal(T),
                            rng.poisson(3.0, T).astype(float)])[:, :n]
    kinds = ("continuous", "count")[:n]
    return TimeSeriesPanel(vals, kinds=kinds)


class TestSweep:
    def test_bit_identical_repeat(self):
        panel = small_panel()
        prior = PriorHyper.default(panel.n)
        rank = RankStructure.from_panel(panel)

        def one(seed):
            state, params = initialize_chain(panel, prior)
            rng = RngStream(seed).generator()
            state, params = gibbs_sweep(rng, state, params, rank, prior)
            state, params = gibbs_sweep(rng, state, params, rank, prior)
            return state, params

        s1, p1 = one(9)
        s2, p2 = one(9)
        assert np.array_equal(s1.x, s2.x) and np.array_equal(s1.eta, s2.eta)
        assert np.array_equal(p1.G, p2.G) and np.array_equal(p1.tau, p2.tau)

    def test_equals_manual_block_composition(self):
        from dgfc.gibbs import (_latent_sweep, delta_from_tau, draw_var_block,
                                draw_loadings, draw_local_scales,
                                draw_global_scales, draw_variances)
        panel = small_panel()
        prior = PriorHyper.default(panel.n)
        rank = RankStructure.from_panel(panel)
        state0, params0 = initialize_chain(panel, prior)

        rng = RngStream(13).generator()
        sweep_state, sweep_params = gibbs_sweep(
            rng, LatentState(state0.x.copy(), state0.eta.copy()), params0,
            rank, prior)

        rng = RngStream(13).generator()
        x = state0.x.copy()
        G, Sigma = draw_var_block(rng, state0.eta, prior)
        spec = StateSpaceSpec(Lambda=params0.Lambda, v=params0.v, G=G,
                              Sigma=Sigma, Gamma0=solve_lyapunov(G, Sigma))
        eta = kalman_simulation_smoother(rng, spec, x)
        Lam = draw_loadings(rng, x, eta, params0.v, params0.Phi, params0.tau)
        v = draw_variances(rng, x, eta, Lam, prior.alpha0, prior.beta0)
        Phi = draw_local_scales(rng, Lam, params0.tau, prior.nu0)
        delta, tau = draw_global_scales(rng, Lam, Phi,
                                        delta_from_tau(params0.tau),
                                        prior.a0, prior.b0)
        _latent_sweep(rng, rank, x, eta, Lam, v, "fixed", None)

        assert np.array_equal(sweep_params.G, G)
        assert np.array_equal(sweep_params.Lambda, Lam)
        assert np.array_equal(sweep_params.tau, tau)
        assert np.array_equal(sweep_state.eta, eta)
        assert np.array_equal(sweep_state.x, x)

    def test_bounds_respected_over_many_sweeps(self):
        panel = small_panel(T=30)
        prior = PriorHyper.default(panel.n)
        rank = RankStructure.from_panel(panel)
        state, params = initialize_chain(panel, prior)
        rng = RngStream(3).generator()
        for _ in range(200):
            state, params = gibbs_sweep(rng, state, params, rank, prior)
            for i in range(panel.n):
                for t in range(panel.T):
                    lo, hi = compute_rank_bounds(rank, state.x, t, i)
                    assert lo < state.x[t, i] < hi


class TestRunChain:
    def test_store_count_bookkeeping(self):
        panel = small_panel(T=25)
        draws = run_chain(panel, PriorHyper.default(panel.n, k=1),
                          McmcConfig(total=10, burn=0, thin=1, seed=1))
        assert draws.n_draws == 10

    def test_paper_protocol_counts(self):
        assert McmcConfig(total=10000, burn=5000, thin=5).n_stored == 1000
        assert McmcConfig(total=35000, burn=5000, thin=6).n_stored == 5000

    def test_stored_draw_invariants(self, small_fit):
        _, _, draws = small_fit
        for m in range(draws.n_draws):
            params = draws.params_at(m)
            assert is_stable(params.G)
            assert np.all(np.linalg.eigvalsh(params.Sigma) > 0)
            fun = implied_functionals(params)
            assert np.all(np.linalg.eigvalsh(fun.Omega0) > 0)
            assert np.all(params.v > 0) and np.all(params.Phi > 0)
            assert np.all(params.tau > 0)

    def test_margin_storage_matches_margin_adjustment(self, small_fit):
        panel, _, draws = small_fit
        m = draws.n_draws - 1
        D0 = implied_functionals(draws.params_at(m)).D0
        z = draws.x[m] / np.sqrt(D0)[None, :]
        for i in range(panel.n):
            ref = margin_adjustment(panel.values[:, i], z[:, i])
            assert np.array_equal(ref.locations, draws.margin_locations[i])
            assert np.array_equal(ref.heights, draws.margin_heights[i][m])

    def test_monotone_transform_leaves_draws_identical(self):
        panel = small_panel(T=35)
        prior = PriorHyper.default(panel.n)
        cfg = McmcConfig(total=120, burn=40, thin=2, seed=8)
        a = run_chain(panel, prior, cfg)
        vals = panel.values.copy()
        vals[:, 0] = np.exp(vals[:, 0])  # strictly increasing on continuous col
        b = run_chain(TimeSeriesPanel(vals, kinds=panel.kinds), prior, cfg)
        assert np.array_equal(a.G, b.G)
        assert np.array_equal(a.Lambda, b.Lambda)
        assert np.array_equal(a.x, b.x)
        assert np.array_equal(a.margin_heights[1], b.margin_heights[1])

    def test_distinct_streams_agree_statistically(self):
        panel, _ = dgfc_selfsim_panel(600, n=2, k=1, T=120)
        prior = PriorHyper.default(2, k=1)
        cfg = McmcConfig(total=1500, burn=500, thin=2, seed=4)
        a = run_chain(panel, prior, cfg, stream=0)
        b = run_chain(panel, prior, cfg, stream=1)
        assert not np.array_equal(a.G, b.G)

        def c0_offdiag(draws):
            return np.array([implied_functionals(draws.params_at(m)).C0[0, 1]
                             for m in range(draws.n_draws)])

        xa, xb = c0_offdiag(a), c0_offdiag(b)

        def batch_se(v, nb=20):
            bm = v[: v.size // nb * nb].reshape(nb, -1).mean(axis=1)
            return bm.std(ddof=1) / np.sqrt(nb)

        z = (xa.mean() - xb.mean()) / np.hypot(batch_se(xa), batch_se(xb))
        assert abs(z) < 4.0

    def test_latent_stream_modes_run_and_are_deterministic(self):
        panel = small_panel(T=30)
        prior = PriorHyper.default(panel.n, k=1)
        for scan in ("fixed", "random"):
            for streams in ("shared", "per-variable"):
                cfg = McmcConfig(total=40, burn=10, thin=1, seed=2,
                                 latent_scan=scan, latent_streams=streams)
                a = run_chain(panel, prior, cfg)
                b = run_chain(panel, prior, cfg)
                assert np.array_equal(a.x, b.x), (scan, streams)

    def test_stability_cap_error_names_iteration(self):
        panel = small_panel(T=30)
        k = 1
        # prior mass concentrated on an explosive transition
        prior = PriorHyper(k=k, d0=k + 1.0, Psi0=np.eye(k) * 1e-6,
                           Gbar0=np.full((k, k), 2.0), O0=np.eye(k) * 1e8)
        cfg = McmcConfig(total=10, burn=0, thin=1, seed=0, stability_cap=20)
        with pytest.raises(SamplerError, match="iteration"):
            run_chain(panel, prior, cfg)


class TestCalibrationCoarse:
    def test_c0_coverage_on_self_simulated_data(self):
        # simulation-based calibration, coarse: 95% credible intervals for the
        # implied C0 off-diagonals should cover truth in >= 80% of replicates
        hits = 0
        total = 0
        for rep in range(20):
            panel, truth = dgfc_selfsim_panel(1000 + rep, n=3, k=2, T=400)
            c_true = implied_functionals(truth).C0
            draws = run_chain(panel, PriorHyper.default(3, k=2),
                              McmcConfig(total=900, burn=300, thin=6,
                                         seed=rep))
            c_draws = np.array([implied_functionals(draws.params_at(m)).C0
                                for m in range(draws.n_draws)])
            for i in range(3):
                for j in range(i + 1, 3):
                    lo, hi = np.quantile(c_draws[:, i, j], [0.025, 0.975])
                    hits += int(lo <= c_true[i, j] <= hi)
                    total += 1
        assert hits / total >= 0.80
