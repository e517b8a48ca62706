import numpy as np
import pytest

from dgfc.backtest import BacktestConfig, backtest
from dgfc.errors import ValidationError
from dgfc.gibbs import McmcConfig, run_chain
from dgfc.io import read_forecast_values
from dgfc.params import PriorHyper, TimeSeriesPanel
from dgfc.scoring import evaluate_forecasts


def panel_fixture(T=36, seed=71):
    rng = np.random.default_rng(seed)
    vals = np.column_stack([np.cumsum(rng.normal(0, 0.3, T)) + rng.normal(size=T),
                            rng.poisson(4.0, T).astype(float)])
    return TimeSeriesPanel(vals, kinds=("continuous", "count"))


def quick_fit(train, stream):
    return run_chain(train, PriorHyper.default(train.n, k=1),
                     McmcConfig(total=40, burn=10, thin=1,
                                seed=stream.seed, stability_cap=1000),
                     stream=stream.stream)


class TestHarness:
    def test_origin_count_and_skips(self):
        panel = panel_fixture()
        cfg = BacktestConfig(t0=30, horizons=4, mcmc=McmcConfig(total=30, burn=10, thin=1))
        rep = backtest(panel, cfg, fit_fn=quick_fit)
        # origins 30..36: the last three have some horizons beyond T=36
        assert rep.meta["n_origins"] == 7
        assert rep.n_eval[(0, 1)] == 6          # origins 30..35 score h=1
        assert rep.n_skipped[(0, 4)] == 4       # origins 33..36 skip h=4
        assert rep.n_eval[(0, 4)] == 3

    def test_single_origin_when_t0_equals_T(self):
        panel = panel_fixture()
        cfg = BacktestConfig(t0=36, horizons=2)
        rep = backtest(panel, cfg, fit_fn=quick_fit)
        assert rep.meta["n_origins"] == 1
        assert rep.n_eval == {}  # nothing scoreable, all skipped
        assert rep.n_skipped[(0, 1)] == 1

    def test_t0_validation(self):
        panel = panel_fixture()
        with pytest.raises(ValidationError):
            backtest(panel, BacktestConfig(t0=2, horizons=4), fit_fn=quick_fit)
        with pytest.raises(ValidationError):
            backtest(panel, BacktestConfig(t0=40, horizons=1), fit_fn=quick_fit)

    def test_deterministic_repeat_bit_identical(self, tmp_path):
        panel = panel_fixture()
        cfg = BacktestConfig(t0=32, horizons=2, seed=5)
        rep1 = backtest(panel, cfg, outdir=tmp_path / "a", fit_fn=quick_fit)
        rep2 = backtest(panel, cfg, outdir=tmp_path / "b", fit_fn=quick_fit)
        assert rep1.rows() == rep2.rows()
        for f1, f2 in zip(rep1.meta["per_origin_files"],
                          rep2.meta["per_origin_files"]):
            assert open(f1).read() == open(f2).read()

    def test_report_equals_recomputation_from_files(self, tmp_path):
        panel = panel_fixture()
        H = 2
        cfg = BacktestConfig(t0=32, horizons=H, seed=9)
        rep = backtest(panel, cfg, outdir=tmp_path, fit_fn=quick_fit)
        rebuilt = None
        for path in rep.meta["per_origin_files"]:
            origin = int(str(path).rsplit("_", 1)[1].split(".")[0])
            values, _ = read_forecast_values(path, panel.names, H)
            n_avail = min(H, panel.T - origin)
            part = evaluate_forecasts(values[:, :, :], panel.values[origin:origin + n_avail],
                                      kinds=panel.kinds, names=panel.names)
            rebuilt = part if rebuilt is None else rebuilt.merge(part)
        for key in rep.n_eval:
            for metric in ("point", "coverage", "size", "crps"):
                assert rep.value(*key, metric) == pytest.approx(
                    rebuilt.value(*key, metric), abs=1e-12)

    def test_stride(self):
        panel = panel_fixture()
        cfg = BacktestConfig(t0=30, horizons=1, stride=3)
        rep = backtest(panel, cfg, fit_fn=quick_fit)
        assert rep.meta["n_origins"] == 3  # origins 30, 33, 36
        assert rep.meta["stride_flag"] != ""

    def test_integration_with_real_sampler(self):
        panel = panel_fixture(T=26)
        cfg = BacktestConfig(t0=24, horizons=1,
                             mcmc=McmcConfig(total=60, burn=20, thin=2), seed=2)
        rep = backtest(panel, cfg)
        assert rep.n_eval[(0, 1)] == 2
        for row in rep.rows():
            if row["n"]:
                assert np.isfinite(row["value"])
