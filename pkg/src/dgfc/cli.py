"""Command-line surface: simulate, fit, forecast, backtest, experiment,
report. Every subcommand writes a run manifest next to its outputs.

Exit codes: 0 success, 2 validation error, 3 numeric/sampler error.
"""

import csv
import json
import os
import sys

import click
import numpy as np

from . import dgp, experiments
from .backtest import BacktestConfig, backtest
from .errors import DgfcError, NumericError, ValidationError
from .forecasting import ForecastConfig, posterior_predictive
from .gibbs import McmcConfig, run_chain, sample_params_from_prior
from .io import (RunManifest, emit_reports, export_csv, file_digest,
                 ingest_csv, load_draws, save_draws, write_forecast_quantiles,
                 write_forecasts, write_metrics)
from .params import PriorHyper
from .rng import RngStream


def _fail(exc):
    click.echo(f"error: {exc}", err=True)
    if isinstance(exc, ValidationError):
        sys.exit(2)
    if isinstance(exc, NumericError):
        sys.exit(3)
    sys.exit(1)


def _guard(fn):
    import functools

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DgfcError as exc:
            _fail(exc)
    return wrapper


def _manifest(command, config, seed, input_path=None):
    digest = file_digest(input_path) if input_path else ""
    return RunManifest(command=command, config=config, seed=seed,
                       input_digest=digest)


@click.group()
def main():
    """Dynamic Gaussian factor copula modeling and forecasting."""


@main.command()
@click.option("--dgp", "dgp_name", required=True,
              type=click.Choice(["varma", "varch", "varma-copula", "dgfc"]))
@click.option("--length", "-T", "length", type=int, required=True)
@click.option("--n", type=int, default=2, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--burn", type=int, default=dgp.DEFAULT_BURN, show_default=True)
@click.option("--out", required=True, type=click.Path())
@_guard
def simulate(dgp_name, length, n, seed, burn, out):
    """Simulate a synthetic panel and write it as CSV."""
    rng = RngStream(seed).generator()
    if dgp_name == "varma":
        spec = dgp.random_varma_params(rng, n=n, p=3, q=6)
        panel = dgp.TimeSeriesPanel(dgp.simulate_varma(rng, spec, length, burn))
    elif dgp_name == "varch":
        spec = dgp.random_varch_params(rng, n=n)
        panel = dgp.TimeSeriesPanel(dgp.simulate_varch(rng, spec, length, burn))
    elif dgp_name == "varma-copula":
        latent = dgp.random_varma_params(rng, n=n, p=1, q=1)
        panel = dgp.simulate_varma_copula(rng, dgp.VarmaCopulaSpec(latent),
                                          length, burn)
    else:
        prior = PriorHyper.default(n)
        params = sample_params_from_prior(rng, n, prior)
        panel = dgp.simulate_dgfc_panel(rng, params, length)
    export_csv(panel, out)
    cfg = {"dgp": dgp_name, "T": length, "n": n, "burn": burn}
    _manifest("simulate", cfg, seed).write(out + ".manifest")
    click.echo(f"wrote {out} ({panel.T} x {panel.n})")


@main.command()
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--k", type=int, default=None, help="factor count; default ceil(0.7 n)")
@click.option("--total", type=int, default=10000, show_default=True)
@click.option("--burn", type=int, default=5000, show_default=True)
@click.option("--thin", type=int, default=5, show_default=True)
@click.option("--chains", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@_guard
def fit(data, out, k, total, burn, thin, chains, seed):
    """Run the rank-posterior sampler on a CSV panel and store the draws."""
    panel = ingest_csv(data)
    prior = PriorHyper.default(panel.n, k=k)
    mcmc = McmcConfig(total=total, burn=burn, thin=thin, chains=chains,
                      seed=seed)
    cfg = {"k": prior.k, "total": total, "burn": burn, "thin": thin,
           "chains": chains}
    for chain in range(chains):
        draws = run_chain(panel, prior, mcmc, stream=chain)
        path = out if chains == 1 else _chain_path(out, chain)
        save_draws(draws, path)
        click.echo(f"chain {chain}: stored {draws.n_draws} draws -> {path}")
    _manifest("fit", cfg, seed, data).write(out + ".manifest")


def _chain_path(out, chain):
    root, ext = os.path.splitext(out)
    return f"{root}_chain{chain}{ext or '.npz'}"


@main.command()
@click.option("--draws", "draws_path", required=True, type=click.Path(exists=True))
@click.option("--horizons", "-H", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
@_guard
def forecast(draws_path, horizons, seed, out):
    """Posterior predictive paths from stored draws (long-format CSV)."""
    draws = load_draws(draws_path)
    fd = posterior_predictive(RngStream(seed), draws,
                              ForecastConfig(horizons=horizons))
    write_forecasts(fd, out)
    root, _ = os.path.splitext(out)
    write_forecast_quantiles(fd, root + "_quantiles.csv")
    cfg = {"horizons": horizons, "n_paths": fd.n_paths}
    _manifest("forecast", cfg, seed, draws_path).write(out + ".manifest")
    click.echo(f"wrote {fd.n_paths} paths x {horizons} horizons -> {out}")


@main.command(name="backtest")
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--t0", type=int, required=True, help="first forecast origin")
@click.option("--horizons", "-H", type=int, default=1, show_default=True)
@click.option("--stride", type=int, default=1, show_default=True)
@click.option("--k", type=int, default=None)
@click.option("--total", type=int, default=2000, show_default=True)
@click.option("--burn", type=int, default=1000, show_default=True)
@click.option("--thin", type=int, default=2, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--outdir", required=True, type=click.Path())
@_guard
def backtest_cmd(data, t0, horizons, stride, k, total, burn, thin, seed, outdir):
    """Expanding-window refit/forecast/score over a CSV panel."""
    panel = ingest_csv(data)
    cfg = BacktestConfig(t0=t0, horizons=horizons, stride=stride, k=k,
                         mcmc=McmcConfig(total=total, burn=burn, thin=thin),
                         seed=seed)
    report = backtest(panel, cfg, outdir=outdir)
    write_metrics(report, os.path.join(outdir, "metrics.csv"))
    conf = {"t0": t0, "horizons": horizons, "stride": stride, "k": k,
            "total": total, "burn": burn, "thin": thin,
            "origin_convention": report.meta["origin_convention"]}
    _manifest("backtest", conf, seed, data).write(
        os.path.join(outdir, "manifest.txt"))
    click.echo(f"backtest over {report.meta['n_origins']} origins -> {outdir}")


@main.command()
@click.option("--kind", required=True,
              type=click.Choice(["margin-recovery", "param-concentration"]))
@click.option("--dgp", "dgp_name", default="varma-copula",
              type=click.Choice(list(experiments.DGP_NAMES)))
@click.option("--t-grid", default="25,50,100,200", show_default=True)
@click.option("--replicates", type=int, default=10, show_default=True)
@click.option("--total", type=int, default=10000, show_default=True)
@click.option("--burn", type=int, default=5000, show_default=True)
@click.option("--thin", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--outdir", required=True, type=click.Path())
@_guard
def experiment(kind, dgp_name, t_grid, replicates, total, burn, thin, seed,
               outdir):
    """Concentration experiments (margin recovery / identified parameters)."""
    os.makedirs(outdir, exist_ok=True)
    grid = tuple(int(s) for s in t_grid.split(","))
    mcmc = McmcConfig(total=total, burn=burn, thin=thin)
    if kind == "margin-recovery":
        rows, summary = experiments.experiment_margin_recovery(
            seed, dgp_name, grid, replicates, mcmc)
        _write_rows(os.path.join(outdir, "margin_recovery.csv"), rows)
        _write_rows(os.path.join(outdir, "margin_recovery_summary.csv"), summary)
        cfg = {"kind": kind, "dgp": dgp_name, "T_grid": list(grid),
               "replicates": replicates, "total": total, "burn": burn,
               "thin": thin}
    else:
        truth, rows = experiments.experiment_param_concentration(seed, grid, mcmc)
        _write_rows(os.path.join(outdir, "param_concentration.csv"), rows)
        with open(os.path.join(outdir, "ground_truth.json"), "w") as fh:
            json.dump({k_: v.tolist() for k_, v in truth.items()}, fh, indent=2)
        cfg = {"kind": kind, "T_grid": list(grid), "total": total,
               "burn": burn, "thin": thin}
    _manifest("experiment", cfg, seed).write(os.path.join(outdir, "manifest.txt"))
    click.echo(f"experiment tables -> {outdir}")


def _write_rows(path, rows):
    if not rows:
        with open(path, "w", newline=""):
            pass
        return
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


@main.command()
@click.option("--draws", "draws_path", required=True, type=click.Path(exists=True))
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--outdir", required=True, type=click.Path())
@_guard
def report(draws_path, seed, outdir):
    """Margin quantile bands and latent-correlation tables from stored draws."""
    draws = load_draws(draws_path)
    manifest = _manifest("report", {"draws": os.path.basename(draws_path)},
                         seed, draws_path)
    written = emit_reports(outdir, draws=draws, manifest=manifest)
    click.echo("\n".join(written))


if __name__ == "__main__":
    main()
