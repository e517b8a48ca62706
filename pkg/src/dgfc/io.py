"""File formats: panel CSV ingestion/export, draw storage, forecast and
metrics tables, margin/latent-correlation report tables, and run manifests.

Panel CSV: one header row of variable names, an optional second header row
of data kinds (continuous|count), then T numeric rows. Draw storage is a
numpy .npz archive with one array per parameter block (first axis = stored
draw) plus the per-variable margin jump lists. All other outputs are plain
delimited tables.
"""

import csv
import hashlib
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .forecasting import ForecastDraws
from .gibbs import PosteriorDraws
from .margins import StepCdf
from .params import CONTINUOUS, COUNT, KINDS, TimeSeriesPanel
from .scoring import MetricsReport, hpd_interval
from .stationary import implied_functionals

PACKAGE_VERSION = "0.1.0"
BAND_LEVELS = tuple(round(0.1 * j, 1) for j in range(1, 10))


# ---------------------------------------------------------------------------
# panel CSV
# ---------------------------------------------------------------------------

def ingest_csv(path) -> TimeSeriesPanel:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ValidationError(f"{path}: need a header row and at least one data row")
    names = tuple(c.strip() for c in rows[0])
    n = len(names)
    body = rows[1:]
    kinds = (CONTINUOUS,) * n
    if body and all(c.strip() in KINDS for c in body[0]):
        kinds = tuple(c.strip() for c in body[0])
        body = body[1:]
    values = np.empty((len(body), n))
    for r, row in enumerate(body):
        if len(row) != n:
            raise ValidationError(f"{path}: row {r + 1} has {len(row)} cells, "
                                  f"expected {n}")
        for c, cell in enumerate(row):
            cell = cell.strip()
            if cell == "":
                raise ValidationError(f"{path}: missing value at row {r + 1}, "
                                      f"column {names[c]!r}")
            try:
                values[r, c] = float(cell)
            except ValueError:
                raise ValidationError(f"{path}: non-numeric cell {cell!r} at "
                                      f"row {r + 1}, column {names[c]!r}") from None
    for c, kind in enumerate(kinds):
        if kind == COUNT:
            col = values[:, c]
            if np.any(col < 0) or np.any(col != np.floor(col)):
                raise ValidationError(f"{path}: count column {names[c]!r} must "
                                      "hold nonnegative integers")
    return TimeSeriesPanel(values, names=names, kinds=kinds)


def export_csv(panel: TimeSeriesPanel, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(panel.names)
        w.writerow(panel.kinds)
        for t in range(panel.T):
            w.writerow([_fmt_cell(panel.values[t, i], panel.kinds[i])
                        for i in range(panel.n)])


def _fmt_cell(value, kind):
    if kind == COUNT:
        return str(int(value))
    return repr(float(value))


# ---------------------------------------------------------------------------
# draw storage
# ---------------------------------------------------------------------------

def save_draws(draws: PosteriorDraws, path):
    arrays = {"G": draws.G, "Sigma": draws.Sigma, "Lambda": draws.Lambda,
              "v": draws.v, "Phi": draws.Phi, "tau": draws.tau,
              "eta": draws.eta, "x": draws.x}
    for i in range(draws.n):
        arrays[f"margin_loc_{i}"] = draws.margin_locations[i]
        arrays[f"margin_h_{i}"] = draws.margin_heights[i]
    meta = {"names": list(draws.names), "kinds": list(draws.kinds),
            "config": draws.config}
    arrays["meta"] = np.frombuffer(json.dumps(meta, sort_keys=True).encode(),
                                   dtype=np.uint8)
    np.savez_compressed(path, **arrays)


def load_draws(path) -> PosteriorDraws:
    with np.load(path) as z:
        meta = json.loads(bytes(z["meta"]).decode())
        n = len(meta["names"])
        return PosteriorDraws(
            G=z["G"], Sigma=z["Sigma"], Lambda=z["Lambda"], v=z["v"],
            Phi=z["Phi"], tau=z["tau"], eta=z["eta"], x=z["x"],
            margin_locations=[z[f"margin_loc_{i}"] for i in range(n)],
            margin_heights=[z[f"margin_h_{i}"] for i in range(n)],
            names=tuple(meta["names"]), kinds=tuple(meta["kinds"]),
            config=meta["config"])


# ---------------------------------------------------------------------------
# forecast and metrics tables
# ---------------------------------------------------------------------------

def write_forecasts(fd: ForecastDraws, path):
    """Long format: (draw, origin, horizon, variable, value)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["draw", "origin", "horizon", "variable", "value"])
        origin = "" if fd.origin is None else fd.origin
        for j in range(fd.n_paths):
            for h in range(fd.horizons):
                for i, name in enumerate(fd.names):
                    w.writerow([int(fd.draw_indices[j]), origin, h + 1, name,
                                _fmt_cell(fd.values[j, h, i], fd.kinds[i])])


def read_forecast_values(path, names, horizons):
    """Reconstruct the (M, H, n) value array from a long-format file."""
    col = {name: i for i, name in enumerate(names)}
    rows = []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        next(r)
        for draw, _origin, h, name, value in r:
            rows.append((int(draw), int(h), col[name], float(value)))
    draw_ids = sorted({d for d, _, _, _ in rows})
    remap = {d: j for j, d in enumerate(draw_ids)}
    out = np.full((len(draw_ids), horizons, len(names)), np.nan)
    for d, h, i, value in rows:
        out[remap[d], h - 1, i] = value
    return out, np.asarray(draw_ids)


def write_forecast_quantiles(fd: ForecastDraws, path,
                             levels=(0.05, 0.25, 0.5, 0.75, 0.95)):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["variable", "horizon"] + [f"q{level}" for level in levels])
        if fd.n_paths == 0:
            return
        for i, name in enumerate(fd.names):
            for h in range(fd.horizons):
                qs = np.quantile(fd.values[:, h, i], levels)
                w.writerow([name, h + 1] + [repr(float(q)) for q in qs])


def write_metrics(report: MetricsReport, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["variable", "horizon", "metric", "value", "n",
                    "n_skipped", "interval"])
        for row in report.rows():
            w.writerow([row["variable"], row["horizon"], row["metric"],
                        repr(float(row["value"])), row["n"], row["n_skipped"],
                        row["interval"]])


# ---------------------------------------------------------------------------
# report tables derived from stored draws
# ---------------------------------------------------------------------------

def write_margin_bands(draws: PosteriorDraws, path, levels=BAND_LEVELS):
    """Pointwise quantile bands of the margin-adjustment draws, one row per
    (variable, grid point, level)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["variable", "x", "alpha", "value"])
        for i, name in enumerate(draws.names):
            grid = draws.margin_locations[i]
            heights = draws.margin_heights[i]          # (M, C_i)
            qs = np.quantile(heights, levels, axis=0)  # (L, C_i)
            for j, x in enumerate(grid):
                for a, level in enumerate(levels):
                    w.writerow([name, _fmt_cell(x, draws.kinds[i]), level,
                                repr(float(qs[a, j]))])


def write_latent_correlations(draws: PosteriorDraws, path, level=0.95):
    """Posterior means of the stationary correlation and lag-1
    cross-correlation, with Bonferroni-corrected HPD exclusion-of-zero flags."""
    n = draws.n
    M = draws.n_draws
    C0s = np.empty((M, n, n))
    C1s = np.empty((M, n, n))
    for m in range(M):
        fun = implied_functionals(draws.params_at(m))
        C0s[m] = fun.C0
        C1s[m] = fun.C1
    n_tests = n * (n - 1) // 2 + n * n
    adj_level = 1.0 - (1.0 - level) / max(n_tests, 1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["matrix", "row", "col", "mean", "hpd_lo", "hpd_hi",
                    "excludes_zero"])
        for label, arr in (("lag0", C0s), ("lag1", C1s)):
            for i in range(n):
                for j in range(n):
                    cell = arr[:, i, j]
                    if label == "lag0" and i == j:
                        w.writerow([label, draws.names[i], draws.names[j],
                                    "1.0", "1.0", "1.0", ""])
                        continue
                    lo, hi = hpd_interval(cell, adj_level)
                    flag = int(lo > 0.0 or hi < 0.0)
                    w.writerow([label, draws.names[i], draws.names[j],
                                repr(float(cell.mean())), repr(lo), repr(hi),
                                flag])


# ---------------------------------------------------------------------------
# run manifests
# ---------------------------------------------------------------------------

def file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    """Everything needed to bit-reproduce a run. The digest covers the
    config, seed, version, and input digest; timestamps are excluded."""

    command: str
    config: dict
    seed: int
    input_digest: str = ""
    version: str = PACKAGE_VERSION
    created_at: str = field(default_factory=lambda: time.strftime(
        "%Y-%m-%dT%H:%M:%S", time.gmtime()))

    @property
    def digest(self):
        payload = json.dumps({"command": self.command, "config": self.config,
                              "seed": self.seed, "input": self.input_digest,
                              "version": self.version}, sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()

    def write(self, path):
        with open(path, "w") as fh:
            fh.write(f"command = {self.command}\n")
            fh.write(f"version = {self.version}\n")
            fh.write(f"seed = {self.seed}\n")
            fh.write(f"input_digest = {self.input_digest}\n")
            fh.write(f"config = {json.dumps(self.config, sort_keys=True)}\n")
            fh.write(f"manifest_digest = {self.digest}\n")
            fh.write(f"created_at = {self.created_at}\n")


def read_manifest(path):
    out = {}
    with open(path) as fh:
        for line in fh:
            key, _, value = line.partition(" = ")
            out[key.strip()] = value.strip()
    return out


def emit_reports(outdir, report=None, forecasts=None, draws=None,
                 manifest: RunManifest = None):
    """Write whichever report artifacts the inputs support."""
    import os
    os.makedirs(outdir, exist_ok=True)
    written = []
    if report is not None:
        path = os.path.join(outdir, "metrics.csv")
        write_metrics(report, path)
        written.append(path)
    if forecasts is not None:
        path = os.path.join(outdir, "forecasts.csv")
        write_forecasts(forecasts, path)
        written.append(path)
        path = os.path.join(outdir, "forecast_quantiles.csv")
        write_forecast_quantiles(forecasts, path)
        written.append(path)
    if draws is not None:
        path = os.path.join(outdir, "margin_bands.csv")
        write_margin_bands(draws, path)
        written.append(path)
        path = os.path.join(outdir, "latent_correlations.csv")
        write_latent_correlations(draws, path)
        written.append(path)
    if manifest is not None:
        path = os.path.join(outdir, "manifest.txt")
        manifest.write(path)
        written.append(path)
    return written
