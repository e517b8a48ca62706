"""Forecast evaluation: point, interval, and density scores from predictive
samples, aggregated per variable and horizon."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .params import COUNT


def crps_sample(draws, obs, fast=False):
    """Sample CRPS  E|X - y| - 0.5 E|X - X'|  over all M^2 pairs.

    The default is the literal pairwise sum; `fast=True` uses the sorted
    O(M log M) form, which equals the pairwise sum to float precision.
    """
    x = np.asarray(draws, dtype=float).ravel()
    M = x.size
    if M == 0:
        raise ValidationError("need at least one draw")
    term1 = np.mean(np.abs(x - obs))
    if fast:
        xs = np.sort(x)
        w = 2.0 * np.arange(1, M + 1) - M - 1.0
        term2 = 2.0 * np.dot(w, xs) / (M * M)
    else:
        term2 = np.mean(np.abs(x[:, None] - x[None, :]))
    return term1 - 0.5 * term2


def hpd_interval(draws, level=0.95):
    """Shortest contiguous window of ceil(level * M) sorted draws."""
    x = np.sort(np.asarray(draws, dtype=float).ravel())
    M = x.size
    if M == 0:
        raise ValidationError("need at least one draw")
    w = math.ceil(level * M)
    if w < 1 or w > M:
        raise ValidationError("level must give a window of 1..M draws")
    widths = x[w - 1:] - x[:M - w + 1]
    j = int(np.argmin(widths))
    return float(x[j]), float(x[j + w - 1])


def equal_tailed_interval(draws, level=0.95):
    """Central sample-quantile interval (q_{a/2}, q_{1-a/2}).

    Quantiles are order statistics (generalized-inverse convention), so the
    endpoints are always observed draw values; this keeps intervals for
    discrete variables on the support and spans at least ceil(level * M)
    draws, which is what makes the shortest-window HPD never longer.
    """
    x = np.asarray(draws, dtype=float).ravel()
    if x.size == 0:
        raise ValidationError("need at least one draw")
    a = 0.5 * (1.0 - level)
    lo, hi = np.quantile(x, [a, 1.0 - a], method="inverted_cdf")
    return float(lo), float(hi)


def predictive_median(draws, kind):
    """Median with the even-M convention: midpoint for continuous variables,
    lower central order statistic for count variables (keeps it integer)."""
    x = np.sort(np.asarray(draws, dtype=float).ravel())
    M = x.size
    if kind == COUNT and M % 2 == 0:
        return float(x[M // 2 - 1])
    return float(np.median(x))


def point_errors(draws, obs, kind):
    """Squared error of the predictive median for continuous variables,
    absolute error of the (integer) predictive median for counts."""
    med = predictive_median(draws, kind)
    if kind == COUNT:
        return abs(med - obs)
    return (med - obs) ** 2


@dataclass
class MetricsReport:
    """Per-variable, per-horizon forecast metrics with evaluation counts."""

    names: tuple
    kinds: tuple
    horizons: int
    level: float = 0.95
    # accumulators keyed (variable index, horizon 1..H)
    sums: dict = field(default_factory=dict)
    n_eval: dict = field(default_factory=dict)
    n_skipped: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def _key(self, i, h):
        return (i, h)

    def add_cell(self, i, h, draws, obs):
        kind = self.kinds[i]
        if kind == COUNT:
            lo, hi = equal_tailed_interval(draws, self.level)
            interval_kind = "equal-tailed"
        else:
            lo, hi = hpd_interval(draws, self.level)
            interval_kind = "hpd"
        key = self._key(i, h)
        acc = self.sums.setdefault(key, {"point": 0.0, "cover": 0.0,
                                         "size": 0.0, "crps": 0.0,
                                         "interval": interval_kind})
        acc["point"] += point_errors(draws, obs, kind)
        acc["cover"] += 1.0 if lo <= obs <= hi else 0.0
        acc["size"] += hi - lo
        acc["crps"] += crps_sample(draws, obs, fast=True)
        self.n_eval[key] = self.n_eval.get(key, 0) + 1

    def add_skipped(self, i, h):
        key = self._key(i, h)
        self.n_skipped[key] = self.n_skipped.get(key, 0) + 1

    def merge(self, other: "MetricsReport"):
        if (other.names, other.kinds, other.level) != (self.names, self.kinds, self.level):
            raise ValidationError("cannot merge incompatible reports")
        self.horizons = max(self.horizons, other.horizons)
        for key, acc in other.sums.items():
            mine = self.sums.setdefault(key, {"point": 0.0, "cover": 0.0,
                                              "size": 0.0, "crps": 0.0,
                                              "interval": acc["interval"]})
            for f in ("point", "cover", "size", "crps"):
                mine[f] += acc[f]
        for key, c in other.n_eval.items():
            self.n_eval[key] = self.n_eval.get(key, 0) + c
        for key, c in other.n_skipped.items():
            self.n_skipped[key] = self.n_skipped.get(key, 0) + c
        return self

    def value(self, i, h, metric):
        key = self._key(i, h)
        cnt = self.n_eval.get(key, 0)
        if cnt == 0:
            return float("nan")
        if metric == "point":
            return self.sums[key]["point"] / cnt
        if metric in ("coverage", "cover"):
            return self.sums[key]["cover"] / cnt
        if metric == "size":
            return self.sums[key]["size"] / cnt
        if metric == "crps":
            return self.sums[key]["crps"] / cnt
        raise KeyError(metric)

    def rows(self):
        """Long-format rows (variable, horizon, metric, value, n, n_skipped)."""
        out = []
        for i, name in enumerate(self.names):
            point_name = "mae" if self.kinds[i] == COUNT else "mse"
            for h in range(1, self.horizons + 1):
                key = self._key(i, h)
                cnt = self.n_eval.get(key, 0)
                skipped = self.n_skipped.get(key, 0)
                interval = self.sums.get(key, {}).get("interval", "")
                for metric, label in (("point", point_name), ("coverage", "coverage"),
                                      ("size", "size"), ("crps", "crps")):
                    out.append({"variable": name, "horizon": h, "metric": label,
                                "value": self.value(i, h, metric), "n": cnt,
                                "n_skipped": skipped, "interval": interval})
        return out


def evaluate_forecasts(forecasts, actuals, kinds=None, names=None,
                       level=0.95) -> MetricsReport:
    """Score an (M, H, n) predictive sample against realized rows.

    `actuals` may cover fewer than H horizons; missing tail horizons are
    counted as skipped.
    """
    values = forecasts.values if hasattr(forecasts, "values") else np.asarray(forecasts)
    if kinds is None:
        kinds = getattr(forecasts, "kinds", None)
    if names is None:
        names = getattr(forecasts, "names", None)
    M, H, n = values.shape
    actuals = np.asarray(actuals, dtype=float)
    if actuals.ndim != 2 or actuals.shape[1] != n:
        raise ValidationError("actuals must be (H_avail, n)")
    if actuals.shape[0] > H:
        raise ValidationError("more actual rows than forecast horizons")
    kinds = tuple(kinds) if kinds else ("continuous",) * n
    names = tuple(names) if names else tuple(f"y{i + 1}" for i in range(n))
    report = MetricsReport(names=names, kinds=kinds, horizons=H, level=level)
    for h in range(1, H + 1):
        for i in range(n):
            if h <= actuals.shape[0]:
                report.add_cell(i, h, values[:, h - 1, i], actuals[h - 1, i])
            else:
                report.add_skipped(i, h)
    return report
