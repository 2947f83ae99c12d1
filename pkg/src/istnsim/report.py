"""Metric files, confidence bands and run summaries.

The metric file is comma-separated with a fixed header (``METRIC_COLUMNS``),
one row per iteration per seed, seeds in ascending order. Floats are written
with ``repr`` so that files parse back to the exact in-memory values.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .agents.training import TrainMetrics

METRIC_COLUMNS = ("iteration", "seed", "reward", "loss", "epsilon", "good", "fair", "poor",
                  "nosignal", "served", "leo_served")
CATEGORY_COLUMNS = ("good", "fair", "poor", "nosignal")
_INT_FIELDS = {"good", "fair", "poor", "nosignal", "served", "leo_served"}


def confidence_interval(samples, level: float = 0.90) -> tuple[float, float, float]:
    """Two-sided Student-t interval for the mean: (lower, mean, upper)."""
    x = np.asarray(samples, dtype=float).ravel()
    if len(x) < 2:
        raise ValueError("confidence interval needs at least 2 samples")
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    mean = float(x.mean())
    half = float(stats.t.ppf(0.5 + level / 2, len(x) - 1) * x.std(ddof=1) / math.sqrt(len(x)))
    return mean - half, mean, mean + half


def ci_bands(matrix, level: float = 0.90):
    """Pointwise intervals across rows of a (n_samples, T) matrix."""
    m = np.asarray(matrix, dtype=float)
    if m.shape[0] < 2:
        raise ValueError("confidence bands need at least 2 series")
    mean = m.mean(axis=0)
    half = stats.t.ppf(0.5 + level / 2, m.shape[0] - 1) * m.std(axis=0, ddof=1) / math.sqrt(m.shape[0])
    return mean - half, mean, mean + half


def moving_average(x, window: int) -> np.ndarray:
    """Trailing mean over up to ``window`` samples (shorter at the start)."""
    x = np.asarray(x, dtype=float)
    if window <= 1 or len(x) == 0:
        return x.copy()
    c = np.cumsum(np.insert(x, 0, 0.0))
    idx = np.arange(1, len(x) + 1)
    lo = np.maximum(idx - window, 0)
    return (c[idx] - c[lo]) / (idx - lo)


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_metrics(path, runs: dict[int, TrainMetrics]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(METRIC_COLUMNS)
        for seed in sorted(runs):
            m = runs[seed]
            cols = [getattr(m, c) for c in METRIC_COLUMNS[2:]]
            for i in range(len(m)):
                w.writerow([str(i), str(seed)] + [_fmt(c[i]) for c in cols])


def read_metrics(path) -> dict[int, TrainMetrics]:
    rows: dict[int, list] = {}
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if tuple(header or ()) != METRIC_COLUMNS:
            raise ValueError(f"unexpected metric header {header}")
        for row in r:
            rows.setdefault(int(row[1]), []).append(row)
    out = {}
    for seed, rs in rows.items():
        kw = {}
        for j, name in enumerate(METRIC_COLUMNS[2:], start=2):
            if name in _INT_FIELDS:
                kw[name] = np.array([int(x[j]) for x in rs], dtype=np.int64)
            else:
                kw[name] = np.array([float(x[j]) for x in rs])
        out[seed] = TrainMetrics(**kw)
    return out


@dataclass
class RunReport:
    agent: str
    runs: dict[int, TrainMetrics]
    n_users: int
    level: float = 0.90
    smooth: int = 50
    final_fraction: float = 0.10

    @property
    def seeds(self) -> list[int]:
        return sorted(self.runs)

    @property
    def n_iterations(self) -> int:
        return min((len(m) for m in self.runs.values()), default=0)

    def series(self, name: str, smooth: bool = True) -> np.ndarray:
        """(n_seeds, T) matrix of one metric, optionally smoothed."""
        t = self.n_iterations
        rows = [np.asarray(getattr(self.runs[s], name), float)[:t] for s in self.seeds]
        if smooth:
            rows = [moving_average(r, self.smooth) for r in rows]
        return np.array(rows).reshape(len(rows), t)

    def bands(self, name: str = "reward"):
        return ci_bands(self.series(name), self.level)

    def final_window(self) -> slice:
        t = self.n_iterations
        k = max(int(round(self.final_fraction * t)), 1) if t else 0
        return slice(t - k, t)

    def final_means(self, name: str = "reward") -> np.ndarray:
        """Per-seed mean of the raw metric over the final window."""
        return self.series(name, smooth=False)[:, self.final_window()].mean(axis=1)

    def final_band_width(self, name: str = "reward") -> float:
        lo, _, hi = self.bands(name)
        return float(np.mean((hi - lo)[self.final_window()]))

    def summary(self) -> dict:
        t = self.n_iterations
        out = dict(agent=self.agent, seeds=self.seeds, iterations=t, users=self.n_users,
                   ci_level=self.level, smoothing_window=self.smooth,
                   final_window_fraction=self.final_fraction)
        if t == 0 or not self.runs:
            return out
        fm = self.final_means()
        served = self.final_means("served")
        leo = self.final_means("leo_served")
        out.update(
            final_mean_reward=float(fm.mean()),
            served_fraction=float(served.mean() / max(self.n_users, 1)),
            leo_served_fraction=float(leo.mean() / max(self.n_users, 1)),
            per_seed={str(s): dict(final_mean_reward=float(f), served=float(a), leo_served=float(b))
                      for s, f, a, b in zip(self.seeds, fm, served, leo)},
        )
        if len(self.seeds) >= 2:
            out["final_reward_ci"] = list(confidence_interval(fm, self.level))
            out["final_band_width"] = self.final_band_width()
        return out

    def write(self, out_dir) -> list[Path]:
        out_dir = Path(out_dir)
        written = [out_dir / "metrics.csv", out_dir / "summary.json"]
        write_metrics(written[0], self.runs)
        written[1].write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")
        if len(self.seeds) >= 2 and self.n_iterations:
            path = out_dir / "bands.csv"
            self.write_bands(path)
            written.append(path)
        return written

    def write_bands(self, path) -> None:
        names = ("reward",) + CATEGORY_COLUMNS
        cols = {}
        for n in names:
            lo, mean, hi = self.bands(n)
            cols.update({f"{n}_mean": mean, f"{n}_lower": lo, f"{n}_upper": hi})
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iteration", *cols])
            for i in range(self.n_iterations):
                w.writerow([str(i)] + [repr(float(c[i])) for c in cols.values()])
