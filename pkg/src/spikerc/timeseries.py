"""Chaotic time-series generation, train/test splitting and CSV round-trip."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

DIVERGENCE_LIMIT = 1e6


@dataclass(frozen=True)
class HenonParams:
    """Parameters of the two-dimensional quadratic map x' = y + 1 - a*x^2, y' = b*x."""

    a: float = 1.4
    b: float = 0.3
    x0: float = 0.0
    y0: float = 0.0


@dataclass(frozen=True)
class MackeyGlassParams:
    """Parameters of the delay differential equation
    dx/dt = beta*x(t-tau)/(1 + x(t-tau)^eta) - gamma*x(t),
    integrated with forward Euler and sampled every sample_interval.
    """

    beta: float = 0.2
    gamma: float = 0.1
    eta: float = 10.0
    tau_delay: float = 18.0
    euler_dt: float = 0.150
    sample_interval: float = 3.0
    history_init: float = 1.2

    def __post_init__(self):
        if self.euler_dt <= 0:
            raise ValueError("euler_dt must be positive")
        if self.tau_delay <= 0 or self.sample_interval <= 0:
            raise ValueError("tau_delay and sample_interval must be positive")
        for name, ratio in (
            ("tau_delay", self.tau_delay / self.euler_dt),
            ("sample_interval", self.sample_interval / self.euler_dt),
        ):
            if abs(ratio - round(ratio)) > 1e-9:
                raise ValueError(
                    f"{name} must be an integer multiple of euler_dt, got ratio {ratio}"
                )

    @property
    def delay_steps(self) -> int:
        return int(round(self.tau_delay / self.euler_dt))

    @property
    def steps_per_sample(self) -> int:
        return int(round(self.sample_interval / self.euler_dt))


def gen_henon(params: HenonParams, n_steps: int) -> np.ndarray:
    """Iterate the map from (x0, y0) and return the first n_steps x values.

    Raises ValueError with the offending step index if the orbit diverges.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    out = np.empty(n_steps)
    x, y = params.x0, params.y0
    for n in range(n_steps):
        x, y = y + 1.0 - params.a * x * x, params.b * x
        if not np.isfinite(x) or abs(x) > DIVERGENCE_LIMIT:
            raise ValueError(f"orbit diverged at step {n + 1} (|x| > {DIVERGENCE_LIMIT:g})")
        out[n] = x
    return out


def gen_mackey_glass(params: MackeyGlassParams, n_samples: int) -> np.ndarray:
    """Integrate with forward Euler at euler_dt and return n_samples values
    taken every sample_interval, starting one full interval after t=0.

    The delay term reads a ring buffer of length tau_delay/euler_dt whose
    entries are history_init for all t <= 0.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    dt = params.euler_dt
    dsteps = params.delay_steps
    ssteps = params.steps_per_sample
    buf = np.full(dsteps, params.history_init)
    x = params.history_init
    out = np.empty(n_samples)
    k_out = 0
    for k in range(n_samples * ssteps):
        slot = k % dsteps
        delayed = buf[slot]
        buf[slot] = x
        x = x + dt * (
            params.beta * delayed / (1.0 + delayed ** params.eta) - params.gamma * x
        )
        if not np.isfinite(x):
            raise ValueError(f"integration diverged at Euler step {k + 1}")
        if (k + 1) % ssteps == 0:
            out[k_out] = x
            k_out += 1
    return out


@dataclass(frozen=True)
class SplitSeries:
    """Contiguous train/test partition; the first `washout` train entries are
    excluded from regression targets downstream."""

    train: np.ndarray
    test: np.ndarray
    washout: int


def split_series(series: np.ndarray, train_fraction: float, washout: int) -> SplitSeries:
    """Split a series into a train prefix and test suffix, both non-empty."""
    series = np.asarray(series, dtype=float)
    if series.ndim != 1:
        raise ValueError("series must be one-dimensional")
    n = len(series)
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    n_train = int(round(n * train_fraction))
    if n_train < 1 or n_train >= n:
        raise ValueError(f"split leaves an empty partition (n={n}, train={n_train})")
    if washout < 0 or washout >= n_train:
        raise ValueError("washout must satisfy 0 <= washout < train length")
    return SplitSeries(train=series[:n_train], test=series[n_train:], washout=washout)


def write_series_csv(series: np.ndarray, path) -> None:
    """Write `index,value` rows; values keep 17 significant digits (lossless)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["index", "value"])
        for i, value in enumerate(np.asarray(series, dtype=float)):
            writer.writerow([i, format(value, ".17g")])


def read_series_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["index", "value"]:
            raise ValueError(f"unexpected series CSV header: {header}")
        values = [float(row[1]) for row in reader if row]
    return np.asarray(values)
