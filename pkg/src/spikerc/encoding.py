"""Spatial one-hot encoding: map each sample to the index of the input
neuron that receives constant current i0 for one presentation window."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EncodingConfig:
    m_in: int
    i0: float
    delta: float
    series_min: float
    series_max: float

    def __post_init__(self):
        if self.m_in < 2:
            raise ValueError("m_in must be >= 2")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if not (np.isfinite(self.series_min) and np.isfinite(self.series_max)):
            raise ValueError("series bounds must be finite")
        if self.series_min >= self.series_max:
            raise ValueError("degenerate encoding range (min >= max)")


def fit_encoding(train_values, m_in: int, i0: float, delta: float) -> EncodingConfig:
    """Fix the value range from training data only; later out-of-range
    values clamp to the edge bins."""
    values = np.asarray(train_values, dtype=float)
    if values.size == 0:
        raise ValueError("cannot fit encoding on an empty series")
    if np.isnan(values).any():
        raise ValueError("series contains NaN")
    lo, hi = float(values.min()), float(values.max())
    return EncodingConfig(m_in=m_in, i0=i0, delta=delta, series_min=lo, series_max=hi)


def discretize(value: float, config: EncodingConfig) -> int:
    """1-based bin index: round_half_up(1 + (value-min)/(max-min)*(m_in-1)),
    clamped to [1, m_in]."""
    if math.isnan(value):
        raise ValueError("cannot discretize NaN")
    span = config.series_max - config.series_min
    x = 1.0 + (value - config.series_min) / span * (config.m_in - 1)
    index = math.floor(x + 0.5)
    return min(max(index, 1), config.m_in)


def build_schedule(series, config: EncodingConfig) -> np.ndarray:
    """Per-window active input index for each sample, as int64 in [1, m_in]."""
    values = np.asarray(series, dtype=float)
    if np.isnan(values).any():
        raise ValueError("series contains NaN")
    span = config.series_max - config.series_min
    x = 1.0 + (values - config.series_min) / span * (config.m_in - 1)
    indices = np.floor(x + 0.5).astype(np.int64)
    return np.clip(indices, 1, config.m_in)
