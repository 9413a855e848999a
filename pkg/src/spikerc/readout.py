"""Linear readout trained by minimum-norm least squares, plus NRMSE scoring."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

NORMALIZATIONS = ("std", "range")


@dataclass(frozen=True)
class TargetStats:
    mean: float
    std: float
    min: float
    max: float

    @classmethod
    def from_targets(cls, targets: np.ndarray) -> "TargetStats":
        t = np.asarray(targets, dtype=float).ravel()
        return cls(float(t.mean()), float(t.std()), float(t.min()), float(t.max()))


@dataclass(frozen=True)
class ReadoutModel:
    w_out: np.ndarray  # (n_targets, n_state_rows)
    target_stats: TargetStats


def train(states: np.ndarray, targets: np.ndarray, rtol: float = 1e-10) -> ReadoutModel:
    """Solve w_out @ states ~= targets in the least-squares sense.

    Uses the SVD-based minimum-norm solution; singular values below
    rtol * sigma_max are treated as zero, so rank-deficient state matrices
    (silent or duplicated neurons) are handled without error.
    """
    states = np.asarray(states, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if states.ndim != 2:
        raise ValueError("states must be a 2-D matrix (rows x windows)")
    if targets.ndim == 1:
        targets = targets[np.newaxis, :]
    if targets.ndim != 2 or targets.shape[1] != states.shape[1]:
        raise ValueError("targets must supply one value per state column")
    if not (np.isfinite(states).all() and np.isfinite(targets).all()):
        raise ValueError("states and targets must be finite")
    solution, *_ = np.linalg.lstsq(states.T, targets.T, rcond=rtol)
    return ReadoutModel(w_out=solution.T, target_stats=TargetStats.from_targets(targets))


def predict(model: ReadoutModel, states: np.ndarray) -> np.ndarray:
    states = np.asarray(states, dtype=float)
    if states.ndim != 2 or states.shape[0] != model.w_out.shape[1]:
        raise ValueError(
            f"states rows ({states.shape[0] if states.ndim == 2 else 'n/a'}) "
            f"must match model width ({model.w_out.shape[1]})"
        )
    return model.w_out @ states


@dataclass(frozen=True)
class Score:
    rmse: float
    nrmse: float
    normalization: str


def nrmse(predictions, targets, normalization: str = "std") -> Score:
    """Root-mean-square error normalized by the target spread: population
    standard deviation ("std") or max-min ("range")."""
    p = np.asarray(predictions, dtype=float).ravel()
    t = np.asarray(targets, dtype=float).ravel()
    if p.shape != t.shape:
        raise ValueError("predictions and targets must have the same length")
    if p.size == 0:
        raise ValueError("cannot score empty sequences")
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    rmse = float(np.sqrt(np.mean((p - t) ** 2)))
    denom = float(t.std()) if normalization == "std" else float(t.max() - t.min())
    if denom == 0.0:
        raise ValueError("targets have zero spread; NRMSE undefined")
    return Score(rmse=rmse, nrmse=rmse / denom, normalization=normalization)


def model_to_dict(model: ReadoutModel) -> dict:
    return {
        "w_out": [[float(x) for x in row] for row in model.w_out],
        "target_stats": {
            "mean": model.target_stats.mean,
            "std": model.target_stats.std,
            "min": model.target_stats.min,
            "max": model.target_stats.max,
        },
    }


def model_from_dict(data: dict) -> ReadoutModel:
    expected = {"w_out", "target_stats"}
    missing = expected - data.keys()
    unknown = data.keys() - expected
    if missing or unknown:
        raise ValueError(
            f"bad model payload: missing={sorted(missing)} unknown={sorted(unknown)}"
        )
    stats = data["target_stats"]
    return ReadoutModel(
        w_out=np.asarray(data["w_out"], dtype=float),
        target_stats=TargetStats(
            mean=float(stats["mean"]),
            std=float(stats["std"]),
            min=float(stats["min"]),
            max=float(stats["max"]),
        ),
    )


def save_model(model: ReadoutModel, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path) -> ReadoutModel:
    with open(path) as fh:
        return model_from_dict(json.load(fh))
