"""Architecture search by simulated annealing: repeatedly propose removing
one random internal edge, keep the candidate when a Metropolis draw at
temperature 1/(scale*n) accepts the NRMSE change."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .pipeline import TaskDefinition, run_task
from .topology import (
    ReservoirNetwork,
    network_from_dict,
    network_to_dict,
    remove_random_internal_edge,
)


@dataclass(frozen=True)
class AnnealConfig:
    n_iterations: int
    rng_seed: int
    temperature_scale: float = 50.0
    nrmse_normalization: str = "std"

    def __post_init__(self):
        if self.n_iterations < 1:
            raise ValueError("n_iterations must be >= 1")
        if self.temperature_scale <= 0:
            raise ValueError("temperature_scale must be positive")


@dataclass
class IterationRecord:
    iteration: int
    candidate_nrmse: float
    accepted: bool
    edge_count: int  # internal edges of the accepted state after the decision
    removed_src: int | None = None
    removed_dst: int | None = None
    note: str = ""


@dataclass
class AnnealResult:
    initial_nrmse: float
    final_network: ReservoirNetwork
    final_nrmse: float
    best_network: ReservoirNetwork
    best_nrmse: float
    records: list[IterationRecord] = field(default_factory=list)
    stopped_at: int = 0  # last iteration executed


def temperature(scale: float, n: int) -> float:
    """Cooling schedule T(n) = 1/(scale*n), first iteration n=1."""
    if n < 1:
        raise ValueError("iteration index starts at 1")
    if scale <= 0:
        raise ValueError("scale must be positive")
    return 1.0 / (scale * n)


def acceptance_probability(delta_f: float, t: float) -> float:
    """Metropolis rule: improvements always accepted, otherwise exp(-df/T)."""
    if delta_f <= 0:
        return 1.0
    return math.exp(-delta_f / t)


def evaluate_network(net: ReservoirNetwork, task: TaskDefinition, normalization: str = "std") -> float:
    """Held-out NRMSE of the full pipeline on the frozen task."""
    return run_task(net, task).scores[normalization].nrmse


def anneal(
    initial: ReservoirNetwork,
    task: TaskDefinition,
    config: AnnealConfig,
    *,
    resume_from: "dict | None" = None,
    stop_after: int | None = None,
    checkpoint_path=None,
    checkpoint_every: int = 25,
) -> AnnealResult:
    """Run (or resume) the search. Each iteration draws its randomness from a
    generator seeded by (rng_seed, iteration), so a checkpoint needs only the
    iteration counter and the current/best networks to resume exactly.
    """
    norm = config.nrmse_normalization
    if resume_from is not None:
        state = _state_from_checkpoint(resume_from, config)
        current, f_current = state["current"], state["current_nrmse"]
        result = AnnealResult(
            initial_nrmse=state["initial_nrmse"],
            final_network=current,
            final_nrmse=f_current,
            best_network=state["best"],
            best_nrmse=state["best_nrmse"],
            records=state["records"],
            stopped_at=state["iteration"],
        )
        start = state["iteration"] + 1
    else:
        current = initial
        f_current = evaluate_network(current, task, norm)
        result = AnnealResult(
            initial_nrmse=f_current,
            final_network=current,
            final_nrmse=f_current,
            best_network=current,
            best_nrmse=f_current,
        )
        start = 1

    last = config.n_iterations if stop_after is None else min(stop_after, config.n_iterations)
    for n in range(start, last + 1):
        if current.internal_edge_count() == 0:
            break
        rng = np.random.default_rng([config.rng_seed, n])
        candidate, removed = remove_random_internal_edge(current, rng)
        record = IterationRecord(
            iteration=n,
            candidate_nrmse=math.nan,
            accepted=False,
            edge_count=current.internal_edge_count(),
            removed_src=removed.src,
            removed_dst=removed.dst,
        )
        try:
            f_candidate = evaluate_network(candidate, task, norm)
        except Exception as exc:
            record.note = f"evaluation failed: {exc}"
        else:
            record.candidate_nrmse = f_candidate
            p = acceptance_probability(f_candidate - f_current, temperature(config.temperature_scale, n))
            if rng.random() <= p:
                current, f_current = candidate, f_candidate
                record.accepted = True
                record.edge_count = current.internal_edge_count()
                if f_candidate < result.best_nrmse:
                    result.best_network, result.best_nrmse = candidate, f_candidate
        result.records.append(record)
        result.final_network, result.final_nrmse = current, f_current
        result.stopped_at = n
        if checkpoint_path is not None and (n % checkpoint_every == 0 or n == last):
            save_checkpoint(result, config, checkpoint_path)
    return result


def write_trace_csv(records, path) -> None:
    """One row per iteration: iteration,candidate_nrmse,accepted,edge_count."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration", "candidate_nrmse", "accepted", "edge_count"])
        for rec in records:
            writer.writerow(
                [
                    rec.iteration,
                    format(rec.candidate_nrmse, ".17g"),
                    "true" if rec.accepted else "false",
                    rec.edge_count,
                ]
            )


def _record_to_dict(rec: IterationRecord) -> dict:
    return {
        "iteration": rec.iteration,
        "candidate_nrmse": None if math.isnan(rec.candidate_nrmse) else rec.candidate_nrmse,
        "accepted": rec.accepted,
        "edge_count": rec.edge_count,
        "removed_src": rec.removed_src,
        "removed_dst": rec.removed_dst,
        "note": rec.note,
    }


def _record_from_dict(data: dict) -> IterationRecord:
    return IterationRecord(
        iteration=int(data["iteration"]),
        candidate_nrmse=math.nan if data["candidate_nrmse"] is None else float(data["candidate_nrmse"]),
        accepted=bool(data["accepted"]),
        edge_count=int(data["edge_count"]),
        removed_src=data["removed_src"],
        removed_dst=data["removed_dst"],
        note=data.get("note", ""),
    )


def checkpoint_to_dict(result: AnnealResult, config: AnnealConfig) -> dict:
    return {
        "iteration": result.stopped_at,
        "rng_seed": config.rng_seed,
        "initial_nrmse": result.initial_nrmse,
        "current_network": network_to_dict(result.final_network),
        "current_nrmse": result.final_nrmse,
        "best_network": network_to_dict(result.best_network),
        "best_nrmse": result.best_nrmse,
        "records": [_record_to_dict(r) for r in result.records],
    }


def _state_from_checkpoint(data: dict, config: AnnealConfig) -> dict:
    if int(data["rng_seed"]) != config.rng_seed:
        raise ValueError("checkpoint was produced with a different rng_seed")
    return {
        "iteration": int(data["iteration"]),
        "initial_nrmse": float(data["initial_nrmse"]),
        "current": network_from_dict(data["current_network"]),
        "current_nrmse": float(data["current_nrmse"]),
        "best": network_from_dict(data["best_network"]),
        "best_nrmse": float(data["best_nrmse"]),
        "records": [_record_from_dict(r) for r in data["records"]],
    }


def save_checkpoint(result: AnnealResult, config: AnnealConfig, path) -> None:
    with open(path, "w") as fh:
        json.dump(checkpoint_to_dict(result, config), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_checkpoint(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
