"""Command-line interface: generate series, build networks, run the
prediction pipeline, run the annealing search, and sweep seeds.

Exit codes: 0 success, 1 invalid configuration, 2 pipeline failure.
All outputs are deterministic functions of (config, seed): no timestamps,
sorted JSON keys, fixed float formatting.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import metalearn as ml
from . import timeseries as ts
from . import topology
from .encoding import build_schedule  # noqa: F401  (re-exported for scripting)
from .engine import ContinuousSimConfig, FixedPointSimConfig, spike_stats
from .neurons import ContinuousLifParams, FixedPointLifParams
from .pipeline import SplitProtocol, TaskDefinition, run_task


class ConfigError(ValueError):
    """Raised for malformed configuration; maps to exit code 1."""


def _check_keys(block: dict, required: set, optional: set, where: str) -> None:
    if not isinstance(block, dict):
        raise ConfigError(f"{where}: expected an object")
    missing = required - block.keys()
    if missing:
        raise ConfigError(f"{where}: missing key {sorted(missing)[0]!r}")
    unknown = block.keys() - required - optional
    if unknown:
        raise ConfigError(f"{where}: unknown key {sorted(unknown)[0]!r}")


def _number(block: dict, key: str, where: str, default=None, kind=float):
    value = block.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number")
    if kind is int and int(value) != value:
        raise ConfigError(f"{where}.{key}: expected an integer")
    return kind(value)


# ---------------------------------------------------------------------------
# config -> effective config (defaults resolved, strict keys)

_SERIES_DEFAULTS = {
    "henon": {"n_samples": 1000, "a": 1.4, "b": 0.3, "x0": 0.0, "y0": 0.0},
    "mackey_glass": {
        "n_samples": 1000,
        "beta": 0.2,
        "gamma": 0.1,
        "eta": 10.0,
        "tau_delay": 18.0,
        "euler_dt": 0.15,
        "sample_interval": 3.0,
        "history_init": 1.2,
    },
}

_NETWORK_KEYS = {
    "erdos_renyi": ({"m", "p"}, {"n_inputs", "input_placement"}),
    "ring_small_world": ({"m", "k_neighbors", "p_add"}, {"n_inputs", "input_placement"}),
    "handpicked_ring": ({"m_in"}, set()),
    "smallworld_with_input_layer": ({"m_in", "k_neighbors", "p_add"}, set()),
    "cluster_chains": ({"n_chains", "clusters_per_chain", "cluster_size"}, set()),
    "linear_chains": ({"m_in", "chain_len"}, set()),
    "file": ({"path"}, set()),
}

_LIF_INT_KEYS = ("du", "dv", "vth_mant", "bias_mant")


def effective_config(raw: dict, overrides: dict) -> dict:
    """Validate the raw JSON document, fill defaults, apply CLI overrides.
    The result re-parses to itself, so an echoed config reproduces the run."""
    _check_keys(
        raw,
        {"series", "network", "encoding", "simulation"},
        {"split", "nrmse_norm", "seed", "metalearn", "sweep"},
        "config",
    )
    cfg: dict = {}

    series = raw["series"]
    kind = series.get("kind") if isinstance(series, dict) else None
    if kind not in _SERIES_DEFAULTS:
        raise ConfigError(f"series.kind must be one of {sorted(_SERIES_DEFAULTS)}")
    defaults = _SERIES_DEFAULTS[kind]
    _check_keys(series, {"kind"}, set(defaults), "series")
    out_series = {"kind": kind}
    for key, default in defaults.items():
        want_int = key == "n_samples"
        out_series[key] = _number(series, key, "series", default, int if want_int else float)
    if out_series["n_samples"] < 10:
        raise ConfigError("series.n_samples must be >= 10")
    cfg["series"] = out_series

    network = raw["network"]
    family = network.get("family") if isinstance(network, dict) else None
    if family not in _NETWORK_KEYS:
        raise ConfigError(f"network.family must be one of {sorted(_NETWORK_KEYS)}")
    required, optional = _NETWORK_KEYS[family]
    _check_keys(network, required | {"family"}, optional, "network")
    out_net = {"family": family}
    for key in sorted(required | (optional & network.keys())):
        if key in ("p", "p_add"):
            out_net[key] = _number(network, key, "network")
        elif key == "path":
            out_net[key] = str(network[key])
        elif key == "input_placement":
            if network[key] not in ("first_m", "every_other"):
                raise ConfigError("network.input_placement must be first_m or every_other")
            out_net[key] = network[key]
        else:
            out_net[key] = _number(network, key, "network", kind=int)
    if family == "erdos_renyi":
        out_net.setdefault("n_inputs", 0)
        out_net.setdefault("input_placement", "first_m")
    if family == "ring_small_world":
        out_net.setdefault("n_inputs", 0)
        out_net.setdefault("input_placement", "every_other")
    cfg["network"] = out_net

    encoding = raw["encoding"]
    _check_keys(encoding, {"m_in"}, {"i0", "delta"}, "encoding")
    cfg["encoding"] = {
        "m_in": _number(encoding, "m_in", "encoding", kind=int),
        "i0": _number(encoding, "i0", "encoding", 100.0),
        "delta": _number(encoding, "delta", "encoding", 1.0),
    }

    sim = raw["simulation"]
    model = sim.get("model") if isinstance(sim, dict) else None
    if model == "continuous":
        _check_keys(
            sim,
            {"model"},
            {"tau_m", "v_thresh", "v_rest", "v_reset", "r_membrane", "dt",
             "steps_per_window", "payload", "spike_delay"},
            "simulation",
        )
        cfg["simulation"] = {
            "model": "continuous",
            "tau_m": _number(sim, "tau_m", "simulation", 1.0),
            "v_thresh": _number(sim, "v_thresh", "simulation", 5.0),
            "v_rest": _number(sim, "v_rest", "simulation", 0.0),
            "v_reset": _number(sim, "v_reset", "simulation", 0.0),
            "r_membrane": _number(sim, "r_membrane", "simulation", 1.0),
            "dt": _number(sim, "dt", "simulation", 0.005),
            "steps_per_window": _number(sim, "steps_per_window", "simulation", 200, int),
            "payload": _number(sim, "payload", "simulation", 2.0),
            "spike_delay": _number(sim, "spike_delay", "simulation", 0.3),
        }
    elif model == "fixed_point":
        _check_keys(
            sim,
            {"model", "input_lif", "reservoir_lif", "output_lif"},
            {"steps_per_window", "payload", "spike_delay"},
            "simulation",
        )
        out_sim = {
            "model": "fixed_point",
            "steps_per_window": _number(sim, "steps_per_window", "simulation", 90, int),
            "payload": _number(sim, "payload", "simulation", 8, int),
            "spike_delay": _number(sim, "spike_delay", "simulation", 0.0),
        }
        if out_sim["spike_delay"] != 0.0:
            raise ConfigError("simulation.spike_delay must be 0 for the fixed_point model")
        for layer in ("input_lif", "reservoir_lif", "output_lif"):
            block = sim[layer]
            _check_keys(block, {"du", "dv", "vth_mant"}, {"bias_mant"}, f"simulation.{layer}")
            out_sim[layer] = {
                key: _number(block, key, f"simulation.{layer}", 0, int)
                for key in _LIF_INT_KEYS
            }
        cfg["simulation"] = out_sim
    else:
        raise ConfigError("simulation.model must be continuous or fixed_point")

    split = raw.get("split", {})
    _check_keys(split, set(), {"train_fraction", "washout"}, "split")
    cfg["split"] = {
        "train_fraction": _number(split, "train_fraction", "split", 0.8),
        "washout": _number(split, "washout", "split", 20, int),
    }

    norm = overrides.get("nrmse_norm") or raw.get("nrmse_norm", "std")
    if norm not in ("std", "range"):
        raise ConfigError("nrmse_norm must be std or range")
    cfg["nrmse_norm"] = norm

    seed = overrides.get("seed")
    if seed is None:
        seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed must be a non-negative integer")
    cfg["seed"] = seed

    meta = raw.get("metalearn", {})
    _check_keys(meta, set(), {"n_iterations", "temperature_scale"}, "metalearn")
    cfg["metalearn"] = {
        "n_iterations": _number(meta, "n_iterations", "metalearn", 1000, int),
        "temperature_scale": _number(meta, "temperature_scale", "metalearn", 50.0),
    }

    sweep = raw.get("sweep", {})
    _check_keys(sweep, set(), {"n_seeds"}, "sweep")
    cfg["sweep"] = {"n_seeds": _number(sweep, "n_seeds", "sweep", 6, int)}
    return cfg


# ---------------------------------------------------------------------------
# effective config -> domain objects

def build_series(cfg: dict) -> np.ndarray:
    block = cfg["series"]
    if block["kind"] == "henon":
        params = ts.HenonParams(a=block["a"], b=block["b"], x0=block["x0"], y0=block["y0"])
        return ts.gen_henon(params, block["n_samples"])
    params = ts.MackeyGlassParams(
        beta=block["beta"],
        gamma=block["gamma"],
        eta=block["eta"],
        tau_delay=block["tau_delay"],
        euler_dt=block["euler_dt"],
        sample_interval=block["sample_interval"],
        history_init=block["history_init"],
    )
    return ts.gen_mackey_glass(params, block["n_samples"])


def build_network(cfg: dict) -> topology.ReservoirNetwork:
    block = cfg["network"]
    sim = cfg["simulation"]
    payload = float(sim["payload"])
    delay = float(sim["spike_delay"])
    seed = cfg["seed"]
    family = block["family"]
    try:
        if family == "erdos_renyi":
            return topology.erdos_renyi(
                block["m"], block["p"], seed,
                n_inputs=block["n_inputs"], input_placement=block["input_placement"],
                payload=payload, delay=delay,
            )
        if family == "ring_small_world":
            return topology.ring_small_world(
                block["m"], block["k_neighbors"], block["p_add"], seed,
                n_inputs=block["n_inputs"], input_placement=block["input_placement"],
                payload=payload, delay=delay,
            )
        if family == "handpicked_ring":
            return topology.handpicked_ring(block["m_in"], payload=payload, delay=delay)
        if family == "smallworld_with_input_layer":
            inner = topology.ring_small_world(
                block["m_in"], block["k_neighbors"], block["p_add"], seed,
                payload=payload, delay=delay,
            )
            return topology.wrap_with_input_layer(inner, payload=payload, delay=delay)
        if family == "cluster_chains":
            return topology.cluster_chains(
                block["n_chains"], block["clusters_per_chain"], block["cluster_size"],
                payload=payload, delay=delay,
            )
        if family == "linear_chains":
            return topology.linear_chains(
                block["m_in"], block["chain_len"], payload=payload, delay=delay,
            )
        return topology.load_network(block["path"])
    except ValueError as exc:
        raise ConfigError(f"network: {exc}") from exc


def build_sim_config(cfg: dict):
    sim = cfg["simulation"]
    if sim["model"] == "continuous":
        try:
            lif = ContinuousLifParams(
                tau_m=sim["tau_m"],
                v_thresh=sim["v_thresh"],
                v_rest=sim["v_rest"],
                v_reset=sim["v_reset"],
                r_membrane=sim["r_membrane"],
            )
            return ContinuousSimConfig(
                lif=lif,
                dt=sim["dt"],
                steps_per_window=sim["steps_per_window"],
                input_current=cfg["encoding"]["i0"],
            )
        except ValueError as exc:
            raise ConfigError(f"simulation: {exc}") from exc
    try:
        layers = {
            name: FixedPointLifParams(**sim[name])
            for name in ("input_lif", "reservoir_lif", "output_lif")
        }
        return FixedPointSimConfig(
            input_lif=layers["input_lif"],
            reservoir_lif=layers["reservoir_lif"],
            output_lif=layers["output_lif"],
            steps_per_window=sim["steps_per_window"],
            payload_mant=sim["payload"],
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"simulation: {exc}") from exc


def build_task(cfg: dict, series: np.ndarray, net: topology.ReservoirNetwork) -> TaskDefinition:
    m_in = cfg["encoding"]["m_in"]
    if m_in != len(net.input_neurons):
        raise ConfigError(
            f"encoding.m_in ({m_in}) must equal the network's input count "
            f"({len(net.input_neurons)})"
        )
    split = SplitProtocol(
        train_fraction=cfg["split"]["train_fraction"],
        washout=cfg["split"]["washout"],
    )
    return TaskDefinition(series=series, m_in=m_in, sim=build_sim_config(cfg), split=split)


# ---------------------------------------------------------------------------
# deterministic writers

def _write_json(data: dict, path: Path) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_predictions_csv(indices, targets, predictions, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["index", "target", "prediction"])
        for i, t, p in zip(indices, targets, predictions):
            writer.writerow([int(i), format(t, ".17g"), format(p, ".17g")])


def _write_attractor_csv(predictions, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["y_n", "y_n_plus_1"])
        for a, b in zip(predictions[:-1], predictions[1:]):
            writer.writerow([format(a, ".17g"), format(b, ".17g")])


def _score_payload(result, flag: str) -> dict:
    return {
        "normalization": flag,
        "nrmse": result.scores[flag].nrmse,
        "nrmse_std": result.scores["std"].nrmse,
        "nrmse_range": result.scores["range"].nrmse,
        "rmse": result.scores[flag].rmse,
        "n_test": len(result.predictions),
    }


# ---------------------------------------------------------------------------
# subcommands

def cmd_gen_series(cfg: dict, out: Path, args) -> None:
    series = build_series(cfg)
    _write_json(cfg, out / "config.json")
    ts.write_series_csv(series, out / "series.csv")


def cmd_build_net(cfg: dict, out: Path, args) -> None:
    net = build_network(cfg)
    _write_json(cfg, out / "config.json")
    topology.save_network(net, out / "network.json")


def cmd_run(cfg: dict, out: Path, args) -> None:
    series = build_series(cfg)
    net = build_network(cfg)
    task = build_task(cfg, series, net)
    result = run_task(net, task)
    flag = cfg["nrmse_norm"]
    _write_json(cfg, out / "config.json")
    topology.save_network(net, out / "network.json")
    _write_predictions_csv(result.target_indices, result.targets, result.predictions,
                           out / "predictions.csv")
    _write_attractor_csv(result.predictions, out / "attractor.csv")
    _write_json(_score_payload(result, flag), out / "score.json")
    stats = spike_stats(result.state_matrix)
    _write_json(
        {
            "total_spikes": stats.total_spikes,
            "per_neuron_mean": stats.per_neuron_mean,
            "silent_neurons": stats.silent_neurons,
        },
        out / "spike_stats.json",
    )


def cmd_metalearn(cfg: dict, out: Path, args) -> None:
    series = build_series(cfg)
    net = build_network(cfg)
    task = build_task(cfg, series, net)
    config = ml.AnnealConfig(
        n_iterations=cfg["metalearn"]["n_iterations"],
        rng_seed=cfg["seed"],
        temperature_scale=cfg["metalearn"]["temperature_scale"],
        nrmse_normalization=cfg["nrmse_norm"],
    )
    resume = ml.load_checkpoint(args.resume) if args.resume else None
    result = ml.anneal(
        net,
        task,
        config,
        resume_from=resume,
        stop_after=args.stop_after,
        checkpoint_path=out / "checkpoint.json",
        checkpoint_every=25,
    )
    _write_json(cfg, out / "config.json")
    topology.save_network(net, out / "initial_network.json")
    topology.save_network(result.final_network, out / "final_network.json")
    topology.save_network(result.best_network, out / "best_network.json")
    ml.write_trace_csv(result.records, out / "trace.csv")
    ml.save_checkpoint(result, config, out / "checkpoint.json")
    _write_json(
        {
            "initial_nrmse": result.initial_nrmse,
            "final_nrmse": result.final_nrmse,
            "best_nrmse": result.best_nrmse,
            "iterations_run": result.stopped_at,
            "initial_internal_edges": net.internal_edge_count(),
            "final_internal_edges": result.final_network.internal_edge_count(),
            "normalization": cfg["nrmse_norm"],
        },
        out / "metalearn.json",
    )


def cmd_sweep(cfg: dict, out: Path, args) -> None:
    n_seeds = args.seeds if args.seeds is not None else cfg["sweep"]["n_seeds"]
    if n_seeds < 1:
        raise ConfigError("sweep needs at least one seed")
    series = build_series(cfg)
    rows = []
    for offset in range(n_seeds):
        seed_cfg = dict(cfg)
        seed_cfg["seed"] = cfg["seed"] + offset
        net = build_network(seed_cfg)
        result = run_task(net, build_task(seed_cfg, series, net))
        rows.append(
            (seed_cfg["seed"], result.scores["std"].nrmse, result.scores["range"].nrmse)
        )
    _write_json(cfg, out / "config.json")
    with open(out / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["seed", "nrmse_std", "nrmse_range"])
        for seed, n_std, n_range in rows:
            writer.writerow([seed, format(n_std, ".17g"), format(n_range, ".17g")])
    stds = [r[1] for r in rows]
    ranges = [r[2] for r in rows]
    _write_json(
        {
            "n_seeds": n_seeds,
            "mean_nrmse_std": float(np.mean(stds)),
            "std_nrmse_std": float(np.std(stds)),
            "mean_nrmse_range": float(np.mean(ranges)),
            "std_nrmse_range": float(np.std(ranges)),
        },
        out / "sweep.json",
    )


# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="spikerc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "gen-series": cmd_gen_series,
        "build-net": cmd_build_net,
        "run": cmd_run,
        "metalearn": cmd_metalearn,
        "sweep": cmd_sweep,
    }
    for name, fn in commands.items():
        p = sub.add_parser(name)
        p.set_defaults(fn=fn)
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--out", required=True, help="output directory (created if missing)")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--nrmse-norm", choices=["std", "range"], default=None,
                       dest="nrmse_norm", help="override NRMSE normalization")
        if name == "metalearn":
            p.add_argument("--stop-after", type=int, default=None,
                           help="pause the search after this iteration")
            p.add_argument("--resume", default=None,
                           help="checkpoint file to resume from")
            p.add_argument("--n-iterations", type=int, default=None,
                           dest="n_iterations", help="override metalearn.n_iterations")
        if name == "sweep":
            p.add_argument("--seeds", type=int, default=None,
                           help="number of consecutive seeds to sweep")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        with open(args.config) as fh:
            raw = json.load(fh)
        cfg = effective_config(
            raw, {"seed": args.seed, "nrmse_norm": args.nrmse_norm}
        )
        if getattr(args, "n_iterations", None) is not None:
            if args.n_iterations < 1:
                raise ConfigError("--n-iterations must be >= 1")
            cfg["metalearn"]["n_iterations"] = args.n_iterations
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
    except (ConfigError, json.JSONDecodeError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        args.fn(cfg, out, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"pipeline error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
