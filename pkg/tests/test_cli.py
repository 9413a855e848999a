import csv
import json
import subprocess
import sys

import pytest

from spikerc.cli import main
from spikerc.timeseries import read_series_csv
from spikerc.topology import load_network


def small_config(**extra):
    cfg = {
        "series": {"kind": "henon", "n_samples": 60},
        "network": {"family": "handpicked_ring", "m_in": 4},
        "encoding": {"m_in": 4, "i0": 100.0, "delta": 1.0},
        "simulation": {"model": "continuous", "steps_per_window": 50},
        "split": {"train_fraction": 0.8, "washout": 5},
        "seed": 1,
    }
    cfg.update(extra)
    return cfg


def write_config(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


def run_cli(*argv):
    return main([str(a) for a in argv])


def test_gen_series_writes_config_echo_and_series(tmp_path):
    path = write_config(tmp_path, small_config())
    out = tmp_path / "out"
    assert run_cli("gen-series", "--config", path, "--out", out) == 0
    series = read_series_csv(out / "series.csv")
    assert len(series) == 60
    assert series[0] == 1.0
    assert series[1] == pytest.approx(-0.4)
    assert series[2] == pytest.approx(1.076)
    echoed = json.loads((out / "config.json").read_text())
    assert echoed["series"]["n_samples"] == 60
    assert echoed["simulation"]["tau_m"] == 1.0  # defaults are filled in


def test_build_net_writes_loadable_network(tmp_path):
    path = write_config(tmp_path, small_config())
    out = tmp_path / "out"
    assert run_cli("build-net", "--config", path, "--out", out) == 0
    net = load_network(out / "network.json")
    assert net.n_neurons == 8
    assert net.input_neurons == (0, 1, 2, 3)


def test_run_produces_complete_bundle(tmp_path):
    path = write_config(tmp_path, small_config())
    out = tmp_path / "out"
    assert run_cli("run", "--config", path, "--out", out) == 0
    for name in (
        "config.json",
        "network.json",
        "predictions.csv",
        "attractor.csv",
        "score.json",
        "spike_stats.json",
    ):
        assert (out / name).exists(), name

    score = json.loads((out / "score.json").read_text())
    assert score["normalization"] == "std"
    assert score["nrmse"] == score["nrmse_std"]
    assert score["n_test"] == 12
    assert 0 < score["nrmse_range"] < score["nrmse_std"]

    with open(out / "predictions.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["index", "target", "prediction"]
    assert len(rows) == 13
    assert int(rows[1][0]) == 48  # first held-out sample

    with open(out / "attractor.csv", newline="") as fh:
        pairs = list(csv.reader(fh))
    assert pairs[0] == ["y_n", "y_n_plus_1"]
    assert len(pairs) == 12  # consecutive prediction pairs
    assert pairs[1][1] == pairs[2][0]

    stats = json.loads((out / "spike_stats.json").read_text())
    assert stats["total_spikes"] > 0


def bundle_bytes(out, names):
    return {name: (out / name).read_bytes() for name in names}


def test_rerun_and_config_echo_are_byte_identical(tmp_path):
    names = ("config.json", "network.json", "predictions.csv", "attractor.csv", "score.json")
    path = write_config(tmp_path, small_config())
    out1, out2, out3 = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert run_cli("run", "--config", path, "--out", out1) == 0
    assert run_cli("run", "--config", path, "--out", out2) == 0
    assert bundle_bytes(out1, names) == bundle_bytes(out2, names)
    # the echoed config reproduces the run exactly
    assert run_cli("run", "--config", out1 / "config.json", "--out", out3) == 0
    assert bundle_bytes(out1, names) == bundle_bytes(out3, names)


def test_seed_and_norm_overrides(tmp_path):
    cfg = small_config(network={"family": "erdos_renyi", "m": 20, "p": 0.1, "n_inputs": 4})
    path = write_config(tmp_path, cfg)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run_cli("run", "--config", path, "--out", out1, "--seed", 1) == 0
    assert run_cli("run", "--config", path, "--out", out2, "--seed", 2, "--nrmse-norm", "range") == 0
    net1 = load_network(out1 / "network.json")
    net2 = load_network(out2 / "network.json")
    assert net1 != net2  # the seed reshuffles the random topology
    score2 = json.loads((out2 / "score.json").read_text())
    assert score2["normalization"] == "range"
    assert score2["nrmse"] == score2["nrmse_range"]
    assert json.loads((out2 / "config.json").read_text())["seed"] == 2


def test_unknown_config_key_is_named_and_exits_one(tmp_path, capsys):
    cfg = small_config()
    cfg["series"]["mystery_knob"] = 3
    path = write_config(tmp_path, cfg)
    assert run_cli("run", "--config", path, "--out", tmp_path / "out") == 1
    assert "mystery_knob" in capsys.readouterr().err


def test_missing_required_key_exits_one(tmp_path, capsys):
    cfg = small_config()
    del cfg["network"]["m_in"]
    path = write_config(tmp_path, cfg)
    assert run_cli("run", "--config", path, "--out", tmp_path / "out") == 1
    assert "m_in" in capsys.readouterr().err


def test_width_mismatch_between_encoder_and_network_exits_one(tmp_path, capsys):
    cfg = small_config()
    cfg["encoding"]["m_in"] = 5
    path = write_config(tmp_path, cfg)
    assert run_cli("run", "--config", path, "--out", tmp_path / "out") == 1
    assert "input count" in capsys.readouterr().err


def test_runtime_failure_exits_two(tmp_path, capsys):
    cfg = small_config()
    cfg["split"]["washout"] = 47  # validates, but leaves no training targets
    path = write_config(tmp_path, cfg)
    assert run_cli("run", "--config", path, "--out", tmp_path / "out") == 2
    assert "pipeline error" in capsys.readouterr().err


def test_bad_json_and_missing_file_exit_one(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run_cli("run", "--config", bad, "--out", tmp_path / "out") == 1
    assert run_cli("run", "--config", tmp_path / "absent.json", "--out", tmp_path / "out") == 1
    capsys.readouterr()


def test_unknown_flag_and_command_exit_one(tmp_path, capsys):
    path = write_config(tmp_path, small_config())
    assert run_cli("run", "--config", path, "--out", tmp_path / "out", "--bogus") == 1
    assert run_cli("frobnicate", "--config", path, "--out", tmp_path / "out") == 1
    capsys.readouterr()


def test_metalearn_bundle_and_resume_equivalence(tmp_path):
    cfg = small_config(metalearn={"n_iterations": 4, "temperature_scale": 50.0})
    path = write_config(tmp_path, cfg)

    straight = tmp_path / "straight"
    assert run_cli("metalearn", "--config", path, "--out", straight) == 0
    for name in (
        "config.json",
        "initial_network.json",
        "final_network.json",
        "best_network.json",
        "trace.csv",
        "checkpoint.json",
        "metalearn.json",
    ):
        assert (straight / name).exists(), name
    summary = json.loads((straight / "metalearn.json").read_text())
    assert summary["iterations_run"] == 4
    assert summary["final_internal_edges"] <= summary["initial_internal_edges"]
    assert (straight / "trace.csv").read_text().count("\n") == 5

    paused = tmp_path / "paused"
    assert run_cli("metalearn", "--config", path, "--out", paused, "--stop-after", "2") == 0
    assert json.loads((paused / "metalearn.json").read_text())["iterations_run"] == 2

    resumed = tmp_path / "resumed"
    assert (
        run_cli(
            "metalearn", "--config", path, "--out", resumed,
            "--resume", paused / "checkpoint.json",
        )
        == 0
    )
    for name in ("final_network.json", "best_network.json", "trace.csv", "metalearn.json", "checkpoint.json"):
        assert (resumed / name).read_bytes() == (straight / name).read_bytes(), name


def test_metalearn_iteration_override(tmp_path):
    cfg = small_config(metalearn={"n_iterations": 50, "temperature_scale": 50.0})
    path = write_config(tmp_path, cfg)
    out = tmp_path / "out"
    assert run_cli("metalearn", "--config", path, "--out", out, "--n-iterations", "3") == 0
    assert json.loads((out / "metalearn.json").read_text())["iterations_run"] == 3


def test_sweep_writes_per_seed_rows_and_summary(tmp_path):
    cfg = small_config(network={"family": "erdos_renyi", "m": 20, "p": 0.1, "n_inputs": 4})
    path = write_config(tmp_path, cfg)
    out = tmp_path / "out"
    assert run_cli("sweep", "--config", path, "--out", out, "--seeds", "2") == 0
    with open(out / "sweep.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["seed", "nrmse_std", "nrmse_range"]
    assert [r[0] for r in rows[1:]] == ["1", "2"]
    summary = json.loads((out / "sweep.json").read_text())
    assert summary["n_seeds"] == 2
    assert summary["mean_nrmse_std"] > 0


def test_module_entry_point_subprocess(tmp_path):
    path = write_config(tmp_path, small_config())
    out = tmp_path / "out"
    proc = subprocess.run(
        [sys.executable, "-m", "spikerc", "run", "--config", str(path), "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (out / "score.json").exists()
