import json

import numpy as np
import pytest
import yaml

from synapse_cascade.cli import main
from synapse_cascade.traceio import read_trace


def write_yaml(path, data):
    path.write_text(yaml.safe_dump(data))
    return str(path)


def test_simulate_boundary_sample_count(tmp_path):
    cfg = write_yaml(
        tmp_path / "sim.yaml",
        {
            "chain": {"capacities": [1.0], "couplings": []},
            "schedule": {"amplitude": 1.0, "frequency": 1.0, "on_fraction": 0.5, "count": 80},
        },
    )
    out = tmp_path / "run"
    assert main(["simulate", "-c", cfg, "-o", str(out)]) == 0
    trace = read_trace(out / "trace.csv")
    assert len(trace) == 161  # one initial + two per pulse
    assert (out / "manifest.json").exists()


def test_protocol_relaxation_recovery(tmp_path):
    out = tmp_path / "relax"
    assert main(["protocol", "relaxation", "-o", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["recovery_fraction"] == pytest.approx(0.41, abs=0.02)


def test_protocol_recover_asymmetry(tmp_path):
    out = tmp_path / "rec"
    assert main(["protocol", "recover", "-o", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["forward_pulses"] == 80
    assert report["reverse_pulses"] > 80


def test_fit_roundtrip_via_cli(tmp_path):
    relax_out = tmp_path / "trace_run"
    relax_cfg = write_yaml(
        tmp_path / "relax.yaml",
        {
            "recipe": "relaxation",
            "chain": {"capacities": [1.0, 1.0], "couplings": [2.0**-7.5]},
        },
    )
    assert main(["protocol", "-c", relax_cfg, "-o", str(relax_out)]) == 0
    fit_cfg = write_yaml(
        tmp_path / "fit.yaml",
        {
            "trace": str(relax_out / "trace.csv"),
            "schedules": [
                {"amplitude": 3.0, "frequency": 1.0, "on_fraction": 1.0, "count": 1}
            ],
            "capacities": [1.0, 1.0],
            "couplings": [None],
            "bounds": [[-10.0, -3.0]],
        },
    )
    out = tmp_path / "fit_run"
    assert main(["fit", "-c", fit_cfg, "-o", str(out)]) == 0
    result = json.loads((out / "fit.json").read_text())
    assert result["unknowns"] == ["g12"]
    assert result["estimates_log2"][0] == pytest.approx(-7.5, abs=0.05)


def bench_config(tmp_path, **over):
    data = {
        "neurons": 32,
        "model": {"preset": 2},
        "stream_length": 60,
        "probe_ages": [0, 10, 40],
        "trials": 4,
        "n_null": 110,
        "seed": 7,
    }
    data.update(over)
    return write_yaml(tmp_path / "bench.yaml", data)


def test_bench_deterministic_outputs(tmp_path):
    cfg = bench_config(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["bench", "-c", cfg, "-o", str(a)]) == 0
    assert main(["bench", "-c", cfg, "-o", str(b)]) == 0
    assert (a / "metrics.csv").read_bytes() == (b / "metrics.csv").read_bytes()


def test_bench_replay_and_threads_match(tmp_path):
    cfg = bench_config(tmp_path)
    a = tmp_path / "a"
    assert main(["bench", "-c", cfg, "-o", str(a)]) == 0
    b = tmp_path / "replayed"
    assert main(["replay", "--manifest", str(a / "manifest.json"), "-o", str(b)]) == 0
    assert (a / "metrics.csv").read_bytes() == (b / "metrics.csv").read_bytes()
    c = tmp_path / "threaded"
    assert main(["bench", "-c", cfg, "-o", str(c), "--threads", "3"]) == 0
    assert (a / "metrics.csv").read_bytes() == (c / "metrics.csv").read_bytes()


def test_replay_simulate_and_plot(tmp_path):
    cfg = write_yaml(
        tmp_path / "sim.yaml",
        {
            "chain": {"capacities": [1.0, 1.0], "couplings": [0.015625]},
            "schedule": {"amplitude": 1.0, "frequency": 1.0, "on_fraction": 0.5, "count": 10},
        },
    )
    a = tmp_path / "a"
    assert main(["simulate", "-c", cfg, "-o", str(a)]) == 0
    b = tmp_path / "b"
    assert main(["replay", "--manifest", str(a / "manifest.json"), "-o", str(b)]) == 0
    assert (a / "trace.csv").read_bytes() == (b / "trace.csv").read_bytes()
    p1 = tmp_path / "p1"
    assert (
        main(["plot", "--csv", str(a / "trace.csv"), "--columns", "u1,u2", "-o", str(p1)])
        == 0
    )
    p2 = tmp_path / "p2"
    assert main(["replay", "--manifest", str(p1 / "manifest.json"), "-o", str(p2)]) == 0
    assert (p1 / "chart.svg").read_bytes() == (p2 / "chart.svg").read_bytes()


def test_usage_errors_exit_1(tmp_path, capsys):
    assert main(["simulate", "--config", str(tmp_path / "missing.yaml")]) == 1
    assert main(["--bogus-flag"]) == 1
    assert main(["simulate", "-c", write_yaml(tmp_path / "bad.yaml", {"chain": None})]) == 1
    bad_yaml = tmp_path / "broken.yaml"
    bad_yaml.write_text("chain: [unclosed\n")
    assert main(["simulate", "-c", str(bad_yaml)]) == 1
    err = capsys.readouterr().err
    assert all(line.startswith("synapse-cascade:") for line in err.strip().splitlines())


def test_numerical_failures_exit_2(tmp_path):
    garbled = tmp_path / "trace.csv"
    garbled.write_text("time,u1,pulse_index,phase\n0.0,zap,0,init\n")
    fit_cfg = write_yaml(
        tmp_path / "fit.yaml",
        {
            "trace": str(garbled),
            "schedules": [{"amplitude": 1.0, "count": 1}],
            "capacities": [1.0, 1.0],
            "couplings": [None],
            "bounds": [[-10, -3]],
        },
    )
    assert main(["fit", "-c", fit_cfg, "-o", str(tmp_path / "f")]) == 2


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "simulate" in capsys.readouterr().out
