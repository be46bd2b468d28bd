import numpy as np
import pytest

from synapse_cascade import (
    ChainConfig,
    DriveRule,
    PulseSchedule,
    apply_pulse_train,
    build_propagator,
    zero_state,
)
from synapse_cascade.errors import IngestionError
from synapse_cascade.protocol import WeightTrace
from synapse_cascade.traceio import format_value, read_trace, write_trace


def random_trace(rng, n=40, k=3):
    times = np.cumsum(rng.uniform(0.01, 2.0, n))
    return WeightTrace(
        times=times,
        u=rng.normal(size=(n, k)),
        pulse_index=np.arange(n, dtype=np.int64),
        phase=tuple(rng.choice(["on", "off"]) for _ in range(n)),
    )


def test_roundtrip_random_traces(tmp_path):
    rng = np.random.default_rng(1)
    for i in range(5):
        tr = random_trace(rng)
        path = tmp_path / f"t{i}.csv"
        write_trace(tr, path)
        back = read_trace(path)
        assert np.max(np.abs(back.times - tr.times)) <= 1e-12
        assert np.max(np.abs(back.u - tr.u)) <= 1e-12
        assert np.array_equal(back.pulse_index, tr.pulse_index)
        assert back.phase == tr.phase


def test_header_and_column_count(tmp_path):
    cfg = ChainConfig([1.0, 1.0, 2.0, 4.0], [2.0**-6, 2.0**-7, 2.0**-8])
    tr = apply_pulse_train(
        build_propagator(cfg),
        zero_state(cfg),
        PulseSchedule(1.0, 1.0, 0.5, 3),
        DriveRule.constant(),
    )
    path = tmp_path / "k4.csv"
    write_trace(tr, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "time,u1,u2,u3,u4,pulse_index,phase"
    assert all(len(ln.split(",")) == 7 for ln in lines[1:])


def test_empty_trace_is_header_only(tmp_path):
    tr = WeightTrace(
        times=np.empty(0),
        u=np.empty((0, 2)),
        pulse_index=np.empty(0, dtype=np.int64),
        phase=(),
    )
    path = tmp_path / "empty.csv"
    write_trace(tr, path)
    assert path.read_text() == "time,u1,u2,pulse_index,phase\n"
    back = read_trace(path)
    assert len(back) == 0


def test_malformed_rows_report_line_number(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("time,u1,pulse_index,phase\n0.0,0.0,0,init\nnot-a-number,1.0,1,on\n")
    with pytest.raises(IngestionError, match=":3"):
        read_trace(path)
    short = tmp_path / "short.csv"
    short.write_text("time,u1,pulse_index,phase\n0.0,0.0\n")
    with pytest.raises(IngestionError, match=":2"):
        read_trace(short)
    nohead = tmp_path / "nohead.csv"
    nohead.write_text("a,b\n1,2\n")
    with pytest.raises(IngestionError):
        read_trace(nohead)


def test_format_value_exact_roundtrip():
    rng = np.random.default_rng(3)
    for x in rng.normal(scale=1e4, size=200):
        assert float(format_value(float(x))) == float(x)
    for x in (0.1, 1.0 / 3.0, 2.0**-7.5, 1e-300, 12345.6789012345):
        assert float(format_value(x)) == x
