"""CSV serialization of weight traces.

Header is `time,u1,...,uK,pulse_index,phase`.  Times are printed with 12
significant digits, promoted to the full shortest-exact form whenever 12
digits would not read back to the identical float, so read(write(x)) is
lossless.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .errors import IngestionError, InvalidInputError
from .protocol import WeightTrace


def format_value(x: float) -> str:
    s = format(x, ".12g")
    return s if float(s) == x else repr(x)


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def write_trace(trace: WeightTrace, path) -> None:
    k = trace.u.shape[1]
    lines = ["time," + ",".join(f"u{i + 1}" for i in range(k)) + ",pulse_index,phase"]
    for i in range(len(trace)):
        u_cols = ",".join(format_value(float(v)) for v in trace.u[i])
        lines.append(
            f"{format_value(float(trace.times[i]))},{u_cols},"
            f"{int(trace.pulse_index[i])},{trace.phase[i]}"
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_trace(path) -> WeightTrace:
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise IngestionError(f"cannot read trace {path}: {exc}") from exc
    if not lines:
        raise IngestionError(f"{path}: empty file (missing header)")
    header = lines[0].split(",")
    if (
        len(header) < 4
        or header[0] != "time"
        or header[-2] != "pulse_index"
        or header[-1] != "phase"
    ):
        raise IngestionError(f"{path}: unexpected header {lines[0]!r}")
    k = len(header) - 3
    if [h for h in header[1 : 1 + k]] != [f"u{i + 1}" for i in range(k)]:
        raise IngestionError(f"{path}: unexpected level columns in {lines[0]!r}")
    times, us, pulses, phases = [], [], [], []
    for ln, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(header):
            raise IngestionError(f"{path}:{ln}: expected {len(header)} fields")
        try:
            times.append(float(parts[0]))
            us.append([float(v) for v in parts[1 : 1 + k]])
            pulses.append(int(parts[1 + k]))
        except ValueError as exc:
            raise IngestionError(f"{path}:{ln}: {exc}") from exc
        phases.append(parts[-1])
    try:
        return WeightTrace(
            times=np.asarray(times, dtype=float),
            u=np.asarray(us, dtype=float).reshape(len(times), k),
            pulse_index=np.asarray(pulses, dtype=np.int64),
            phase=tuple(phases),
        )
    except InvalidInputError as exc:
        raise IngestionError(f"{path}: {exc}") from exc
