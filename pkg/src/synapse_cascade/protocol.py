"""Write-pulse schedules and the device protocols built from them.

Covers the pulse-train evolution used everywhere (duty-cycled drive with
exact per-phase propagation), plus the three reusable experiment recipes:
potentiation/depression cycling, single-pulse relaxation, and
recover-to-baseline pulse counting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import (
    SOFT_SUBSTEPS,
    ChainState,
    DriveRule,
    Propagator,
    drive_strength,
    zero_state,
)
from .errors import InvalidInputError, NonConvergenceError


@dataclass(frozen=True)
class PulseSchedule:
    """A train of identical write pulses.

    amplitude: signed volts; frequency: pulses per second; on_fraction: the
    share of each period with the write voltage applied; count: pulses.
    """

    amplitude: float
    frequency: float
    on_fraction: float
    count: int

    def __post_init__(self):
        if not np.isfinite(self.amplitude):
            raise InvalidInputError("amplitude must be finite")
        if not (np.isfinite(self.frequency) and self.frequency > 0.0):
            raise InvalidInputError("frequency must be positive")
        if not (0.0 < self.on_fraction <= 1.0):
            raise InvalidInputError("on_fraction must be in (0, 1]")
        if int(self.count) != self.count or self.count < 1:
            raise InvalidInputError("count must be a positive integer")

    @property
    def period(self) -> float:
        return 1.0 / self.frequency

    @property
    def on_time(self) -> float:
        return self.on_fraction / self.frequency

    @property
    def duration(self) -> float:
        return self.count / self.frequency


@dataclass(frozen=True)
class WeightTrace:
    """Sampled chain states with per-sample pulse/phase annotations."""

    times: np.ndarray
    u: np.ndarray
    pulse_index: np.ndarray
    phase: tuple[str, ...]

    def __post_init__(self):
        t = self.times
        if t.ndim != 1 or self.u.ndim != 2 or self.u.shape[0] != t.size:
            raise InvalidInputError("trace arrays are inconsistent")
        if t.size and np.any(np.diff(t) <= 0.0):
            raise InvalidInputError("trace times must be strictly increasing")
        if not np.all(np.isfinite(self.u)):
            raise InvalidInputError("trace levels must be finite")

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def u1(self) -> np.ndarray:
        return self.u[:, 0]

    def final_state(self) -> ChainState:
        return ChainState(self.u[-1], float(self.times[-1]))


class _TraceBuilder:
    def __init__(self):
        self.times: list[float] = []
        self.us: list[np.ndarray] = []
        self.pulse: list[int] = []
        self.phase: list[str] = []

    def add(self, t: float, u: np.ndarray, pulse: int, phase: str) -> None:
        self.times.append(float(t))
        self.us.append(np.asarray(u, dtype=float))
        self.pulse.append(int(pulse))
        self.phase.append(phase)

    def build(self) -> WeightTrace:
        n = len(self.times)
        k = self.us[0].size if n else 0
        u = np.vstack(self.us) if n else np.empty((0, k))
        return WeightTrace(
            times=np.asarray(self.times, dtype=float),
            u=u,
            pulse_index=np.asarray(self.pulse, dtype=np.int64),
            phase=tuple(self.phase),
        )


def _on_phase(
    p: Propagator,
    u: np.ndarray,
    t0: float,
    duration: float,
    amplitude: float,
    rule: DriveRule,
    samples: int,
    sink: _TraceBuilder | None,
    pulse: int,
):
    """Advance through one driven phase, recording `samples` interior points."""
    if rule.mode == "constant":
        s = drive_strength(rule, 0.0, amplitude)
        last = u
        for i in range(1, samples + 1):
            dt = duration * i / samples
            last = p.driven(u, s, dt)
            if sink is not None:
                sink.add(t0 + dt, last, pulse, "on")
        return last
    # Soft-bounded drive: freeze s over short slices and apply the exact
    # propagator per slice; conservation stays exact between injections.
    n_sub = SOFT_SUBSTEPS
    sub = duration / n_sub
    record_at = {round(i * n_sub / samples) for i in range(1, samples + 1)}
    cur = u
    for j in range(1, n_sub + 1):
        s = drive_strength(rule, float(cur[0]), amplitude)
        cur = p.driven(cur, s, sub)
        if sink is not None and j in record_at:
            sink.add(t0 + duration * j / n_sub, cur, pulse, "on")
    return cur


def _train_into(
    sink: _TraceBuilder,
    p: Propagator,
    state: ChainState,
    schedule: PulseSchedule,
    rule: DriveRule,
    samples_per_phase: int,
    pulse_offset: int,
) -> ChainState:
    t_on = schedule.on_time
    t_off = schedule.period - t_on
    u = state.u
    t = state.time
    for k in range(1, schedule.count + 1):
        pulse = pulse_offset + k
        u = _on_phase(p, u, t, t_on, schedule.amplitude, rule, samples_per_phase, sink, pulse)
        t += t_on
        if t_off > 0.0:
            last = u
            for i in range(1, samples_per_phase + 1):
                dt = t_off * i / samples_per_phase
                last = p.free(u, dt)
                sink.add(t + dt, last, pulse, "off")
            u = last
            t += t_off
    return ChainState(u, t)


def apply_pulse_train(
    p: Propagator,
    state: ChainState,
    schedule: PulseSchedule,
    rule: DriveRule,
    samples_per_phase: int = 1,
) -> WeightTrace:
    """Evolve a chain through a pulse schedule, sampling at phase boundaries.

    Each pulse contributes one sample at the end of its on phase and one at
    the end of its off phase (zero-length off phases are skipped); raising
    samples_per_phase adds evenly spaced intra-phase samples.  The final
    sample lands exactly at count/frequency after the start.
    """
    if samples_per_phase < 1:
        raise InvalidInputError("samples_per_phase must be >= 1")
    sink = _TraceBuilder()
    sink.add(state.time, state.u, 0, "init")
    _train_into(sink, p, state, schedule, rule, samples_per_phase, 0)
    return sink.build()


def run_relaxation(
    p: Propagator,
    rule: DriveRule,
    pulse: PulseSchedule,
    observe: float,
    points: int = 240,
    initial_state: ChainState | None = None,
) -> WeightTrace:
    """One driven on-phase, then free evolution for `observe` seconds.

    Post-pulse samples are logarithmically spaced so both the fast and the
    slow relaxation modes are resolved.
    """
    if pulse.count != 1:
        raise InvalidInputError("relaxation uses a single pulse (count=1)")
    if observe < 0.0:
        raise InvalidInputError("observe must be non-negative")
    if points < 200:
        raise InvalidInputError("relaxation traces need at least 200 points")
    state = initial_state if initial_state is not None else zero_state(p.config)
    sink = _TraceBuilder()
    sink.add(state.time, state.u, 0, "init")
    t_on = pulse.on_time
    u = _on_phase(p, state.u, state.time, t_on, pulse.amplitude, rule, 1, sink, 1)
    t_end = state.time + t_on
    if observe > 0.0:
        offsets = np.logspace(np.log10(observe) - 4.0, np.log10(observe), points)
        for dt in offsets:
            sink.add(t_end + dt, p.free(u, float(dt)), 1, "off")
    return sink.build()


def recovery_fraction(trace: WeightTrace) -> float:
    """Share of the pulse-induced weight change undone by the end of a trace."""
    phases = np.asarray(trace.phase)
    on_rows = np.flatnonzero(phases == "on")
    if on_rows.size == 0:
        raise InvalidInputError("trace has no driven phase")
    w0 = trace.u1[0]
    w_peak = trace.u1[on_rows[-1]]
    w_end = trace.u1[-1]
    delta = w_peak - w0
    if delta == 0.0:
        raise InvalidInputError("pulse produced no weight change")
    return float((w_peak - w_end) / delta)


@dataclass(frozen=True)
class CycleReport:
    """Per-leg u1 dynamic ranges and cycle-to-cycle convergence distances."""

    per_cycle_range: np.ndarray  # flattened (first leg, second leg) per cycle
    convergence: np.ndarray  # max |u(cycle n) - u(cycle n-1)|, n >= 2

    def cycles_to_converge(self, threshold: float) -> int | None:
        """First cycle whose pattern repeats the previous one within threshold."""
        hits = np.flatnonzero(self.convergence <= threshold)
        return int(hits[0]) + 2 if hits.size else None


def run_cycle(
    p: Propagator,
    rule: DriveRule,
    pot: PulseSchedule,
    dep: PulseSchedule,
    cycles: int,
    samples_per_phase: int = 1,
    initial_state: ChainState | None = None,
) -> tuple[WeightTrace, CycleReport]:
    """Alternate potentiation and depression legs for a number of cycles."""
    if cycles < 1:
        raise InvalidInputError("cycles must be >= 1")
    if pot.amplitude * dep.amplitude >= 0.0:
        raise InvalidInputError("pot and dep legs need opposite amplitude signs")
    state = initial_state if initial_state is not None else zero_state(p.config)
    sink = _TraceBuilder()
    sink.add(state.time, state.u, 0, "init")
    ranges: list[float] = []
    cycle_snapshots: list[np.ndarray] = []
    pulse_offset = 0
    for _ in range(cycles):
        cycle_start_row = len(sink.times)
        for leg in (pot, dep):
            leg_start_row = len(sink.times)
            state = _train_into(sink, p, state, leg, rule, samples_per_phase, pulse_offset)
            pulse_offset += leg.count
            leg_u1 = [row[0] for row in sink.us[leg_start_row - 1 :]]
            ranges.append(float(np.max(leg_u1) - np.min(leg_u1)))
        cycle_snapshots.append(np.vstack(sink.us[cycle_start_row:]))
    conv = [
        float(np.max(np.abs(cycle_snapshots[i] - cycle_snapshots[i - 1])))
        for i in range(1, cycles)
    ]
    report = CycleReport(
        per_cycle_range=np.asarray(ranges), convergence=np.asarray(conv)
    )
    return sink.build(), report


def recover_to_baseline(
    p: Propagator,
    rule: DriveRule,
    forward: PulseSchedule,
    reverse_amplitude: float,
    tolerance: float | None = None,
    initial_state: ChainState | None = None,
) -> int:
    """Reverse pulses needed to bring u1 back to its pre-train level.

    The default tolerance is 1% of the forward leg's dynamic range.  Gives up
    (non-convergence) after 10x the forward pulse count.
    """
    if forward.amplitude * reverse_amplitude >= 0.0:
        raise InvalidInputError("reverse amplitude must oppose the forward leg")
    state = initial_state if initial_state is not None else zero_state(p.config)
    baseline = float(state.u[0])
    trace = apply_pulse_train(p, state, forward, rule)
    if tolerance is None:
        tolerance = 0.01 * float(np.max(trace.u1) - np.min(trace.u1))
    state = trace.final_state()
    one_pulse = PulseSchedule(
        amplitude=reverse_amplitude,
        frequency=forward.frequency,
        on_fraction=forward.on_fraction,
        count=1,
    )
    cap = 10 * forward.count
    for n in range(1, cap + 1):
        state = apply_pulse_train(p, state, one_pulse, rule).final_state()
        if abs(float(state.u[0]) - baseline) <= tolerance:
            return n
    raise NonConvergenceError(
        f"baseline not reached within {cap} reverse pulses "
        "(drive too weak or bounds mis-set)"
    )


def sample_u1_at(
    p: Propagator,
    rule: DriveRule,
    schedules: list[PulseSchedule],
    times: np.ndarray,
    initial_state: ChainState | None = None,
) -> np.ndarray:
    """u1 evaluated at arbitrary times while the schedules run back to back.

    Times past the last schedule are served by free evolution; times are
    required to be ascending and not earlier than the initial state.
    """
    state = initial_state if initial_state is not None else zero_state(p.config)
    times = np.asarray(times, dtype=float)
    if times.size and (np.any(np.diff(times) < 0.0) or times[0] < state.time - 1e-12):
        raise InvalidInputError("sample times must be ascending and within the run")
    out = np.empty(times.size)
    idx = 0
    u = state.u
    t = state.time
    while idx < times.size and times[idx] <= t:
        out[idx] = u[0]
        idx += 1

    def serve_constant(u0, t0, dur, s):
        nonlocal idx
        while idx < times.size and times[idx] <= t0 + dur + 1e-12 * max(1.0, dur):
            dt = min(times[idx] - t0, dur)
            out[idx] = p.driven(u0, s, dt)[0] if dt > 0.0 else u0[0]
            idx += 1
        return p.driven(u0, s, dur)

    for sched in schedules:
        t_on = sched.on_time
        t_off = sched.period - t_on
        for _ in range(sched.count):
            if rule.mode == "constant":
                s = drive_strength(rule, 0.0, sched.amplitude)
                u = serve_constant(u, t, t_on, s)
            else:
                sub = t_on / SOFT_SUBSTEPS
                for j in range(SOFT_SUBSTEPS):
                    s = drive_strength(rule, float(u[0]), sched.amplitude)
                    seg_start = t + j * sub
                    while idx < times.size and times[idx] <= seg_start + sub:
                        dt = max(times[idx] - seg_start, 0.0)
                        out[idx] = p.driven(u, s, dt)[0]
                        idx += 1
                    u = p.driven(u, s, sub)
            t += t_on
            if t_off > 0.0:
                u = serve_constant(u, t, t_off, 0.0)
                t += t_off
    while idx < times.size:
        out[idx] = p.free(u, float(times[idx] - t))[0]
        idx += 1
    return out
