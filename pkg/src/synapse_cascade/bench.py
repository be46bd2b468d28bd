"""Online familiarity-memory benchmark.

A memory module of N neurons stores patterns through Hebbian one-shot writes
into an N x N array of synapses (plus N biases), every one of which is an
independent chain sharing a single propagator.  A single pass over a pattern
stream is made; one target pattern is probed (readout only) at a ladder of
ages while the stream keeps writing, and familiarity metrics are aggregated
over independent trials.

Writes are u1 <- u1 + x_i * x_j.  With `write_bound` set, the increment is
scaled by (1 - sign(increment) * u1 / bound), the saturating write profile
measured on the physical devices; leaving it None keeps the ideal unbounded
accumulator.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .chain import ChainConfig, LeakySynapse, Propagator, build_propagator, slowest_timescale
from .errors import InvalidInputError, UndefinedSNRError
from .patterns import PatternStream, make_random_stream
from .seeding import derive_seed, expand_seeds


def matched_simple(config: ChainConfig) -> LeakySynapse:
    """Leaky single-variable synapse matched to a chain's slowest decay."""
    if config.size < 2:
        raise InvalidInputError("matched simple synapse needs a chain with K >= 2")
    return LeakySynapse(slowest_timescale(build_propagator(config)))


def total_variables(n_neurons: int, m: int) -> int:
    """Dynamical variable count: m per synapse, N(N-1) weights + N biases."""
    return m * n_neurons * n_neurons


def hamming(a: np.ndarray, b: np.ndarray) -> int:
    return int(np.sum(a != b))


class SynapticArray:
    """N-neuron memory module whose every weight/bias is one chain state."""

    def __init__(
        self,
        n_neurons: int,
        model,
        q: float = 1.0,
        step_time: float = 1.0,
        write_bound: float | None = None,
    ):
        if n_neurons < 2:
            raise InvalidInputError("need at least 2 neurons")
        if not (0.0 <= q <= 1.0):  # q=0 allowed as a degenerate no-write array
            raise InvalidInputError("learning rate q must be in [0, 1]")
        if write_bound is not None and write_bound <= 0.0:
            raise InvalidInputError("write_bound must be positive")
        if isinstance(model, ChainConfig):
            model = build_propagator(model)
        self.model = model
        self.n = int(n_neurons)
        self.k = int(model.size)
        self.q = float(q)
        self.step_time = float(step_time)
        self.write_bound = write_bound
        self.step_matrix = model.step_matrix(self.step_time)
        self._identity_step = self.k == 1 and self.step_matrix[0, 0] == 1.0
        self.weights = np.zeros((self.k, self.n, self.n))
        self.biases = np.zeros((self.k, self.n))
        self.presentations = 0

    def _scaled(self, delta: np.ndarray, level: np.ndarray) -> np.ndarray:
        if self.write_bound is None:
            return delta
        factor = np.clip(1.0 - delta * level / self.write_bound, 0.0, 2.0)
        return delta * factor

    def present(self, x: np.ndarray, rng: np.random.Generator) -> None:
        """One Hebbian write (accepted per synapse with probability q) followed
        by one diffusion step of every chain."""
        x = np.asarray(x)
        if x.shape != (self.n,):
            raise InvalidInputError(f"pattern must have shape ({self.n},)")
        dw = np.outer(x, x).astype(float)
        np.fill_diagonal(dw, 0.0)
        db = x.astype(float)
        if self.q > 0.0:
            inc_w = self._scaled(dw, self.weights[0])
            inc_b = self._scaled(db, self.biases[0])
            if self.q < 1.0:
                inc_w = inc_w * (rng.random((self.n, self.n)) < self.q)
                inc_b = inc_b * (rng.random(self.n) < self.q)
            self.weights[0] += inc_w
            self.biases[0] += inc_b
        if not self._identity_step:
            self.weights = np.tensordot(self.step_matrix, self.weights, axes=(1, 0))
            self.biases = self.step_matrix @ self.biases
        self.presentations += 1

    def recall(self, x: np.ndarray) -> np.ndarray:
        """One-step readout y_i = sign(b_i + sum_j w_ij x_j); sign(0) -> +1."""
        h = self.weights[0] @ x + self.biases[0]
        return np.where(h >= 0.0, 1, -1).astype(np.int8)

    def recall_batch(self, xs: np.ndarray) -> np.ndarray:
        h = xs @ self.weights[0].T + self.biases[0][None, :]
        return np.where(h >= 0.0, 1, -1).astype(np.int8)

    def hebbian_overlap(self, x: np.ndarray) -> float:
        """Overlap of the current visible weights with pattern x's Hebbian
        update, normalized by the N(N-1) directed synapse count."""
        w0 = self.weights[0]
        return float(x @ w0 @ x) / (self.n * (self.n - 1))

    def overlap_batch(self, xs: np.ndarray) -> np.ndarray:
        w0 = self.weights[0]
        return np.einsum("ki,ij,kj->k", xs, w0, xs) / (self.n * (self.n - 1))


def fd_decide(distance: float, threshold: float) -> bool:
    """Familiarity decision: True (familiar) iff distance < threshold."""
    return distance < threshold


def calibrate_threshold(null_distances: Sequence[float], familiar_distances: Sequence[float]) -> float:
    """Midpoint between the null and familiar distance means."""
    null_distances = np.asarray(null_distances, dtype=float)
    familiar_distances = np.asarray(familiar_distances, dtype=float)
    if null_distances.size == 0 or familiar_distances.size == 0:
        raise InvalidInputError("both calibration samples must be non-empty")
    return 0.5 * (float(null_distances.mean()) + float(familiar_distances.mean()))


def fc_decide(d_familiar: float, d_novel: float, rng: np.random.Generator) -> bool:
    """Forced choice: pick the smaller distance as familiar; fair coin on ties."""
    if d_familiar < d_novel:
        return True
    if d_familiar > d_novel:
        return False
    return bool(rng.random() < 0.5)


def io_snr(
    array: SynapticArray,
    pattern: np.ndarray,
    rng: np.random.Generator,
    n_null: int = 200,
) -> float:
    """Ideal-observer SNR: the stored update's overlap with the current state
    over the spread of the same overlap for never-presented patterns."""
    if n_null < 100:
        raise InvalidInputError("need at least 100 null probes")
    nulls = (rng.integers(0, 2, size=(n_null, array.n)) * 2 - 1).astype(np.int8)
    sigma = float(np.std(array.overlap_batch(nulls), ddof=1))
    if sigma == 0.0:
        raise UndefinedSNRError("null overlap spread is zero (empty array?)")
    return array.hebbian_overlap(pattern) / sigma


def r_snr(familiar_distances: Sequence[float], null_distances: Sequence[float]) -> float:
    """Readout SNR: separation of familiar vs null distances over null spread."""
    fam = np.asarray(familiar_distances, dtype=float)
    nul = np.asarray(null_distances, dtype=float)
    if fam.size == 0 or nul.size == 0:
        raise InvalidInputError("both samples must be non-empty")
    sigma = float(np.std(nul, ddof=1))
    if sigma == 0.0:
        raise UndefinedSNRError("null distance spread is zero")
    return (float(nul.mean()) - float(fam.mean())) / sigma


@dataclass(frozen=True)
class MetricSeries:
    """Per-age benchmark metrics averaged over trials (with standard errors)."""

    ages: np.ndarray
    fd_accuracy: np.ndarray
    fc_accuracy: np.ndarray
    io_snr: np.ndarray
    r_snr: np.ndarray
    fd_accuracy_se: np.ndarray
    fc_accuracy_se: np.ndarray
    io_snr_se: np.ndarray
    r_snr_se: np.ndarray
    trials: int

    def __post_init__(self):
        if np.any(np.diff(self.ages) <= 0):
            raise InvalidInputError("ages must be strictly increasing")
        for acc in (self.fd_accuracy, self.fc_accuracy):
            if np.any((acc < 0.0) | (acc > 1.0)):
                raise InvalidInputError("accuracies must lie in [0, 1]")

    def metric(self, name: str) -> np.ndarray:
        table = {
            "fd": self.fd_accuracy,
            "fc": self.fc_accuracy,
            "iosnr": self.io_snr,
            "rsnr": self.r_snr,
        }
        if name not in table:
            raise InvalidInputError(f"unknown metric {name!r}")
        return table[name]


def lifetime(series: MetricSeries, metric: str, threshold: float) -> float:
    """Smallest probed age where the metric falls below the threshold,
    linearly interpolated between probe ages; inf if never crossed."""
    vals = series.metric(metric)
    ages = series.ages.astype(float)
    if vals[0] < threshold:
        return 0.0
    for i in range(1, vals.size):
        if vals[i] < threshold:
            v0, v1 = vals[i - 1], vals[i]
            return float(ages[i - 1] + (v0 - threshold) / (v0 - v1) * (ages[i] - ages[i - 1]))
    return math.inf


@dataclass
class BenchConfig:
    """Everything needed for one reproducible benchmark run."""

    n_neurons: int
    model: ChainConfig | Propagator | LeakySynapse
    stream_length: int
    probe_ages: tuple[int, ...]
    q: float = 1.0
    trials: int = 20
    calibration_trials: int | None = None
    n_null: int = 200
    n_targets: int = 1
    seed: int = 0
    step_time: float = 1.0
    write_bound: float | None = None
    accuracy_threshold: float = 0.6
    snr_threshold: float = 0.3
    source: str = "random"
    feature_matrix: np.ndarray | None = None

    def __post_init__(self):
        ages = tuple(int(a) for a in self.probe_ages)
        if not ages or any(b <= a for a, b in zip(ages, ages[1:])):
            raise InvalidInputError("probe ages must be non-empty and strictly increasing")
        if ages[0] < 0 or ages[-1] + self.n_targets - 1 >= self.stream_length:
            raise InvalidInputError("probe ages (plus target block) must fit the stream")
        if not (0.0 < self.q <= 1.0):
            raise InvalidInputError("q must be in (0, 1]")
        if self.trials < 1 or self.n_targets < 1:
            raise InvalidInputError("need at least one trial and one target")
        if self.source not in ("random", "features"):
            raise InvalidInputError("source must be 'random' or 'features'")
        if self.source == "features" and self.feature_matrix is None:
            raise InvalidInputError("feature source needs a feature matrix")
        self.probe_ages = ages

    @property
    def n_calibration(self) -> int:
        return self.trials if self.calibration_trials is None else self.calibration_trials


@dataclass
class _TrialProbes:
    d_familiar: np.ndarray  # (ages, n_targets)
    null_distances: np.ndarray  # (ages, n_targets * n_null)
    fc_correct: np.ndarray  # (ages,)
    io_snr: np.ndarray  # (ages,)
    r_snr: np.ndarray  # (ages,)


def _trial_stream(cfg: BenchConfig, seed: int) -> np.ndarray:
    if cfg.source == "random":
        return make_random_stream(cfg.n_neurons, cfg.stream_length, seed).patterns
    from .patterns import ingest_features

    stream = ingest_features(cfg.feature_matrix, cfg.n_neurons)
    if stream.length < cfg.stream_length:
        raise InvalidInputError(
            f"feature stream has {stream.length} items, need {cfg.stream_length}"
        )
    order = np.random.default_rng(seed).permutation(stream.length)[: cfg.stream_length]
    return stream.patterns[order]


def _run_trial(cfg: BenchConfig, trial_seed: int) -> _TrialProbes:
    pattern_seed = derive_seed(trial_seed, 1)
    accept_seed = derive_seed(trial_seed, 2)
    probe_seed = derive_seed(trial_seed, 3)
    patterns = _trial_stream(cfg, pattern_seed)
    accept_rng = np.random.default_rng(accept_seed)
    probe_rng = np.random.default_rng(probe_seed)
    array = SynapticArray(
        cfg.n_neurons, cfg.model, cfg.q, cfg.step_time, cfg.write_bound
    )
    ages = cfg.probe_ages
    n_ages = len(ages)
    n_tg = cfg.n_targets
    # Target block: n_targets consecutive stored patterns; target j reaches
    # age a right after presentation t_store + j + a (readout-only probes).
    t_store = cfg.stream_length - ages[-1] - n_tg
    probe_events: dict[int, list[tuple[int, int]]] = {}
    for j in range(n_tg):
        for i, a in enumerate(ages):
            probe_events.setdefault(t_store + j + a, []).append((j, i))
    out = _TrialProbes(
        d_familiar=np.zeros((n_ages, n_tg)),
        null_distances=np.zeros((n_ages, n_tg * cfg.n_null)),
        fc_correct=np.zeros(n_ages),
        io_snr=np.zeros(n_ages),
        r_snr=np.zeros(n_ages),
    )
    fc_hits = np.zeros(n_ages)
    io_parts = np.zeros((n_ages, n_tg))
    n_syn = cfg.n_neurons * (cfg.n_neurons - 1)
    for t in range(cfg.stream_length):
        array.present(patterns[t], accept_rng)
        for j, idx in probe_events.get(t, ()):
            target = patterns[t_store + j]
            d_fam = hamming(array.recall(target), target)
            nulls = (
                probe_rng.integers(0, 2, size=(cfg.n_null, cfg.n_neurons)) * 2 - 1
            ).astype(np.int8)
            null_y = array.recall_batch(nulls)
            null_d = np.sum(null_y != nulls, axis=1).astype(float)
            null_overlaps = array.overlap_batch(nulls)
            sigma_o = float(np.std(null_overlaps, ddof=1))
            if sigma_o == 0.0:
                raise UndefinedSNRError("null overlap spread is zero")
            out.d_familiar[idx, j] = d_fam
            out.null_distances[idx, j * cfg.n_null : (j + 1) * cfg.n_null] = null_d
            fc_hits[idx] += np.mean([fc_decide(d_fam, d, probe_rng) for d in null_d])
            io_parts[idx, j] = (float(target @ array.weights[0] @ target) / n_syn) / sigma_o
    out.fc_correct = fc_hits / n_tg
    out.io_snr = io_parts.mean(axis=1)
    for i in range(n_ages):
        out.r_snr[i] = r_snr(out.d_familiar[i], out.null_distances[i])
    return out


def run_benchmark(cfg: BenchConfig, threads: int = 1) -> MetricSeries:
    """Single-pass online benchmark, averaged over independent trials.

    Calibration trials (separate seeds) set the per-age familiarity threshold
    at the midpoint of the familiar and null distance means; test trials then
    report balanced accuracy against those thresholds.  Results are
    bit-identical for a given config regardless of thread count.
    """
    test_seeds = expand_seeds(derive_seed(cfg.seed, 101), cfg.trials)
    cal_seeds = expand_seeds(derive_seed(cfg.seed, 202), cfg.n_calibration)

    def collect(seeds):
        results = [None] * len(seeds)
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                futures = {pool.submit(_run_trial, cfg, s): i for i, s in enumerate(seeds)}
                for fut, i in futures.items():
                    results[i] = fut.result()
        else:
            for i, s in enumerate(seeds):
                results[i] = _run_trial(cfg, s)
        return results

    cal = collect(cal_seeds)
    test = collect(test_seeds)
    n_ages = len(cfg.probe_ages)
    thresholds = np.zeros(n_ages)
    for i in range(n_ages):
        fam = np.concatenate([trial.d_familiar[i] for trial in cal])
        nul = np.concatenate([trial.null_distances[i] for trial in cal])
        thresholds[i] = calibrate_threshold(nul, fam)

    t = len(test)
    fd_acc = np.zeros((t, n_ages))
    for j, trial in enumerate(test):
        for i in range(n_ages):
            hit = float(
                np.mean([fd_decide(d, thresholds[i]) for d in trial.d_familiar[i]])
            )
            cr = float(np.mean(~(trial.null_distances[i] < thresholds[i])))
            fd_acc[j, i] = 0.5 * (hit + cr)
    fc_acc = np.vstack([trial.fc_correct for trial in test])
    io = np.vstack([trial.io_snr for trial in test])
    rs = np.vstack([trial.r_snr for trial in test])

    def se(a):
        return a.std(axis=0, ddof=1) / math.sqrt(t) if t > 1 else np.zeros(a.shape[1])

    return MetricSeries(
        ages=np.asarray(cfg.probe_ages, dtype=float),
        fd_accuracy=fd_acc.mean(axis=0),
        fc_accuracy=fc_acc.mean(axis=0),
        io_snr=io.mean(axis=0),
        r_snr=rs.mean(axis=0),
        fd_accuracy_se=se(fd_acc),
        fc_accuracy_se=se(fc_acc),
        io_snr_se=se(io),
        r_snr_se=se(rs),
        trials=t,
    )
