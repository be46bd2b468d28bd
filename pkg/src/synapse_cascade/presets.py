"""Canonical benchmark configurations for the headline comparisons.

The device write bound (64 weight units) reflects the measured dynamic range
of a single storage component: one one-volt half-second write moves the
level by one unit and the component saturates after a few dozen of them.
Complex-chain runs use the ideal linear chain (no write bound): diffusion
into the deeper components keeps the visible level far from the rails, and
the linear model is the one the analytical solution describes.

Probe ladders and stream lengths are desk-scale: a few hundred presentations
of burn-in put the bounded reference synapse into its steady state before
the probed targets are stored.
"""

from __future__ import annotations

from .bench import BenchConfig, matched_simple
from .chain import device_config

DEVICE_WRITE_BOUND = 64.0


def variable_matched_pair(seed: int = 81, trials: int = 10) -> dict[str, BenchConfig]:
    """Equal-variable-count comparison: 128 neurons of single-variable
    synapses against 64 neurons of four-variable chains (16384 variables
    each), both at learning rate 1."""
    simple = BenchConfig(
        n_neurons=128,
        model=device_config(1),
        stream_length=1106,
        probe_ages=(0, 25, 50, 100, 150, 200, 300, 450, 600),
        trials=trials,
        n_null=128,
        n_targets=6,
        seed=seed,
        write_bound=DEVICE_WRITE_BOUND,
    )
    cpx = BenchConfig(
        n_neurons=64,
        model=device_config(4),
        stream_length=9506,
        probe_ages=(0, 50, 150, 400, 1000, 2500, 5000, 7000, 9000),
        trials=trials,
        n_null=128,
        n_targets=6,
        seed=seed + 1,
        step_time=16.0,
        write_bound=None,
    )
    return {"simple": simple, "complex": cpx}


def learning_rate_pair(seed: int = 91, trials: int = 10) -> dict[str, BenchConfig]:
    """Single-variable synapses at q=1 versus q=0.05 (slow, long-lived)."""
    fast = BenchConfig(
        n_neurons=128,
        model=device_config(1),
        stream_length=1106,
        probe_ages=(0, 25, 50, 100, 150, 200, 300, 450, 600),
        q=1.0,
        trials=trials,
        n_null=128,
        n_targets=6,
        seed=seed,
        write_bound=DEVICE_WRITE_BOUND,
    )
    slow = BenchConfig(
        n_neurons=128,
        model=device_config(1),
        stream_length=4506,
        probe_ages=(0, 50, 150, 400, 800, 1500, 2500, 4000),
        q=0.05,
        trials=trials,
        n_null=128,
        n_targets=6,
        seed=seed + 1,
        write_bound=DEVICE_WRITE_BOUND,
    )
    return {"q1": fast, "q05": slow}


def timescale_matched_suite(seed: int = 101, trials: int = 8) -> dict[str, BenchConfig]:
    """Complex chains versus leaky simple synapses with matched slowest
    decay times, plus the bounded no-leak reference, all at 96 neurons."""
    chain2 = device_config(2)
    chain4 = device_config(4)
    ages4 = (0, 100, 400, 1000, 2000, 3500, 6000)
    ages2 = (0, 50, 150, 300, 600, 1000, 1600)
    common = dict(n_neurons=96, trials=trials, n_null=128, n_targets=4)
    return {
        "complex_m4": BenchConfig(
            model=chain4, stream_length=8606, probe_ages=ages4, seed=seed, **common
        ),
        "leaky_m4": BenchConfig(
            model=matched_simple(chain4),
            stream_length=8606,
            probe_ages=ages4,
            seed=seed + 1,
            **common,
        ),
        "complex_m2": BenchConfig(
            model=chain2,
            stream_length=2206,
            probe_ages=ages2,
            step_time=0.5,
            seed=seed + 2,
            **common,
        ),
        "leaky_m2": BenchConfig(
            model=matched_simple(chain2),
            stream_length=2206,
            probe_ages=ages2,
            step_time=0.5,
            seed=seed + 3,
            **common,
        ),
        "noleak_ref": BenchConfig(
            model=device_config(1),
            stream_length=2606,
            probe_ages=(0, 100, 400, 1000, 2000),
            seed=seed + 4,
            write_bound=DEVICE_WRITE_BOUND,
            **common,
        ),
    }
