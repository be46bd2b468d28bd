import numpy as np
import pytest

from synapse_cascade import (
    ChainConfig,
    ChainState,
    DriveRule,
    LeakySynapse,
    build_coupling_matrix,
    build_propagator,
    conserved_total,
    device_config,
    drive_strength,
    effective_weight,
    euler_oracle,
    evolve_driven,
    evolve_free,
    slowest_timescale,
    zero_state,
)
from synapse_cascade.errors import InvalidInputError

from conftest import bisect_eigenvalues, random_chain_config

PAPER4 = ChainConfig([1.0, 1.0, 2.0, 4.0], [2.0**-6, 2.0**-7, 2.0**-8])


def test_coupling_matrix_k1():
    g = build_coupling_matrix(ChainConfig([1.0]))
    assert g.shape == (1, 1) and g[0, 0] == 0.0


def test_coupling_matrix_k2():
    g = build_coupling_matrix(ChainConfig([1.0, 1.0], [1.0]))
    assert np.array_equal(g, np.array([[-1.0, 1.0], [1.0, -1.0]]))


def test_coupling_matrix_k4_rows_sum_zero():
    g = build_coupling_matrix(PAPER4)
    assert np.array_equal(g, g.T)
    assert np.max(np.abs(g.sum(axis=1))) == 0.0
    g12, g23, g34 = PAPER4.couplings
    expected = np.array(
        [
            [-g12, g12, 0.0, 0.0],
            [g12, -g12 - g23, g23, 0.0],
            [0.0, g23, -g23 - g34, g34],
            [0.0, 0.0, g34, -g34],
        ]
    )
    assert np.array_equal(g, expected)


def test_propagator_k2_eigenvalues():
    p = build_propagator(ChainConfig([1.0, 1.0], [1.0]))
    assert np.allclose(p.eigenvalues, [-2.0, 0.0], atol=1e-12)


def test_propagator_k1_zero_mode():
    p = build_propagator(ChainConfig([1.0]))
    assert p.eigenvalues.shape == (1,)
    assert p.eigenvalues[0] == 0.0


def test_propagator_k4_matches_bisection_oracle():
    p = build_propagator(PAPER4)
    caps = PAPER4.capacities
    h = build_coupling_matrix(PAPER4) * np.outer(1 / np.sqrt(caps), 1 / np.sqrt(caps))
    roots = bisect_eigenvalues(h)
    assert np.max(np.abs(roots - p.eigenvalues)) <= 1e-10
    assert int(p.zero_mode.sum()) == 1
    assert np.all(p.eigenvalues[~p.zero_mode] < 0.0)


def test_evolve_free_dt_zero_identity():
    p = build_propagator(ChainConfig([1.0, 2.0], [0.5]))
    s0 = ChainState([0.3, -0.1], 1.0)
    s1 = evolve_free(p, s0, 0.0)
    assert np.array_equal(s1.u, s0.u) and s1.time == s0.time


def test_evolve_free_closed_form_k2():
    p = build_propagator(ChainConfig([1.0, 1.0], [1.0]))
    for t in (0.05, 0.3, 1.0, 4.0):
        out = evolve_free(p, ChainState([1.0, 0.0]), t)
        assert abs(out.u[0] - (0.5 + 0.5 * np.exp(-2.0 * t))) <= 1e-12


def test_evolve_free_equilibrium():
    p = build_propagator(ChainConfig([1.0, 1.0], [2.0**-7.5]))
    out = evolve_free(p, ChainState([1.0, 0.0]), 1e7)
    assert np.allclose(out.u, [0.5, 0.5], atol=1e-10)


def test_evolve_free_rejects_negative_dt():
    p = build_propagator(ChainConfig([1.0]))
    with pytest.raises(InvalidInputError):
        evolve_free(p, zero_state(p.config), -1.0)


def test_driven_zero_drive_is_bitwise_free():
    rng = np.random.default_rng(2)
    for _ in range(10):
        cfg = random_chain_config(rng)
        p = build_propagator(cfg)
        state = ChainState(rng.normal(size=cfg.size))
        dt = float(rng.uniform(0.1, 5.0))
        a = evolve_free(p, state, dt)
        b = evolve_driven(p, state, 0.0, dt)
        assert np.array_equal(a.u, b.u)


def test_driven_pure_integrator_k1():
    p = build_propagator(ChainConfig([1.0]))
    out = evolve_driven(p, zero_state(p.config), 0.1, 10.0)
    assert out.u[0] == 1.0


def test_driven_matches_euler_oracle_k2():
    rng = np.random.default_rng(9)
    cfg = ChainConfig(rng.uniform(0.5, 4.0, 2), [2.0 ** rng.uniform(-8, -3)])
    p = build_propagator(cfg)
    s = float(rng.uniform(-0.01, 0.01))
    state = zero_state(cfg)
    exact = evolve_driven(p, state, s, 5.0)
    approx = euler_oracle(cfg, state, lambda t: s, 1e-4, 5.0)
    assert np.max(np.abs(exact.u - approx.u)) <= 1e-6


def test_effective_weight():
    assert effective_weight(ChainState([0.3, 0.7])) == 0.3
    assert effective_weight(zero_state(ChainConfig([1.0, 1.0], [1.0]))) == 0.0
    p = build_propagator(ChainConfig([1.0, 1.0], [1.0]))
    out = evolve_free(p, ChainState([1.0, 0.0]), np.log(2.0) / 2.0)
    assert abs(effective_weight(out) - 0.75) <= 1e-12


def test_drive_strength_scales_with_voltage():
    rule = DriveRule.constant()
    for amp in (1.0, -1.0):
        assert drive_strength(rule, 0.0, 2.0 * amp) == 2.0 * drive_strength(rule, 0.0, amp)
    # calibration: 1 V for 0.5 s moves a unit beaker by one weight unit
    assert drive_strength(rule, 0.0, 1.0) * 0.5 == 1.0


def test_drive_strength_soft_bounds():
    rule = DriveRule.soft_bounded(0.0, 4.0)
    const = DriveRule.constant()
    assert drive_strength(rule, 4.0, 1.0) == 0.0  # saturated
    assert drive_strength(rule, 0.0, -1.0) == 0.0
    mid = drive_strength(rule, 2.0, 1.0)
    assert abs(mid - 0.5 * drive_strength(const, 2.0, 1.0)) <= 1e-15
    # outside bounds the saturating direction clamps to zero
    assert drive_strength(rule, 5.0, 1.0) == 0.0


def test_slowest_timescale():
    assert slowest_timescale(build_propagator(ChainConfig([1.0, 1.0], [1.0]))) == 0.5
    tau = slowest_timescale(build_propagator(ChainConfig([1.0, 1.0], [2.0**-7.5])))
    assert abs(tau - 2.0**6.5) <= 1e-9
    p4 = build_propagator(PAPER4)
    caps = PAPER4.capacities
    h = build_coupling_matrix(PAPER4) * np.outer(1 / np.sqrt(caps), 1 / np.sqrt(caps))
    roots = bisect_eigenvalues(h)
    slow = np.min(np.abs(roots[np.abs(roots) > 1e-9]))
    assert abs(slowest_timescale(p4) - 1.0 / slow) <= 1e-6 / slow
    with pytest.raises(InvalidInputError):
        slowest_timescale(build_propagator(ChainConfig([1.0])))


def test_euler_oracle_conservation_and_stability_guard():
    cfg = ChainConfig([1.0, 2.0], [0.1])
    state = ChainState([1.0, 0.0])
    out = euler_oracle(cfg, state, lambda t: 0.0, 1e-3, 5.0)
    drift = abs(conserved_total(cfg, out) - conserved_total(cfg, state))
    assert drift <= 1e-2 * 1e-3  # O(step) bound with margin
    with pytest.raises(InvalidInputError):
        euler_oracle(cfg, state, lambda t: 0.0, 1e3, 5.0)


def test_euler_oracle_first_order_convergence():
    cfg = ChainConfig([1.0, 1.5, 0.8], [0.05, 0.02])
    p = build_propagator(cfg)
    state = ChainState([0.4, -0.2, 0.1])
    exact = evolve_free(p, state, 2.0)
    errs = []
    for step in (4e-3, 2e-3, 1e-3):
        approx = euler_oracle(cfg, state, lambda t: 0.0, step, 2.0)
        errs.append(np.max(np.abs(approx.u - exact.u)))
    assert errs[0] / errs[1] == pytest.approx(2.0, rel=0.15)
    assert errs[1] / errs[2] == pytest.approx(2.0, rel=0.15)


def test_euler_oracle_selfconsistency_k3():
    rng = np.random.default_rng(17)
    cfg = ChainConfig(rng.uniform(0.5, 4.0, 3), 2.0 ** rng.uniform(-8, -3, 2))
    p = build_propagator(cfg)
    s = 0.008
    state = zero_state(cfg)
    exact = evolve_driven(p, state, s, 3.0)
    approx = euler_oracle(cfg, state, lambda t: s, 1e-4, 3.0)
    assert np.max(np.abs(exact.u - approx.u)) <= 1e-6


def test_conservation_property():
    rng = np.random.default_rng(4)
    for _ in range(20):
        cfg = random_chain_config(rng)
        p = build_propagator(cfg)
        state = ChainState(rng.normal(size=cfg.size))
        q0 = conserved_total(cfg, state)
        out = evolve_free(p, state, float(rng.uniform(0.0, 1e4)))
        assert abs(conserved_total(cfg, out) - q0) <= 1e-9 * max(1.0, abs(q0))


def test_semigroup_property():
    rng = np.random.default_rng(6)
    for _ in range(20):
        cfg = random_chain_config(rng)
        p = build_propagator(cfg)
        state = ChainState(rng.normal(size=cfg.size))
        t1, t2 = rng.uniform(0.01, 50.0, size=2)
        once = evolve_free(p, state, float(t1 + t2))
        twice = evolve_free(p, evolve_free(p, state, float(t1)), float(t2))
        assert np.max(np.abs(once.u - twice.u)) <= 1e-10


def test_monotone_equilibration():
    rng = np.random.default_rng(8)
    for _ in range(5):
        cfg = random_chain_config(rng)
        if cfg.size == 1:
            continue
        p = build_propagator(cfg)
        state = ChainState(rng.normal(size=cfg.size))
        ts = np.linspace(0.0, 400.0, 120)
        maxes = []
        mins = []
        for t in ts:
            out = evolve_free(p, state, float(t))
            maxes.append(out.u.max())
            mins.append(out.u.min())
        assert np.all(np.diff(maxes) <= 1e-12)
        assert np.all(np.diff(mins) >= -1e-12)


def test_superposition_under_constant_drive():
    rng = np.random.default_rng(10)
    cfg = ChainConfig(rng.uniform(0.5, 4.0, 3), 2.0 ** rng.uniform(-7, -3, 2))
    p = build_propagator(cfg)
    state = ChainState(rng.normal(size=3))
    s1, s2, dt = 0.3, -0.7, 4.0
    both = evolve_driven(p, state, s1 + s2, dt)
    one = evolve_driven(p, state, s1, dt)
    two = evolve_driven(p, state, s2, dt)
    free = evolve_free(p, state, dt)
    assert np.max(np.abs(both.u - (one.u + two.u - free.u))) <= 1e-10


def test_leaky_synapse_free_decay():
    leaky = LeakySynapse(tau=3.0)
    out = leaky.free(np.array([1.0]), 3.0)
    assert abs(out[0] - np.exp(-1.0)) <= 1e-15
    assert leaky.step_matrix(3.0)[0, 0] == pytest.approx(np.exp(-1.0))


def test_config_validation():
    with pytest.raises(InvalidInputError):
        ChainConfig([1.0, -1.0], [0.1])
    with pytest.raises(InvalidInputError):
        ChainConfig([1.0, 1.0], [])
    with pytest.raises(InvalidInputError):
        ChainConfig([1.0, 1.0], [0.0])
    assert device_config(4).size == 4
    with pytest.raises(InvalidInputError):
        device_config(3)
