"""Coupled-beaker synapse chains and their exact propagators.

A chain is a row of beakers with cross-sections C_k joined by tubes with
conductances g_{k,k+1}; the liquid level u_1 of the first beaker is the
visible synaptic weight.  The free dynamics C du/dt = G u are solved exactly
through the eigendecomposition of the symmetrized operator
H = C^{-1/2} G C^{-1/2}, and a constant drive injected into the first beaker
adds the usual zero/nonzero eigenvalue branches of the inhomogeneous modal
solution.  A forward-Euler integrator is included purely as an independent
cross-check for tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidInputError, NumericalFailure
from .linalg import EigenDecomposition, eig_sym

# Drive calibration: a 1 V write held for 0.5 s moves the level of an
# isolated unit beaker by exactly one weight unit, hence 2 units/s/V.
DEFAULT_BASE_RATE = 2.0

# |lambda| below this fraction of the spectral radius counts as the
# conserved (zero) diffusion mode.
ZERO_MODE_REL_TOL = 1e-9

# On-phase resolution used when the drive strength depends on u1 and the
# propagator must be applied in frozen-drive slices.
SOFT_SUBSTEPS = 1000


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ChainConfig:
    """Beaker cross-sections (dimensionless) and tube conductances (1/s)."""

    capacities: np.ndarray
    couplings: np.ndarray

    def __init__(self, capacities, couplings=()):
        caps = np.atleast_1d(np.asarray(capacities, dtype=float))
        gs = np.atleast_1d(np.asarray(couplings, dtype=float)) if len(couplings) else np.empty(0)
        if caps.ndim != 1 or caps.size < 1:
            raise InvalidInputError("capacities must be a non-empty 1-D sequence")
        if gs.size != caps.size - 1:
            raise InvalidInputError(
                f"need {caps.size - 1} couplings for {caps.size} beakers, got {gs.size}"
            )
        if not np.all(np.isfinite(caps)) or np.any(caps <= 0.0):
            raise InvalidInputError("capacities must be finite and positive")
        if gs.size and (not np.all(np.isfinite(gs)) or np.any(gs <= 0.0)):
            raise InvalidInputError("couplings must be finite and positive")
        object.__setattr__(self, "capacities", _readonly(caps))
        object.__setattr__(self, "couplings", _readonly(gs))

    @property
    def size(self) -> int:
        return int(self.capacities.size)


def device_config(m: int, rate: float = 1.0) -> ChainConfig:
    """Chain presets matching the measured device family.

    m=1 is a bare storage component; m=2 adds one coupled component at
    g = 2^-8/s; m=4 uses capacities (1, 1, 2, 4) with the coupling ladder
    (2^-6, 2^-7, 2^-8)/s.  `rate` rescales every coupling (time-base knob).
    """
    if m == 1:
        return ChainConfig([1.0])
    if m == 2:
        return ChainConfig([1.0, 1.0], [rate * 2.0**-8])
    if m == 4:
        return ChainConfig([1.0, 1.0, 2.0, 4.0], [rate * 2.0**-6, rate * 2.0**-7, rate * 2.0**-8])
    raise InvalidInputError(f"no device preset for m={m}")


@dataclass(frozen=True)
class ChainState:
    """Liquid levels u_k (weight units) at an absolute time (seconds)."""

    u: np.ndarray
    time: float = 0.0

    def __init__(self, u, time: float = 0.0):
        vec = np.atleast_1d(np.asarray(u, dtype=float)).copy()
        if vec.ndim != 1 or not np.all(np.isfinite(vec)):
            raise InvalidInputError("state vector must be 1-D and finite")
        object.__setattr__(self, "u", _readonly(vec))
        object.__setattr__(self, "time", float(time))


def zero_state(config: ChainConfig, time: float = 0.0) -> ChainState:
    return ChainState(np.zeros(config.size), time)


def build_coupling_matrix(config: ChainConfig) -> np.ndarray:
    """Tridiagonal conductance operator G with zero row sums."""
    k = config.size
    g = config.couplings
    mat = np.zeros((k, k))
    for i in range(k - 1):
        mat[i, i + 1] = g[i]
        mat[i + 1, i] = g[i]
        mat[i, i] -= g[i]
        mat[i + 1, i + 1] -= g[i]
    return mat


class Propagator:
    """Cached modal solution of one chain; immutable and shareable.

    Exactly one eigenvalue of H is the conserved mode (total liquid
    sum(C_k u_k) is invariant under free flow); all others are negative.
    """

    def __init__(self, config: ChainConfig):
        self.config = config
        self.coupling_matrix = _readonly(build_coupling_matrix(config))
        c_isqrt = 1.0 / np.sqrt(config.capacities)
        # G * outer(ci, ci) keeps H exactly symmetric entry-by-entry.
        h = self.coupling_matrix * np.outer(c_isqrt, c_isqrt)
        self.decomposition: EigenDecomposition = eig_sym(h)
        lam = self.decomposition.eigenvalues
        scale = np.max(np.abs(lam))
        if scale > 0.0:
            zero = np.abs(lam) <= ZERO_MODE_REL_TOL * scale
        else:
            zero = lam == 0.0
        if int(zero.sum()) != 1:
            raise NumericalFailure(
                f"expected exactly one conserved mode, found {int(zero.sum())}"
            )
        if np.any(lam[~zero] >= 0.0):
            raise NumericalFailure("non-conserved modes must decay (negative eigenvalues)")
        self.eigenvalues = lam
        self.zero_mode = _readonly(zero)
        self.c_sqrt = _readonly(np.sqrt(config.capacities))
        self.c_isqrt = _readonly(c_isqrt)

    @property
    def size(self) -> int:
        return self.config.size

    def _advance(self, u: np.ndarray, s: float, dt: float) -> np.ndarray:
        if dt == 0.0:
            return u.copy()
        e = self.decomposition.eigenvectors
        lam = self.eigenvalues
        vhat = e.T @ (self.c_sqrt * u)
        # Drive enters the modal equations as b = E^T (s/sqrt(C1), 0, ...).
        b = (s * self.c_isqrt[0]) * e[0, :]
        growth = np.exp(lam * dt)
        new = vhat * growth
        if s == 0.0:
            # keep the zero-drive path bit-identical to free evolution
            return self.c_isqrt * (e @ new)
        inhom = np.where(
            self.zero_mode,
            b * dt,
            np.divide(b, lam, out=np.zeros_like(b), where=~self.zero_mode) * np.expm1(lam * dt),
        )
        return self.c_isqrt * (e @ (new + inhom))

    def free(self, u: np.ndarray, dt: float) -> np.ndarray:
        return self._advance(u, 0.0, dt)

    def driven(self, u: np.ndarray, s: float, dt: float) -> np.ndarray:
        return self._advance(u, s, dt)

    def step_matrix(self, dt: float) -> np.ndarray:
        """Dense K x K map u(t) -> u(t + dt) under free flow."""
        e = self.decomposition.eigenvectors
        growth = np.exp(self.eigenvalues * dt)
        return (self.c_isqrt[:, None] * e) @ (growth[:, None] * (e.T * self.c_sqrt[None, :]))


class LeakySynapse:
    """Single-variable synapse with exponential leak du/dt = -u/tau + s.

    Interface-compatible with Propagator so it can stand in for a chain in
    the memory benchmark and protocol code.
    """

    def __init__(self, tau: float):
        if not np.isfinite(tau) or tau <= 0.0:
            raise InvalidInputError("leak timescale must be finite and positive")
        self.tau = float(tau)
        self.config = ChainConfig([1.0])

    @property
    def size(self) -> int:
        return 1

    def free(self, u: np.ndarray, dt: float) -> np.ndarray:
        return u * np.exp(-dt / self.tau)

    def driven(self, u: np.ndarray, s: float, dt: float) -> np.ndarray:
        decay = np.exp(-dt / self.tau)
        return u * decay + s * self.tau * (1.0 - decay)

    def step_matrix(self, dt: float) -> np.ndarray:
        return np.array([[np.exp(-dt / self.tau)]])


def build_propagator(config: ChainConfig) -> Propagator:
    return Propagator(config)


def evolve_free(p: Propagator, state: ChainState, dt: float) -> ChainState:
    """Exact homogeneous evolution by dt >= 0 seconds."""
    if dt < 0.0:
        raise InvalidInputError(f"dt must be non-negative, got {dt}")
    if dt == 0.0:
        return state
    return ChainState(p.free(state.u, dt), state.time + dt)


def evolve_driven(p: Propagator, state: ChainState, s: float, dt: float) -> ChainState:
    """Exact evolution with constant drive s (weight/s) into the first beaker."""
    if dt < 0.0:
        raise InvalidInputError(f"dt must be non-negative, got {dt}")
    if not np.isfinite(s):
        raise InvalidInputError("drive must be finite")
    if dt == 0.0:
        return state
    return ChainState(p.driven(state.u, s, dt), state.time + dt)


def effective_weight(state: ChainState) -> float:
    """The visible weight: the level of the first beaker."""
    return float(state.u[0])


def conserved_total(config: ChainConfig, state: ChainState) -> float:
    """sum(C_k u_k); invariant under free evolution."""
    return float(np.dot(config.capacities, state.u))


def slowest_timescale(p: Propagator) -> float:
    """1/|lambda| of the slowest decaying mode (needs at least 2 beakers)."""
    if p.size < 2:
        raise InvalidInputError("a single beaker has no relaxation mode")
    lam = p.eigenvalues[~p.zero_mode]
    return float(1.0 / np.min(np.abs(lam)))


@dataclass(frozen=True)
class DriveRule:
    """Voltage-to-drive-rate mapping, optionally weakening toward bounds.

    Constant mode: s = base_rate * amplitude_volts.  Soft-bounded mode scales
    the positive drive by (u_max - u1)/(u_max - u_min) and the negative drive
    by (u1 - u_min)/(u_max - u_min); past a bound the saturating direction is
    clamped to zero.
    """

    mode: str = "constant"
    base_rate: float = DEFAULT_BASE_RATE
    bounds: tuple[float, float] | None = None

    def __post_init__(self):
        if self.mode not in ("constant", "soft"):
            raise InvalidInputError(f"unknown drive mode {self.mode!r}")
        if self.mode == "soft":
            if self.bounds is None:
                raise InvalidInputError("soft-bounded rule needs (u_min, u_max)")
            lo, hi = self.bounds
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise InvalidInputError("bounds must satisfy u_min < u_max")

    @classmethod
    def constant(cls, base_rate: float = DEFAULT_BASE_RATE) -> "DriveRule":
        return cls(mode="constant", base_rate=base_rate)

    @classmethod
    def soft_bounded(
        cls, u_min: float, u_max: float, base_rate: float = DEFAULT_BASE_RATE
    ) -> "DriveRule":
        return cls(mode="soft", base_rate=base_rate, bounds=(u_min, u_max))


def drive_strength(rule: DriveRule, u1: float, amplitude_volts: float) -> float:
    """Weight change per second produced by a write at the given voltage."""
    s = rule.base_rate * amplitude_volts
    if rule.mode == "constant" or s == 0.0:
        return s
    lo, hi = rule.bounds
    width = hi - lo
    if s > 0.0:
        factor = max(0.0, hi - u1) / width
    else:
        factor = max(0.0, u1 - lo) / width
    return s * factor


def euler_oracle(
    config: ChainConfig,
    state: ChainState,
    drive: Callable[[float], float],
    step: float,
    horizon: float,
) -> ChainState:
    """Explicit forward-Euler integration of the driven chain (test oracle).

    Deliberately ignorant of the propagator's modal solution: it steps the
    raw ODE C du/dt = G u + s(t) e1.  Rejects steps at or beyond the
    explicit-Euler stability bound 2/max|lambda|.
    """
    if step <= 0.0:
        raise InvalidInputError("step must be positive")
    if horizon < 0.0:
        raise InvalidInputError("horizon must be non-negative")
    g = build_coupling_matrix(config)
    caps = config.capacities
    if config.size > 1:
        lam = eig_sym(g * np.outer(1.0 / np.sqrt(caps), 1.0 / np.sqrt(caps))).eigenvalues
        lam_max = float(np.max(np.abs(lam)))
        if lam_max > 0.0 and step >= 2.0 / lam_max:
            raise InvalidInputError(
                f"step {step} is at or beyond the stability bound {2.0 / lam_max}"
            )
    a = g / caps[:, None]
    inv_c1 = 1.0 / caps[0]
    u = state.u.copy()
    t = state.time
    n_full = int(np.floor(horizon / step + 1e-12))
    for i in range(n_full):
        du = a @ u
        du[0] += drive(t) * inv_c1
        u = u + step * du
        t = state.time + (i + 1) * step
    rem = horizon - n_full * step
    if rem > 1e-15 * max(1.0, horizon):
        du = a @ u
        du[0] += drive(t) * inv_c1
        u = u + rem * du
    return ChainState(u, state.time + horizon)
