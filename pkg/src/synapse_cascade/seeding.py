"""Deterministic seed expansion.

A single 64-bit seed is expanded into per-trial seeds with the splitmix64
finite-state generator, so a run is reproducible no matter how trials are
scheduled across threads.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> int:
    """One splitmix64 output step for a 64-bit state."""
    z = (state + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def expand_seeds(seed: int, count: int) -> list[int]:
    """Expand a master seed into `count` child seeds (splitmix64 stream)."""
    state = seed & MASK64
    out = []
    for _ in range(count):
        state = (state + 0x9E3779B97F4A7C15) & MASK64
        out.append(splitmix64(state))
    return out


def derive_seed(seed: int, tag: int) -> int:
    """Derive an independent stream seed for a tagged purpose."""
    return splitmix64((seed ^ (tag * 0xD1342543DE82EF95)) & MASK64)
