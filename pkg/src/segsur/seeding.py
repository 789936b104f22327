"""Stable 64-bit seed derivation so batches are reproducible and order-independent."""

from __future__ import annotations

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def stable_seed(*parts: int) -> int:
    """Mix integers into one 64-bit seed, invariant to call site and platform."""
    h = _splitmix64(0x5E6A_C0DE)
    for p in parts:
        h = _splitmix64(h ^ (int(p) & _MASK64))
    return h
