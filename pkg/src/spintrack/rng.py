"""Deterministic random-number plumbing.

Every stochastic routine in the toolkit draws from ``numpy.random.Generator``
instances backed by PCG64 and seeded with explicit 64-bit integers, so a
(seed, parameters) pair reproduces a trace bit for bit on any platform.

Independent streams are derived with :func:`child_seed`, a splitmix64-style
mixer: child = splitmix64(parent + (index + 1) * GOLDEN). The mixer is a
bijection on 64-bit words, so distinct (parent, index) pairs cannot collide
for a fixed parent.
"""
from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One splitmix64 finalization round (Steele, Lea, Flood mixing constants)."""
    x = (x + _GOLDEN) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def child_seed(seed: int, index: int) -> int:
    """Derive the seed of stream ``index`` from a parent seed."""
    if index < 0:
        raise ValueError("stream index must be non-negative")
    return splitmix64((int(seed) + (index + 1) * _GOLDEN) & _MASK64)


def generator(seed: int) -> np.random.Generator:
    """A PCG64 generator seeded with a fixed 64-bit integer."""
    return np.random.Generator(np.random.PCG64(int(seed) & _MASK64))


def child_generator(seed: int, index: int) -> np.random.Generator:
    return generator(child_seed(seed, index))
