"""Seedable counter-based random source.

All sampling in the harness goes through `make_rng`, which wraps the Philox
counter-based generator: identical (seed, stream) always yields identical
draws, independent of platform or call history. Test vectors are frozen in
the test suite.
"""
from __future__ import annotations

import numpy as np

__all__ = ["make_rng"]


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for a (seed, stream) pair."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    return np.random.Generator(np.random.Philox(key=seed + (stream << 32)))
