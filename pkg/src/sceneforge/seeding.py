"""Derived RNG streams.

Every random decision in the package flows from one user-provided seed.
Sub-streams are derived by hashing the seed with a stable label so that
per-item work is order-independent and reruns are byte-identical.
Python's built-in hash() is salted per process, so sha256 it is.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["derive_seed", "rng_for"]


def derive_seed(seed: int, *labels: object) -> int:
    """A 63-bit seed unique to (seed, *labels), stable across processes."""
    key = ":".join([str(int(seed))] + [str(x) for x in labels])
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def rng_for(seed: int, *labels: object) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, *labels))
