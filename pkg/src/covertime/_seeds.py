"""Deterministic random-stream derivation.

Every Monte Carlo entry point takes a 64-bit master seed.  Independent
streams for sub-tasks and replicas are derived with ``SeedSequence`` so
that results do not depend on scheduling or on the order in which
components consume randomness.  The walk kernels take one 32-bit state
per replica; aggregation order is fixed by replica index, so a parallel
run would reduce to exactly the same numbers as a serial one.
"""

from __future__ import annotations

import numpy as np

# Used whenever the caller (library or CLI) does not supply a seed.
DEFAULT_SEED = 1729


def normalize_seed(seed) -> int:
    """Coerce ``seed`` to a plain non-negative int, defaulting when None."""
    if seed is None:
        return DEFAULT_SEED
    s = int(seed)
    if s < 0:
        raise ValueError("seed must be non-negative")
    return s


def derive_rng(seed, *path: int) -> np.random.Generator:
    """Generator for the stream addressed by ``path`` under ``seed``."""
    seed = normalize_seed(seed)
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(path))
    return np.random.Generator(np.random.PCG64(ss))


def replica_states(seed, count: int, *path: int) -> np.ndarray:
    """One uint32 kernel seed per replica, stable under ``(seed, path)``."""
    seed = normalize_seed(seed)
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(path))
    return ss.generate_state(count, dtype=np.uint32)


def as_rng(rng_or_seed) -> np.random.Generator:
    """Accept either a Generator or a seed (possibly None)."""
    if isinstance(rng_or_seed, np.random.Generator):
        return rng_or_seed
    return derive_rng(rng_or_seed)
