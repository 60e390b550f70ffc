"""Deterministic random-number streams.

All randomness in the package flows through :func:`derive_rng`: a Philox
counter-based generator keyed by ``SeedSequence((seed, *keys))``.  The same
64-bit seed plus the same derivation keys always reproduces the same stream,
independent of call order, worker count, or platform.  Per-task streams are
derived by appending task keys (e.g. a tree index, or a circuit-id hash from
:func:`stable_key`), never by sharing one generator across tasks.
"""

import hashlib

import numpy as np


def stable_key(text: str) -> int:
    """Map a string to a stable 64-bit integer (process-independent)."""
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """Return a Philox generator keyed by ``(seed, *keys)``."""
    entropy = (int(seed),) + tuple(int(k) for k in keys)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
