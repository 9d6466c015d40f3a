"""Stable derivation of purpose-specific sub-seeds.

Hash-based so the mapping is independent of call order and of Python's
per-process hash randomization; every (seed, tags) pair names one stream.
"""

from __future__ import annotations

import hashlib


def derive_seed(seed: int, *tags) -> int:
    """A reproducible 62-bit sub-seed for the given purpose tags."""
    blob = repr((int(seed),) + tags).encode()
    return int.from_bytes(hashlib.blake2b(blob, digest_size=8).digest(), "little") >> 2
