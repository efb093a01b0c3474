"""Deterministic hashing helpers shared by arm assignment, variant draws, and simulation.

Python's builtin hash() is salted per process, so anything that must be stable
across runs (and across machines) goes through sha256 instead.
"""

from __future__ import annotations

import hashlib


def stable_hash64(*parts: object) -> int:
    """Collapse the parts into a 64-bit integer, stable across processes."""
    payload = "\x1f".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")


def unit_interval(*parts: object) -> float:
    """Map the parts to a deterministic float in [0, 1)."""
    return stable_hash64(*parts) / 2**64
