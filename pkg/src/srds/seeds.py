"""Deterministic seed derivation.

Every random choice hangs off one root seed through labelled derivation
steps (scenario -> repetition -> party), so one repetition can be replayed
alone.
"""
from __future__ import annotations

import hashlib
import random
from typing import Union

SeedLike = Union[int, str, bytes]


def _as_bytes(x: SeedLike) -> bytes:
    if isinstance(x, bytes):
        return x
    if isinstance(x, int):
        return b"i" + str(x).encode()
    return b"s" + x.encode()


def derive(root: SeedLike, *labels: SeedLike) -> bytes:
    """32-byte child seed for ``root`` along the label path."""
    h = hashlib.blake2b(digest_size=32, person=b"srds-derive")
    h.update(_as_bytes(root))
    for lab in labels:
        b = _as_bytes(lab)
        h.update(len(b).to_bytes(4, "big"))
        h.update(b)
    return h.digest()


def rng(root: SeedLike, *labels: SeedLike) -> random.Random:
    """A ``random.Random`` stream seeded from the derivation tree."""
    return random.Random(int.from_bytes(derive(root, *labels), "big"))
