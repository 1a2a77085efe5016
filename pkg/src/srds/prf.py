"""PRF-driven mapping from a party to a pseudorandom subset of [n]."""
from __future__ import annotations

from .errors import ParameterError
from .primitive import DEFAULT, Primitive

_BLOCK = 8


def prf_blocks(seed: bytes, label: bytes, count: int, start: int = 0,
               prim: Primitive = DEFAULT) -> list[int]:
    """``count`` 64-bit PRF output blocks for ``label`` starting at block ``start``."""
    out: list[int] = []
    per_call = 8  # 64-byte digests hold 8 blocks
    ctr = start // per_call
    skip = start % per_call
    while len(out) < count:
        chunk = prim.expand(b"srds-prf", ctr.to_bytes(8, "big") + label, 64, key=seed)
        for k in range(skip, per_call):
            out.append(int.from_bytes(chunk[k * _BLOCK:(k + 1) * _BLOCK], "big"))
        skip = 0
        ctr += 1
    return out[:count]


def prf_subset(seed: bytes, party_id: int, n: int, out_size: int,
               prim: Primitive = DEFAULT) -> frozenset[int]:
    """Exactly ``out_size`` distinct indices in ``range(n)``.

    Rejection sampling over 64-bit blocks: a block is used only if it falls
    below the largest multiple of n (no modulo bias), and repeats are skipped.
    """
    if n < 1 or out_size < 1:
        raise ParameterError("n and out_size must be positive")
    if out_size > n:
        raise ParameterError("out_size exceeds n")
    if out_size == n:
        return frozenset(range(n))
    limit = (1 << 64) - ((1 << 64) % n)
    label = party_id.to_bytes(8, "big")
    chosen: set[int] = set()
    pos = 0
    while len(chosen) < out_size:
        batch = prf_blocks(seed, label, 8, pos, prim)
        pos += 8
        for v in batch:
            if v < limit:
                chosen.add(v % n)
                if len(chosen) == out_size:
                    break
    return frozenset(chosen)
