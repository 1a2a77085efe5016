"""Merkle hash proof system.

Leaves hash as ``H(seed, 0x00 || x)``, inner nodes as
``H(seed, 0x01 || left || right)``; the leaf list is padded to a power of two
with the all-zero block. A proof lists ``(index, sibling)`` for every level
from the leaves to the root; the root entry carries an empty sibling, so a
tree over ``2^d`` padded leaves yields ``d + 1`` entries.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import ParameterError
from .primitive import DEFAULT, Primitive

DIGEST = 32
PAD = bytes(DIGEST)
_LEAF, _NODE = b"\x00", b"\x01"


@dataclass(frozen=True)
class MerkleProof:
    path: tuple[tuple[int, bytes], ...]


def merkle_setup(prim: Primitive = DEFAULT, entropy: bytes = b"") -> bytes:
    """Public hash seed (the key of the keyed hash)."""
    return prim.expand(b"srds-mk-setup", entropy, DIGEST)


def _leaf(seed: bytes, x: bytes, prim: Primitive) -> bytes:
    return prim.expand(b"srds-merkle", _LEAF + x, DIGEST, key=seed)


def _node(seed: bytes, a: bytes, b: bytes, prim: Primitive) -> bytes:
    return prim.expand(b"srds-merkle", _NODE + a + b, DIGEST, key=seed)


def _levels(seed: bytes, leaves: Sequence[bytes], prim: Primitive) -> list[list[bytes]]:
    if not leaves:
        raise ParameterError("empty leaf list")
    size = 1
    while size < len(leaves):
        size *= 2
    padded = list(leaves) + [PAD] * (size - len(leaves))
    levels = [[_leaf(seed, x, prim) for x in padded]]
    while len(levels[-1]) > 1:
        cur = levels[-1]
        levels.append([_node(seed, cur[k], cur[k + 1], prim) for k in range(0, len(cur), 2)])
    return levels


class MerkleTree:
    """All levels of one tree; answers many proof queries cheaply."""

    def __init__(self, seed: bytes, leaves: Sequence[bytes], prim: Primitive = DEFAULT):
        self.seed = seed
        self.count = len(leaves)
        self.levels = _levels(seed, leaves, prim)

    @property
    def root(self) -> bytes:
        return self.levels[-1][0]

    def proof(self, leaf_index: int) -> MerkleProof:
        if not 0 <= leaf_index < self.count:
            raise ParameterError("leaf index out of range")
        path = []
        idx = leaf_index
        for lvl in self.levels[:-1]:
            path.append((idx, lvl[idx ^ 1]))
            idx //= 2
        path.append((0, b""))
        return MerkleProof(tuple(path))


def merkle_hash(seed: bytes, leaves: Sequence[bytes], prim: Primitive = DEFAULT) -> bytes:
    return _levels(seed, leaves, prim)[-1][0]


def merkle_proof(seed: bytes, leaves: Sequence[bytes], leaf_index: int,
                 prim: Primitive = DEFAULT) -> MerkleProof:
    return MerkleTree(seed, leaves, prim).proof(leaf_index)


def merkle_verify(seed: bytes, leaf: bytes, digest: bytes, proof: MerkleProof,
                  prim: Primitive = DEFAULT) -> bool:
    path = proof.path
    if not path:
        return False
    cur = _leaf(seed, leaf, prim)
    idx = path[0][0]
    for i, sib in path[:-1]:
        if i != idx or len(sib) != DIGEST:
            return False
        cur = _node(seed, cur, sib, prim) if i % 2 == 0 else _node(seed, sib, cur, prim)
        idx = i // 2
    last_i, last_sib = path[-1]
    return last_i == idx == 0 and last_sib == b"" and cur == digest
