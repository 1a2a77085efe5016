"""SRDS skeleton built on proof-carrying data.

Signatures are truncated transcripts ``z' = (m, c, max, min, gamma)`` plus a
proof. Aggregation checks children, then asks a :class:`ProofBackend` for a
proof that the output transcript follows a compliant derivation. Verification
recomputes the Merkle commitment to the key list and checks ``c >= n/3``.

Only a transparent mock backend ships: its proofs are handles into a witness
store, and verifying one replays the whole derivation through the compliance
predicate. It is not succinct.
"""
from __future__ import annotations

import bisect
import hashlib
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional, Sequence

from . import ots
from .core import (EMPTY_RANGE, SrdsParams, SrdsScheme, SrdsSignature, default_alpha_bytes)
from .errors import MalformedInputError, ParameterError
from .merkle import DIGEST, MerkleProof, MerkleTree, merkle_setup, merkle_verify
from .primitive import DEFAULT, Primitive


@dataclass(frozen=True)
class PcdTranscript:
    m: bytes
    c: int
    max: int
    min: int
    gamma: Optional[tuple[bytes, ...]]
    h_vk: bytes
    k: Optional[ots.VerKey] = None
    p: Optional[MerkleProof] = None

    @property
    def is_base(self) -> bool:
        return self.max == self.min and self.gamma is not None

    def check_shape(self) -> None:
        if self.gamma is not None:
            if self.max != self.min:
                raise MalformedInputError("signature present on a non-singleton range")
        elif self.k is not None or self.p is not None:
            raise MalformedInputError("key or proof attached to a non-base transcript")
        if self.c < 0 or self.min < 0 or self.max < 0:
            raise MalformedInputError("negative field")

    def short(self) -> bytes:
        """Encoding of z' = (m, c, max, min, gamma)."""
        out = [len(self.m).to_bytes(4, "big"), self.m, self.c.to_bytes(4, "big"),
               self.max.to_bytes(4, "big"), self.min.to_bytes(4, "big")]
        if self.gamma is None:
            out.append(b"\x00")
        else:
            out.append(b"\x01" + len(self.gamma).to_bytes(2, "big") + b"".join(self.gamma))
        return b"".join(out)

    def encode(self) -> bytes:
        out = [self.short(), self.h_vk]
        if self.k is None:
            out.append(b"\x00")
        else:
            kb = ots.encode_vk(self.k)
            out.append(b"\x01" + len(kb).to_bytes(4, "big") + kb)
        if self.p is None:
            out.append(b"\x00")
        else:
            out.append(b"\x01" + len(self.p.path).to_bytes(2, "big"))
            for idx, sib in self.p.path:
                out.append(idx.to_bytes(4, "big") + len(sib).to_bytes(1, "big") + sib)
        return b"".join(out)


class ComplianceContext:
    """What the predicate needs besides transcripts: Merkle seed and DS verification."""

    def __init__(self, merkle_seed: bytes, digest: Callable[[bytes], tuple[int, ...]],
                 prim: Primitive = DEFAULT):
        self.seed = merkle_seed
        self.digest = digest
        self.prim = prim


def key_leaf(i: int, vk) -> bytes:
    return i.to_bytes(4, "big") + ots.encode_vk(vk)


def compliance_check(inputs: Sequence[PcdTranscript], output: PcdTranscript,
                     ctx: ComplianceContext) -> bool:
    if not inputs:
        raise MalformedInputError("compliance needs at least one input")
    for z in list(inputs) + [output]:
        z.check_shape()
    # (1) one key commitment throughout
    if any(z.h_vk != output.h_vk for z in inputs):
        return False
    # (2) base inputs: signature and key membership; a base counts once
    for z in inputs:
        if z.is_base:
            if z.k is None or z.p is None or z.c != 1:
                return False
            try:
                if not ots.ots_verify(z.k, ctx.digest(z.m), ots.OtsSignature(z.gamma), ctx.prim):
                    return False
            except MalformedInputError:
                return False
            if not merkle_verify(ctx.seed, key_leaf(z.max, z.k), output.h_vk, z.p, ctx.prim):
                return False
    # (3) ranges well formed and strictly increasing
    for j, z in enumerate(inputs):
        if z.min > z.max:
            return False
        if j + 1 < len(inputs) and not z.max < inputs[j + 1].min:
            return False
    # (4)-(6)
    return (output.min == inputs[0].min and output.max == inputs[-1].max
            and output.c == sum(z.c for z in inputs))


class ProofBackend:
    def prove(self, inputs: Sequence[tuple[PcdTranscript, Optional[bytes]]],
              output: PcdTranscript) -> bytes:
        raise NotImplementedError

    def verify(self, z: PcdTranscript, proof: Optional[bytes]) -> bool:
        raise NotImplementedError


class MockBackend(ProofBackend):
    """Witness store keyed by a digest of the derivation step.

    ``verify`` walks the stored derivation down to base signatures and runs
    the compliance predicate at every step.
    """

    name = "mock"

    def __init__(self, ctx: ComplianceContext):
        self.ctx = ctx
        self.store: dict[bytes, tuple[PcdTranscript, tuple]] = {}
        self._ok: dict[tuple[bytes, bytes], bool] = {}

    def prove(self, inputs, output) -> bytes:
        h = hashlib.blake2b(digest_size=DIGEST, person=b"srds-mock-pi")
        h.update(output.encode())
        for z, pi in inputs:
            h.update(z.encode())
            h.update(pi or b"")
        handle = h.digest()
        self.store[handle] = (output, tuple(inputs))
        return handle

    def verify(self, z: PcdTranscript, proof: Optional[bytes]) -> bool:
        if not proof:
            return False
        key = (proof, z.encode())
        hit = self._ok.get(key)
        if hit is not None:
            return hit
        ok = self._walk(z, proof)
        self._ok[key] = ok
        return ok

    def _walk(self, z, proof) -> bool:
        rec = self.store.get(proof)
        if rec is None or rec[0] != z:
            return False
        inputs = rec[1]
        try:
            if not compliance_check([zi for zi, _ in inputs], z, self.ctx):
                return False
        except MalformedInputError:
            return False
        return all(zi.is_base or self.verify(zi, pi) for zi, pi in inputs)

    def derivation_bases(self, proof: bytes) -> list[PcdTranscript]:
        """Base transcripts reachable from ``proof`` (oracle view)."""
        out = []
        _, inputs = self.store[proof]
        for zi, pi in inputs:
            out.extend([zi] if zi.is_base else self.derivation_bases(pi))
        return out


@dataclass(frozen=True)
class PcdConfig:
    kappa: int = 16
    msg_bits: int = 16
    alpha_const: int = 64
    alpha_bytes: Optional[int] = None
    proof_backend: str = "mock"


@dataclass(frozen=True)
class PcdSet:
    message: bytes
    h_vk: bytes
    elems: tuple[tuple[PcdTranscript, Optional[bytes]], ...]
    size: int


class PcdScheme(SrdsScheme):
    name = "pcd"
    needs_trusted_pki = False

    def __init__(self, config: PcdConfig = PcdConfig(), prim: Primitive = DEFAULT):
        if config.proof_backend != "mock":
            raise ParameterError(f"unknown proof backend {config.proof_backend!r}")
        self.config = config
        self.prim = prim
        self._dcache: dict[bytes, tuple[int, ...]] = {}
        self._trees: dict[int, tuple[Any, MerkleTree]] = {}
        self.backend: Optional[MockBackend] = None
        self._seed = b""

    # -- setup / keys -----------------------------------------------------
    def setup(self, n: int, seed: bytes = b"") -> SrdsParams:
        c = self.config
        self._seed = merkle_setup(self.prim, seed)
        self.backend = MockBackend(ComplianceContext(self._seed, self.digest_bits, self.prim))
        alpha = c.alpha_bytes or default_alpha_bytes(n, c.kappa, c.alpha_const)
        pp = (n.to_bytes(4, "big") + c.kappa.to_bytes(4, "big") + c.msg_bits.to_bytes(4, "big")
              + alpha.to_bytes(4, "big") + self._seed)
        return SrdsParams(pp=pp, n=n, kappa=c.kappa, alpha_limit=alpha, config=c)

    def keygen(self, pp: SrdsParams, seed: bytes):
        pair = ots.ots_keygen(self.prim.expand(b"srds-pcd-k", seed, 32),
                              self.config.msg_bits, self.config.kappa, self.prim)
        return pair.vk, pair

    def vk_bytes(self, vk) -> bytes:
        return ots.encode_vk(vk)

    def digest_bits(self, m: bytes) -> tuple[int, ...]:
        bits = self._dcache.get(m)
        if bits is None:
            L = self.config.msg_bits
            bits = ots.bits_of(self.prim.expand(b"srds-owf-msg", m, (L + 7) // 8), L)
            if len(self._dcache) > 4096:
                self._dcache.clear()
            self._dcache[m] = bits
        return bits

    def key_tree(self, keys: Sequence[Any]) -> MerkleTree:
        hit = self._trees.get(id(keys))
        if hit is not None and hit[0] is keys:
            return hit[1]
        leaves = []
        for i, vk in enumerate(keys, start=1):
            try:
                leaves.append(key_leaf(i, vk))
            except (TypeError, AttributeError, IndexError):
                leaves.append(i.to_bytes(4, "big") + repr(vk).encode())
        tree = MerkleTree(self._seed, leaves, self.prim)
        if len(self._trees) > 8:
            self._trees.clear()
        self._trees[id(keys)] = (keys, tree)
        return tree

    # -- wire format ------------------------------------------------------
    def _payload(self, c: int, gamma, proof) -> bytes:
        out = [c.to_bytes(4, "big")]
        out.append(b"\x00" if gamma is None else b"\x01" + len(gamma).to_bytes(2, "big") + b"".join(gamma))
        out.append(b"\x00" if proof is None else b"\x01" + proof)
        return b"".join(out)

    def parse(self, sig: SrdsSignature):
        """(c, gamma, proof) from a signature envelope."""
        if sig.body is not None:
            return sig.body
        d, w = sig.payload, self.config.kappa // 8
        if len(d) < 6:
            raise MalformedInputError("truncated pcd signature")
        c = int.from_bytes(d[:4], "big")
        pos, gamma = 4, None
        if d[pos] == 1:
            ln = int.from_bytes(d[pos + 1:pos + 3], "big")
            pos += 3
            if pos + ln * w > len(d):
                raise MalformedInputError("truncated gamma")
            gamma = tuple(d[pos + k * w:pos + (k + 1) * w] for k in range(ln))
            pos += ln * w
        elif d[pos] != 0:
            raise MalformedInputError("bad gamma flag")
        else:
            pos += 1
        if pos >= len(d):
            raise MalformedInputError("missing proof flag")
        if d[pos] == 1:
            proof = d[pos + 1:]
            if len(proof) != DIGEST:
                raise MalformedInputError("bad proof length")
        elif d[pos] == 0 and pos + 1 == len(d):
            proof = None
        else:
            raise MalformedInputError("bad proof flag")
        return c, gamma, proof

    # -- algorithms -------------------------------------------------------
    def sign(self, pp: SrdsParams, i: int, sk, m: bytes) -> Optional[SrdsSignature]:
        if sk is None:
            return None
        gamma = ots.ots_sign(sk, self.digest_bits(m)).preimages
        return SrdsSignature(m, self._payload(1, gamma, None), i, i, (1, gamma, None))

    def _base_ok(self, keys, i: int, m: bytes, gamma) -> bool:
        if not 1 <= i <= len(keys):
            return False
        try:
            return ots.ots_verify(keys[i - 1], self.digest_bits(m), ots.OtsSignature(gamma), self.prim)
        except (MalformedInputError, TypeError, IndexError, AttributeError):
            return False

    def aggregate1(self, pp: SrdsParams, keys, m: bytes, sigs: Iterable[SrdsSignature],
                   keep: Optional[Callable[[int, int], bool]] = None) -> Optional[PcdSet]:
        tree = self.key_tree(keys)
        h_vk = tree.root
        cands: dict[bytes, tuple[PcdTranscript, Optional[bytes]]] = {}
        for s in sigs:
            if s is None or s.message != m:
                continue
            try:
                c, gamma, proof = self.parse(s)
            except MalformedInputError:
                continue
            lo, hi = s.id_min, s.id_max
            if keep is not None and not keep(lo, hi):
                continue
            if lo == hi and proof is None and gamma is not None:
                if c != 1 or not self._base_ok(keys, hi, m, gamma):
                    continue
                z = PcdTranscript(m, 1, hi, lo, gamma, h_vk, keys[hi - 1], tree.proof(hi - 1))
            else:
                if gamma is not None:
                    continue
                z = PcdTranscript(m, c, hi, lo, None, h_vk)
                if not self.backend.verify(z, proof):
                    continue
            cands.setdefault(z.encode() + (proof or b""), (z, proof))
        chosen = _max_weight_disjoint(list(cands.items()))
        size = DIGEST + sum(len(k) for k, _ in chosen)
        if size > pp.alpha_limit:
            return None
        return PcdSet(m, h_vk, tuple(e for _, e in chosen), size)

    def aggregate2(self, pp: SrdsParams, m: bytes, s_sig: PcdSet) -> Optional[SrdsSignature]:
        if s_sig is None:
            return None
        elems = s_sig.elems
        c = sum(z.c for z, _ in elems)
        lo, hi = (elems[0][0].min, elems[-1][0].max) if elems else EMPTY_RANGE
        z_out = PcdTranscript(m, c, hi, lo, None, s_sig.h_vk)
        proof = self.backend.prove(elems, z_out)
        sig = SrdsSignature(m, self._payload(c, None, proof), lo, hi, (c, None, proof))
        return sig if sig.size <= pp.alpha_limit else None

    def count(self, pp: SrdsParams, keys, m: bytes, sig: Optional[SrdsSignature]) -> int:
        """Certified count of ``sig`` on ``m``; -1 if it does not check out."""
        if sig is None or sig.message != m or sig.size > pp.alpha_limit:
            return -1
        try:
            c, gamma, proof = self.parse(sig)
        except MalformedInputError:
            return -1
        if gamma is not None:
            return -1
        z = PcdTranscript(m, c, sig.id_max, sig.id_min, None, self.key_tree(keys).root)
        return c if self.backend.verify(z, proof) else -1

    def verify(self, pp: SrdsParams, keys, m: bytes, sig: Optional[SrdsSignature]) -> bool:
        c = self.count(pp, keys, m, sig)
        return c >= 0 and 3 * c >= pp.n

    # -- helpers ----------------------------------------------------------
    def encode_set(self, m: bytes, s_sig: PcdSet) -> bytes:
        parts = [len(m).to_bytes(4, "big"), m, s_sig.h_vk]
        for z, pi in s_sig.elems:
            parts.append(z.encode())
            parts.append(pi or b"")
        return b"".join(parts)

    def filter_ranges(self, s_sig: PcdSet, keep) -> PcdSet:
        kept = tuple(e for e in s_sig.elems if keep(e[0].min, e[0].max))
        if len(kept) == len(s_sig.elems):
            return s_sig
        size = DIGEST + sum(len(z.encode()) + len(pi or b"") for z, pi in kept)
        return PcdSet(s_sig.message, s_sig.h_vk, kept, size)

    def set_size(self, s_sig: PcdSet) -> int:
        return s_sig.size

    def members(self, s_sig: PcdSet) -> int:
        return len(s_sig.elems)


def _max_weight_disjoint(items):
    """Pick members with pairwise disjoint ranges maximizing the summed count.

    Weighted interval scheduling; ties resolve toward the canonical order so
    the result is independent of input order. Output sorted by range.
    """
    items = sorted(items, key=lambda kv: (kv[1][0].max, kv[1][0].min, kv[0]))
    if not items:
        return []
    ends = [e[0].max for _, e in items]
    best = [(0, ())] * (len(items) + 1)  # best[j]: over the first j items
    for j, (key, (z, pi)) in enumerate(items, start=1):
        p = bisect.bisect_left(ends, z.min, 0, j - 1)  # items ending strictly before z.min
        take_w, take_set = best[p][0] + z.c, best[p][1] + (j - 1,)
        skip = best[j - 1]
        best[j] = (take_w, take_set) if take_w > skip[0] else skip
    return [items[k] for k in best[-1][1]]
