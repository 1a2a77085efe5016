"""SRDS from one-way functions over Lamport signatures.

Each virtual party tosses a biased coin: with probability ell/n it gets a
real key pair, otherwise an obliviously sampled verification key. A
signature is a set of ``(index, preimages)`` tuples on one message;
aggregation is set union with per-index dedup, and a set verifies when it
holds more than ``threshold`` distinct valid tuples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Optional, Sequence

from . import ots
from .core import (EMPTY_RANGE, SrdsParams, SrdsScheme, SrdsSignature, default_alpha_bytes,
                   read_varint, varint)
from .errors import MalformedInputError, ParameterError
from .primitive import DEFAULT, Primitive

DEFAULT_RATIO = Fraction(1, 6)  # ell'/3 with ell' = ell/2


@dataclass(frozen=True)
class OwfSrdsConfig:
    ell: int
    kappa: int = 16
    msg_bits: int = 16
    threshold_ratio: Fraction = DEFAULT_RATIO
    c_exp: Optional[float] = None
    alpha_const: int = 64
    alpha_bytes: Optional[int] = None
    force_oblivious: bool = False  # test hook: bias forced to zero

    def __post_init__(self):
        if self.ell < 8:
            raise ParameterError("ell must be at least 8")
        object.__setattr__(self, "threshold_ratio", Fraction(self.threshold_ratio))

    @property
    def threshold(self) -> Fraction:
        return self.ell * self.threshold_ratio

    @classmethod
    def asymptotic(cls, n: int, c: float = 2.0, **kw) -> "OwfSrdsConfig":
        return cls(ell=max(8, math.ceil(math.log2(n) ** c)), c_exp=c, **kw)

    @classmethod
    def desk(cls, n: int, **kw) -> "OwfSrdsConfig":
        return cls(ell=max(18, math.ceil(math.log2(n) ** 2)), c_exp=2.0, **kw)


@dataclass(frozen=True)
class OwfSet:
    """Aggregate1 output: tuples sorted by index, all on ``message``."""
    message: bytes
    tuples: tuple[tuple[int, tuple[bytes, ...]], ...]
    size: int = field(default=0, compare=False)


def coin_bound(ell: int, n: int) -> int:
    """Keyed iff a 64-bit PRF block is below this bound."""
    if ell >= n:
        return 1 << 64
    return (ell << 64) // n


class OwfScheme(SrdsScheme):
    name = "owf"
    needs_trusted_pki = True

    def __init__(self, config: OwfSrdsConfig, prim: Primitive = DEFAULT):
        self.config = config
        self.prim = prim
        self._vcache: dict = {}
        self._dcache: dict = {}

    # -- setup / keys -----------------------------------------------------
    def setup(self, n: int, seed: bytes = b"") -> SrdsParams:
        c = self.config
        if n < 1:
            raise ParameterError("n must be positive")
        alpha = c.alpha_bytes or default_alpha_bytes(n, c.kappa, c.alpha_const)
        r = c.threshold_ratio
        pp = b"".join(x.to_bytes(4, "big") for x in
                      (n, c.ell, c.kappa, c.msg_bits, r.numerator, r.denominator, alpha))
        return SrdsParams(pp=pp, n=n, kappa=c.kappa, alpha_limit=alpha, config=c)

    def is_keyed_coin(self, pp: SrdsParams, seed: bytes) -> bool:
        if self.config.force_oblivious:
            return False
        block = int.from_bytes(self.prim.expand(b"srds-owf-coin", seed, 8), "big")
        return block < coin_bound(self.config.ell, pp.n)

    def keygen(self, pp: SrdsParams, seed: bytes):
        c = self.config
        if self.is_keyed_coin(pp, seed):
            pair = ots.ots_keygen(self.prim.expand(b"srds-owf-k", seed, 32), c.msg_bits, c.kappa, self.prim)
            return pair.vk, pair
        pair = ots.ots_oblivious_keygen(self.prim.expand(b"srds-owf-o", seed, 32), c.msg_bits, c.kappa, self.prim)
        return pair.vk, None

    def vk_bytes(self, vk) -> bytes:
        return ots.encode_vk(vk)

    # -- encodings --------------------------------------------------------
    @property
    def _w(self) -> int:
        return self.config.kappa // 8

    def tuple_size(self, index: int) -> int:
        return len(varint(index)) + self.config.msg_bits * self._w

    def _encode_tuples(self, tuples) -> bytes:
        return b"".join(varint(i) + b"".join(pre) for i, pre in tuples)

    def decode_tuples(self, payload: bytes):
        w, L = self._w, self.config.msg_bits
        pos, out = 0, []
        while pos < len(payload):
            i, pos = read_varint(payload, pos)
            end = pos + L * w
            if end > len(payload):
                raise MalformedInputError("truncated tuple")
            out.append((i, tuple(payload[pos + k * w:pos + (k + 1) * w] for k in range(L))))
            pos = end
        return tuple(out)

    def _body(self, sig: SrdsSignature):
        body = sig.body
        if body is None:
            body = self.decode_tuples(sig.payload)
            if body:
                lo, hi = min(i for i, _ in body), max(i for i, _ in body)
            else:
                lo, hi = EMPTY_RANGE
            if (lo, hi) != (sig.id_min, sig.id_max):
                raise MalformedInputError("range fields disagree with payload")
        return body

    def digest_bits(self, m: bytes) -> tuple[int, ...]:
        bits = self._dcache.get(m)
        if bits is None:
            L = self.config.msg_bits
            bits = ots.bits_of(self.prim.expand(b"srds-owf-msg", m, (L + 7) // 8), L)
            if len(self._dcache) > 4096:
                self._dcache.clear()
            self._dcache[m] = bits
        return bits

    def tuple_valid(self, keys: Sequence[Any], index: int, m: bytes, pre) -> bool:
        if not 1 <= index <= len(keys):
            return False
        vk = keys[index - 1]
        # keyed by identity; the stored key object guards against id reuse
        key = (id(vk), m, pre)
        hit = self._vcache.get(key)
        if hit is not None and hit[0] is vk:
            return hit[1]
        try:
            ok = ots.ots_verify(vk, self.digest_bits(m), ots.OtsSignature(pre), self.prim)
        except (MalformedInputError, TypeError, IndexError):
            ok = False
        if len(self._vcache) > 500_000:
            self._vcache.clear()
        self._vcache[key] = (vk, ok)
        return ok

    # -- algorithms -------------------------------------------------------
    def sign(self, pp: SrdsParams, i: int, sk, m: bytes) -> Optional[SrdsSignature]:
        if sk is None:
            return None
        pre = ots.ots_sign(sk, self.digest_bits(m)).preimages
        body = ((i, pre),)
        return SrdsSignature(m, self._encode_tuples(body), i, i, body)

    def aggregate1(self, pp: SrdsParams, keys, m: bytes, sigs: Iterable[SrdsSignature],
                   keep: Optional[Callable[[int, int], bool]] = None) -> Optional[OwfSet]:
        cands = []
        for s in sigs:
            if s is None or s.message != m:
                continue  # every tuple inside carries the wrong message
            try:
                body = self._body(s)
            except MalformedInputError:
                continue
            cands.extend(body)
        cands.sort()
        kept, last, size = [], None, 0
        for i, pre in cands:
            if i == last or (keep is not None and not keep(i, i)):
                continue
            if self.tuple_valid(keys, i, m, pre):
                kept.append((i, pre))
                last = i
                size += self.tuple_size(i)
        if size > pp.alpha_limit:
            return None
        return OwfSet(m, tuple(kept), size)

    def aggregate2(self, pp: SrdsParams, m: bytes, s_sig: OwfSet) -> Optional[SrdsSignature]:
        if s_sig is None:
            return None
        tuples = tuple(sorted(s_sig.tuples))
        size = s_sig.size or sum(self.tuple_size(i) for i, _ in tuples)
        if size > pp.alpha_limit:
            return None
        lo, hi = (tuples[0][0], tuples[-1][0]) if tuples else EMPTY_RANGE
        return SrdsSignature(m, self._encode_tuples(tuples), lo, hi, tuples)

    def count_valid(self, pp: SrdsParams, keys, m: bytes, sig: Optional[SrdsSignature]) -> int:
        """Distinct valid indices in ``sig`` on ``m``; -1 if unusable."""
        if sig is None or sig.message != m or len(sig.payload) > pp.alpha_limit:
            return -1
        try:
            body = self._body(sig)
        except MalformedInputError:
            return -1
        seen = set()
        for i, pre in sorted(body):
            if i not in seen and self.tuple_valid(keys, i, m, pre):
                seen.add(i)
        return len(seen)

    def verify(self, pp: SrdsParams, keys, m: bytes, sig: Optional[SrdsSignature]) -> bool:
        count = self.count_valid(pp, keys, m, sig)
        return count >= 0 and count > self.config.threshold

    # -- helpers ----------------------------------------------------------
    def encode_set(self, m: bytes, s_sig: OwfSet) -> bytes:
        return len(m).to_bytes(4, "big") + m + self._encode_tuples(s_sig.tuples)

    def filter_ranges(self, s_sig: OwfSet, keep: Callable[[int, int], bool]) -> OwfSet:
        kept = tuple(t for t in s_sig.tuples if keep(t[0], t[0]))
        if len(kept) == len(s_sig.tuples):
            return s_sig
        return OwfSet(s_sig.message, kept, sum(self.tuple_size(i) for i, _ in kept))

    def set_size(self, s_sig: OwfSet) -> int:
        return s_sig.size

    def members(self, s_sig: OwfSet) -> int:
        return len(s_sig.tuples)
