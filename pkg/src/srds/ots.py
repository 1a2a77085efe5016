"""Lamport one-time signatures with oblivious key generation.

A keyed pair has ``sk[b][i]`` uniform kappa-bit strings and
``vk[b][i] = G(sk[b][i])``. An oblivious pair draws every ``vk`` entry as a
uniform 2*kappa-bit string and has no secret key at all.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import MalformedInputError, NoSigningKeyError, ParameterError
from .primitive import DEFAULT, Primitive

Half = tuple[bytes, ...]
VerKey = tuple[Half, Half]


@dataclass(frozen=True)
class OtsKeyPair:
    vk: VerKey
    sk: Optional[VerKey]
    mode: str  # "keyed" | "oblivious"

    @property
    def msg_bits(self) -> int:
        return len(self.vk[0])


@dataclass(frozen=True)
class OtsSignature:
    preimages: tuple[bytes, ...]


def _check(msg_bits: int, kappa: int) -> int:
    if msg_bits < 1:
        raise ParameterError("msg_bits must be positive")
    if kappa < 8 or kappa % 8:
        raise ParameterError("kappa must be a multiple of 8 and at least 8")
    return kappa // 8


def _split(blob: bytes, width: int, count: int) -> tuple[bytes, ...]:
    return tuple([blob[k:k + width] for k in range(0, count * width, width)])


def ots_keygen(rng_seed: bytes, msg_bits: int, kappa: int,
               prim: Primitive = DEFAULT) -> OtsKeyPair:
    w = _check(msg_bits, kappa)
    blob = prim.expand(b"srds-ots-sk", rng_seed, 2 * msg_bits * w)
    flat = _split(blob, w, 2 * msg_bits)
    sk = (flat[:msg_bits], flat[msg_bits:])
    vk = (prim.g_many(sk[0]), prim.g_many(sk[1]))
    return OtsKeyPair(vk=vk, sk=sk, mode="keyed")


def ots_oblivious_keygen(rng_seed: bytes, msg_bits: int, kappa: int,
                         prim: Primitive = DEFAULT) -> OtsKeyPair:
    w = _check(msg_bits, kappa)
    blob = prim.expand(b"srds-ots-ovk", rng_seed, 2 * msg_bits * 2 * w)
    flat = _split(blob, 2 * w, 2 * msg_bits)
    return OtsKeyPair(vk=(flat[:msg_bits], flat[msg_bits:]), sk=None, mode="oblivious")


def ots_sign(pair_or_sk, message: Sequence[int]) -> OtsSignature:
    """Reveal ``sk[m_i][i]`` for every message bit.

    Accepts an :class:`OtsKeyPair` or the raw ``sk`` halves.
    """
    sk = pair_or_sk.sk if isinstance(pair_or_sk, OtsKeyPair) else pair_or_sk
    if sk is None:
        raise NoSigningKeyError("oblivious key pair has no signing key")
    if len(message) != len(sk[0]):
        raise MalformedInputError("message length does not match key length")
    return OtsSignature(tuple(sk[b][i] for i, b in enumerate(message)))


def ots_verify(vk: VerKey, message: Sequence[int], sig: OtsSignature,
               prim: Primitive = DEFAULT) -> bool:
    L = len(vk[0])
    if len(vk[1]) != L or len(message) != L or len(sig.preimages) != L:
        raise MalformedInputError("length mismatch between key, message and signature")
    g = prim.g
    v0, v1 = vk
    for i, b in enumerate(message):
        if g(sig.preimages[i]) != (v1[i] if b else v0[i]):
            return False
    return True


def bits_of(data: bytes, nbits: int) -> tuple[int, ...]:
    """First ``nbits`` bits of ``data``, most significant bit first."""
    if nbits > 8 * len(data):
        raise ParameterError("not enough bytes for requested bit length")
    v = int.from_bytes(data, "big") >> (8 * len(data) - nbits)
    return tuple((v >> (nbits - 1 - k)) & 1 for k in range(nbits))


def encode_vk(vk: VerKey) -> bytes:
    """Length-prefixed entry list: u32 count, then (u16 len, bytes) per entry, b=0 half first."""
    entries = list(vk[0]) + list(vk[1])
    out = [len(entries).to_bytes(4, "big")]
    for e in entries:
        out.append(len(e).to_bytes(2, "big"))
        out.append(e)
    return b"".join(out)


def decode_vk(data: bytes) -> VerKey:
    if len(data) < 4:
        raise MalformedInputError("truncated key")
    count = int.from_bytes(data[:4], "big")
    if count % 2:
        raise MalformedInputError("odd entry count")
    pos, entries = 4, []
    for _ in range(count):
        if pos + 2 > len(data):
            raise MalformedInputError("truncated key")
        ln = int.from_bytes(data[pos:pos + 2], "big")
        pos += 2
        if pos + ln > len(data):
            raise MalformedInputError("truncated key")
        entries.append(data[pos:pos + ln])
        pos += ln
    if pos != len(data):
        raise MalformedInputError("trailing bytes after key")
    h = count // 2
    return (tuple(entries[:h]), tuple(entries[h:]))
