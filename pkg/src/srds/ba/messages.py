"""Wire formats used by the agreement protocol.

* value ``m = y || s``: one byte for the bit, then the coin seed.
* signature delivery: ``u32 dest node || u32 source node || envelope``;
  base signatures use ``BASE_SRC`` as the source.
* certificate triple: ``u16 len(m) || m || u8 flag || envelope``.
"""
from __future__ import annotations

from typing import Optional

from ..core import SrdsSignature
from ..errors import MalformedInputError

BASE_SRC = 0xFFFFFFFF
SIG_HEADER = 8


def encode_value(y: int, s: bytes) -> bytes:
    if y not in (0, 1):
        raise MalformedInputError("value bit must be 0 or 1")
    return bytes([y]) + s


def decode_value(m: bytes) -> tuple[int, bytes]:
    if not m or m[0] not in (0, 1):
        raise MalformedInputError("not an agreement value")
    return m[0], m[1:]


def pack_sig(dest: int, src: int, sig: SrdsSignature) -> bytes:
    return dest.to_bytes(4, "big") + src.to_bytes(4, "big") + sig.encode()


def peek_sig(payload: bytes) -> tuple[int, int, int, int]:
    """(dest, src, id_min, id_max) from the fixed-width header only."""
    if len(payload) < SIG_HEADER + 12:
        raise MalformedInputError("short signature delivery")
    return (int.from_bytes(payload[0:4], "big"), int.from_bytes(payload[4:8], "big"),
            int.from_bytes(payload[8:12], "big"), int.from_bytes(payload[12:16], "big"))


def unpack_sig(payload: bytes) -> tuple[int, int, SrdsSignature]:
    dest, src, _, _ = peek_sig(payload)
    return dest, src, SrdsSignature.decode(payload[SIG_HEADER:])


def pack_triple(m: bytes, sig: Optional[SrdsSignature]) -> bytes:
    head = len(m).to_bytes(2, "big") + m
    if sig is None:
        return head + b"\x00"
    return head + b"\x01" + sig.encode()


def peek_triple_value(payload: bytes) -> bytes:
    if len(payload) < 3:
        raise MalformedInputError("short triple")
    ml = int.from_bytes(payload[0:2], "big")
    if 2 + ml + 1 > len(payload):
        raise MalformedInputError("truncated triple")
    return payload[2:2 + ml]


def unpack_triple(payload: bytes) -> tuple[bytes, Optional[SrdsSignature]]:
    m = peek_triple_value(payload)
    rest = payload[2 + len(m):]
    if rest[0] == 0:
        if len(rest) != 1:
            raise MalformedInputError("trailing bytes after empty certificate")
        return m, None
    if rest[0] != 1:
        raise MalformedInputError("bad certificate flag")
    return m, SrdsSignature.decode(rest[1:])
