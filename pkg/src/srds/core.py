"""The SRDS abstraction: parameters, signature envelope and scheme interface."""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional, Sequence

from .errors import MalformedInputError, ParameterError

EMPTY_RANGE = (0, 0)


def varint(v: int) -> bytes:
    """Unsigned LEB128."""
    if v < 0:
        raise ParameterError("varint is unsigned")
    out = bytearray()
    while True:
        byte = v & 0x7F
        v >>= 7
        if v:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def read_varint(data: bytes, pos: int) -> tuple[int, int]:
    shift = value = 0
    while True:
        if pos >= len(data) or shift > 63:
            raise MalformedInputError("truncated varint")
        b = data[pos]
        pos += 1
        value |= (b & 0x7F) << shift
        if not b & 0x80:
            return value, pos
        shift += 7


def log2ceil(n: int) -> int:
    return max(1, math.ceil(math.log2(n))) if n > 1 else 1


def default_alpha_bytes(n: int, kappa: int, const: int = 64) -> int:
    """alpha = const * ceil(log2 n)^2 * kappa bits, returned in bytes."""
    return const * log2ceil(n) ** 2 * kappa // 8


@dataclass(frozen=True)
class SrdsParams:
    pp: bytes
    n: int
    kappa: int
    alpha_limit: int  # bytes
    config: Any = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SrdsSignature:
    """Wire envelope for base and aggregated signatures.

    ``payload`` is authoritative; ``body`` caches the scheme's parsed view
    and is only ever set by the scheme that produced the payload.
    """

    message: bytes
    payload: bytes
    id_min: int
    id_max: int
    body: Any = field(default=None, compare=False, repr=False, hash=False)

    def encode(self) -> bytes:
        enc = self.__dict__.get("_enc")
        if enc is None:
            enc = (self.id_min.to_bytes(4, "big") + self.id_max.to_bytes(4, "big")
                   + len(self.message).to_bytes(4, "big") + self.message + self.payload)
            self.__dict__["_enc"] = enc  # memo; frozen fields are untouched
        return enc

    @property
    def size(self) -> int:
        return 12 + len(self.message) + len(self.payload)

    @classmethod
    def decode(cls, data: bytes) -> "SrdsSignature":
        if len(data) < 12:
            raise MalformedInputError("truncated signature envelope")
        lo = int.from_bytes(data[0:4], "big")
        hi = int.from_bytes(data[4:8], "big")
        ml = int.from_bytes(data[8:12], "big")
        if 12 + ml > len(data):
            raise MalformedInputError("truncated message")
        return cls(data[12:12 + ml], data[12 + ml:], lo, hi)


class SrdsScheme(ABC):
    """Setup / KeyGen / Sign / Aggregate1 / Aggregate2 / Verify.

    ``keys`` is a sequence of verification keys where ``keys[i - 1]`` belongs
    to virtual party ``i``. Aggregate1 returns an opaque set object (or
    ``None`` for the failure symbol); Aggregate2 never sees the keys.
    """

    name: str = "abstract"
    #: keys must be honestly generated for security (trusted PKI)
    needs_trusted_pki: bool = True

    @abstractmethod
    def setup(self, n: int, seed: bytes) -> SrdsParams: ...

    @abstractmethod
    def keygen(self, pp: SrdsParams, seed: bytes) -> tuple[Any, Any]: ...

    @abstractmethod
    def sign(self, pp: SrdsParams, i: int, sk: Any, m: bytes) -> Optional[SrdsSignature]: ...

    @abstractmethod
    def aggregate1(self, pp: SrdsParams, keys: Sequence[Any], m: bytes,
                   sigs: Iterable[SrdsSignature],
                   keep: Optional[Callable[[int, int], bool]] = None) -> Optional[Any]:
        """``keep`` optionally restricts members by their (min, max) range."""

    @abstractmethod
    def aggregate2(self, pp: SrdsParams, m: bytes, s_sig: Any) -> Optional[SrdsSignature]: ...

    @abstractmethod
    def verify(self, pp: SrdsParams, keys: Sequence[Any], m: bytes,
               sig: Optional[SrdsSignature]) -> bool: ...

    def aggregate(self, pp: SrdsParams, keys: Sequence[Any], m: bytes,
                  sigs: Iterable[SrdsSignature]) -> Optional[SrdsSignature]:
        s = self.aggregate1(pp, keys, m, sigs)
        return None if s is None else self.aggregate2(pp, m, s)

    # helpers used by protocols -------------------------------------------
    @abstractmethod
    def encode_set(self, m: bytes, s_sig: Any) -> bytes:
        """Canonical bytes of (m, S_sig); equality of these is agreement."""

    @abstractmethod
    def filter_ranges(self, s_sig: Any, keep: Callable[[int, int], bool]) -> Any:
        """Drop members of S_sig whose (min, max) range fails ``keep``."""

    @abstractmethod
    def set_size(self, s_sig: Any) -> int:
        """Byte size of S_sig as compared against alpha."""

    @abstractmethod
    def vk_bytes(self, vk: Any) -> bytes: ...

    def empty_set(self, pp: SrdsParams, keys: Sequence[Any]) -> Any:
        return self.aggregate1(pp, keys, b"", [])

    def contributes(self, pp: SrdsParams, keys: Sequence[Any], sig: SrdsSignature,
                    keep: Optional[Callable[[int, int], bool]] = None) -> bool:
        """True if ``sig`` alone survives Aggregate1 on its own message with a non-empty set."""
        s = self.aggregate1(pp, keys, sig.message, [sig], keep=keep)
        return s is not None and self.set_size(s) > self.set_size(self.empty_set(pp, keys))
