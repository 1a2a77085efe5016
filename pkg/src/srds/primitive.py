"""The single hash primitive behind G, the PRF and the Merkle hash.

BLAKE2b is used everywhere; outputs longer than 64 bytes come from counter
mode. Protocol code only talks to :class:`Primitive`.
"""
from __future__ import annotations

import hashlib

_MAX = 64


class Primitive:
    name = "blake2b-ctr"

    def __init__(self) -> None:
        self._g_cache: dict[int, "hashlib._Hash"] = {}

    def expand(self, tag: bytes, data: bytes, nbytes: int, key: bytes = b"") -> bytes:
        """``nbytes`` pseudorandom bytes from (tag, key, data)."""
        if nbytes <= 0:
            return b""
        person = tag[:16]
        if nbytes <= _MAX:
            return hashlib.blake2b(data, digest_size=nbytes, key=key, person=person).digest()
        out = []
        for ctr in range((nbytes + _MAX - 1) // _MAX):
            out.append(
                hashlib.blake2b(ctr.to_bytes(4, "big") + data, digest_size=_MAX,
                                key=key, person=person).digest())
        return b"".join(out)[:nbytes]

    def g(self, x: bytes) -> bytes:
        """Length-doubling generator: |G(x)| = 2|x|."""
        n = 2 * len(x)
        base = self._g_cache.get(n)
        if base is None:
            if n > _MAX:
                return self.expand(b"srds-G", x, n)
            base = hashlib.blake2b(digest_size=n, person=b"srds-G")
            self._g_cache[n] = base
        h = base.copy()
        h.update(x)
        return h.digest()

    def g_many(self, xs) -> tuple:
        """``G`` over a batch of equal-length inputs."""
        if not xs:
            return ()
        n = 2 * len(xs[0])
        base = self._g_cache.get(n)
        if base is None:
            return tuple(self.g(x) for x in xs)
        copy = base.copy
        out = []
        ap = out.append
        for x in xs:
            if 2 * len(x) != n:
                ap(self.g(x))
                continue
            h = copy()
            h.update(x)
            ap(h.digest())
        return tuple(out)

    def hash(self, tag: bytes, data: bytes, key: bytes = b"", nbytes: int = 32) -> bytes:
        return self.expand(tag, data, nbytes, key=key)


DEFAULT = Primitive()
