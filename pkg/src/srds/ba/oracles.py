"""Ideal functionalities of the hybrid model, as plain functions.

These stand in for sub-protocols run inside polylog-size committees; the
protocol charges their traffic separately where it models a realization.
"""
from __future__ import annotations

import math
import random
from collections import Counter
from typing import Callable, Hashable, Mapping, Optional, Sequence, TypeVar

T = TypeVar("T")


def committee_tolerance(k: int) -> int:
    """Largest t with t < k/3."""
    return max(0, math.ceil(k / 3) - 1)


def f_ba(inputs: Mapping[int, Optional[int]], committee: Sequence[int], adversary_bit: int) -> int:
    """Byzantine agreement among ``committee``.

    Outputs b when at least k - t members input b, otherwise the adversary's
    bit. Members missing from ``inputs`` (or mapped to None) count for neither.
    """
    k = len(committee)
    need = k - committee_tolerance(k)
    for b in (0, 1):
        if sum(1 for i in committee if inputs.get(i) == b) >= need:
            return b
    return adversary_bit


def f_ct(rnd: random.Random, kappa: int) -> bytes:
    """Uniform kappa-bit seed."""
    return rnd.getrandbits(kappa).to_bytes((kappa + 7) // 8, "big")


def f_ae_broadcast(provided: Mapping[int, Optional[T]], committee: Sequence[int], n: int,
                   isolated: frozenset, isolated_values: Mapping[int, Optional[T]]) -> list[Optional[T]]:
    """Later invocations of the almost-everywhere functionality.

    When more than 2/3 of the committee provided the same value it reaches
    every non-isolated party; isolated parties get whatever the adversary
    picked (None if nothing). Without such a value nobody receives anything.
    """
    tally = Counter(v for i in committee if (v := provided.get(i)) is not None)
    out: list[Optional[T]] = [None] * n
    if not tally:
        return out
    value, count = tally.most_common(1)[0]
    if 3 * count <= 2 * len(committee):
        return out
    for i in range(n):
        out[i] = isolated_values.get(i) if i in isolated else value
    return out


def f_aggr_sig(inputs: Mapping[int, Optional[tuple[Hashable, T]]], committee: Sequence[int],
               finish: Callable[[T], object], adversary_choice: Callable[[], object]):
    """Signature aggregation inside one committee.

    ``inputs`` maps a member to ``(canonical key, payload)``. If at least 2/3
    of the members supplied the same key, returns ``finish(payload)``
    (Aggregate2); otherwise the adversary's choice.
    """
    tally: Counter = Counter()
    first: dict = {}
    for i in committee:
        item = inputs.get(i)
        if item is None:
            continue
        tally[item[0]] += 1
        first.setdefault(item[0], item[1])
    if tally:
        key, count = tally.most_common(1)[0]
        if 3 * count >= 2 * len(committee):
            return finish(first[key]), True
    return adversary_choice(), False
