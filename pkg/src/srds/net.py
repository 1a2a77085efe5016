"""Deterministic synchronous round engine with per-party bit accounting.

Within a round honest parties emit first; the adversary then sees what was
sent to corrupt parties (rushing) and emits its own messages; finally each
recipient filters and the survivors are handed back for processing.
"""
from __future__ import annotations

import hashlib
import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional, TextIO

from .errors import EngineError


@dataclass(eq=False, slots=True)
class RoundEnvelope:
    """One delivered message.

    A multicast is delivered as a single shared envelope whose ``receiver``
    is -1; the inbox key says who got it. ``meta`` is scratch space for a
    filter's parse of the header, so processing need not redo it.
    """
    round: int
    sender: int
    receiver: int
    payload: bytes
    body: Any = field(default=None, repr=False)
    tag: str = ""
    meta: Any = field(default=None, repr=False)

    @property
    def bits(self) -> int:
        return 8 * len(self.payload)

    def to_json(self, full: bool = False) -> dict:
        d = {"round": self.round, "from": self.sender, "to": self.receiver, "tag": self.tag,
             "bytes": len(self.payload),
             "sha256": hashlib.sha256(self.payload).hexdigest()}
        if full:
            d["payload"] = self.payload.hex()
        return d


Outgoing = tuple  # (sender, receiver, payload, body[, tag])


@dataclass
class CommMetrics:
    n: int
    bits_sent: list[int]
    bits_processed: list[int]
    bits_filtered: list[int]
    peers: list[set]
    per_round: dict = field(default_factory=dict)

    @classmethod
    def empty(cls, n: int) -> "CommMetrics":
        return cls(n, [0] * n, [0] * n, [0] * n, [set() for _ in range(n)], {})

    @property
    def bits_received(self) -> list[int]:
        return [a + b for a, b in zip(self.bits_processed, self.bits_filtered)]

    def max_sent(self, parties: Optional[Iterable[int]] = None) -> int:
        ps = range(self.n) if parties is None else parties
        return max((self.bits_sent[p] for p in ps), default=0)

    def max_peers(self, parties: Optional[Iterable[int]] = None) -> int:
        ps = range(self.n) if parties is None else parties
        return max((len(self.peers[p]) for p in ps), default=0)

    def summary(self, honest: Optional[Iterable[int]] = None) -> dict:
        hs = list(range(self.n)) if honest is None else sorted(honest)
        return {
            "total_bits_sent": sum(self.bits_sent),
            "total_bits_processed": sum(self.bits_processed),
            "total_bits_filtered": sum(self.bits_filtered),
            "max_honest_bits_sent": self.max_sent(hs),
            "max_honest_bits_processed": max((self.bits_processed[p] for p in hs), default=0),
            "max_honest_peers": self.max_peers(hs),
            "per_round": self.per_round,
        }


def _sender(e: RoundEnvelope) -> int:
    return e.sender


class Engine:
    def __init__(self, n: int, corrupt: Iterable[int] = (), record: bool = False):
        self.n = n
        self.corrupt = frozenset(corrupt)
        self.round = 0
        self.metrics = CommMetrics.empty(n)
        self.record = record
        self.log: list[RoundEnvelope] = []

    def _row(self, label: str) -> dict:
        key = f"{self.round}:{label}" if label else str(self.round)
        return self.metrics.per_round.setdefault(
            key, {"sent": 0, "processed": 0, "filtered": 0, "envelopes": 0})

    def _deliver(self, msgs, r: int, label: str, allowed, filters, inbox, totals) -> None:
        n = self.n
        m = self.metrics
        sent, proc, filt, peers = m.bits_sent, m.bits_processed, m.bits_filtered, m.peers
        log = self.log if self.record else None
        for msg in msgs:
            s, to, payload = msg[0], msg[1], msg[2]
            if not allowed(s):
                raise EngineError(f"party {s} may not send in this step")
            body = msg[3] if len(msg) > 3 else None
            tag = msg[4] if len(msg) > 4 else label
            single = isinstance(to, int)
            if single:
                to = (to,)
            e = RoundEnvelope(r, s, to[0] if single else -1, payload, body, tag)
            b = 8 * len(payload)
            k = len(to)
            acc = True if filters is None else filters(e)
            ps = peers[s]
            ps.update(to)
            for t in to:
                if not 0 <= t < n:
                    raise EngineError(f"unknown recipient {t}")
                if acc is True or (acc is not False and t in acc):
                    proc[t] += b
                    totals[1] += b
                    peers[t].add(s)
                    inbox[t].append(e)
                else:
                    filt[t] += b
                    totals[2] += b
            if log is not None:
                log.extend(RoundEnvelope(r, s, t, payload, None, tag) for t in to)
            sent[s] += b * k
            totals[0] += b * k
            totals[3] += k

    def run_round(self, honest_step: Callable[["Engine"], Iterable[Outgoing]],
                  adversary_step: Optional[Callable[[list[RoundEnvelope]], Iterable[Outgoing]]] = None,
                  filters: Optional[Callable[[RoundEnvelope], Any]] = None,
                  label: str = "") -> dict[int, list[RoundEnvelope]]:
        """Run one round; returns processed envelopes per recipient, ordered by sender.

        An outgoing item is ``(sender, receiver_or_receivers, payload[, body[, tag]])``;
        a collection of receivers is a multicast of one payload. Honest traffic
        is generated and delivered first; the adversary then sees everything
        addressed to corrupt parties (rushing) before emitting its own.

        ``filters`` runs once per message and answers ``True`` (everyone keeps
        it), ``False`` (everyone drops it) or the set of receivers that keep it.
        """
        self.round += 1
        r = self.round
        n, corrupt = self.n, self.corrupt
        inbox: dict[int, list[RoundEnvelope]] = defaultdict(list)
        totals = [0, 0, 0, 0]  # sent, processed, filtered, envelopes
        honest_ok = lambda s: 0 <= s < n and s not in corrupt
        rushing: list[RoundEnvelope] = []
        if adversary_step is not None and corrupt:
            # the rushing view includes envelopes the filter later drops
            def tap(msgs):
                for msg in msgs:
                    to = msg[1]
                    for t in ((to,) if isinstance(to, int) else to):
                        if t in corrupt:
                            rushing.append(RoundEnvelope(r, msg[0], t, msg[2],
                                                         msg[3] if len(msg) > 3 else None,
                                                         msg[4] if len(msg) > 4 else label))
                    yield msg
            honest = tap(honest_step(self))
        else:
            honest = honest_step(self)
        self._deliver(honest, r, label, honest_ok, filters, inbox, totals)
        if adversary_step is not None:
            self._deliver(adversary_step(rushing) or (), r, label, corrupt.__contains__, filters,
                          inbox, totals)
        row = self._row(label)
        row["sent"] += totals[0]
        row["processed"] += totals[1]
        row["filtered"] += totals[2]
        row["envelopes"] += totals[3]
        key = _sender
        for lst in inbox.values():
            lst.sort(key=key)
        return inbox

    def oracle_round(self, label: str) -> None:
        """Advance the clock for a round spent inside an ideal functionality."""
        self.round += 1
        self._row(label)

    def charge(self, sender: int, receivers: Iterable[int], nbytes: int, label: str) -> None:
        """Account oracle-realized traffic (e.g. intra-committee broadcast) in the current round."""
        m = self.metrics
        b = 8 * nbytes
        proc, peers = m.bits_processed, m.peers
        k = 0
        for t in receivers:
            if t == sender:
                continue
            proc[t] += b
            peers[t].add(sender)
            k += 1
        m.peers[sender].update(t for t in receivers if t != sender)
        m.bits_sent[sender] += b * k
        row = self._row(label)
        row["sent"] += b * k
        row["processed"] += b * k

    def dump_jsonl(self, fp: TextIO, full: bool = False) -> None:
        for e in self.log:
            fp.write(json.dumps(e.to_json(full), sort_keys=True) + "\n")
