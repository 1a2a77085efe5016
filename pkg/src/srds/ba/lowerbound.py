"""Isolation attack against last-round boosting without private setup.

The strawman protocol reaches almost-everywhere agreement through the
``F_ae-comm*`` functionality (the isolated set D is drawn at random), then
every non-isolated party sends its value to a fixed CRS-derived set of
``fanout`` parties. An isolated party outputs the majority of what it got,
or its own input if nothing arrives.

The attack: corrupt a random J of size beta*n/2 and, in its head, run the
protocol twice (preagreement 0 and 1) with J silent, recording who sends to
whom. It then picks a target i* whose recorded sender sets are small,
corrupts them too, and in the real run replays the messages of the opposite
execution to i*. Against the strawman i* is fooled whenever it is isolated;
against the SRDS protocol the replayed certificates do not verify.
"""
from __future__ import annotations

import math
import statistics
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Optional, Protocol

from .. import seeds
from ..net import Engine
from ..prf import prf_subset
from .adversary import Adversary, AdversaryView


@dataclass
class Execution:
    outputs: list
    isolated: frozenset
    senders: dict  # receiver -> set of senders whose last-round message it kept
    messages: dict = field(default_factory=dict)  # (sender, receiver) -> payload


class AttackTarget(Protocol):
    name: str
    n: int

    def simulate(self, b: int, silent: frozenset, seed: Any) -> Execution: ...

    def attack(self, b: int, corrupt: frozenset, target: int, replay: dict, seed: Any) -> Execution: ...


class Strawman:
    """CRS-only protocol with a single boosting round of fan-out ``fanout``."""
    name = "strawman"

    def __init__(self, n: int, fanout: int = 8, crs: bytes = b"strawman-crs",
                 isolated_fraction: Optional[float] = None):
        self.n, self.fanout, self.crs = n, fanout, crs
        self.isolated_fraction = 3 / math.log2(n) if isolated_fraction is None else isolated_fraction
        self.out = [prf_subset(crs, i, n, fanout) for i in range(n)]

    def _run(self, b: int, corrupt: frozenset, seed: Any, adversary=None) -> Execution:
        n = self.n
        eng = Engine(n, corrupt)
        eng.oracle_round("ae-init")
        D = frozenset(seeds.rng(seed, "ae-star").sample(range(n), math.floor(self.isolated_fraction * n)))
        eng.oracle_round("ae-value")
        honest = [i for i in range(n) if i not in corrupt]
        y = b  # every honest input is b, so the committee agrees on b

        def honest_step(_):
            for i in honest:
                if i not in D:
                    yield (i, sorted(self.out[i] - {i}), bytes([y]))

        out = self.out
        inbox = eng.run_round(honest_step, adversary, lambda e: out[e.sender], label="fanout")
        outputs: list = [None] * n
        senders: dict = defaultdict(set)
        messages = {}
        for j in range(n):
            got = []
            for e in inbox.get(j, ()):
                senders[j].add(e.sender)
                messages[(e.sender, j)] = e.payload
                if e.payload in (b"\x00", b"\x01"):
                    got.append(e.payload[0])
            if j in corrupt:
                continue
            if j not in D:
                outputs[j] = y
            elif got:
                ones = sum(got)
                zeros = len(got) - ones
                outputs[j] = 1 if ones > zeros else 0 if zeros > ones else b
            else:
                outputs[j] = b
        return Execution(outputs, D, dict(senders), messages)

    def simulate(self, b: int, silent: frozenset, seed: Any) -> Execution:
        return self._run(b, silent, seed)

    def attack(self, b: int, corrupt: frozenset, target: int, replay: dict, seed: Any) -> Execution:
        def adversary(_rushing):
            for sender, payload in sorted(replay.items()):
                if sender in corrupt:
                    yield (sender, target, payload)
        return self._run(b, corrupt, seed, adversary)


class _Replay(Adversary):
    """Corrupts a fixed set, stays silent, replays recorded triples to one target."""
    name = "replay-to-target"

    def __init__(self, corrupt, target: int, replay: dict):
        super().__init__(corrupt)
        self.target, self.replay = target, replay

    def fanout_round(self, view: AdversaryView, rushing):
        for sender, payload in sorted(self.replay.items()):
            if sender in view.corrupt:
                yield (sender, self.target, payload)


class SrdsTarget:
    """The SRDS-based protocol.

    By default it runs in its own hybrid, where D is the set of parties in
    bad leaves. With ``ae_variant="star"`` it gets the random D of the
    strawman instead, which at desk sizes is too large for its committees.
    """
    name = "pi_ba"

    def __init__(self, preset, scheme=None, ae_variant: str = "standard",
                 isolated_fraction: Optional[float] = None):
        self.preset = preset
        self.n = preset.n
        self.scheme = scheme or preset.scheme("owf")
        self.ae_variant = ae_variant
        self.isolated_fraction = isolated_fraction

    def _run(self, b, adversary, seed, record):
        from .protocol import run_preset
        return run_preset(self.preset, adversary, seed, inputs=b, scheme=self.scheme,
                          ae_variant=self.ae_variant, isolated_fraction=self.isolated_fraction,
                          record=record)

    def simulate(self, b: int, silent: frozenset, seed: Any) -> Execution:
        from .adversary import Silent
        out = self._run(b, Silent(sorted(silent)), seed, True)
        senders: dict = defaultdict(set)
        messages = {}
        for e in out.engine.log:
            if e.tag == "fanout":
                senders[e.receiver].add(e.sender)
                messages[(e.sender, e.receiver)] = e.payload
        return Execution(out.outputs, out.isolated, dict(senders), messages)

    def attack(self, b: int, corrupt: frozenset, target: int, replay: dict, seed: Any) -> Execution:
        out = self._run(b, _Replay(sorted(corrupt), target, replay), seed, False)
        return Execution(out.outputs, out.isolated, {})


def isolation_attack_demo(n: int, strawman_protocol: AttackTarget, seed: Any = 0,
                          beta: float = 0.3) -> dict:
    """One attack; returns a JSON-ready report."""
    if strawman_protocol.n != n:
        raise ValueError("protocol size does not match n")
    rnd = seeds.rng(seed, "attack")
    b = rnd.getrandbits(1)
    budget = math.floor(beta * n)
    half = math.floor(beta * n / 2)
    J = frozenset(rnd.sample(range(n), half))
    # in-head executions use their own randomness, unrelated to the real run
    runs = {c: strawman_protocol.simulate(c, J, seeds.derive(seed, "in-head", c)) for c in (0, 1)}
    union = {j: (runs[0].senders.get(j, set()) | runs[1].senders.get(j, set())) - J
             for j in range(n) if j not in J}
    sizes = sorted(len(u) for u in union.values())
    median = statistics.median(sizes) if sizes else 0
    # a target nobody talks to cannot be fooled; take the smallest non-empty set
    nonzero = [k for k in sizes if k > 0] or [0]
    smallest = min(nonzero)
    i_star = rnd.choice(sorted(j for j, u in union.items() if len(u) == smallest))
    neigh = union[i_star] - {i_star}
    report = {
        "target": strawman_protocol.name, "n": n, "seed": seed, "b": b, "j_size": len(J),
        "i_star": i_star, "neighbor_set_size": len(neigh), "median_neighbor_set_size": median,
        "corrupt_size": None, "aborted": False, "i_star_isolated": None,
        "i_star_output": None, "violation": False,
    }
    if len(neigh) >= half or len(J | neigh) > budget:
        report["aborted"] = True
        return report
    corrupt = frozenset(J | neigh)
    other = runs[1 - b]
    replay = {c: other.messages[(c, i_star)] for c in sorted(neigh) if (c, i_star) in other.messages}
    real = strawman_protocol.attack(b, corrupt, i_star, replay, seeds.derive(seed, "real"))
    out = real.outputs[i_star]
    report.update(corrupt_size=len(corrupt), replayed=len(replay),
                  i_star_isolated=i_star in real.isolated, i_star_output=out, violation=out != b)
    return report


def attack_rate(n: int, protocol: AttackTarget, reps: int, seed: Any = 0, beta: float = 0.3) -> dict:
    """Repeat the attack with derived seeds and summarize."""
    reports = [isolation_attack_demo(n, protocol, seeds.derive(seed, "rep", r).hex(), beta)
               for r in range(reps)]
    ran = [r for r in reports if not r["aborted"]]
    viol = sum(r["violation"] for r in ran)
    return {
        "target": protocol.name, "n": n, "reps": reps,
        "aborted": len(reports) - len(ran),
        "violations": viol,
        "violation_rate": viol / reps if reps else 0.0,
        "median_neighbor_set_size": statistics.median(r["median_neighbor_set_size"] for r in reports) if reports else 0,
        "reports": reports,
    }
