"""Balanced Byzantine agreement from an SRDS in the hybrid model.

Round schedule (``h`` = tree height):

1. almost-everywhere init: the tree, the isolated set D, the committee C;
2. C runs agreement and coin tossing and pushes ``(y, s)`` to all but D;
3. ``h`` aggregation rounds: round 1 carries base signatures into the leaf
   committees, round ``l`` carries child aggregates into level ``l``; after
   each delivery the committee broadcasts what it got, runs Aggregate1 with
   the range checks and calls the aggregation functionality;
4. C pushes ``(y, s, sigma_root)`` to all but D;
5. fan-out: every party sends its triple to ``F_s(i)``; a receiver in that
   set that sees a verifying certificate outputs ``y``.
"""
from __future__ import annotations

import hashlib
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence, Union

from .. import seeds
from ..core import SrdsParams, SrdsScheme, SrdsSignature
from ..errors import ConfigurationError, InvariantError, MalformedInputError, ParameterError
from ..net import CommMetrics, Engine, RoundEnvelope
from ..prf import prf_subset
from ..tree import CommTree, TreeProfile, build_tree, validate_tree
from .adversary import Adversary, AdversaryView, Silent
from .messages import (BASE_SRC, SIG_HEADER, decode_value, encode_value, pack_sig, pack_triple,
                       peek_sig, peek_triple_value, unpack_triple)
from .oracles import f_ae_broadcast, f_aggr_sig, f_ba, f_ct

PKI_MODES = ("trusted", "bare")
AE_VARIANTS = ("standard", "star")


@dataclass
class BaOutcome:
    n: int
    t: int
    corrupt: frozenset
    isolated: frozenset
    committee: tuple
    inputs: list
    outputs: list
    agreement: bool
    validity: bool
    termination: bool
    preagreement: Optional[int]
    anomalies: list
    forged_accepts: int
    metrics: CommMetrics
    rounds: int
    expected_rounds: int
    comm_bound_bits: Optional[int]
    comm_ok: bool
    locality_bound: int
    locality_ok: bool
    aborted: Optional[str]
    transcript: dict
    engine: Optional[Engine] = field(default=None, repr=False)

    @property
    def honest(self) -> list[int]:
        return [p for p in range(self.n) if p not in self.corrupt]

    @property
    def success(self) -> bool:
        return self.aborted is None and self.agreement and self.validity

    def to_json(self, metrics: bool = True) -> dict:
        d = {
            "n": self.n, "t": self.t,
            "corrupt": sorted(self.corrupt), "isolated": sorted(self.isolated),
            "committee": list(self.committee),
            "outputs": self.outputs,
            "agreement": self.agreement, "validity": self.validity,
            "termination": self.termination, "preagreement": self.preagreement,
            "anomalies": self.anomalies, "forged_accepts": self.forged_accepts,
            "rounds": self.rounds, "expected_rounds": self.expected_rounds,
            "comm_bound_bits": self.comm_bound_bits, "comm_ok": self.comm_ok,
            "locality_bound": self.locality_bound, "locality_ok": self.locality_ok,
            "aborted": self.aborted, "transcript": self.transcript,
        }
        if metrics:
            d["metrics"] = self.metrics.summary(self.honest)
        return d


def _inputs(n: int, inputs: Union[int, Sequence[int]]) -> list[int]:
    if isinstance(inputs, int):
        inputs = [inputs] * n
    out = list(inputs)
    if len(out) != n or any(x not in (0, 1) for x in out):
        raise ParameterError("inputs must be n bits")
    return out


class _Run:
    """State of one execution; the stages are methods to keep them readable."""

    def __init__(self, n, t, scheme, profile, inputs, adv, seed, pki_mode, out_size,
                 ae_variant, isolated_fraction, isolated_set, tree_policy, record, pp):
        self.n, self.t, self.scheme, self.profile = n, t, scheme, profile
        self.inputs, self.adv, self.seed = inputs, adv, seed
        self.pki_mode, self.out_size = pki_mode, out_size
        self.ae_variant, self.isolated_fraction, self.isolated_set = ae_variant, isolated_fraction, isolated_set
        self.tree_policy, self.record = tree_policy, record
        self.z = profile.z
        self.N = n * self.z
        self.pp = pp
        self.vcache: dict = {}
        self.transcript: dict = {}

    # -- setup ----------------------------------------------------------------
    def setup(self) -> None:
        n, z, scheme = self.n, self.z, self.scheme
        if self.pp is None:
            self.pp = scheme.setup(self.N, seeds.derive(self.seed, "setup"))
        elif self.pp.n != self.N:
            raise ConfigurationError(f"scheme set up for {self.pp.n} virtual parties, profile needs {self.N}")
        pp = self.pp
        self.party_keys, self.party_sks = {}, {}
        for i in range(n):
            for j in range(z):
                vk, sk = scheme.keygen(pp, seeds.derive(self.seed, "key", i, j))
                self.party_keys[(i, j)] = vk
                self.party_sks[(i, j)] = sk
        self.view = AdversaryView(n, self.t, z, scheme, pp, self.profile, self.pki_mode, self.out_size,
                                  seeds.rng(self.seed, "adversary"), dict(self.party_keys))
        chosen: list[int] = []
        for p in self.adv.choose_corrupt(self.view):
            if len(chosen) >= self.t:
                break  # requests past the budget are denied
            if isinstance(p, int) and 0 <= p < n and p not in chosen:
                chosen.append(p)
        self.I = frozenset(chosen)
        self.view.corrupt = self.I
        self.view.sks = {k: v for k, v in self.party_sks.items() if k[0] in self.I}
        replacement = self.adv.replace_keys(self.view) or {}
        self.replaced = 0
        if self.pki_mode == "bare":
            for (p, j), vk in replacement.items():
                if p in self.I and 0 <= j < z:
                    self.party_keys[(p, j)] = vk
                    self.replaced += 1
        self.engine = Engine(n, self.I, self.record)
        self.honest = [p for p in range(n) if p not in self.I]

    # -- phase 1: tree -----------------------------------------------------------
    def init_tree(self) -> Optional[str]:
        n, I = self.n, self.I
        tree = self.adv.provide_tree(self.view)
        if tree is None:
            tree = build_tree(n, self.profile, I, seeds.rng(self.seed, "tree"), policy=self.tree_policy)
        self.engine.oracle_round("ae-init")
        check = validate_tree(tree, n, I) if isinstance(tree, CommTree) else {"valid": False, "violations": ["not a tree"]}
        if not check["valid"]:
            self.transcript["tree_violations"] = check["violations"]
            return "invalid-tree"
        tree.relabel(I)
        self.tree = tree
        if self.ae_variant == "star":
            if self.isolated_set is not None:
                D = frozenset(self.isolated_set)
            else:
                frac = self.isolated_fraction if self.isolated_fraction is not None else 3 / math.log2(n)
                D = frozenset(seeds.rng(self.seed, "ae-star").sample(range(n), math.floor(frac * n)))
        else:
            D = tree.isolated()
        self.D = D
        self.C = tree.root.committee
        self.keys = [self.party_keys[tree.inverse(v)] for v in range(1, self.N + 1)]
        self.owner = {v: tree.inverse(v)[0] for v in range(1, self.N + 1)}
        self.member_of: dict[int, set] = defaultdict(set)
        self.com_sets = [frozenset(node.committee) for node in tree.nodes]
        # per node: member -> the other members, the recipient list of a multicast
        self.others = [{p: [q for q in node.committee if q != p] for p in node.committee}
                       for node in tree.nodes]
        for node in tree.nodes:
            for p in node.committee:
                self.member_of[p].add(node.id)
        v = self.view
        v.tree, v.keys, v.isolated, v.committee = tree, self.keys, D, self.C
        self.transcript["tree"] = {
            "height": tree.height,
            "bad_leaf_fraction": round(tree.bad_leaf_fraction(), 6),
            "bad_nodes": sorted(i for i, g in tree.good.items() if not g),
        }
        return None

    # -- phase 2: agreement on (y, s) ---------------------------------------------
    def agree_value(self) -> None:
        adv, view, C, I = self.adv, self.view, self.C, self.I
        ba_in = {}
        for i in C:
            ba_in[i] = adv.ba_input(view, i) if i in I else self.inputs[i]
        y = f_ba(ba_in, C, adv.ba_choice(view) & 1)
        s = f_ct(seeds.rng(self.seed, "ct"), self.pp.kappa)
        m = encode_value(y, s)
        self.y, self.s, self.m = y, s, m
        view.y, view.s, view.value = y, s, m
        provided = {i: (adv.ae_input(view, "value", i, m) if i in I else m) for i in C}
        iso = adv.isolated_values(view, "value", m) or {}
        got = f_ae_broadcast(provided, C, self.n, self.D, iso)
        self.own_msg: dict[int, Optional[bytes]] = {}
        for i in self.honest:
            val = got[i]
            try:
                if not isinstance(val, bytes):
                    raise MalformedInputError("no value")
                decode_value(val)
            except MalformedInputError:
                val = None
            self.own_msg[i] = val
        self.engine.oracle_round("ae-value")

    # -- phase 3: aggregation ------------------------------------------------------
    def _sig_cap(self) -> int:
        return self.pp.alpha_limit + 64

    def _sig_of(self, e: RoundEnvelope) -> Optional[SrdsSignature]:
        """Decoded signature of an aggregation envelope, memoized in ``e.meta``."""
        meta = e.meta
        sig = meta[2]
        if sig is None:
            if e.body is not None and e.sender not in self.I:
                sig = e.body
            else:
                try:
                    sig = SrdsSignature.decode(e.payload[SIG_HEADER:])
                except MalformedInputError:
                    sig = False
            meta[2] = sig
        return sig or None

    def base_round(self) -> dict:
        tree, scheme, pp = self.tree, self.scheme, self.pp
        nodes = tree.nodes
        local: dict = defaultdict(list)

        def honest_step(eng):
            for i in self.honest:
                m = self.own_msg[i]
                if m is None:
                    continue
                for j in range(self.z):
                    vid = tree.idmap(i, j)
                    sig = scheme.sign(pp, vid, self.party_sks[(i, j)], m)
                    if sig is None:
                        continue
                    leaf = tree.leaf_of_vid(vid)
                    local[(leaf, i)].append(sig)
                    yield (i, self.others[leaf][i], pack_sig(leaf, BASE_SRC, sig), sig)

        cap, owner, L, com_sets = self._sig_cap(), self.owner, set(tree.levels[0]), self.com_sets

        def filt(e: RoundEnvelope):
            if len(e.payload) > cap:
                return False
            try:
                dest, src, lo, hi = peek_sig(e.payload)
            except MalformedInputError:
                return False
            if (src == BASE_SRC and lo == hi and dest in L and owner.get(lo) == e.sender
                    and nodes[dest].lo <= lo <= nodes[dest].hi):
                e.meta = [dest, lo, None]
                return com_sets[dest]
            return False

        inbox = self.engine.run_round(honest_step, lambda rush: self.adv.base_round(self.view, rush),
                                      filt, label="aggregate-1")
        recv: dict = defaultdict(list)
        for key, sigs in local.items():
            recv[key].extend(sigs)
        sig_of = self._sig_of
        for r in self.honest:
            seen = set()
            for e in inbox.get(r, ()):
                dest, vid, _ = e.meta
                if vid in seen:
                    continue
                sig = sig_of(e)
                if sig is None:
                    continue
                seen.add(vid)
                recv[(dest, r)].append(sig)
        return recv

    def up_round(self, level: int) -> dict:
        tree, nodes, I = self.tree, self.tree.nodes, self.I
        local: dict = defaultdict(list)

        def honest_step(eng):
            for v in tree.level_nodes(level - 1):
                sig = self.node_sigma.get(v.id)
                if sig is None or v.parent is None:
                    continue
                parent = self.com_sets[v.parent]
                others = self.others[v.parent]
                payload = pack_sig(v.parent, v.id, sig)
                for i in v.committee:
                    if i in I:
                        continue
                    if i in parent:
                        local[(v.parent, i)].append(sig)
                    yield (i, others.get(i, nodes[v.parent].committee), payload, sig)

        cap, com_sets, nn = self._sig_cap(), self.com_sets, len(nodes)

        def filt(e: RoundEnvelope):
            if len(e.payload) > cap:
                return False
            try:
                dest, src, _, _ = peek_sig(e.payload)
            except MalformedInputError:
                return False
            if 0 <= src < nn and 0 <= dest < nn:
                child = nodes[src]
                if child.parent == dest and nodes[dest].level == level and e.sender in com_sets[src]:
                    e.meta = [dest, src, None]
                    return com_sets[dest]
            return False

        inbox = self.engine.run_round(honest_step, lambda rush: self.adv.up_round(self.view, level, rush),
                                      filt, label=f"aggregate-{level}")
        recv: dict = defaultdict(list)
        for key, sigs in local.items():
            recv[key].extend(sigs)
        sig_of = self._sig_of
        for r in self.honest:
            seen, per_sender = set(), set()
            for e in inbox.get(r, ()):
                # one aggregate per (sender, child); identical ones count once
                key = (e.sender, e.meta[1])
                if key in per_sender:
                    continue
                sig = sig_of(e)
                if sig is None:
                    continue
                per_sender.add(key)
                enc = sig.encode()
                if enc in seen:
                    continue
                seen.add(enc)
                recv[(e.meta[0], r)].append(sig)
        return recv

    def _keep(self, v):
        if v.level == 1:
            lo_v, hi_v = v.lo, v.hi
            return lambda lo, hi: lo == hi and lo_v <= lo <= hi_v
        ranges = [self.tree.nodes[c].range for c in v.children]
        return lambda lo, hi: any(a <= lo and hi <= b for a, b in ranges)

    def _finish(self, item) -> Optional[SrdsSignature]:
        try:
            m, s_sig = item
            if s_sig is None:
                return None
            return self.scheme.aggregate2(self.pp, m, s_sig)
        except (TypeError, ValueError, AttributeError):
            return None

    def process_level(self, level: int, recv: dict) -> None:
        tree, scheme, pp, I, adv, view = self.tree, self.scheme, self.pp, self.I, self.adv, self.view
        prof = self.profile
        count_cap = prof.k_leaf if level == 1 else prof.b * max(prof.k_node, prof.k_leaf)
        size_cap = self._sig_cap()
        eng = self.engine
        for v in tree.level_nodes(level):
            com = v.committee
            keep = self._keep(v)
            pool: dict[bytes, SrdsSignature] = {}
            useful: dict[bytes, bool] = {}  # honest relay check, shared by the committee
            for i in com:
                got = recv.get((v.id, i), [])
                items = (adv.broadcast_set(view, v.id, i, got) or []) if i in I else got
                kept, nbytes = 0, 0
                sent_here = set()
                for s in items:
                    if kept >= count_cap:
                        break  # per-party broadcast budget
                    if not isinstance(s, SrdsSignature):
                        continue
                    enc = s.encode()
                    if len(enc) > size_cap or enc in sent_here:
                        continue
                    if i not in I:
                        # honest members relay only signatures Aggregate1 would use
                        if enc not in useful:
                            useful[enc] = scheme.contributes(pp, self.keys, s, keep)
                        if not useful[enc]:
                            continue
                    sent_here.add(enc)
                    kept += 1
                    nbytes += len(enc)
                    pool.setdefault(enc, s)
                eng.charge(i, com, nbytes, f"broadcast-{level}")
            s2 = list(pool.values())
            sets: dict[bytes, Any] = {}
            inputs: dict[int, Any] = {}
            for i in com:
                if i in I:
                    continue
                m = self.own_msg.get(i)
                if m is None:
                    continue
                if m not in sets:
                    s3 = scheme.aggregate1(pp, self.keys, m, s2, keep=keep)
                    sets[m] = None if s3 is None else (scheme.encode_set(m, s3), (m, s3))
                if sets[m] is not None:
                    inputs[i] = sets[m]
            honest_item = sets.get(self.m)
            for i in com:
                if i in I:
                    inputs[i] = adv.aggr_input(view, v.id, i, honest_item)
            sigma, agreed = f_aggr_sig(inputs, com, self._finish, lambda: adv.bad_node_sigma(view, v.id))
            if not isinstance(sigma, SrdsSignature):
                sigma = None
            self.node_sigma[v.id] = sigma
            self.node_info[v.id] = {
                "level": level, "agreed": agreed, "good": tree.good[v.id],
                "bytes": None if sigma is None else sigma.size,
                "range": None if sigma is None else [sigma.id_min, sigma.id_max],
                "on_value": sigma is not None and sigma.message == self.m,
            }
        view.node_sigma = dict(self.node_sigma)

    def aggregate(self) -> None:
        self.node_sigma: dict[int, Optional[SrdsSignature]] = {}
        self.node_info: dict[int, dict] = {}
        recv = self.base_round()
        self.process_level(1, recv)
        for level in range(2, self.tree.height + 1):
            recv = self.up_round(level)
            self.process_level(level, recv)
        self.sigma_root = self.node_sigma.get(self.tree.root.id)
        self.view.sigma_root = self.sigma_root

    # -- phase 4: certificate distribution ----------------------------------------
    def distribute(self) -> None:
        adv, view, C, I = self.adv, self.view, self.C, self.I
        honest_triple = pack_triple(self.m, self.sigma_root)
        provided = {}
        for i in C:
            if i in I:
                val = adv.ae_input(view, "cert", i, honest_triple)
                provided[i] = _as_triple(val)
            else:
                provided[i] = honest_triple
        iso = {j: _as_triple(v) for j, v in (adv.isolated_values(view, "cert", honest_triple) or {}).items()}
        got = f_ae_broadcast(provided, C, self.n, self.D, iso)
        self.triples = {i: got[i] for i in self.honest}
        self.engine.oracle_round("ae-cert")

    # -- phase 5: fan-out -------------------------------------------------------------
    def verify(self, m: bytes, sig: SrdsSignature) -> bool:
        key = (m, sig.encode())
        hit = self.vcache.get(key)
        if hit is None:
            try:
                hit = bool(self.scheme.verify(self.pp, self.keys, m, sig))
            except (MalformedInputError, ValueError, TypeError, IndexError):
                hit = False
            self.vcache[key] = hit
        return hit

    def fanout(self) -> None:
        n, out_size = self.n, self.out_size
        fcache: dict = {}

        def fset(s: bytes, i: int) -> frozenset:
            key = (s, i)
            hit = fcache.get(key)
            if hit is None:
                hit = fcache[key] = prf_subset(s, i, n, out_size)
            return hit

        def honest_step(eng):
            for i in self.honest:
                raw = self.triples.get(i)
                if raw is None:
                    continue
                try:
                    m, sig = unpack_triple(raw)
                    _, s = decode_value(m)
                except MalformedInputError:
                    continue
                if sig is None:
                    continue
                yield (i, sorted(q for q in fset(s, i) if q != i), raw, (m, sig), "fanout")

        cap = self._sig_cap() + 64

        def filt(e: RoundEnvelope):
            if len(e.payload) > cap:
                return False
            try:
                _, s = decode_value(peek_triple_value(e.payload))
            except MalformedInputError:
                return False
            return fset(s, e.sender)

        inbox = self.engine.run_round(honest_step, lambda rush: self.adv.fanout_round(self.view, rush),
                                      filt, label="fanout")
        self.outputs: list[Optional[int]] = [None] * n
        self.anomalies: list[dict] = []
        self.forged = 0
        I = self.I
        for j in self.honest:
            accepted = []
            for e in inbox.get(j, ()):
                meta = e.meta
                if meta is None:
                    # parse and verify once per envelope; a multicast reaches many
                    meta = False
                    try:
                        m, sig = e.body if (e.body is not None and e.sender not in I) else unpack_triple(e.payload)
                        y, _ = decode_value(m)
                        if sig is not None and self.verify(m, sig):
                            meta = (e.sender, y, m)
                    except MalformedInputError:
                        pass
                    e.meta = meta
                if meta:
                    accepted.append(meta)
            if not accepted:
                continue
            self.outputs[j] = accepted[0][1]
            if len({y for _, y, _ in accepted}) > 1:
                self.anomalies.append({"party": j, "kind": "conflicting-certificates",
                                       "values": sorted({m.hex() for _, _, m in accepted})})
            if any(m != self.m for _, _, m in accepted):
                self.forged += 1
                self.anomalies.append({"party": j, "kind": "forged-certificate",
                                       "values": sorted({m.hex() for _, _, m in accepted if m != self.m})})


def _as_triple(val) -> Optional[bytes]:
    if val is None or isinstance(val, bytes):
        return val
    if isinstance(val, tuple) and len(val) == 2:
        m, sig = val
        if isinstance(m, bytes) and (sig is None or isinstance(sig, SrdsSignature)):
            return pack_triple(m, sig)
    return None


def locality_bound(profile: TreeProfile, memberships: int, out_size: int) -> int:
    """Distinct peers a party with ``memberships`` committee seats may touch."""
    k = max(profile.k_leaf, profile.k_node)
    return memberships * (profile.b + 2) * k + 3 * out_size


def run_ba(n: int, beta: float, scheme: SrdsScheme, profile: TreeProfile,
           inputs: Union[int, Sequence[int]], adversary: Optional[Adversary] = None, seed: Any = 0, *,
           t: Optional[int] = None, pki_mode: str = "trusted", out_size: Optional[int] = None,
           comm_bound_bits: Optional[int] = None, ae_variant: str = "standard",
           isolated_fraction: Optional[float] = None, isolated_set=None, tree_policy: str = "spread",
           record: bool = False, strict: bool = False, pp: Optional[SrdsParams] = None) -> BaOutcome:
    """One seeded execution; see the module docstring for the schedule.

    ``strict`` turns a broken per-run invariant (communication bound,
    locality, round count) into :class:`InvariantError`.
    """
    if not 0 <= beta < 1 / 3:
        raise ParameterError("beta must lie in [0, 1/3)")
    if t is None:
        t = math.floor(beta * n)
    if t < 0 or 3 * t >= n:
        raise ParameterError("t must satisfy t < n/3")
    if pki_mode not in PKI_MODES:
        raise ParameterError(f"pki_mode must be one of {PKI_MODES}")
    if ae_variant not in AE_VARIANTS:
        raise ParameterError(f"ae_variant must be one of {AE_VARIANTS}")
    try:
        profile.check(n)
    except ParameterError as e:
        raise ConfigurationError(str(e)) from None
    if out_size is None:
        out_size = min(n, 3 * max(1, math.ceil(math.log2(n))))
    run = _Run(n, t, scheme, profile, _inputs(n, inputs), adversary or Silent(), seed, pki_mode, out_size,
               ae_variant, isolated_fraction, isolated_set, tree_policy, record, pp)
    run.setup()
    expected = 3 + profile.height + 1
    aborted = run.init_tree()
    if aborted is None:
        run.agree_value()
        run.aggregate()
        run.distribute()
        run.fanout()
        outputs = run.outputs
    else:
        run.D, run.C = frozenset(), ()
        run.anomalies, run.forged = [], 0
        outputs = [None] * n
    honest = run.honest
    hon_in = {run.inputs[p] for p in honest}
    pre = hon_in.pop() if len(hon_in) == 1 else None
    hon_out = [outputs[p] for p in honest]
    termination = all(o is not None for o in hon_out)
    agreement = termination and len(set(hon_out)) <= 1
    validity = pre is None or all(o == pre for o in hon_out)
    metrics = run.engine.metrics
    comm_ok = comm_bound_bits is None or all(metrics.bits_sent[p] <= comm_bound_bits for p in honest)
    loc_bound, loc_ok = 0, True
    if aborted is None:
        for p in honest:
            b = locality_bound(profile, len(run.member_of[p]), out_size)
            loc_bound = max(loc_bound, b)
            if len(metrics.peers[p]) > b:
                loc_ok = False
    tr = run.transcript
    if aborted is None:
        root = run.sigma_root
        tr.update({
            "y": run.y, "s": run.s.hex(), "value": run.m.hex(),
            "keys_replaced": run.replaced,
            "nodes": {str(k): v for k, v in sorted(run.node_info.items())},
            "sigma_root_bytes": None if root is None else root.size,
            "sigma_root_sha256": None if root is None else hashlib.sha256(root.encode()).hexdigest(),
            "root_verifies": root is not None and run.verify(run.m, root),
        })
    out = BaOutcome(
        n=n, t=t, corrupt=run.I, isolated=run.D, committee=tuple(run.C), inputs=run.inputs,
        outputs=[None if p in run.I else outputs[p] for p in range(n)],
        agreement=agreement, validity=validity, termination=termination, preagreement=pre,
        anomalies=run.anomalies, forged_accepts=run.forged, metrics=metrics,
        rounds=run.engine.round, expected_rounds=expected,
        comm_bound_bits=comm_bound_bits, comm_ok=comm_ok,
        locality_bound=loc_bound, locality_ok=loc_ok, aborted=aborted, transcript=tr,
        engine=run.engine,
    )
    if strict and aborted is None:
        problems = []
        if not comm_ok:
            problems.append(f"honest party sent more than {comm_bound_bits} bits")
        if not loc_ok:
            problems.append("locality bound exceeded")
        if out.rounds != expected:
            problems.append(f"ran {out.rounds} rounds, schedule has {expected}")
        if problems:
            raise InvariantError("; ".join(problems))
    return out


def run_preset(preset, adversary: Optional[Adversary] = None, seed: Any = 0, *,
               inputs: Union[int, Sequence[int], None] = None, scheme: Optional[SrdsScheme] = None,
               scheme_name: str = "owf", beta: Optional[float] = None, **kw) -> BaOutcome:
    """``run_ba`` with everything taken from a :class:`BaPreset`."""
    if inputs is None:
        inputs = seeds.rng(seed, "inputs").getrandbits(1)
    return run_ba(preset.n, preset.beta if beta is None else beta, scheme or preset.scheme(scheme_name),
                  preset.profile, inputs, adversary, seed, out_size=preset.out_size,
                  comm_bound_bits=kw.pop("comm_bound_bits", preset.comm_bound_bits()), **kw)
