"""Adversary strategies for the agreement protocol.

An adversary is a bag of hooks called by the protocol at fixed points. The
base class is the silent strategy: it corrupts ``t`` random parties and then
sends nothing, provides nothing to any functionality and lets every choice
fall to its default (no value, no signature).
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

from ..core import SrdsParams, SrdsScheme, SrdsSignature
from ..prf import prf_subset
from ..tree import CommTree, TreeProfile, build_tree, stack_corruption, validate_tree
from .messages import BASE_SRC, encode_value, pack_sig, pack_triple


@dataclass
class AdversaryView:
    """Everything the adversary knows, filled in as the run proceeds."""
    n: int
    t: int
    z: int
    scheme: SrdsScheme
    pp: SrdsParams
    profile: TreeProfile
    pki_mode: str
    out_size: int
    rng: random.Random
    party_keys: dict
    corrupt: frozenset = frozenset()
    sks: dict = field(default_factory=dict)
    tree: Optional[CommTree] = None
    keys: Optional[list] = None
    isolated: frozenset = frozenset()
    committee: tuple = ()
    value: Optional[bytes] = None
    y: Optional[int] = None
    s: Optional[bytes] = None
    sigma_root: Optional[SrdsSignature] = None
    node_sigma: dict = field(default_factory=dict)
    scratch: dict = field(default_factory=dict)

    def sign_as(self, party: int, slot: int, m: bytes) -> Optional[SrdsSignature]:
        vid = self.tree.idmap(party, slot)
        return self.scheme.sign(self.pp, vid, self.sks.get((party, slot)), m)

    def corrupt_members(self, node: int) -> list[int]:
        return [p for p in self.tree.nodes[node].committee if p in self.corrupt]


class Adversary:
    name = "silent"

    def __init__(self, corrupt: Optional[Iterable[int]] = None):
        self.fixed = None if corrupt is None else list(corrupt)

    # -- setup --------------------------------------------------------------
    def choose_corrupt(self, view: AdversaryView) -> Iterable[int]:
        if self.fixed is not None:
            return self.fixed
        return view.rng.sample(range(view.n), view.t)

    def replace_keys(self, view: AdversaryView) -> dict:
        return {}

    def provide_tree(self, view: AdversaryView) -> Optional[CommTree]:
        return None

    # -- functionalities ----------------------------------------------------
    def ba_input(self, view: AdversaryView, party: int) -> Optional[int]:
        return None

    def ba_choice(self, view: AdversaryView) -> int:
        return 0

    def ae_input(self, view: AdversaryView, phase: str, party: int, honest: Any) -> Any:
        return None

    def isolated_values(self, view: AdversaryView, phase: str, value: Any) -> dict:
        return {}

    def broadcast_set(self, view: AdversaryView, node: int, member: int,
                      received: list[SrdsSignature]) -> list[SrdsSignature]:
        return []

    def aggr_input(self, view: AdversaryView, node: int, member: int, honest: Any) -> Any:
        return None

    def bad_node_sigma(self, view: AdversaryView, node: int) -> Optional[SrdsSignature]:
        return None

    # -- point-to-point rounds (rushing view of honest traffic to corrupt parties)
    def base_round(self, view: AdversaryView, rushing: list) -> Iterable[tuple]:
        return ()

    def up_round(self, view: AdversaryView, level: int, rushing: list) -> Iterable[tuple]:
        return ()

    def fanout_round(self, view: AdversaryView, rushing: list) -> Iterable[tuple]:
        return ()


class Silent(Adversary):
    name = "silent"


class Equivocator(Adversary):
    """Runs the whole protocol on a rival value ``m'`` with its own keys.

    Corrupt parties sign ``m'`` in every slot, push those signatures through
    every committee they sit in, ask every committee to aggregate them, pick
    the ``m'`` aggregate at bad nodes, hand ``m'`` to isolated parties and
    finally send the best ``m'`` certificate it can build in the fan-out.
    """
    name = "equivocator"

    def __init__(self, corrupt=None, target: Optional[bytes] = None):
        super().__init__(corrupt)
        self.target = target

    def rival(self, view: AdversaryView) -> bytes:
        if self.target is not None:
            return self.target
        return encode_value(1 - view.y, view.s)

    def _pool(self, view: AdversaryView) -> dict:
        """vid -> signature on the rival value, for every corrupt slot with a key."""
        pool = view.scratch.get("pool")
        if pool is None:
            m2 = self.rival(view)
            pool = {}
            for p in sorted(view.corrupt):
                for j in range(view.z):
                    sig = view.sign_as(p, j, m2)
                    if sig is not None:
                        pool[view.tree.idmap(p, j)] = sig
            view.scratch["pool"] = pool
        return pool

    def _node_set(self, view: AdversaryView, node: int):
        cache = view.scratch.setdefault("sets", {})
        if node not in cache:
            v = view.tree.nodes[node]
            sigs = [s for vid, s in self._pool(view).items() if v.lo <= vid <= v.hi]
            m2 = self.rival(view)
            cache[node] = (m2, view.scheme.aggregate1(view.pp, view.keys, m2, sigs))
        return cache[node]

    def _node_sig(self, view: AdversaryView, node: int) -> Optional[SrdsSignature]:
        m2, s = self._node_set(view, node)
        return None if s is None else view.scheme.aggregate2(view.pp, m2, s)

    def ae_input(self, view, phase, party, honest):
        return None

    def isolated_values(self, view, phase, value):
        m2 = self.rival(view)
        if phase == "value":
            return {j: m2 for j in view.isolated}
        return {j: (m2, self._node_sig(view, view.tree.root.id)) for j in view.isolated}

    def broadcast_set(self, view, node, member, received):
        v = view.tree.nodes[node]
        if v.level == 1:
            return [s for vid, s in self._pool(view).items() if v.lo <= vid <= v.hi]
        out = [self._node_sig(view, c) for c in v.children]
        return [s for s in out if s is not None]

    def aggr_input(self, view, node, member, honest):
        m2, s = self._node_set(view, node)
        if s is None:
            return None
        return (view.scheme.encode_set(m2, s), (m2, s))

    def bad_node_sigma(self, view, node):
        return self._node_sig(view, node)

    def base_round(self, view, rushing):
        tree = view.tree
        for vid, sig in sorted(self._pool(view).items()):
            p, _ = tree.inverse(vid)
            leaf = tree.leaf_of_vid(vid)
            to = [q for q in tree.nodes[leaf].committee if q != p]
            yield (p, to, pack_sig(leaf, BASE_SRC, sig))

    def up_round(self, view, level, rushing):
        tree = view.tree
        for v in tree.level_nodes(level - 1):
            sig = self._node_sig(view, v.id)
            if sig is None or v.parent is None:
                continue
            parent = tree.nodes[v.parent].committee
            for p in view.corrupt_members(v.id):
                yield (p, [q for q in parent if q != p], pack_sig(v.parent, v.id, sig))

    def fanout_round(self, view, rushing):
        m2 = self.rival(view)
        cert = self._node_sig(view, view.tree.root.id)
        payload = pack_triple(m2, cert)
        _, s2 = m2[0], m2[1:]
        for p in sorted(view.corrupt):
            to = [q for q in prf_subset(s2, p, view.n, view.out_size) if q != p]
            yield (p, sorted(to), payload)


class TreeStaler(Adversary):
    """Stacks corrupt parties onto a few internal committees and feeds garbage.

    Bad nodes get a garbage aggregate claiming the node's full range; corrupt
    members everywhere broadcast garbage and send garbage upward.
    """
    name = "tree_staler"

    def __init__(self, corrupt=None, stack: int = 1, level: int = 2, garbage_bytes: Optional[int] = None):
        super().__init__(corrupt)
        self.stack = stack
        self.level = level
        self.garbage_bytes = garbage_bytes

    def provide_tree(self, view):
        base = build_tree(view.n, view.profile, view.corrupt, view.rng, policy="spread")
        lv = min(max(2, self.level), base.height - 1)
        if lv < 2:
            return base
        cands = [v.id for v in base.level_nodes(lv)]
        view.rng.shuffle(cands)
        for k in range(min(self.stack, len(cands)), 0, -1):
            tree = stack_corruption(base, cands[:k], view.rng)
            if validate_tree(tree, view.n, view.corrupt)["valid"]:
                return tree
        return base

    def _garbage(self, view, node: int) -> SrdsSignature:
        cache = view.scratch.setdefault("garbage", {})
        if node not in cache:
            v = view.tree.nodes[node]
            size = self.garbage_bytes or max(16, view.pp.alpha_limit // 4)
            blob = view.rng.getrandbits(8 * size).to_bytes(size, "big")
            cache[node] = SrdsSignature(view.value or b"", blob, v.lo, v.hi)
        return cache[node]

    def broadcast_set(self, view, node, member, received):
        return [self._garbage(view, node)]

    def aggr_input(self, view, node, member, honest):
        g = self._garbage(view, node)
        return (g.payload, None)

    def bad_node_sigma(self, view, node):
        return self._garbage(view, node)

    def up_round(self, view, level, rushing):
        tree = view.tree
        for v in tree.level_nodes(level - 1):
            if v.parent is None:
                continue
            members = view.corrupt_members(v.id)
            if not members:
                continue
            g = pack_sig(v.parent, v.id, self._garbage(view, v.id))
            parent = tree.nodes[v.parent].committee
            for p in members:
                yield (p, [q for q in parent if q != p], g)


class KeyReplacer(Equivocator):
    """Bare-PKI substitution: every corrupt slot gets a freshly generated key.

    After replacement it behaves like the equivocator, signing the rival
    value with the substituted keys. Under a trusted PKI the substitution is
    ignored by the setup and the original corrupt keys are used instead.
    """
    name = "key_replacer"

    def replace_keys(self, view):
        out = {}
        for p in sorted(view.corrupt):
            for j in range(view.z):
                seed = view.rng.getrandbits(256).to_bytes(32, "big")
                vk, sk = view.scheme.keygen(view.pp, seed)
                out[(p, j)] = vk
                view.scratch.setdefault("new_sks", {})[(p, j)] = sk
        return out

    def _pool(self, view):
        if "pool" not in view.scratch and view.pki_mode == "bare":
            view.sks = {**view.sks, **view.scratch.get("new_sks", {})}
        return super()._pool(view)


ADVERSARIES = {
    "silent": Silent,
    "equivocator": Equivocator,
    "tree_staler": TreeStaler,
    "key_replacer": KeyReplacer,
}


def make_adversary(name: str, **params) -> Adversary:
    try:
        cls = ADVERSARIES[name]
    except KeyError:
        raise KeyError(f"unknown adversary {name!r}; choose from {sorted(ADVERSARIES)}") from None
    return cls(**params)
