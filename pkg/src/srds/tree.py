"""Almost-everywhere communication trees.

Levels are numbered from 1 (leaves) to ``h`` (root). Each party sits on
``z`` leaves (one per slot); leaf ``k`` (0-based, planar order) owns virtual
IDs ``k*z_star + 1 .. (k+1)*z_star``. A node is good when fewer than a third
of its committee is corrupt; a leaf has a good path when it and all its
ancestors are good; a party is isolated when most of its leaves lack one.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import ParameterError


@dataclass(frozen=True)
class TreeProfile:
    b: int
    k_node: int
    k_leaf: int
    n_leaves: int
    height: int
    z: int
    max_bad_leaf_fraction: Optional[float] = None  # None -> 3/log2(n)

    @property
    def z_star(self) -> int:
        return self.k_leaf

    def check(self, n: int) -> None:
        if self.z * n != self.n_leaves * self.k_leaf:
            raise ParameterError(f"slot conservation fails: z*n={self.z * n} != L*k_leaf={self.n_leaves * self.k_leaf}")
        if self.b ** (self.height - 1) != self.n_leaves:
            raise ParameterError("n_leaves must equal b^(height-1)")
        if self.k_leaf > n or self.k_node > n:
            raise ParameterError("committee larger than the party set")

    def bad_leaf_bound(self, n: int) -> float:
        if self.max_bad_leaf_fraction is not None:
            return self.max_bad_leaf_fraction
        return 3 / math.log2(n) if n > 1 else 1.0

    @classmethod
    def asymptotic(cls, n: int) -> "TreeProfile":
        """Asymptotic shape; only self-consistent for astronomically large n."""
        lg = math.ceil(math.log2(n))
        k_leaf, b = lg ** 5, lg
        z = lg ** 4
        leaves = max(1, n * z // k_leaf)
        h = max(2, math.ceil(math.log(leaves, b)) + 1)
        return cls(b=b, k_node=lg ** 3, k_leaf=k_leaf, n_leaves=b ** (h - 1), height=h, z=z)


@dataclass(frozen=True)
class Node:
    id: int
    level: int
    index: int
    committee: tuple[int, ...]
    parent: Optional[int]
    children: tuple[int, ...]
    lo: int
    hi: int

    @property
    def range(self) -> tuple[int, int]:
        return (self.lo, self.hi)


def is_good(committee: Iterable[int], corrupt: frozenset) -> bool:
    members = set(committee)
    bad = sum(1 for p in members if p in corrupt)
    return 3 * bad < len(members)


@dataclass
class CommTree:
    n: int
    profile: TreeProfile
    corrupt: frozenset
    nodes: list[Node]
    levels: list[list[int]]  # levels[0] = leaf ids in planar order
    leaf_slots: list[tuple[tuple[int, int], ...]]  # per leaf: ((party, slot), ...) by position
    good: dict[int, bool] = field(default_factory=dict)
    _idmap: dict = field(default_factory=dict, repr=False)
    _inv: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.relabel(self.corrupt)

    # -- labels ------------------------------------------------------------
    def relabel(self, corrupt: Iterable[int]) -> None:
        self.corrupt = frozenset(corrupt)
        self.good = {v.id: is_good(v.committee, self.corrupt) for v in self.nodes}
        zs = self.profile.z_star
        self._idmap, self._inv = {}, {}
        for k, slots in enumerate(self.leaf_slots):
            for pos, (party, j) in enumerate(slots):
                vid = k * zs + pos + 1
                self._idmap[(party, j)] = vid
                self._inv[vid] = (party, j)

    @property
    def root(self) -> Node:
        return self.nodes[self.levels[-1][0]]

    @property
    def height(self) -> int:
        return len(self.levels)

    @property
    def leaves(self) -> list[Node]:
        return [self.nodes[i] for i in self.levels[0]]

    def level_nodes(self, level: int) -> list[Node]:
        return [self.nodes[i] for i in self.levels[level - 1]]

    def has_good_path(self, leaf_id: int) -> bool:
        v: Optional[int] = leaf_id
        while v is not None:
            if not self.good[v]:
                return False
            v = self.nodes[v].parent
        return True

    def good_path_leaves(self) -> set[int]:
        return {v for v in self.levels[0] if self.has_good_path(v)}

    def bad_leaf_fraction(self) -> float:
        return 1 - len(self.good_path_leaves()) / len(self.levels[0])

    def party_leaves(self, party: int) -> list[int]:
        """Leaf ids hosting ``party`` ordered by slot."""
        out = []
        for j in range(self.profile.z):
            vid = self._idmap.get((party, j))
            if vid is not None:
                out.append(self.levels[0][(vid - 1) // self.profile.z_star])
        return out

    def isolated(self) -> frozenset:
        gp = self.good_path_leaves()
        z = self.profile.z
        out = set()
        for p in range(self.n):
            bad = sum(1 for leaf in self.party_leaves(p) if leaf not in gp)
            if 2 * bad > z:
                out.add(p)
        return frozenset(out)

    # -- ids -----------------------------------------------------------------
    def idmap(self, i: int, j: int) -> int:
        try:
            return self._idmap[(i, j)]
        except KeyError:
            raise ParameterError(f"no slot {j} for party {i}") from None

    def inverse(self, vid: int) -> tuple[int, int]:
        try:
            return self._inv[vid]
        except KeyError:
            raise ParameterError(f"unknown virtual id {vid}") from None

    @property
    def n_virtual(self) -> int:
        return self.n * self.profile.z

    def node_range(self, v: int) -> tuple[int, int]:
        return self.nodes[v].range

    def leaf_of_vid(self, vid: int) -> int:
        return self.levels[0][(vid - 1) // self.profile.z_star]

    # -- views -------------------------------------------------------------
    def with_committee(self, v: int, committee: Sequence[int]) -> "CommTree":
        nodes = list(self.nodes)
        nodes[v] = replace(nodes[v], committee=tuple(committee))
        return CommTree(self.n, self.profile, self.corrupt, nodes, self.levels, self.leaf_slots)

    def to_json(self) -> str:
        return json.dumps({
            "n": self.n,
            "profile": self.profile.__dict__,
            "corrupt": sorted(self.corrupt),
            "levels": [[{
                "id": v.id, "committee": list(v.committee), "range": [v.lo, v.hi],
                "good": self.good[v.id], "parent": v.parent, "children": list(v.children),
            } for v in self.level_nodes(lv)] for lv in range(1, self.height + 1)],
            "leaf_slots": [[list(s) for s in slots] for slots in self.leaf_slots],
            "isolated": sorted(self.isolated()),
        }, sort_keys=True)


# -- construction ------------------------------------------------------------

def _even_counts(total: int, buckets: int, rnd: random.Random) -> list[int]:
    """Split ``total`` into ``buckets`` near-equal parts, extras placed at random."""
    base, extra = divmod(total, buckets)
    counts = [base] * buckets
    for k in rnd.sample(range(buckets), extra):
        counts[k] += 1
    return counts


def _repair(chunks: list[list[int]], rnd: random.Random) -> None:
    """Swap entries until no chunk holds a party twice."""
    for _ in range(100 * len(chunks) + 100):
        dup = None
        for ci, ch in enumerate(chunks):
            seen = set()
            for pi, p in enumerate(ch):
                if p in seen:
                    dup = (ci, pi)
                    break
                seen.add(p)
            if dup:
                break
        if dup is None:
            return
        ci, pi = dup
        p = chunks[ci][pi]
        order = list(range(len(chunks)))
        rnd.shuffle(order)
        for cj in order:
            if cj == ci or p in chunks[cj]:
                continue
            for pj, q in enumerate(chunks[cj]):
                if q not in chunks[ci]:
                    chunks[ci][pi], chunks[cj][pj] = q, p
                    break
            else:
                continue
            break
    raise ParameterError("could not place parties without duplicates")


def _leaf_chunks(n: int, prof: TreeProfile, corrupt: frozenset, rnd: random.Random,
                 policy: str) -> list[list[int]]:
    L, k = prof.n_leaves, prof.k_leaf
    if policy == "spread":
        bad = [p for p in range(n) if p in corrupt]
        hon = [p for p in range(n) if p not in corrupt]
        rnd.shuffle(bad)
        rnd.shuffle(hon)
        counts = _even_counts(len(bad) * prof.z, L, rnd)
        chunks, bi, hi = [], 0, 0
        for c in counts:
            ch = [bad[(bi + t) % len(bad)] for t in range(c)] if bad else []
            ch += [hon[(hi + t) % len(hon)] for t in range(k - c)]
            bi += c
            hi += k - c
            rnd.shuffle(ch)
            chunks.append(ch)
    else:
        flat: list[int] = []
        for _ in range(prof.z):
            perm = list(range(n))
            rnd.shuffle(perm)
            flat.extend(perm)
        chunks = [flat[i * k:(i + 1) * k] for i in range(L)]
    _repair(chunks, rnd)
    return chunks


def _committee(n: int, k: int, corrupt: frozenset, rnd: random.Random, policy: str,
               n_bad: Optional[int] = None) -> tuple[int, ...]:
    if policy == "spread" and n_bad is not None:
        bad = sorted(corrupt)
        hon = [p for p in range(n) if p not in corrupt]
        n_bad = min(n_bad, len(bad))
        picks = rnd.sample(bad, n_bad) + rnd.sample(hon, k - n_bad)
        rnd.shuffle(picks)
        return tuple(picks)
    return tuple(rnd.sample(range(n), k))


def build_tree(n: int, profile: TreeProfile, corrupt: Iterable[int], rnd: random.Random,
               policy: str = "random", planar: bool = False) -> CommTree:
    """Seeded committee assignment.

    ``random``: leaves from z shuffled copies of the party list, internal
    committees sampled uniformly. ``spread``: corrupt parties are dealt as
    evenly as integer rounding allows across every level (the root gets the
    smallest share), standing in for a tree builder whose committees mirror
    the global corruption ratio. ``planar`` (z = 1 only) fixes leaf ``k`` to
    parties ``k*k_leaf .. (k+1)*k_leaf - 1`` so virtual ID = party + 1.
    """
    profile.check(n)
    corrupt = frozenset(corrupt)
    if 3 * len(corrupt) >= n:
        raise ParameterError("corrupt set must be smaller than n/3")
    if policy not in ("random", "spread"):
        raise ParameterError(f"unknown policy {policy!r}")
    if planar:
        if profile.z != 1:
            raise ParameterError("planar leaves need z = 1")
        k = profile.k_leaf
        chunks = [list(range(i * k, (i + 1) * k)) for i in range(profile.n_leaves)]
    else:
        chunks = _leaf_chunks(n, profile, corrupt, rnd, policy)
    counters: dict[int, int] = {}
    leaf_slots = []
    for ch in chunks:
        slots = []
        for p in ch:
            j = counters.get(p, 0)
            counters[p] = j + 1
            slots.append((p, j))
        leaf_slots.append(tuple(slots))
    zs = profile.z_star
    nodes: list[Node] = []
    levels: list[list[int]] = [[]]
    for k, slots in enumerate(leaf_slots):
        nodes.append(Node(len(nodes), 1, k, tuple(p for p, _ in slots), None, (), k * zs + 1, (k + 1) * zs))
        levels[0].append(len(nodes) - 1)
    share = Fraction(len(corrupt), n) * profile.k_node
    for lv in range(2, profile.height + 1):
        below = levels[-1]
        count = len(below) // profile.b
        if policy == "spread":
            if count == 1:
                quotas = [int(share)]
            else:
                quotas = _even_counts(int(share * count), count, rnd)
        else:
            quotas = [None] * count
        cur = []
        for idx in range(count):
            kids = tuple(below[idx * profile.b:(idx + 1) * profile.b])
            com = _committee(n, profile.k_node, corrupt, rnd, policy, quotas[idx])
            lo, hi = nodes[kids[0]].lo, nodes[kids[-1]].hi
            nodes.append(Node(len(nodes), lv, idx, com, None, kids, lo, hi))
            cur.append(len(nodes) - 1)
        levels.append(cur)
    for v in list(nodes):
        for c in v.children:
            nodes[c] = replace(nodes[c], parent=v.id)
    return CommTree(n, profile, corrupt, nodes, levels, leaf_slots)


def stack_corruption(tree: CommTree, node_ids: Iterable[int], rnd: random.Random) -> CommTree:
    """Make the given nodes bad by swapping corrupt parties into their committees."""
    bad_pool = sorted(tree.corrupt)
    out = tree
    for v in node_ids:
        if tree.nodes[v].level == 1:
            raise ParameterError("leaf committees are fixed by slot assignment")
        com = list(out.nodes[v].committee)
        need = -(-len(com) // 3)
        have = [p for p in com if p in tree.corrupt]
        extra = [p for p in bad_pool if p not in com]
        rnd.shuffle(extra)
        hon_pos = [i for i, p in enumerate(com) if p not in tree.corrupt]
        rnd.shuffle(hon_pos)
        for pos, p in zip(hon_pos, extra[:max(0, need - len(have))]):
            com[pos] = p
        out = out.with_committee(v, com)
    return out


def validate_tree(tree: CommTree, n: int, corrupt: Iterable[int]) -> dict:
    """Check every structural and labelling clause; returns {valid, violations}."""
    corrupt = frozenset(corrupt)
    prof = tree.profile
    v_: list[str] = []
    try:
        prof.check(n)
    except ParameterError as e:
        v_.append(str(e))
    if tree.n != n:
        v_.append("party count mismatch")
    if 3 * len(corrupt) >= n:
        v_.append("corrupt set not below n/3")
    if len(tree.levels) != prof.height:
        v_.append("height mismatch")
    for lv, ids in enumerate(tree.levels, start=1):
        if len(ids) != prof.n_leaves // prof.b ** (lv - 1):
            v_.append(f"level {lv} has {len(ids)} nodes")
        for idx, i in enumerate(ids):
            node = tree.nodes[i]
            if node.level != lv or node.index != idx:
                v_.append(f"node {i} misplaced")
            size = prof.k_leaf if lv == 1 else prof.k_node
            if len(node.committee) != size:
                v_.append(f"node {i} committee size {len(node.committee)}")
            if len(set(node.committee)) != len(node.committee):
                v_.append(f"node {i} has a duplicate member")
            if any(not 0 <= p < n for p in node.committee):
                v_.append(f"node {i} has an unknown party")
            if lv > 1:
                if len(node.children) != prof.b:
                    v_.append(f"node {i} has {len(node.children)} children")
                kids = [tree.nodes[c] for c in node.children]
                if any(k.parent != i for k in kids):
                    v_.append(f"node {i} parent links broken")
                if kids and (node.lo, node.hi) != (kids[0].lo, kids[-1].hi):
                    v_.append(f"node {i} range is not the union of its children")
                for a, b in zip(kids, kids[1:]):
                    if a.hi + 1 != b.lo:
                        v_.append(f"node {i} children not contiguous")
    zs = prof.z_star
    for k, i in enumerate(tree.levels[0]):
        leaf = tree.nodes[i]
        if (leaf.lo, leaf.hi) != (k * zs + 1, (k + 1) * zs):
            v_.append(f"leaf {k} range out of planar order")
        if tuple(p for p, _ in tree.leaf_slots[k]) != leaf.committee:
            v_.append(f"leaf {k} slots disagree with committee")
    counts: dict[int, list[int]] = {}
    for slots in tree.leaf_slots:
        for p, j in slots:
            counts.setdefault(p, []).append(j)
    for p in range(n):
        if sorted(counts.get(p, [])) != list(range(prof.z)):
            v_.append(f"party {p} does not hold exactly slots 0..{prof.z - 1}")
            break
    if len(tree.levels[-1]) != 1:
        v_.append("no unique root")
    else:
        if not is_good(tree.root.committee, corrupt):
            v_.append("root is bad")
    if not v_:
        relabelled = CommTree(n, prof, corrupt, tree.nodes, tree.levels, tree.leaf_slots)
        frac = relabelled.bad_leaf_fraction()
        if frac > prof.bad_leaf_bound(n) + 1e-12:
            v_.append(f"bad-path leaf fraction {frac:.3f} exceeds bound {prof.bad_leaf_bound(n):.3f}")
    return {"valid": not v_, "violations": v_}
