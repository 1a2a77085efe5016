import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from srds.ba.presets import get_preset
from srds.errors import ParameterError
from srds.tree import TreeProfile, build_tree, is_good, stack_corruption, validate_tree

PROFILE = get_preset("n64").profile  # z = 4, b = 4, 16 leaves of 16


def make(seed=0, t=0, policy="spread"):
    rnd = random.Random(seed)
    corrupt = frozenset(rnd.sample(range(64), t))
    return build_tree(64, PROFILE, corrupt, rnd, policy=policy), corrupt


def test_is_good_threshold():
    assert is_good(range(9), frozenset({0, 1}))
    assert not is_good(range(9), frozenset({0, 1, 2}))


def test_profile_check():
    PROFILE.check(64)
    with pytest.raises(ParameterError):
        PROFILE.check(65)
    with pytest.raises(ParameterError):
        TreeProfile(b=4, k_node=9, k_leaf=16, n_leaves=8, height=3, z=2).check(64)


@pytest.mark.parametrize("policy", ["random", "spread"])
def test_built_tree_valid_without_corruption(policy):
    tree, c = make(1, 0, policy)
    assert validate_tree(tree, 64, c) == {"valid": True, "violations": []}
    assert tree.isolated() == frozenset()


def test_spread_tree_valid_with_corruption():
    tree, c = make(2, 19)
    check = validate_tree(tree, 64, c)
    assert check["valid"], check["violations"]


def test_structure():
    tree, _ = make(3)
    assert tree.height == 3 and len(tree.leaves) == 16
    for lv in range(2, 4):
        for v in tree.level_nodes(lv):
            kids = [tree.nodes[c] for c in v.children]
            assert v.range == (kids[0].lo, kids[-1].hi)
            assert all(a.hi + 1 == b.lo for a, b in zip(kids, kids[1:]))
    assert tree.root.range == (1, 64 * 4)


def test_idmap_bijection():
    tree, _ = make(4)
    seen = set()
    for p in range(64):
        for j in range(PROFILE.z):
            vid = tree.idmap(p, j)
            assert tree.inverse(vid) == (p, j)
            lo, hi = tree.node_range(tree.leaf_of_vid(vid))
            assert lo <= vid <= hi
            seen.add(vid)
    assert seen == set(range(1, tree.n_virtual + 1))
    with pytest.raises(ParameterError):
        tree.idmap(0, PROFILE.z)
    with pytest.raises(ParameterError):
        tree.inverse(0)


def oracle_isolated(tree):
    good_leaf = {}
    for leaf in tree.levels[0]:
        v, ok = leaf, True
        while v is not None:
            ok = ok and is_good(tree.nodes[v].committee, tree.corrupt)
            v = tree.nodes[v].parent
        good_leaf[leaf] = ok
    out = set()
    for p in range(tree.n):
        hosts = [tree.levels[0][k] for k, slots in enumerate(tree.leaf_slots)
                 for q, _ in slots if q == p]
        if 2 * sum(not good_leaf[h] for h in hosts) > PROFILE.z:
            out.add(p)
    return out


@given(st.integers(0, 10 ** 6), st.integers(0, 21), st.lists(st.integers(16, 20), max_size=3))
@settings(max_examples=30, deadline=None)
def test_isolation_matches_oracle(seed, t, stack):
    tree, _ = make(seed, t, "random")
    if t:
        tree = stack_corruption(tree, stack, random.Random(seed))
    assert tree.isolated() == oracle_isolated(tree)


def test_stack_corruption():
    tree, c = make(5, 19)
    internal = tree.levels[1][0]
    stacked = stack_corruption(tree, [internal], random.Random(0))
    assert not stacked.good[internal]
    assert all(not stacked.has_good_path(leaf) for leaf in stacked.nodes[internal].children)
    with pytest.raises(ParameterError):
        stack_corruption(tree, [tree.levels[0][0]], random.Random(0))


def test_validate_detects_tampering():
    tree, c = make(6)
    leaf = tree.levels[0][0]
    mid = tree.levels[1][0]
    com = list(tree.nodes[mid].committee)
    cases = {
        "duplicate": tree.with_committee(mid, [com[0]] + com[:-1]),
        "size": tree.with_committee(mid, com[:-1]),
        "unknown": tree.with_committee(mid, com[:-1] + [999]),
        "leaf slots": tree.with_committee(leaf, list(reversed(tree.nodes[leaf].committee))),
    }
    for name, bad in cases.items():
        assert not validate_tree(bad, 64, c)["valid"], name
    corrupt = frozenset(tree.root.committee[:3])
    assert "root is bad" in validate_tree(tree, 64, corrupt)["violations"]
    assert not validate_tree(tree, 64, frozenset(range(22)))["valid"]


def test_json_deterministic():
    a, _ = make(7, 10)
    b, _ = make(7, 10)
    assert a.to_json() == b.to_json()
    doc = json.loads(a.to_json())
    assert len(doc["levels"]) == 3 and doc["corrupt"] == sorted(a.corrupt)


def test_build_errors():
    rnd = random.Random(0)
    with pytest.raises(ParameterError):
        build_tree(64, PROFILE, range(22), rnd)
    with pytest.raises(ParameterError):
        build_tree(64, PROFILE, (), rnd, policy="odd")
    with pytest.raises(ParameterError):
        build_tree(64, PROFILE, (), rnd, planar=True)
