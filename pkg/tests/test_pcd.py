import pytest
from hypothesis import given, settings, strategies as st

from srds import seeds
from srds.core import SrdsSignature
from srds.errors import MalformedInputError, ParameterError
from srds.pcd import (ComplianceContext, PcdConfig, PcdScheme, PcdTranscript, compliance_check,
                      _max_weight_disjoint)


def build(n):
    scheme = PcdScheme(PcdConfig(alpha_const=160))
    pp = scheme.setup(n, b"pp")
    pairs = [scheme.keygen(pp, seeds.derive(b"p", "key", i)) for i in range(1, n + 1)]
    return scheme, pp, [vk for vk, _ in pairs], [sk for _, sk in pairs]


def sigs_for(scheme, pp, sks, m, ids):
    return [scheme.sign(pp, i, sks[i - 1], m) for i in ids]


def base(scheme, keys, sks, pp, i, m):
    tree = scheme.key_tree(keys)
    gamma = scheme.sign(pp, i, sks[i - 1], m).body[1]
    return PcdTranscript(m, 1, i, i, gamma, tree.root, keys[i - 1], tree.proof(i - 1))


@pytest.fixture(scope="module")
def world():
    return build(12)


@pytest.fixture
def ctx(world):
    scheme = world[0]
    return ComplianceContext(scheme._seed, scheme.digest_bits)


def test_unknown_backend():
    with pytest.raises(ParameterError):
        PcdScheme(PcdConfig(proof_backend="snark"))


def test_two_bases_comply(world, ctx):
    scheme, pp, keys, sks = world
    a, b = base(scheme, keys, sks, pp, 3, b"m"), base(scheme, keys, sks, pp, 7, b"m")
    h = a.h_vk
    assert compliance_check([a, b], PcdTranscript(b"m", 2, 7, 3, None, h), ctx)
    assert not compliance_check([a, b], PcdTranscript(b"m", 3, 7, 3, None, h), ctx)
    assert not compliance_check([a, b], PcdTranscript(b"m", 2, 8, 3, None, h), ctx)
    # order matters: ranges must increase
    assert not compliance_check([b, a], PcdTranscript(b"m", 2, 3, 7, None, h), ctx)
    # one commitment throughout
    assert not compliance_check([a, b], PcdTranscript(b"m", 2, 7, 3, None, bytes(32)), ctx)


def test_compliance_rejects_bad_base(world, ctx):
    scheme, pp, keys, sks = world
    a = base(scheme, keys, sks, pp, 3, b"m")
    other = base(scheme, keys, sks, pp, 3, b"x")
    swapped = PcdTranscript(b"m", 1, 3, 3, other.gamma, a.h_vk, a.k, a.p)
    out = PcdTranscript(b"m", 1, 3, 3, None, a.h_vk)
    assert compliance_check([a], out, ctx)
    assert not compliance_check([swapped], out, ctx)
    # key proof for a different slot
    moved = PcdTranscript(b"m", 1, 4, 4, a.gamma, a.h_vk, a.k, a.p)
    assert not compliance_check([moved], PcdTranscript(b"m", 1, 4, 4, None, a.h_vk), ctx)
    with pytest.raises(MalformedInputError):
        compliance_check([], out, ctx)


def test_overlapping_ranges_rejected(world, ctx):
    scheme, pp, keys, sks = world
    a = base(scheme, keys, sks, pp, 3, b"m")
    assert not compliance_check([a, a], PcdTranscript(b"m", 2, 3, 3, None, a.h_vk), ctx)


def test_shape_checks():
    with pytest.raises(MalformedInputError):
        PcdTranscript(b"m", 1, 4, 3, (b"xx",), b"h").check_shape()
    with pytest.raises(MalformedInputError):
        PcdTranscript(b"m", -1, 4, 3, None, b"h").check_shape()


def test_threshold(world):
    # n = 12 needs c >= 4
    scheme, pp, keys, sks = world
    m = b"vote"
    three = scheme.aggregate(pp, keys, m, sigs_for(scheme, pp, sks, m, [1, 5, 9]))
    four = scheme.aggregate(pp, keys, m, sigs_for(scheme, pp, sks, m, [1, 5, 9, 12]))
    assert scheme.count(pp, keys, m, three) == 3
    assert not scheme.verify(pp, keys, m, three)
    assert scheme.verify(pp, keys, m, four)
    assert (four.id_min, four.id_max) == (1, 12)


def test_different_key_list_rejected(world):
    scheme, pp, keys, sks = world
    m = b"vote"
    agg = scheme.aggregate(pp, keys, m, sigs_for(scheme, pp, sks, m, range(1, 7)))
    other = list(keys)
    other[10] = scheme.keygen(pp, b"fresh")[0]
    assert scheme.verify(pp, keys, m, agg)
    assert not scheme.verify(pp, other, m, agg)
    assert not scheme.verify(pp, keys, b"other", agg)


def test_inflated_count_rejected(world):
    scheme, pp, keys, sks = world
    m = b"vote"
    agg = scheme.aggregate(pp, keys, m, sigs_for(scheme, pp, sks, m, [2, 3]))
    c, _, proof = scheme.parse(agg)
    fake = SrdsSignature(m, scheme._payload(12, None, proof), agg.id_min, agg.id_max)
    assert scheme.count(pp, keys, m, fake) == -1
    # a base signature is not a valid aggregate
    assert scheme.count(pp, keys, m, sigs_for(scheme, pp, sks, m, [2])[0]) == -1


def test_duplicates_do_not_inflate(world):
    scheme, pp, keys, sks = world
    m = b"dup"
    sigs = sigs_for(scheme, pp, sks, m, [1, 2, 3])
    agg = scheme.aggregate(pp, keys, m, sigs)
    again = scheme.aggregate(pp, keys, m, sigs + sigs + [agg, agg])
    assert scheme.count(pp, keys, m, again) == 3
    assert not scheme.verify(pp, keys, m, again)


def test_overlapping_aggregates_pick_best(world):
    scheme, pp, keys, sks = world
    m = b"ov"
    wide = scheme.aggregate(pp, keys, m, sigs_for(scheme, pp, sks, m, [1, 6]))
    dense = scheme.aggregate(pp, keys, m, sigs_for(scheme, pp, sks, m, [2, 3, 4]))
    tail = sigs_for(scheme, pp, sks, m, [8])
    out = scheme.aggregate(pp, keys, m, [wide, dense] + tail)
    assert scheme.count(pp, keys, m, out) == 4


def test_wrong_message_and_garbage_dropped(world):
    scheme, pp, keys, sks = world
    m = b"m"
    junk = SrdsSignature(m, b"\x00\x00\x00\x09\x07", 1, 1)
    s = scheme.aggregate1(pp, keys, m, sigs_for(scheme, pp, sks, b"x", [1, 2]) + [junk])
    assert s.elems == ()


@given(st.lists(st.tuples(st.integers(1, 20), st.integers(0, 5), st.integers(1, 4)), max_size=10))
@settings(max_examples=100, deadline=None)
def test_max_weight_disjoint_matches_brute_force(ranges):
    from itertools import combinations
    items = []
    for k, (lo, width, c) in enumerate(ranges):
        z = PcdTranscript(b"", c, lo + width, lo, None, b"")
        items.append((bytes([k]), (z, None)))
    chosen = _max_weight_disjoint(items)
    zs = [e[0] for _, e in chosen]
    assert all(a.max < b.min for a, b in zip(zs, zs[1:]))
    best = 0
    for r in range(len(items) + 1):
        for combo in combinations(items, r):
            rs = sorted((e[0].min, e[0].max) for _, e in combo)
            if all(a[1] < b[0] for a, b in zip(rs, rs[1:])):
                best = max(best, sum(e[0].c for _, e in combo))
    assert sum(z.c for z in zs) == best


def test_alpha_bounds_aggregation():
    scheme = PcdScheme(PcdConfig(alpha_bytes=600))
    pp = scheme.setup(12, b"pp")
    pairs = [scheme.keygen(pp, seeds.derive(b"p", "key", i)) for i in range(1, 13)]
    keys, sks = [vk for vk, _ in pairs], [sk for _, sk in pairs]
    assert scheme.aggregate1(pp, keys, b"m", sigs_for(scheme, pp, sks, b"m", range(1, 13))) is None
