import itertools
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from srds.errors import MalformedInputError, ParameterError
from srds.subset_phi import (CnfFormula, RingElem, SubsetPhiInstance, brute_force, check_by_enumeration,
                             default_modulus, least_prime_at_least, pad_formula, parse_dimacs,
                             phi_eval, random_3cnf, reduce_3sat, sample_subset_product,
                             witness_from_assignment, witness_structure)

SAT = CnfFormula(3, ((1, 2, -3), (-1, 2, 3)))
# all 8 sign patterns over x1..x3: unsatisfiable
UNSAT = CnfFormula(3, tuple(tuple(s * v for s, v in zip(signs, (1, 2, 3)))
                            for signs in itertools.product((1, -1), repeat=3)))


def scalars(vals, p=101):
    return [RingElem((v,), p) for v in vals]


# -- ring and φ ------------------------------------------------------------------------

def test_phi2_small():
    assert phi_eval(2, scalars([2, 3, 5])).coords == (31,)
    assert phi_eval(1, scalars([2, 3, 5])).coords == (10,)
    assert phi_eval(3, scalars([2, 3, 5])).coords == (30,)


def test_phi_errors():
    with pytest.raises(ParameterError):
        phi_eval(0, scalars([1]))
    with pytest.raises(ParameterError):
        phi_eval(3, scalars([1, 2]))
    with pytest.raises(ParameterError):
        RingElem((1,), 5) + RingElem((1, 2), 5)


def test_ring_ops_componentwise():
    a, b = RingElem((3, 4), 7), RingElem((5, 6), 7)
    assert (a + b).coords == (1, 3)
    assert (a * b).coords == (1, 3)
    assert RingElem.const(9, 3, 7).coords == (2, 2, 2)


def test_primes():
    assert least_prime_at_least(90) == 97
    assert least_prime_at_least(97) == 97
    assert default_modulus(2) == 67


def phi_oracle(ell, vals, p):
    return sum(math.prod(c) for c in itertools.combinations(vals, ell)) % p


@given(st.lists(st.integers(0, 200), min_size=1, max_size=8), st.integers(1, 8))
@settings(max_examples=100)
def test_phi_matches_definition(vals, ell):
    if ell > len(vals):
        return
    assert phi_eval(ell, scalars(vals)).coords == (phi_oracle(ell, vals, 101),)


@given(st.lists(st.tuples(st.integers(0, 96), st.integers(0, 96)), min_size=2, max_size=7),
       st.integers(2, 6))
@settings(max_examples=100)
def test_phi_recurrence(vecs, ell):
    # φ_ell(S + a) = φ_ell(S) + a * φ_{ell-1}(S)
    if ell > len(vecs) - 1:
        return
    *rest, last = [RingElem(v, 97) for v in vecs]
    lhs = phi_eval(ell, rest + [last])
    prev = phi_eval(ell - 1, rest) if ell > 1 else RingElem.const(1, 2, 97)
    rhs = (phi_eval(ell, rest) if ell <= len(rest) else RingElem.const(0, 2, 97)) + last * prev
    assert lhs == rhs


# -- CNF -----------------------------------------------------------------------------

def test_cnf_validation():
    with pytest.raises(MalformedInputError):
        CnfFormula(3, ((1, -1, 2),))
    with pytest.raises(MalformedInputError):
        CnfFormula(3, ((1, 2),))
    with pytest.raises(MalformedInputError):
        CnfFormula(3, ((1, 2, 4),))


def test_dimacs_roundtrip_and_errors():
    text = "c demo\np cnf 3 2\n1 2 -3 0\n-1 2\n3 0\n%\n0\n"
    assert parse_dimacs(text) == SAT
    assert parse_dimacs(SAT.to_dimacs()) == SAT
    bad = ["1 2 3 0\n", "p cnf 3 2\n1 2 3 0\n", "p cnf 3 1\n1 2 3\n", "p cnf 3 1\n1 x 3 0\n",
           "p cnf 3 1\np cnf 3 1\n1 2 3 0\n", "p dnf 3 1\n1 2 3 0\n", "p cnf 3 1\n1 1 3 0\n"]
    for t in bad:
        with pytest.raises(MalformedInputError):
            parse_dimacs(t)


def test_satisfiability():
    assert SAT.is_satisfiable() and not UNSAT.is_satisfiable()
    assert SAT.satisfied_by(SAT.satisfying_assignment())


def test_pad_formula():
    p = pad_formula(SAT)
    assert p.n_vars == p.m == 3
    assert pad_formula(CnfFormula(3, UNSAT.clauses)).n_vars == 8
    assert pad_formula(CnfFormula(0, ())).m == 3


# -- reductions ----------------------------------------------------------------------

def test_reduction_sizes():
    i2 = reduce_3sat(SAT, 2)
    assert (i2.n, i2.dim, i2.modulus) == (14, 6, 67)
    i3 = reduce_3sat(SAT, 3)
    assert i3.n == 13 and i3.dim == 1 + 3 + 2
    with pytest.raises(ParameterError):
        reduce_3sat(SAT, 1)


@pytest.mark.parametrize("ell", [2, 3, 4])
@pytest.mark.parametrize("fixed", [False, True])
def test_completeness(ell, fixed):
    inst = reduce_3sat(SAT, ell, fixed_s=fixed)
    for bits in itertools.product((False, True), repeat=3):
        if SAT.satisfied_by(bits):
            w = witness_from_assignment(inst, SAT, bits)
            assert inst.is_witness(w)
            st_ = witness_structure(inst, w)
            assert st_["all_alphas"] and st_["one_literal_per_variable"]
            assert st_["assignment"][:3] == bits


@pytest.mark.parametrize("ell", [2, 3, 4])
def test_unsat_has_no_witness(ell):
    assert brute_force(reduce_3sat(UNSAT, ell)) is None


def test_fixed_size():
    i2 = reduce_3sat(SAT, 2, fixed_s=True)
    assert i2.s == 2 + 2 * 3
    i3 = reduce_3sat(SAT, 3, fixed_s=True)
    assert i3.s == 3 + 3 * 3
    for inst in (i2, i3):
        w = brute_force(inst)
        assert w is not None and len(w) == inst.s


def test_soundness_on_random_formulas():
    rnd = random.Random(11)
    for _ in range(40):
        f = random_3cnf(rnd.randint(3, 4), rnd.randint(1, 6), rnd)
        for ell in (2, 3):
            inst = reduce_3sat(f, ell)
            w = brute_force(inst)
            assert (w is not None) == f.is_satisfiable()
            if w is not None:
                assert inst.is_witness(w)
                assert f.satisfied_by(witness_structure(inst, w)["assignment"])


def test_solver_matches_enumeration():
    rnd = random.Random(5)
    for _ in range(30):
        n = rnd.randint(3, 10)
        ell = rnd.randint(1, min(3, n))
        elems = [tuple(rnd.randrange(7) for _ in range(2)) for _ in range(n)]
        target = tuple(rnd.randrange(7) for _ in range(2)) if rnd.random() < 0.5 else \
            SubsetPhiInstance(elems, (0, 0), ell, 7).evaluate(rnd.sample(range(n), ell + 1))
        inst = SubsetPhiInstance(elems, target, ell, 7)
        assert brute_force(inst) == check_by_enumeration(inst)
        size = rnd.randint(ell, n)
        assert brute_force(inst, size) == check_by_enumeration(inst, size)


def test_solver_caps():
    inst = SubsetPhiInstance([(1,)] * 50, (0,), 2, 7)
    with pytest.raises(ParameterError):
        brute_force(inst)
    with pytest.raises(ParameterError):
        check_by_enumeration(inst)


def test_instance_json():
    inst = reduce_3sat(SAT, 3, fixed_s=True)
    back = SubsetPhiInstance.from_json(inst.to_json())
    assert back == inst
    with pytest.raises(MalformedInputError):
        SubsetPhiInstance.from_json({"elems": [[1, 2]], "target": [1], "ell": 1, "modulus": 7})
    with pytest.raises(MalformedInputError):
        SubsetPhiInstance.from_json({"elems": []})


# -- sampler -----------------------------------------------------------------------------

def test_sampler_yes_and_no():
    rnd = random.Random(1)
    inst, w = sample_subset_product(12, 4, 16, "yes", rnd)
    assert inst.is_witness(w) and inst.s == 4 and inst.modulus == 2 ** 16
    assert all(x % 2 == 1 for (x,) in inst.elems)
    found = brute_force(inst)
    assert found is not None and inst.is_witness(found)
    unsolvable = 0
    for _ in range(20):
        inst, w = sample_subset_product(12, 4, 16, "no", rnd)
        assert w is None
        unsolvable += brute_force(inst) is None
    # 495 subsets against 2^15 units
    assert unsolvable >= 15


def test_sampler_errors():
    rnd = random.Random(0)
    for args in [(5, 0, 8, "yes"), (5, 6, 8, "yes"), (5, 2, 1, "yes"), (5, 2, 8, "maybe")]:
        with pytest.raises(ParameterError):
            sample_subset_product(*args, rnd)
