"""Subset-φℓ: elementary symmetric polynomials over Hadamard-product rings.

Ring elements are vectors over Z_p (Z_M for the subset-product sampler)
with componentwise addition and multiplication. Instances and witnesses
use 0-based element indices throughout.

Contents: φℓ evaluation, the two 3-SAT reductions (ℓ = 2 and ℓ ≥ 3, each
with an optional fixed-size variant), a strict DIMACS reader, an exact
solver with column pruning, an independent enumeration checker and the
average-case subset-product sampler.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import MalformedInputError, ParameterError

DEFAULT_CAP = 48


# -- ring ------------------------------------------------------------------------

@dataclass(frozen=True)
class RingElem:
    coords: tuple
    p: int

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(c % self.p for c in self.coords))

    def _check(self, other: "RingElem") -> None:
        if other.p != self.p or len(other.coords) != len(self.coords):
            raise ParameterError("ring elements from different rings")

    def __add__(self, other: "RingElem") -> "RingElem":
        self._check(other)
        return RingElem(tuple(a + b for a, b in zip(self.coords, other.coords)), self.p)

    def __mul__(self, other: "RingElem") -> "RingElem":
        self._check(other)
        return RingElem(tuple(a * b for a, b in zip(self.coords, other.coords)), self.p)

    @classmethod
    def const(cls, v: int, k: int, p: int) -> "RingElem":
        return cls((v,) * k, p)


def least_prime_at_least(x: int) -> int:
    from sympy import nextprime
    return int(nextprime(x - 1))


def default_modulus(ell: int) -> int:
    return least_prime_at_least(max(ell + 2, 63))


def _phis(ell: int, vectors: Iterable[Sequence[int]], k: int, mod: int) -> list[list[int]]:
    """Coefficients 0..ell of prod(1 + x*a_i), per coordinate."""
    rows = [[1] + [0] * ell for _ in range(k)]
    for a in vectors:
        for c in range(k):
            v = a[c] % mod
            if v:
                r = rows[c]
                for j in range(ell, 0, -1):
                    r[j] = (r[j] + v * r[j - 1]) % mod
    return rows


def phi_eval(ell: int, elems: Sequence[RingElem]) -> RingElem:
    """φ_ell over a list of ring elements."""
    if ell < 1:
        raise ParameterError("ell must be at least 1")
    if ell > len(elems):
        raise ParameterError(f"ell={ell} exceeds the number of elements ({len(elems)})")
    p, k = elems[0].p, len(elems[0].coords)
    for e in elems:
        elems[0]._check(e)
    rows = _phis(ell, (e.coords for e in elems), k, p)
    return RingElem(tuple(r[ell] for r in rows), p)


# -- instances -----------------------------------------------------------------------

@dataclass
class SubsetPhiInstance:
    elems: list  # tuples of ints
    target: tuple
    ell: int
    modulus: int
    s: Optional[int] = None
    labels: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.elems)

    @property
    def dim(self) -> int:
        return len(self.target)

    def ring_elems(self) -> list[RingElem]:
        return [RingElem(e, self.modulus) for e in self.elems]

    def evaluate(self, subset: Iterable[int]) -> tuple:
        rows = _phis(self.ell, (self.elems[i] for i in subset), self.dim, self.modulus)
        return tuple(r[self.ell] for r in rows)

    def is_witness(self, subset: Iterable[int], size: Optional[int] = None) -> bool:
        idx = sorted(set(subset))
        size = self.s if size is None else size
        if len(idx) < self.ell or (size is not None and len(idx) != size):
            return False
        if any(not 0 <= i < self.n for i in idx):
            return False
        return self.evaluate(idx) == tuple(t % self.modulus for t in self.target)

    def to_json(self) -> dict:
        return {"ell": self.ell, "modulus": self.modulus, "s": self.s, "dim": self.dim, "n": self.n,
                "elems": [list(e) for e in self.elems], "target": list(self.target), "labels": self.labels}

    @classmethod
    def from_json(cls, d: dict) -> "SubsetPhiInstance":
        try:
            inst = cls([tuple(e) for e in d["elems"]], tuple(d["target"]), int(d["ell"]), int(d["modulus"]),
                       d.get("s"), list(d.get("labels", [])))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInputError(f"bad instance document: {exc}") from None
        if any(len(e) != inst.dim for e in inst.elems):
            raise MalformedInputError("element dimension differs from the target")
        return inst


# -- CNF ----------------------------------------------------------------------------

@dataclass(frozen=True)
class CnfFormula:
    """3-CNF; literals are signed 1-based variable indices."""
    n_vars: int
    clauses: tuple

    def __post_init__(self):
        for c in self.clauses:
            if len(c) != 3:
                raise MalformedInputError(f"clause {c} does not have exactly 3 literals")
            if any(lit == 0 or abs(lit) > self.n_vars for lit in c):
                raise MalformedInputError(f"clause {c} has a literal outside 1..{self.n_vars}")
            # x and ~x in one clause would be a tautology the reduction cannot express
            if len({abs(lit) for lit in c}) != 3:
                raise MalformedInputError(f"clause {c} repeats a variable")

    @property
    def m(self) -> int:
        return len(self.clauses)

    def satisfied_by(self, assignment: Sequence[bool]) -> bool:
        return all(any(assignment[abs(l) - 1] == (l > 0) for l in c) for c in self.clauses)

    def satisfying_assignment(self) -> Optional[tuple]:
        """First satisfying assignment in binary counting order, or None."""
        for bits in itertools.product((False, True), repeat=self.n_vars):
            if self.satisfied_by(bits):
                return bits
        return None

    def is_satisfiable(self) -> bool:
        return self.satisfying_assignment() is not None

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.n_vars} {self.m}"]
        lines += [" ".join(str(l) for l in c) + " 0" for c in self.clauses]
        return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> CnfFormula:
    """Strict reader: one header, exactly 3 literals on distinct variables per clause."""
    header = None
    clauses, cur = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if header is not None or len(parts) != 4 or parts[1] != "cnf":
                raise MalformedInputError(f"line {lineno}: bad problem line")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise MalformedInputError(f"line {lineno}: non-integer header") from None
            if header[0] < 0 or header[1] < 0:
                raise MalformedInputError(f"line {lineno}: negative header value")
            continue
        if line.startswith("%"):
            break  # SATLIB trailer
        if header is None:
            raise MalformedInputError(f"line {lineno}: clause before problem line")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise MalformedInputError(f"line {lineno}: bad literal {tok!r}") from None
            if lit == 0:
                clauses.append(tuple(cur))
                cur = []
            else:
                cur.append(lit)
    if header is None:
        raise MalformedInputError("missing problem line")
    if cur:
        raise MalformedInputError("last clause is not terminated by 0")
    if len(clauses) != header[1]:
        raise MalformedInputError(f"header declares {header[1]} clauses, found {len(clauses)}")
    return CnfFormula(header[0], tuple(clauses))


def random_3cnf(n_vars: int, m: int, rng: random.Random) -> CnfFormula:
    if n_vars < 3:
        raise ParameterError("need at least 3 variables")
    cls = []
    for _ in range(m):
        vs = rng.sample(range(1, n_vars + 1), 3)
        cls.append(tuple(v if rng.getrandbits(1) else -v for v in vs))
    return CnfFormula(n_vars, tuple(cls))


def pad_formula(f: CnfFormula) -> CnfFormula:
    """Equisatisfiable formula with as many clauses as variables.

    Extra variables occur nowhere; extra clauses repeat existing ones
    (or a fresh clause over three variables when there are none).
    """
    n, cls = f.n_vars, list(f.clauses)
    if not cls:
        n = max(n, 3)
        cls.append((1, 2, 3))
    n = max(n, len(cls))
    base = list(cls)
    while len(cls) < n:
        cls.append(base[len(cls) % len(base)])
    return CnfFormula(n, tuple(cls))


# -- reductions -------------------------------------------------------------------------

def _occurrence(f: CnfFormula, var: int, positive: bool) -> list[int]:
    lit = var if positive else -var
    return [1 if lit in c else 0 for c in f.clauses]


def reduce_3sat_phi2(formula: CnfFormula, p: Optional[int] = None, fixed_s: bool = False) -> SubsetPhiInstance:
    """φ2 instance: 2 + 2N + 3m elements of dimension 1 + N + m.

    Clause gadgets carry 9, 4, 2 in the clause column; target is 1 on the
    first 1 + N columns and 9 on the clause columns. With ``fixed_s`` the
    formula is padded first and every witness has size 2 + 2N'.
    """
    p = default_modulus(2) if p is None else p
    if p < 63:
        raise ParameterError("the clause gadget needs characteristic at least 63")
    f = pad_formula(formula) if fixed_s else formula
    N, m = f.n_vars, f.m
    k = 1 + N + m
    elems, labels = [], []
    elems.append((1,) + (0,) * (k - 1)); labels.append("alpha0")
    elems.append((1,) * (1 + N) + (0,) * m); labels.append("alpha1")
    for i in range(1, N + 1):
        for pos, tag in ((True, f"v{i}"), (False, f"v{i}'")):
            col = [0] * N
            col[i - 1] = 1
            elems.append((0, *col, *_occurrence(f, i, pos))); labels.append(tag)
    for j in range(m):
        for r, val in enumerate((9, 4, 2), 1):
            col = [0] * m
            col[j] = val
            elems.append((0,) + (0,) * N + tuple(col)); labels.append(f"c{j + 1}^{r}")
    target = (1,) * (1 + N) + (9,) * m
    return SubsetPhiInstance(elems, target, 2, p, 2 + 2 * N if fixed_s else None, labels)


def reduce_3sat_phil(formula: CnfFormula, ell: int, p: Optional[int] = None,
                     fixed_s: bool = False) -> SubsetPhiInstance:
    """φℓ instance (ℓ ≥ 3): ℓ + 2N + (ℓ-1)m elements, all-ones target.

    With ``fixed_s`` the formula is padded to N' = m' and 2N' all-zero
    elements are appended; zero elements leave φℓ unchanged, so every
    witness can be topped up to size ℓ + ℓN'.
    """
    if ell < 3:
        raise ParameterError("use reduce_3sat_phi2 for ell = 2")
    p = default_modulus(ell) if p is None else p
    if p < ell + 2:
        raise ParameterError("characteristic must be at least ell + 2")
    f = pad_formula(formula) if fixed_s else formula
    N, m = f.n_vars, f.m
    k = 1 + N + m
    elems, labels = [], []
    elems.append((1,) + (0,) * (k - 1)); labels.append("alpha0")
    for a in range(1, ell):
        elems.append((1,) * (1 + N) + (0,) * m); labels.append(f"alpha{a}")
    for i in range(1, N + 1):
        for pos, tag in ((True, f"v{i}"), (False, f"v{i}'")):
            col = [0] * N
            col[i - 1] = 1
            elems.append((0, *col, *_occurrence(f, i, pos))); labels.append(tag)
    for j in range(m):
        for r in range(1, ell):
            col = [0] * m
            col[j] = 1
            elems.append((0,) + (0,) * N + tuple(col)); labels.append(f"c{j + 1}^{r}")
    s = None
    if fixed_s:
        for z in range(2 * N):
            elems.append((0,) * k); labels.append(f"zero{z + 1}")
        s = ell + ell * N
    return SubsetPhiInstance(elems, (1,) * k, ell, p, s, labels)


def reduce_3sat(formula: CnfFormula, ell: int, p: Optional[int] = None, fixed_s: bool = False) -> SubsetPhiInstance:
    if ell == 2:
        return reduce_3sat_phi2(formula, p, fixed_s)
    return reduce_3sat_phil(formula, ell, p, fixed_s)


def witness_from_assignment(inst: SubsetPhiInstance, formula: CnfFormula, assignment: Sequence[bool]) -> list[int]:
    """The completeness witness for a satisfying assignment."""
    f = pad_formula(formula) if inst.s is not None else formula
    assignment = list(assignment) + [False] * (f.n_vars - len(assignment))
    at = {lab: i for i, lab in enumerate(inst.labels)}
    ell = inst.ell
    out = [at[f"alpha{a}"] for a in range(ell)]
    out += [at[f"v{i}" if assignment[i - 1] else f"v{i}'"] for i in range(1, f.n_vars + 1)]
    zeros_needed = 0
    for j, c in enumerate(f.clauses, 1):
        true = sum(assignment[abs(l) - 1] == (l > 0) for l in c)
        if true == 0:
            raise ParameterError("assignment does not satisfy the formula")
        if ell == 2:
            out.append(at[f"c{j}^{true}"])
        else:
            out += [at[f"c{j}^{r}"] for r in range(1, ell - true + 1)]
            zeros_needed += true - 1
    if inst.s is not None and ell > 2:
        out += [at[f"zero{z}"] for z in range(1, zeros_needed + 1)]
    return sorted(out)


def witness_structure(inst: SubsetPhiInstance, witness: Iterable[int]) -> dict:
    """Structural facts about a reduction witness and the assignment it encodes."""
    labs = [inst.labels[i] for i in witness]
    ell = inst.ell
    alphas = all(f"alpha{a}" in labs for a in range(ell))
    n_vars = sum(1 for lab in inst.labels if lab.startswith("v") and not lab.endswith("'"))
    one_each = all((f"v{i}" in labs) != (f"v{i}'" in labs) for i in range(1, n_vars + 1))
    assignment = tuple(f"v{i}" in labs for i in range(1, n_vars + 1))
    return {"all_alphas": alphas, "one_literal_per_variable": one_each, "assignment": assignment}


# -- solvers -----------------------------------------------------------------------------------

def brute_force(inst: SubsetPhiInstance, size_constraint: Optional[int] = None,
                cap: int = DEFAULT_CAP) -> Optional[list[int]]:
    """Exact search; returns the lexicographically least witness (sorted index list) or None.

    Enumerates index combinations in lexicographic order and prunes a branch
    as soon as a coordinate is settled (no later element is nonzero there)
    and differs from the target. Refuses instances with more than ``cap``
    elements.
    """
    n, k, ell, mod = inst.n, inst.dim, inst.ell, inst.modulus
    if n > cap:
        raise ParameterError(f"instance has {n} elements, above the cap of {cap}")
    if ell < 1:
        raise ParameterError("ell must be at least 1")
    size = inst.s if size_constraint is None else size_constraint
    target = tuple(t % mod for t in inst.target)
    elems = [tuple(v % mod for v in e) for e in inst.elems]
    nz = [tuple(c for c in range(k) if e[c]) for e in elems]
    last = [-1] * k
    for i, cols in enumerate(nz):
        for c in cols:
            last[c] = i
    # coordinates grouped by the index after which they are settled
    settle: list[list[int]] = [[] for _ in range(n)]
    for c in range(k):
        if last[c] < 0:
            if target[c] != 0:
                return None  # all-zero column can never reach a nonzero target
        else:
            settle[last[c]].append(c)
    open_after = [[c for c in range(k) if last[c] > i] for i in range(-1, n)]  # index i+1

    def step(rows, i):
        e = elems[i]
        out = list(rows)
        for c in nz[i]:
            r = list(rows[c])
            v = e[c]
            for j in range(ell, 0, -1):
                r[j] = (r[j] + v * r[j - 1]) % mod
            out[c] = r
        return out

    def matches(rows, cols):
        return all(rows[c][ell] == target[c] for c in cols)

    start = [[1] + [0] * ell for _ in range(k)]

    def dfs(chosen, rows, last_i):
        if len(chosen) >= ell and (size is None or len(chosen) == size) and matches(rows, open_after[last_i + 1]):
            return list(chosen)
        if size is not None and len(chosen) >= size:
            return None
        for j in range(last_i + 1, n):
            # skipping j-1 settles its coordinates at their current value, for every later j too
            if j > last_i + 1 and not matches(rows, settle[j - 1]):
                break
            if size is not None and len(chosen) + (n - j) < size:
                break
            new = step(rows, j)
            if not matches(new, settle[j]):
                continue
            chosen.append(j)
            got = dfs(chosen, new, j)
            chosen.pop()
            if got is not None:
                return got
        return None

    return dfs([], start, -1)


def check_by_enumeration(inst: SubsetPhiInstance, size_constraint: Optional[int] = None,
                         cap: int = 18) -> Optional[list[int]]:
    """Independent oracle: every subset, direct evaluation, least one wins."""
    if inst.n > cap:
        raise ParameterError(f"enumeration limited to {cap} elements")
    size = inst.s if size_constraint is None else size_constraint
    ring = inst.ring_elems()
    goal = RingElem(inst.target, inst.modulus)
    found = []
    sizes = [size] if size is not None else range(max(1, inst.ell), inst.n + 1)
    for r in sizes:
        if r < inst.ell:
            continue
        for combo in itertools.combinations(range(inst.n), r):
            if phi_eval(inst.ell, [ring[i] for i in combo]) == goal:
                found.append(list(combo))
                break  # combinations() is lexicographic within one size
    return min(found) if found else None


# -- average-case sampler ----------------------------------------------------------------

def _unit(M: int, rng: random.Random) -> int:
    while True:
        a = rng.randrange(1, M)
        if math.gcd(a, M) == 1:
            return a


def sample_subset_product(n: int, s: int, modulus_bits: int, kind: str,
                          rng: random.Random) -> tuple[SubsetPhiInstance, Optional[list[int]]]:
    """Subset-product over Z_M^* with M = 2^modulus_bits.

    ``yes``: t is the product over a uniform size-s subset (returned as the
    witness). ``no``: t is a uniform unit. Encoded as a φ_s instance of
    dimension 1 with the size fixed to s.
    """
    if kind not in ("yes", "no"):
        raise ParameterError("kind must be 'yes' or 'no'")
    if not 1 <= s <= n:
        raise ParameterError("need 1 <= s <= n")
    if modulus_bits < 2:
        raise ParameterError("modulus_bits must be at least 2")
    M = 1 << modulus_bits
    a = [_unit(M, rng) for _ in range(n)]
    witness = None
    if kind == "yes":
        witness = sorted(rng.sample(range(n), s))
        t = 1
        for i in witness:
            t = t * a[i] % M
    else:
        t = _unit(M, rng)
    inst = SubsetPhiInstance([(x,) for x in a], (t,), s, M, s, [f"a{i + 1}" for i in range(n)])
    return inst, witness
