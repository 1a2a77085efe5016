"""Robustness and forgery games, generic over any SRDS scheme.

Both games share the setup-and-corruption phase. Standalone games run over
``n`` real parties; party ``p`` holds virtual ID ``p + 1`` and leaves are in
planar ID order (z = 1). Every game ends in one of three outcomes:
``verdict-1``, ``verdict-0`` or ``disqualified`` (the adversary broke a rule
of the game, e.g. an invalid tree or an oversized S).
"""
from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Iterable, Optional

from . import seeds
from .core import SrdsParams, SrdsScheme, SrdsSignature
from .errors import ParameterError
from .owf import OwfScheme, OwfSrdsConfig, coin_bound
from .pcd import PcdConfig, PcdScheme
from .tree import CommTree, TreeProfile, _even_counts, build_tree, validate_tree

MODES = ("trusted", "bare")
MODE_ALIASES = {"trusted_pki": "trusted", "bare_pki": "bare"}
OUTCOMES = ("verdict-1", "verdict-0", "disqualified")

#: experiment threshold: more than a third of all keys must sign
THIRD = Fraction(1, 3)
EXPT_ALPHA_CONST = 160


def experiment_scheme(name: str, n: int, ell: Optional[int] = None,
                      ratio: Optional[Fraction] = None) -> SrdsScheme:
    """Scheme used by the standalone games.

    OWF defaults to ``ell = n`` (every key real) with threshold n/3: at
    desk sizes the gap between a third of the keys (forgery pool) and the
    honest good-path share (robustness) is too narrow for a sampled
    committee to separate.
    """
    if name == "owf":
        return OwfScheme(OwfSrdsConfig(ell=ell or n, threshold_ratio=THIRD if ratio is None else ratio,
                                       alpha_const=EXPT_ALPHA_CONST))
    if name == "pcd":
        return PcdScheme(PcdConfig(alpha_const=EXPT_ALPHA_CONST))
    raise ParameterError(f"unknown scheme {name!r}")


def experiment_profile(n: int, b: int = 4, max_leaf: int = 16) -> TreeProfile:
    """z = 1 tree: the fewest levels whose leaves hold at most ``max_leaf`` parties."""
    h = 1
    while True:
        leaves = b ** (h - 1)
        if leaves > n:
            raise ParameterError(f"no planar profile for n={n}")
        if n % leaves == 0 and n // leaves <= max_leaf:
            k = n // leaves
            return TreeProfile(b=b, k_node=min(n, max(k, 16)), k_leaf=k, n_leaves=leaves, height=h, z=1)
        h += 1


# -- transcripts ----------------------------------------------------------------

@dataclass
class GameTranscript:
    game: str
    scheme: str
    n: int
    t: int
    mode: str
    adversary: str
    seed: str
    pki: list = field(default_factory=list)  # per party: {vk_sha256, keyed, replaced}
    corrupt: list = field(default_factory=list)
    tree: Optional[dict] = None
    messages: dict = field(default_factory=dict)
    nodes: dict = field(default_factory=dict)
    outcome: str = "verdict-0"
    reason: str = ""

    @property
    def verdict(self) -> Optional[int]:
        return {"verdict-1": 1, "verdict-0": 0}.get(self.outcome)

    def to_json(self) -> dict:
        return {
            "game": self.game, "scheme": self.scheme, "n": self.n, "t": self.t, "mode": self.mode,
            "adversary": self.adversary, "seed": self.seed, "pki": self.pki,
            "corrupt": self.corrupt, "tree": self.tree, "messages": self.messages,
            "nodes": self.nodes, "outcome": self.outcome, "verdict": self.verdict,
            "reason": self.reason,
        }


# -- adversaries --------------------------------------------------------------------

@dataclass
class GameView:
    n: int
    t: int
    scheme: SrdsScheme
    pp: SrdsParams
    mode: str
    rng: random.Random
    keys: list
    profile: Optional[TreeProfile] = None
    sks: dict = field(default_factory=dict)
    corrupt: frozenset = frozenset()
    scratch: dict = field(default_factory=dict)

    def sign(self, party: int, m: bytes) -> Optional[SrdsSignature]:
        return self.scheme.sign(self.pp, party + 1, self.sks.get(party), m)

    def fresh_message(self, avoid: Iterable[bytes] = ()) -> bytes:
        avoid = set(avoid)
        while True:
            m = self.rng.getrandbits(64).to_bytes(8, "big")
            if m not in avoid:
                return m


class GameAdversary:
    """Silent: spreads its corruptions, withholds everything, bad nodes output nothing."""
    name = "silent"

    def corrupt_order(self, view: GameView) -> Iterable[int]:
        if view.profile is None or view.profile.z != 1:
            return view.rng.sample(range(view.n), view.t)
        # about t/L corrupt parties per planar leaf
        prof, k = view.profile, view.profile.k_leaf
        out = []
        for leaf, c in enumerate(_even_counts(view.t, prof.n_leaves, view.rng)):
            out += view.rng.sample(range(leaf * k, (leaf + 1) * k), min(c, k))
        return out

    def new_key(self, view: GameView, party: int) -> Any:
        return None

    # robustness
    def choose_tree(self, view: GameView) -> CommTree:
        return planar_tree(view)

    def choose_messages(self, view: GameView, tree: CommTree, N: frozenset) -> tuple[bytes, dict]:
        m = view.fresh_message()
        return m, {i: view.fresh_message([m]) for i in sorted(N)}

    def corrupt_sigs(self, view: GameView, m: bytes, honest: dict) -> dict:
        return {}

    def bad_node(self, view: GameView, tree: CommTree, node: int, m: bytes, children: list) -> Optional[SrdsSignature]:
        return None

    # forgery
    def choose_forge(self, view: GameView) -> tuple[set, bytes, dict]:
        return set(), view.fresh_message(), {}

    def forge(self, view: GameView, m: bytes, sigs: dict) -> tuple[bytes, Optional[SrdsSignature]]:
        return view.fresh_message([m]), None


class GarbageGame(GameAdversary):
    """Bad nodes and corrupt signers submit random bytes of root-signature size."""
    name = "garbage"

    def _garbage(self, view: GameView, m: bytes, lo: int, hi: int) -> SrdsSignature:
        size = max(1, view.pp.alpha_limit - 64)
        return SrdsSignature(m, view.rng.randbytes(size), lo, hi)

    def corrupt_sigs(self, view, m, honest):
        return {p: self._garbage(view, m, p + 1, p + 1) for p in sorted(view.corrupt)}

    def bad_node(self, view, tree, node, m, children):
        v = tree.nodes[node]
        return self._garbage(view, m, v.lo, v.hi)


class MaxBadTree(GameAdversary):
    """Spends the whole bad-path budget and parks honest parties behind it.

    Greedy over level-2 nodes (each costs b leaves of budget, made bad by
    stacking committee seats), then single leaves made bad with
    ceil(k/3) corrupt members. Good leaves take at most ceil(k/3) - 1
    corrupt parties, the rest go behind bad nodes. Parties on bad paths sign
    a decoy message.
    """
    name = "max_bad_tree"

    def _plan(self, view: GameView):
        prof = view.profile
        L, k, b = prof.n_leaves, prof.k_leaf, prof.b
        budget = math.floor(prof.bad_leaf_bound(view.n) * L)
        need = -(-k // 3)
        bad_groups = []
        if prof.height >= 3:
            # leave at least one level-2 group fully good
            bad_groups = list(range(min(budget // b, L // b - 1)))
        covered = {g * b + c for g in bad_groups for c in range(b)}
        spare = budget - len(covered)
        bad_leaves = [x for x in range(L) if x not in covered][:spare]
        return bad_groups, covered, bad_leaves, need

    def corrupt_order(self, view: GameView) -> Iterable[int]:
        if view.profile is None or view.profile.z != 1:
            return super().corrupt_order(view)
        prof, k = view.profile, view.profile.k_leaf
        bad_groups, covered, bad_leaves, need = self._plan(view)
        view.scratch["plan"] = (bad_groups, covered, bad_leaves)
        left, out = view.t, []
        for leaf in bad_leaves:
            c = min(need, left)
            out += view.rng.sample(range(leaf * k, (leaf + 1) * k), c)
            left -= c
        good = [x for x in range(prof.n_leaves) if x not in covered and x not in bad_leaves]
        for leaf in good:
            c = min(need - 1, left)
            out += view.rng.sample(range(leaf * k, (leaf + 1) * k), c)
            left -= c
        # whatever is left hides behind bad level-2 nodes, then in bad leaves
        rest = [p for x in sorted(covered) + bad_leaves for p in range(x * k, (x + 1) * k) if p not in out]
        view.rng.shuffle(rest)
        return out + rest[:left]

    def choose_tree(self, view: GameView) -> CommTree:
        bad_groups = view.scratch.get("plan", ([],))[0]
        # level-2 node ids follow the L leaves in build order
        L = view.profile.n_leaves
        return planar_tree(view, [L + g for g in bad_groups] if view.profile.height >= 3 else [])


class Concatenation(GameAdversary):
    """Pools every signature it can get on one message m' != m."""
    name = "concatenation"

    def choose_forge(self, view):
        room = -(-view.n // 3) - 1 - len(view.corrupt)
        honest = [p for p in range(view.n) if p not in view.corrupt]
        S = set(view.rng.sample(honest, max(0, min(room, len(honest)))))
        m = view.fresh_message()
        m2 = view.fresh_message([m])
        view.scratch["target"] = m2
        return S, m, {i: m2 for i in S}

    def forge(self, view, m, sigs):
        m2 = view.scratch["target"]
        pool = [s for s in sigs.values() if s is not None and s.message == m2]
        pool += [s for s in (view.sign(p, m2) for p in sorted(view.corrupt)) if s is not None]
        return m2, view.scheme.aggregate(view.pp, view.keys, m2, pool)


class Replay(Concatenation):
    """Re-labels honest material: the honest aggregate on m, or a lone S signature."""
    name = "replay"

    def forge(self, view, m, sigs):
        m2 = view.scratch["target"]
        on_m = [s for s in sigs.values() if s is not None and s.message == m]
        agg = view.scheme.aggregate(view.pp, view.keys, m, on_m)
        tries = []
        if agg is not None:
            tries.append(SrdsSignature(m2, agg.payload, agg.id_min, agg.id_max))
        tries += [s for s in sigs.values() if s is not None and s.message == m2][:1]
        for cand in tries:
            if view.scheme.verify(view.pp, view.keys, m2, cand):
                return m2, cand
        return m2, tries[0] if tries else None


class KeySwap(Concatenation):
    """Bare-PKI key substitution: corrupt keys are regenerated from adversary seeds."""
    name = "key_swap"

    def new_key(self, view, party):
        vk, sk = view.scheme.keygen(view.pp, seeds.derive(view.rng.getrandbits(64), "swap", party))
        view.scratch.setdefault("swapped", {})[party] = sk
        return vk

    def forge(self, view, m, sigs):
        if view.mode == "bare":
            view.sks.update(view.scratch.get("swapped", {}))
        return super().forge(view, m, sigs)


GAME_ADVERSARIES = {a.name: a for a in (GameAdversary, GarbageGame, MaxBadTree, Concatenation, Replay, KeySwap)}


def make_game_adversary(name: str) -> GameAdversary:
    try:
        return GAME_ADVERSARIES[name]()
    except KeyError:
        raise ParameterError(f"unknown game adversary {name!r}; choose from {sorted(GAME_ADVERSARIES)}") from None


# -- phase A ----------------------------------------------------------------------

@dataclass
class SetupResult:
    pp: SrdsParams
    keys: list
    sks: dict
    corrupt: frozenset
    replaced: dict
    view: GameView


def run_setup_and_corruption(scheme: SrdsScheme, n: int, t: int, mode: str, adversary: GameAdversary,
                             seed: Any = 0, profile: Optional[TreeProfile] = None) -> SetupResult:
    """Keys for all parties, then adaptive corruption up to ``t``.

    Each corruption reveals the secret key and lets the adversary hand back a
    verification key, which is installed only in bare-PKI mode. Requests
    past the budget are denied silently.
    """
    mode = MODE_ALIASES.get(mode, mode)
    if mode not in MODES:
        raise ParameterError(f"mode must be one of {MODES}")
    if not 0 <= t or 3 * t >= n:
        raise ParameterError("t must satisfy 0 <= t < n/3")
    pp = scheme.setup(n, seeds.derive(seed, "setup"))
    keys, sks = [], {}
    for p in range(n):
        vk, sk = scheme.keygen(pp, seeds.derive(seed, "key", p))
        keys.append(vk)
        sks[p] = sk
    view = GameView(n, t, scheme, pp, mode, seeds.rng(seed, "adversary"), list(keys), profile)
    corrupt: list[int] = []
    replaced = {}
    for p in adversary.corrupt_order(view):
        if len(corrupt) >= t:
            break
        if not isinstance(p, int) or not 0 <= p < n or p in corrupt:
            continue
        corrupt.append(p)
        view.sks[p] = sks[p]
        view.corrupt = frozenset(corrupt)
        new = adversary.new_key(view, p)
        if new is not None and mode == "bare":
            keys[p] = new
            replaced[p] = True
    view.keys = keys
    return SetupResult(pp, keys, sks, frozenset(corrupt), replaced, view)


def planar_tree(view: GameView, bad_internal: Iterable[int] = ()) -> CommTree:
    """Planar tree whose internal committees the adversary fills itself.

    Nodes in ``bad_internal`` (node ids) get ceil(k/3) corrupt members, the
    rest one fewer at most, following the global corruption ratio.
    """
    tree = build_tree(view.n, view.profile, view.corrupt, view.rng, policy="spread", planar=True)
    bad = set(bad_internal)
    corrupt = sorted(view.corrupt)
    honest = [p for p in range(view.n) if p not in view.corrupt]
    k = view.profile.k_node
    need = -(-k // 3)
    share = len(corrupt) * k // view.n
    nodes = list(tree.nodes)
    for lv in tree.levels[1:]:
        for v in lv:
            c = min(len(corrupt), need if v in bad else min(share, need - 1))
            com = view.rng.sample(corrupt, c) + view.rng.sample(honest, k - c)
            view.rng.shuffle(com)
            nodes[v] = replace(nodes[v], committee=tuple(com))
    return CommTree(tree.n, tree.profile, tree.corrupt, nodes, tree.levels, tree.leaf_slots)


def _pki_summary(scheme: SrdsScheme, keys: list, sks: dict, replaced: dict) -> list:
    return [{"vk_sha256": hashlib.sha256(scheme.vk_bytes(vk)).hexdigest()[:16],
             "keyed": sks.get(p) is not None, "replaced": p in replaced}
            for p, vk in enumerate(keys)]


def _keep_for(tree: CommTree, node: int):
    v = tree.nodes[node]
    if v.level == 1:
        return lambda lo, hi: lo == hi and v.lo <= lo <= v.hi
    ranges = [tree.nodes[c].range for c in v.children]
    return lambda lo, hi: any(a <= lo and hi <= b for a, b in ranges)


# -- phase B/C: robustness --------------------------------------------------------------

def expt_robust(scheme: SrdsScheme, n: int, t: int, mode: str, adversary: GameAdversary,
                seed: Any = 0, profile: Optional[TreeProfile] = None,
                full_pki: bool = True) -> GameTranscript:
    mode = MODE_ALIASES.get(mode, mode)
    profile = profile or experiment_profile(n)
    if profile.z != 1:
        raise ParameterError("standalone games use z = 1")
    setup = run_setup_and_corruption(scheme, n, t, mode, adversary, seed, profile)
    pp, keys, sks, I, view = setup.pp, setup.keys, setup.sks, setup.corrupt, setup.view
    tr = GameTranscript("robust", scheme.name, n, t, mode, adversary.name, str(seed), corrupt=sorted(I))
    tr.pki = _pki_summary(scheme, keys, sks, setup.replaced) if full_pki else []
    tree = adversary.choose_tree(view)
    check = validate_tree(tree, n, I) if isinstance(tree, CommTree) else {"valid": False, "violations": ["not a tree"]}
    if not check["valid"]:
        tr.outcome, tr.reason = "disqualified", "; ".join(check["violations"][:5])
        return tr
    tree.relabel(I)
    for k, slots in enumerate(tree.leaf_slots):
        if any(p != k * profile.k_leaf + pos for pos, (p, _) in enumerate(slots)):
            tr.outcome, tr.reason = "disqualified", "leaves not in planar ID order"
            return tr
    good_leaves = tree.good_path_leaves()
    N = frozenset(p for leaf in tree.levels[0] if leaf not in good_leaves
                  for p in tree.nodes[leaf].committee if p not in I)
    tr.tree = {"height": tree.height, "bad_leaf_fraction": round(tree.bad_leaf_fraction(), 6),
               "bad_nodes": sorted(i for i, g in tree.good.items() if not g), "N": len(N)}
    m, mi = adversary.choose_messages(view, tree, N)
    tr.messages = {"m": m.hex(), "m_i": {str(i): v.hex() for i, v in sorted(mi.items())}}
    honest = {}
    for p in range(n):
        if p in I:
            continue
        msg = mi.get(p, m) if p in N else m
        honest[p] = scheme.sign(pp, p + 1, sks[p], msg)
    sigs = dict(honest)
    for p, s in (adversary.corrupt_sigs(view, m, dict(honest)) or {}).items():
        if p in I and isinstance(s, SrdsSignature):
            sigs[p] = s
    sigma: dict[int, Optional[SrdsSignature]] = {}
    for level in range(1, tree.height + 1):
        for node in tree.levels[level - 1]:
            v = tree.nodes[node]
            if level == 1:
                inputs = [sigs.get(p) for p in v.committee]
            else:
                inputs = [sigma.get(c) for c in v.children]
            inputs = [s for s in inputs if s is not None]
            if tree.good[node]:
                s1 = scheme.aggregate1(pp, keys, m, inputs, keep=_keep_for(tree, node))
                out = None if s1 is None else scheme.aggregate2(pp, m, s1)
            else:
                out = adversary.bad_node(view, tree, node, m, inputs)
                if not isinstance(out, SrdsSignature):
                    out = None
            sigma[node] = out
            tr.nodes[str(node)] = {"level": level, "good": tree.good[node],
                                   "range": None if out is None else [out.id_min, out.id_max],
                                   "bytes": None if out is None else out.size}
    root = sigma.get(tree.root.id)
    ok = scheme.verify(pp, keys, m, root)
    tr.outcome = "verdict-1" if ok else "verdict-0"
    tr.reason = "root verifies" if ok else "root does not verify"
    return tr


# -- phase B/C: forgery ---------------------------------------------------------------------

def expt_forge(scheme: SrdsScheme, n: int, t: int, mode: str, adversary: GameAdversary,
               seed: Any = 0, full_pki: bool = True) -> GameTranscript:
    mode = MODE_ALIASES.get(mode, mode)
    setup = run_setup_and_corruption(scheme, n, t, mode, adversary, seed)
    pp, keys, sks, I, view = setup.pp, setup.keys, setup.sks, setup.corrupt, setup.view
    tr = GameTranscript("forge", scheme.name, n, t, mode, adversary.name, str(seed), corrupt=sorted(I))
    tr.pki = _pki_summary(scheme, keys, sks, setup.replaced) if full_pki else []
    S, m, mi = adversary.choose_forge(view)
    S = set(S)
    if S & I or any(not 0 <= p < n for p in S):
        tr.outcome, tr.reason = "disqualified", "S must be honest parties"
        return tr
    if 3 * len(S | I) >= n:
        tr.outcome, tr.reason = "disqualified", f"|S u I| = {len(S | I)} is not below n/3"
        return tr
    sigs = {}
    for p in range(n):
        if p in I:
            continue
        sigs[p] = scheme.sign(pp, p + 1, sks[p], mi.get(p, m) if p in S else m)
    m2, forged = adversary.forge(view, m, dict(sigs))
    tr.messages = {"m": m.hex(), "m_prime": m2.hex() if isinstance(m2, bytes) else None, "S": sorted(S),
                   "sigma_bytes": None if not isinstance(forged, SrdsSignature) else forged.size}
    ok = isinstance(m2, bytes) and m2 != m and isinstance(forged, SrdsSignature) \
        and scheme.verify(pp, keys, m2, forged)
    tr.outcome = "verdict-1" if ok else "verdict-0"
    tr.reason = "forgery verifies" if ok else "no valid forgery"
    return tr


def run_games(game: str, scheme_name: str, n: int, t: int, mode: str, adversary: str,
              reps: int, seed: Any = 0, scheme: Optional[SrdsScheme] = None) -> dict:
    """Repeat a game with derived seeds; counts per outcome plus the first transcripts."""
    if game not in ("robust", "forge"):
        raise ParameterError("game must be 'robust' or 'forge'")
    scheme = scheme or experiment_scheme(scheme_name, n)
    counts = {o: 0 for o in OUTCOMES}
    samples = []
    profile = experiment_profile(n) if game == "robust" else None
    for r in range(reps):
        s = seeds.derive(seed, "rep", r).hex()
        adv = make_game_adversary(adversary)
        if game == "robust":
            tr = expt_robust(scheme, n, t, mode, adv, s, profile)
        else:
            tr = expt_forge(scheme, n, t, mode, adv, s)
        counts[tr.outcome] += 1
        if len(samples) < 3:
            samples.append(tr.to_json())
    return {"game": game, "scheme": scheme.name, "n": n, "t": t, "mode": mode, "adversary": adversary,
            "reps": reps, "counts": counts, "samples": samples}


# -- committee statistics -----------------------------------------------------------------

def committee_monte_carlo(n: int = 1024, ell: int = 100, trials: int = 10_000, frac: float = 0.3,
                          seed: Any = 0) -> dict:
    """Keyed-committee statistics under the scheme's exact coin bias.

    The coin is "64-bit block below floor(ell*2^64/n)", as in key generation;
    by symmetry S u I is taken to be the first ``round(frac*n)`` parties.
    """
    rnd = seeds.rng(seed, "chernoff")
    bound = coin_bound(ell, n)
    bad = round(frac * n)
    half = Fraction(ell, 2)
    in_range = below_third = below_half = 0
    sizes, bad_counts = [], []
    get = rnd.getrandbits
    for _ in range(trials):
        keyed = [get(64) < bound for _ in range(n)]
        c = sum(keyed)
        x = sum(keyed[:bad])
        sizes.append(c)
        bad_counts.append(x)
        in_range += half <= c <= 3 * half
        below_third += x < half / 3
        below_half += x < half
    return {
        "n": n, "ell": ell, "trials": trials, "bad_fraction": frac, "bad_parties": bad,
        "committee_in_range_rate": in_range / trials,
        "corrupt_below_ell_prime_third_rate": below_third / trials,
        "corrupt_below_ell_half_rate": below_half / trials,
        "mean_committee": sum(sizes) / trials, "mean_corrupt_in_committee": sum(bad_counts) / trials,
        "min_committee": min(sizes), "max_committee": max(sizes),
    }


def aligned_schemes(n: int) -> tuple[SrdsScheme, SrdsScheme]:
    """OWF and PCD schemes whose accept thresholds coincide at ``n`` parties.

    PCD accepts c >= n/3. OWF with every key real and ell = 6*ceil(n/3) - 3
    accepts count > ell/6 = ceil(n/3) - 1/2, i.e. count >= ceil(n/3).
    """
    if n < 4:
        raise ParameterError("alignment needs n >= 4 (ell is at least 8)")
    ell = 6 * -(-n // 3) - 3
    owf = OwfScheme(OwfSrdsConfig(ell=ell, alpha_const=EXPT_ALPHA_CONST))
    return owf, PcdScheme(PcdConfig(alpha_const=EXPT_ALPHA_CONST))
