"""Command-line scenario runner.

Every verb reads an optional JSON config (``--config``), overlays the flags
given on the command line, validates the result against the verb's schema
and prints a JSON report. Reports carry no timings, so re-running with the
same config reproduces them byte for byte.

Exit codes: 0 ok, 2 usage or schema error, 3 invariant violation.
"""
from __future__ import annotations

import argparse
import json
import math
import statistics
import sys
from pathlib import Path
from typing import Any, Optional

import jsonschema

from . import seeds
from .errors import InvariantError, MalformedInputError, ParameterError, SrdsError

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT = 0, 2, 3

_SEED = {"type": ["integer", "string"]}
_REPS = {"type": "integer", "minimum": 1}
_PRESET = {"enum": ["n16", "n64", "n256", "n1024"]}
_SCHEME = {"enum": ["owf", "pcd"]}
_PKI = {"enum": ["trusted", "bare"]}


def _schema(props: dict, required: tuple = ()) -> dict:
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


SCHEMAS = {
    "ba": _schema({
        "preset": _PRESET, "adversary": {"enum": ["silent", "equivocator", "tree_staler", "key_replacer"]},
        "reps": _REPS, "seed": _SEED, "scheme": _SCHEME, "pki_mode": _PKI,
        "t": {"type": "integer", "minimum": 0}, "trace": {"type": "string"},
    }),
    "robustness": _schema({
        "scheme": _SCHEME, "n": {"type": "integer", "minimum": 4}, "t": {"type": "integer", "minimum": 0},
        "reps": _REPS, "seed": _SEED, "pki_mode": _PKI, "adversary": {"enum": ["silent", "garbage", "max_bad_tree"]},
        "ell": {"type": "integer", "minimum": 8},
    }),
    "forgery": _schema({
        "scheme": _SCHEME, "n": {"type": "integer", "minimum": 4}, "t": {"type": "integer", "minimum": 0},
        "reps": _REPS, "seed": _SEED, "pki_mode": _PKI,
        "adversary": {"enum": ["silent", "concatenation", "replay", "key_swap"]},
        "ell": {"type": "integer", "minimum": 8},
    }),
    "attack": _schema({
        "n": {"enum": [16, 64, 256, 1024]}, "target": {"enum": ["strawman", "pi_ba"]}, "reps": _REPS,
        "seed": _SEED, "beta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1 / 3},
        "fanout": {"type": "integer", "minimum": 1},
    }),
    "tree": _schema({"preset": _PRESET, "seed": _SEED, "t": {"type": "integer", "minimum": 0},
                     "policy": {"enum": ["random", "spread"]}}),
    "reduce": _schema({"cnf": {"type": "string"}, "ell": {"type": "integer", "minimum": 2},
                       "p": {"type": "integer", "minimum": 2}, "fixed_s": {"type": "boolean"}}, ("cnf",)),
    "solve": _schema({"instance": {"type": "string"}, "cnf": {"type": "string"},
                      "ell": {"type": "integer", "minimum": 2}, "cap": {"type": "integer", "minimum": 1},
                      "fixed_s": {"type": "boolean"}}),
    "sample": _schema({"n": {"type": "integer", "minimum": 1}, "s": {"type": "integer", "minimum": 1},
                       "modulus_bits": {"type": "integer", "minimum": 2}, "kind": {"enum": ["yes", "no"]},
                       "seed": _SEED, "reps": _REPS}),
    "metrics": _schema({"presets": {"type": "array", "items": _PRESET, "minItems": 1},
                        "adversary": {"enum": ["silent", "equivocator", "tree_staler"]},
                        "reps": _REPS, "seed": _SEED}),
}

DEFAULTS = {
    "ba": {"preset": "n64", "adversary": "silent", "reps": 1, "seed": 0, "scheme": "owf", "pki_mode": "trusted"},
    "robustness": {"scheme": "owf", "n": 256, "t": 85, "reps": 1, "seed": 0, "pki_mode": "trusted",
                   "adversary": "max_bad_tree"},
    "forgery": {"scheme": "owf", "n": 256, "t": 85, "reps": 1, "seed": 0, "pki_mode": "trusted",
                "adversary": "concatenation"},
    "attack": {"n": 256, "target": "strawman", "reps": 1, "seed": 0, "beta": 0.3, "fanout": 8},
    "tree": {"preset": "n64", "seed": 0, "policy": "spread"},
    "reduce": {"ell": 2, "fixed_s": False},
    "solve": {"fixed_s": False},
    "sample": {"n": 8, "s": 4, "modulus_bits": 32, "kind": "yes", "seed": 0, "reps": 1},
    "metrics": {"presets": ["n64", "n1024"], "adversary": "silent", "reps": 1, "seed": 0},
}

# flag name -> config key
FLAGS = {"preset": "preset", "adversary": "adversary", "reps": "reps", "seed": "seed", "scheme": "scheme",
         "n": "n", "t": "t", "ell": "ell", "cnf": "cnf", "trace": "trace"}


class UsageError(SrdsError):
    pass


def _seed_value(v: str) -> Any:
    return int(v) if v.lstrip("-").isdigit() else v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="srds", description="SRDS and balanced Byzantine agreement experiments.")
    ap.add_argument("verb", choices=sorted(SCHEMAS))
    ap.add_argument("--config", help="JSON config file; flags override its keys")
    ap.add_argument("--preset")
    ap.add_argument("--adversary")
    ap.add_argument("--reps", type=int)
    ap.add_argument("--seed", type=_seed_value)
    ap.add_argument("--scheme")
    ap.add_argument("--n", type=int)
    ap.add_argument("--t", type=int)
    ap.add_argument("--ell", type=int)
    ap.add_argument("--cnf")
    ap.add_argument("--trace", help="write delivered envelopes as JSON lines (ba only)")
    return ap


def load_config(verb: str, args: argparse.Namespace) -> dict:
    cfg: dict = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
    for flag, key in FLAGS.items():
        v = getattr(args, flag)
        if v is not None:
            cfg[key] = v
    merged = {**DEFAULTS[verb], **cfg}
    try:
        jsonschema.validate(merged, SCHEMAS[verb])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "config"
        raise UsageError(f"{where}: {exc.message}") from None
    return merged


# -- verbs -----------------------------------------------------------------------------

def _rep_seed(seed: Any, r: int) -> str:
    return seeds.derive(seed, "rep", r).hex()


def verb_ba(cfg: dict) -> dict:
    from .ba import get_preset, make_adversary, run_preset
    preset = get_preset(cfg["preset"])
    t = cfg.get("t", preset.t)
    rows = []
    trace = open(cfg["trace"], "w") if cfg.get("trace") else None
    try:
        for r in range(cfg["reps"]):
            s = _rep_seed(cfg["seed"], r)
            out = run_preset(preset, make_adversary(cfg["adversary"]), s, scheme_name=cfg["scheme"], t=t,
                             pki_mode=cfg["pki_mode"], record=trace is not None, strict=True)
            if trace is not None:
                for e in out.engine.log:
                    trace.write(json.dumps({"rep": r, **e.to_json()}, sort_keys=True) + "\n")
            rows.append(out)
    finally:
        if trace is not None:
            trace.close()
    forged = sum(o.forged_accepts for o in rows)
    n_reps = len(rows)
    rep = {
        "verb": "ba", "config": cfg, "reps": n_reps,
        "agreement_rate": sum(o.agreement for o in rows) / n_reps,
        "validity_rate": sum(o.validity for o in rows) / n_reps,
        "success_rate": sum(o.success for o in rows) / n_reps,
        "aborted": sum(o.aborted is not None for o in rows),
        "forged_accepts": forged,
        "anomaly_count": sum(len(o.anomalies) for o in rows),
        "comm_ok_rate": sum(o.comm_ok for o in rows) / n_reps,
        "locality_ok_rate": sum(o.locality_ok for o in rows) / n_reps,
        "comm_bound_bits": rows[0].comm_bound_bits,
        "max_honest_bits_sent": max(o.metrics.max_sent(o.honest) for o in rows),
        "max_honest_peers": max(o.metrics.max_peers(o.honest) for o in rows),
        "failures": [{"rep": i, "seed": _rep_seed(cfg["seed"], i), "aborted": o.aborted,
                      "agreement": o.agreement, "validity": o.validity}
                     for i, o in enumerate(rows) if not o.success][:20],
    }
    if forged:
        rep["invariant_violation"] = f"{forged} forged certificate(s) accepted"
    return rep


def _game(cfg: dict, game: str) -> dict:
    from .experiments import experiment_scheme, run_games
    scheme = experiment_scheme(cfg["scheme"], cfg["n"], ell=cfg.get("ell"))
    res = run_games(game, cfg["scheme"], cfg["n"], cfg["t"], cfg["pki_mode"], cfg["adversary"],
                    cfg["reps"], cfg["seed"], scheme=scheme)
    c = res["counts"]
    return {"verb": "robustness" if game == "robust" else "forgery", "config": cfg, **res,
            "verdict_1_rate": c["verdict-1"] / cfg["reps"]}


def verb_attack(cfg: dict) -> dict:
    from .ba.lowerbound import SrdsTarget, Strawman, attack_rate
    from .ba.presets import get_preset
    n = cfg["n"]
    if cfg["target"] == "strawman":
        proto = Strawman(n, fanout=cfg["fanout"])
    else:
        proto = SrdsTarget(get_preset(f"n{n}"))
    res = attack_rate(n, proto, cfg["reps"], cfg["seed"], cfg["beta"])
    return {"verb": "attack", "config": cfg, **res}


def verb_tree(cfg: dict) -> dict:
    from .ba.presets import get_preset
    from .tree import build_tree, validate_tree
    preset = get_preset(cfg["preset"])
    t = cfg.get("t", preset.t)
    if 3 * t >= preset.n:
        raise UsageError("t must be below n/3")
    rnd = seeds.rng(cfg["seed"], "tree")
    corrupt = sorted(rnd.sample(range(preset.n), t))
    tree = build_tree(preset.n, preset.profile, corrupt, rnd, policy=cfg["policy"])
    check = validate_tree(tree, preset.n, corrupt)
    rep = {"verb": "tree", "config": cfg, "validation": check,
           "bad_leaf_fraction": tree.bad_leaf_fraction(), "tree": json.loads(tree.to_json())}
    if not check["valid"]:
        rep["invariant_violation"] = "; ".join(check["violations"][:5])
    return rep


def _read_cnf(path: str):
    from .subset_phi import parse_dimacs
    try:
        return parse_dimacs(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def verb_reduce(cfg: dict) -> dict:
    from .subset_phi import reduce_3sat
    f = _read_cnf(cfg["cnf"])
    inst = reduce_3sat(f, cfg["ell"], cfg.get("p"), cfg["fixed_s"])
    return {"verb": "reduce", "config": cfg, "n_vars": f.n_vars, "n_clauses": f.m, "instance": inst.to_json()}


def verb_solve(cfg: dict) -> dict:
    from .subset_phi import DEFAULT_CAP, SubsetPhiInstance, brute_force, reduce_3sat, witness_structure
    formula = None
    if cfg.get("instance"):
        try:
            inst = SubsetPhiInstance.from_json(json.loads(Path(cfg["instance"]).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read instance: {exc}") from None
    elif cfg.get("cnf"):
        formula = _read_cnf(cfg["cnf"])
        inst = reduce_3sat(formula, cfg.get("ell", 2), None, cfg["fixed_s"])
    else:
        raise UsageError("solve needs --cnf or an 'instance' path in the config")
    w = brute_force(inst, cap=cfg.get("cap", DEFAULT_CAP))
    rep = {"verb": "solve", "config": cfg, "n": inst.n, "ell": inst.ell, "witness": w,
           "labels": None if w is None else [inst.labels[i] for i in w] if inst.labels else None}
    if formula is not None:
        sat = formula.is_satisfiable()
        rep["formula_satisfiable"] = sat
        if (w is not None) != sat:
            rep["invariant_violation"] = "reduction disagrees with the formula"
        if w is not None:
            ws = witness_structure(inst, w)
            rep["structure"] = {**ws, "assignment": list(ws["assignment"])}
            if not formula.satisfied_by(ws["assignment"]):
                rep["invariant_violation"] = "witness encodes a non-satisfying assignment"
    return rep


def verb_sample(cfg: dict) -> dict:
    from .subset_phi import brute_force, sample_subset_product
    out = []
    for r in range(cfg["reps"]):
        inst, w = sample_subset_product(cfg["n"], cfg["s"], cfg["modulus_bits"], cfg["kind"],
                                        seeds.rng(cfg["seed"], "sample", r))
        item = {"instance": inst.to_json(), "witness": w}
        if inst.n <= 24:
            item["brute_force_witness"] = brute_force(inst)
        out.append(item)
    solvable = sum(o.get("brute_force_witness") is not None for o in out)
    return {"verb": "sample", "config": cfg, "solvable": solvable, "samples": out}


def verb_metrics(cfg: dict) -> dict:
    from .ba import get_preset, make_adversary, run_preset
    per = {}
    for name in cfg["presets"]:
        preset = get_preset(name)
        maxes, ok = [], True
        for r in range(cfg["reps"]):
            o = run_preset(preset, make_adversary(cfg["adversary"]), _rep_seed(cfg["seed"], r))
            maxes.append(o.metrics.max_sent(o.honest))
            ok &= o.comm_ok
        per[name] = {"n": preset.n, "max_honest_bits_sent": max(maxes),
                     "median_max_honest_bits_sent": statistics.median(maxes),
                     "comm_bound_bits": preset.comm_bound_bits(), "comm_ok": ok,
                     "log2n_sq": math.log2(preset.n) ** 2}
    rep = {"verb": "metrics", "config": cfg, "presets": per}
    names = cfg["presets"]
    if len(names) >= 2:
        lo, hi = per[names[0]], per[names[-1]]
        ratio = hi["max_honest_bits_sent"] / lo["max_honest_bits_sent"]
        limit = (hi["log2n_sq"] / lo["log2n_sq"]) * 1.5
        rep["growth"] = {"from": names[0], "to": names[-1], "ratio": ratio, "limit": limit, "ok": ratio <= limit}
    if not all(p["comm_ok"] for p in per.values()):
        rep["invariant_violation"] = "communication bound exceeded"
    return rep


VERBS = {
    "ba": verb_ba,
    "robustness": lambda c: _game(c, "robust"),
    "forgery": lambda c: _game(c, "forge"),
    "attack": verb_attack,
    "tree": verb_tree,
    "reduce": verb_reduce,
    "solve": verb_solve,
    "sample": verb_sample,
    "metrics": verb_metrics,
}


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = load_config(args.verb, args)
        report = VERBS[args.verb](cfg)
    except (UsageError, ParameterError, MalformedInputError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantError as exc:
        print(json.dumps({"verb": args.verb, "invariant_violation": str(exc)}, sort_keys=True))
        return EXIT_INVARIANT
    print(json.dumps(report, sort_keys=True, indent=2, default=str))
    return EXIT_INVARIANT if "invariant_violation" in report else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
