"""Command line front end.

Exit codes: 0 for success (or a true predicate), 1 for validation
failures and false predicates, 2 for malformed input.  All numeric
output is exact: integers, or half-integers printed as ``p/2``.  The
environment variable BRIDGECALC_SEED overrides ``--seed``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import fileio, generator, invariants, moves, sums, words
from .crush import (
    CrushSpec,
    crush as run_crush,
    crush_identity_gap,
    handle_crush_bound,
    omega_one_bound,
    satellite_bounds,
)
from .halfint import HalfInt
from .model import InvalidState, MoveError, validate_state


def _load_state(path):
    return fileio.load_state(path)


def _half(text: str) -> HalfInt:
    """Parse an exact half-integer argument: "3" or "-7/2"."""
    text = text.strip()
    try:
        return HalfInt.whole(int(text))
    except ValueError:
        pass
    try:
        return HalfInt.from_json(text)
    except ValueError:
        raise fileio.MalformedInput(f"not a half-integer: {text!r}") from None


def _print_bundle(bundle, fmt):
    if fmt == "json":
        print(json.dumps(bundle.to_json(), sort_keys=True))
        return
    print(f"netchi {bundle.netchi}")
    print(f"netg {bundle.netg}")
    print(f"netw {bundle.netw}")
    print(f"netx {bundle.netx}")
    for m, value in bundle.netx_m:
        print(f"netx_{m} {value}")


def cmd_validate(args):
    state = _load_state(args.state)
    report = validate_state(state)
    if args.dot:
        print(fileio.dot_digraph(state), end="")
    if report.ok:
        print("ok")
        return 0
    print(report)
    return 1


def cmd_invariants(args):
    state = _load_state(args.state)
    ms = tuple(int(m) for m in args.m.split(","))
    bundle = invariants.net_invariants(state, ms)
    _print_bundle(bundle, args.format)
    if args.u is not None:
        unweighted = tuple(s for s in args.u.split(",") if s)
        for m in ms:
            residual = invariants.counting_identity_residual(state, m,
                                                             unweighted)
            print(f"residual_{m} {residual}")
    bound, ok = invariants.lower_bound_check(state)
    print(f"weight_floor {bound} {'satisfied' if ok else 'violated'}")
    return 0 if ok else 1


def _parse_script(path):
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise fileio.MalformedInput(str(exc)) from exc
    return script_from_json(doc)


def script_from_json(doc):
    if not isinstance(doc, list):
        raise fileio.MalformedInput("a move script is a JSON list")
    out = []
    for raw in doc:
        op = raw.get("op")
        if op == "consolidate":
            out.append(moves.Move(op, thick=raw["thick"], thin=raw["thin"]))
        elif op in ("untelescope", "elementary"):
            discs = raw.get("discs", {})
            out.append(moves.Move(
                op, thick=raw["thick"],
                plus=_disc_from_json(discs.get("plus")),
                minus=_disc_from_json(discs.get("minus"))))
        elif op == "amalgamate":
            out.append(moves.Move(op, vpcs=tuple(raw["vpcs"])))
        else:
            raise fileio.MalformedInput(f"unknown move op {op!r}")
    return out


def _disc_from_json(raw):
    if raw is None:
        raise fileio.MalformedInput("untelescoping needs both discs")
    split = raw.get("sideSplit")
    side_split = None
    if split is not None:
        side_split = moves.SideSplit(
            genus=tuple(split["genus"]),
            punctures=(tuple(split["punctures"][0]),
                       tuple(split["punctures"][1])),
            other_side=split.get("otherSide", 1))
    outcomes = tuple(
        moves.Outcome(negatives=tuple(o.get("negatives", ())),
                      tangle=fileio.tangle_from_json(o.get("tangle", {})))
        for o in raw.get("outcomes", [{}]))
    return moves.DiscSpec(
        vpc=raw["vpc"], p=raw.get("p", 0),
        scar_weight=raw.get("scarWeight"),
        separating=raw.get("separating", False),
        side_split=side_split, outcomes=outcomes)


def cmd_apply(args):
    state = _load_state(args.state)
    script = _parse_script(args.script)
    for move in script:
        state = moves.apply_move(state, move)
    if args.out:
        fileio.save_state(state, args.out)
    else:
        print(fileio.dumps(fileio.state_to_json(state)), end="")
    return 0


def cmd_thin(args):
    state = _load_state(args.state)
    script = _parse_script(args.script) if args.script else ()
    result = moves.thin_driver(state, script, greedy=args.greedy)
    for step in result.trace:
        print(json.dumps(step.to_json(), sort_keys=True))
    if args.out:
        fileio.save_state(result.state, args.out)
    if not result.completed:
        print(f"aborted: {result.error}", file=sys.stderr)
        return 1
    return 0


def cmd_compose(args):
    a = _load_state(args.a)
    b = _load_state(args.b)

    def attachment(vpc, arc, loop, vertex):
        arc_pair = tuple(arc.split(",")) if arc else None
        return sums.Attachment(vpc, arc=arc_pair, loop=loop, vertex=vertex)

    spec = sums.SumSpec(
        kind=args.kind, u=args.u,
        attach_a=attachment(args.vpc_a, args.arc_a, args.loop_a, args.vertex_a),
        attach_b=attachment(args.vpc_b, args.arc_b, args.loop_b, args.vertex_b),
        flip_a=args.flip_a, flip_b=args.flip_b)
    state = sums.compose(a, b, spec)
    if args.out:
        fileio.save_state(state, args.out)
    else:
        print(fileio.dumps(fileio.state_to_json(state)), end="")
    return 0


def cmd_split(args):
    state = _load_state(args.state)
    left, right = sums.decompose(state, args.sphere)
    fileio.save_state(left, f"{args.out}.0.bridge.json")
    fileio.save_state(right, f"{args.out}.1.bridge.json")
    print(f"{args.out}.0.bridge.json")
    print(f"{args.out}.1.bridge.json")
    return 0


def cmd_cutreduce(args):
    state = _load_state(args.state)
    reduced, count = sums.cut_edge_reduce(state)
    if args.out:
        fileio.save_state(reduced, args.out)
    print(f"removed {count}")
    return 0


def cmd_crush(args):
    state = _load_state(args.state)
    with open(args.spec, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise fileio.MalformedInput(str(exc)) from exc
    try:
        spec = CrushSpec(
            vpc=doc["vpc"], d1=tuple(doc["d1"]), d2=tuple(doc["d2"]),
            pi=tuple(doc["pi"]), omega=doc["omega"],
            inside=tuple(doc.get("inside", ())))
    except (KeyError, TypeError) as exc:
        raise fileio.MalformedInput(f"bad crush spec: {exc}") from exc
    result = run_crush(state, spec)
    gap = crush_identity_gap(state, result, spec.omega)
    if args.out:
        fileio.save_state(result, args.out)
    else:
        print(fileio.dumps(fileio.state_to_json(result)), end="")
    print(f"accounting_gap {gap}", file=sys.stderr)
    return 0


def cmd_bound(args):
    if args.which == "whitehead":
        value = satellite_bounds(
            _half(args.b), "whitehead", n=args.n,
            companion_is_torus_knot=args.torus_knot)
    elif args.which == "cable":
        value = satellite_bounds(
            _half(args.b), "cable", q=args.q,
            companion_is_torus_knot=args.torus_knot)
    elif args.which == "plain":
        value = satellite_bounds(
            _half(args.b), "plain", omega=args.omega,
            lensed=args.lensed, companion_is_torus_knot=args.torus_knot)
    elif args.which == "omega1":
        value = omega_one_bound(_half(args.b),
                                          args.lensed)
    else:  # handlecrush
        ok = handle_crush_bound(
            _half(args.netw_h), _half(args.netw_l),
            args.omega, args.g1)
        print("true" if ok else "false")
        return 0 if ok else 1
    print(value)
    return 0


def _word_from_json(doc):
    annuli = []
    for raw in doc.get("annuli", ()):
        nest = raw.get("nest", {})
        annuli.append(words.AnnulusRec(
            type=raw["type"], side=raw.get("side"),
            levels=tuple(raw["levels"]),
            nest=(nest.get("start"), nest.get("end")),
            vpc=raw.get("vpc")))
    decl = None
    if "declarations" in doc:
        d = doc["declarations"]
        decl = words.Declarations(
            helper=tuple(d.get("helper", ())),
            union_separates=bool(d.get("unionSeparates", False)),
            bridge_disc=bool(d.get("bridgeDisc", False)))
    return words.AnnulusWord(tuple(annuli), dict(doc.get("forests", {})),
                             decl)


def cmd_classify(args):
    with open(args.word, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise fileio.MalformedInput(str(exc)) from exc
    try:
        word = _word_from_json(doc)
    except (KeyError, TypeError) as exc:
        raise fileio.MalformedInput(f"bad word document: {exc}") from exc
    try:
        result = words.classify_torus_config(word)
    except words.WordError as exc:
        print(f"invalid word: {exc}")
        return 1
    print(result.label if result.detail is None
          else f"{result.label} ({result.detail})")
    for pair in words.find_matched_pairs(word):
        flag, case = words.is_cancellable(word, pair)
        print(f"pair curved={pair.curved} nested={pair.nested} "
              f"length={pair.length} cancellable="
              f"{case if flag else 'no'}")
    return 0


def cmd_gen(args):
    seed = args.seed
    env = os.environ.get("BRIDGECALC_SEED")
    if env is not None:
        seed = int(env)
    for state in generator.generate_states(seed, args.max_size, args.count):
        print(json.dumps(fileio.state_to_json(state), sort_keys=True))
    return 0


def build_parser():
    top = argparse.ArgumentParser(
        prog="bridgecalc",
        description="exact calculus for weighted bridge surfaces")
    sub = top.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("validate", help="check a state file")
    p.add_argument("state")
    p.add_argument("--dot", action="store_true",
                   help="print the dual digraph in DOT form")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("invariants", help="net invariants of a state")
    p.add_argument("state")
    p.add_argument("--m", default="1,2,3")
    p.add_argument("--u", default=None,
                   help="comma separated vertex spheres treated unweighted")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(fn=cmd_invariants)

    p = sub.add_parser("apply", help="run a move script")
    p.add_argument("state")
    p.add_argument("script")
    p.add_argument("-o", "--out")
    p.set_defaults(fn=cmd_apply)

    p = sub.add_parser("thin", help="run the thinning driver")
    p.add_argument("state")
    p.add_argument("--script")
    p.add_argument("--greedy", action="store_true")
    p.add_argument("-o", "--out")
    p.set_defaults(fn=cmd_thin)

    p = sub.add_parser("compose", help="sum two states")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--kind", choices=sums.KINDS, required=True)
    p.add_argument("--u", type=int, default=1)
    p.add_argument("--vpc-a", required=True)
    p.add_argument("--vpc-b", required=True)
    p.add_argument("--arc-a", help="comma separated puncture pair")
    p.add_argument("--arc-b")
    p.add_argument("--loop-a", action="store_true")
    p.add_argument("--loop-b", action="store_true")
    p.add_argument("--vertex-a")
    p.add_argument("--vertex-b")
    p.add_argument("--flip-a", action="store_true")
    p.add_argument("--flip-b", action="store_true")
    p.add_argument("-o", "--out")
    p.set_defaults(fn=cmd_compose)

    p = sub.add_parser("split", help="decompose at a summing sphere")
    p.add_argument("state")
    p.add_argument("--sphere", required=True)
    p.add_argument("-o", "--out", default="factor")
    p.set_defaults(fn=cmd_split)

    p = sub.add_parser("cutreduce", help="remove cut edges")
    p.add_argument("state")
    p.add_argument("-o", "--out")
    p.set_defaults(fn=cmd_cutreduce)

    p = sub.add_parser("crush", help="crush a handle")
    p.add_argument("state")
    p.add_argument("--spec", required=True)
    p.add_argument("-o", "--out")
    p.set_defaults(fn=cmd_crush)

    p = sub.add_parser("bound", help="closed-form bound calculators")
    which = p.add_subparsers(dest="which", required=True)
    w = which.add_parser("whitehead")
    w.add_argument("--n", type=int, required=True)
    w.add_argument("--b", required=True)
    w.add_argument("--torus-knot", action="store_true")
    w = which.add_parser("cable")
    w.add_argument("--q", type=int, required=True)
    w.add_argument("--b", required=True)
    w.add_argument("--torus-knot", action="store_true")
    w = which.add_parser("plain")
    w.add_argument("--omega", type=int, required=True)
    w.add_argument("--b", required=True)
    w.add_argument("--lensed", action="store_true")
    w.add_argument("--torus-knot", action="store_true")
    w = which.add_parser("omega1")
    w.add_argument("--b", required=True)
    w.add_argument("--lensed", action="store_true")
    w = which.add_parser("handlecrush")
    w.add_argument("--netw-h", required=True)
    w.add_argument("--netw-l", required=True)
    w.add_argument("--omega", type=int, required=True)
    w.add_argument("--g1", type=int, required=True)
    p.set_defaults(fn=cmd_bound)

    p = sub.add_parser("classify", help="classify a torus word")
    p.add_argument("word")
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("gen", help="emit generated states as JSON lines")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-size", type=int, default=8)
    p.add_argument("--count", type=int, default=None)
    p.set_defaults(fn=cmd_gen)

    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except fileio.MalformedInput as exc:
        print(f"malformed input: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"malformed input: {exc}", file=sys.stderr)
        return 2
    except InvalidState as exc:
        print(exc, file=sys.stderr)
        return 1
    except MoveError as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError) as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
