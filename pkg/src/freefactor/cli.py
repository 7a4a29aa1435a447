"""Command-line front end.

Exit codes: 0 success, 1 mathematical rejection (invalid certificate,
non-free lift tuple), 2 input error.  Outputs are written only after a
command succeeds, so failures leave no partial artifacts.  Relative
output paths are resolved against $FREEFACTOR_OUT_DIR when it is set.

Word grammar: letters a..z are generators 1..26, capitals are inverses,
an integer suffix repeats the letter (a3B2 = a^3 b^-2).  Alphabets of
rank > 26 use indexed tokens x7/X7 with an optional ^e exponent.
Cover shorthand: grid:K,N or kernel:RANK,P[,t1,...]; anything else is
read as a JSON file path.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from .certify import CertifyError, check_certificate, dumps_certificate, prove
from .costlab import CostError, FiniteRelation, FiniteSpace, relation_cost, restrict_and_check
from .covers import (
    CoverError,
    cover_to_dot,
    dumps_cover,
    fold,
    grid_chain_tree,
    make_cover,
    parse_cover_spec,
)
from .lifts import LiftError, complete_lift, dumps_lift, lift_from_json, verify_free_lift
from .report import render_cover_figure, write_report_bundle
from .vfree import VFreeError
from .words import Alphabet, WordError, parse_word


class InputError(Exception):
    pass


def _out_path(path):
    base = os.environ.get("FREEFACTOR_OUT_DIR")
    if base and not os.path.isabs(path):
        os.makedirs(base, exist_ok=True)
        return os.path.join(base, path)
    return path


def _emit(text: str, out):
    if out:
        with open(_out_path(out), "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cover_text(cover, fmt):
    if fmt == "json":
        return dumps_cover(cover)
    if fmt == "dot":
        return cover_to_dot(cover)
    raise InputError(f"unsupported format {fmt!r}")


def cmd_cover_make(args):
    if args.kind == "grid":
        if args.k is None or args.n is None:
            raise InputError("grid covers need --k and --n")
        cover = make_cover("grid", k=args.k, n=args.n)
    elif args.kind == "kernel":
        if args.p is None:
            raise InputError("kernel covers need --p")
        targets = [int(t) for t in args.targets.split(",")] if args.targets else None
        cover = make_cover("kernel_mod_p", rank=args.rank, p=args.p, targets=targets)
    else:
        raise InputError(f"unknown cover kind {args.kind!r}")
    _emit(_cover_text(cover, args.format), args.out)
    return 0


def cmd_cover_fold(args):
    alphabet = Alphabet(args.rank)
    gens = [parse_word(t, alphabet) for t in args.generators.split(",") if t]
    cover = fold(alphabet, gens)
    _emit(_cover_text(cover, args.format), args.out)
    return 0


def cmd_cover_export(args):
    cover = parse_cover_spec(args.cover)
    if args.format == "png":
        if not args.out:
            raise InputError("png export needs --out")
        render_cover_figure(cover, _out_path(args.out))
        return 0
    _emit(_cover_text(cover, args.format), args.out)
    return 0


def cmd_lift_compute(args):
    cover = parse_cover_spec(args.cover)
    word = parse_word(args.word, cover.alphabet)
    tree = grid_chain_tree(cover) if args.tree == "chain" else None
    lift = complete_lift(cover, word, tree=tree)
    _emit(dumps_lift(lift), args.out)
    return 0


def cmd_lift_verify(args):
    cover = parse_cover_spec(args.cover)
    with open(args.lift) as fh:
        supplied = lift_from_json(json.load(fh))
    recomputed = complete_lift(cover, supplied.base_word)
    same = supplied.index == recomputed.index and [
        (e.rep, e.mult, e.word) for e in supplied.entries
    ] == [(e.rep, e.mult, e.word) for e in recomputed.entries]
    ok, witness = verify_free_lift(supplied, subgroup_cover=cover)
    if same and ok:
        print(f"lift verified: {len(supplied.entries)} free entries, index {supplied.index}")
        return 0
    print(f"lift rejected: replay={'ok' if same else 'mismatch'}, freeness={witness}")
    return 1


def _parse_classes(text, n):
    classes = []
    for chunk in text.split("|"):
        pts = [int(t) for t in chunk.split() if t]
        classes.append(tuple(pts))
    rel = FiniteRelation.from_classes(classes)
    if rel.points != tuple(range(n)):
        raise InputError("classes must partition 0..points-1")
    return rel


def cmd_cost_check(args):
    space = FiniteSpace.uniform(args.points)
    relation = _parse_classes(args.classes, args.points)
    lines = [f"C(E) = {relation_cost(space, relation)}"]
    if args.section:
        section = {int(t) for t in args.section.split(",") if t}
        _, report = restrict_and_check(space, relation, section)
        lines = report.lines()
        code = 0 if report.equal else 1
    else:
        code = 0
    _emit("\n".join(lines) + "\n", args.out)
    return code


def cmd_certify_prove(args):
    params = {}
    if args.k is not None:
        params["k"] = args.k
    if args.n is not None:
        params["n"] = args.n
    if args.p is not None:
        params["p"] = args.p
    if args.g is not None:
        params["g"] = args.g
    if args.m:
        params["m"] = [int(t) for t in args.m.split(",")]
    if args.v:
        params["v"] = args.v
    if args.orders:
        params["orders"] = [int(t) for t in args.orders.split(",")]
    if args.powers:
        params["powers"] = [int(t) for t in args.powers.split(",")]
    root = prove(args.theorem, **params)
    _emit(dumps_certificate(root), args.out)
    return 0


def cmd_certify_check(args):
    with open(args.certificate) as fh:
        data = json.load(fh)
    report = check_certificate(data)
    print("\n".join(report.lines()))
    return 0 if report.accepted else 1


def cmd_report(args):
    cover = parse_cover_spec(args.cover)
    word = parse_word(args.word, cover.alphabet)
    tree = grid_chain_tree(cover) if args.tree == "chain" else None
    lift = complete_lift(cover, word, tree=tree)
    out_dir = _out_path(args.out_dir)
    written = write_report_bundle(cover, lift, out_dir)
    for path in written:
        print(path)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="freefactor",
        description="finite covers, complete lifts, exact cost checks and measure-free-factor certificates",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    cover = sub.add_parser("cover", help="construct and export covers").add_subparsers(
        dest="subcommand", required=True
    )
    mk = cover.add_parser("make", help="build a named cover")
    mk.add_argument("kind", choices=["grid", "kernel"])
    mk.add_argument("--k", type=int)
    mk.add_argument("--n", type=int)
    mk.add_argument("--rank", type=int, default=2)
    mk.add_argument("--p", type=int)
    mk.add_argument("--targets")
    mk.add_argument("--format", choices=["json", "dot"], default="json")
    mk.add_argument("--out")
    mk.set_defaults(func=cmd_cover_make)
    fd = cover.add_parser("fold", help="fold a generating set")
    fd.add_argument("--rank", type=int, required=True)
    fd.add_argument("--generators", required=True, help="comma-separated words")
    fd.add_argument("--format", choices=["json", "dot"], default="json")
    fd.add_argument("--out")
    fd.set_defaults(func=cmd_cover_fold)
    ex = cover.add_parser("export", help="re-serialize a cover")
    ex.add_argument("--cover", required=True)
    ex.add_argument("--format", choices=["json", "dot", "png"], default="json")
    ex.add_argument("--out")
    ex.set_defaults(func=cmd_cover_export)

    lift = sub.add_parser("lift", help="complete lifts").add_subparsers(
        dest="subcommand", required=True
    )
    lc = lift.add_parser("compute", help="complete lift of a word")
    lc.add_argument("--cover", required=True)
    lc.add_argument("--word", required=True)
    lc.add_argument("--tree", choices=["bfs", "chain"], default="bfs")
    lc.add_argument("--out")
    lc.set_defaults(func=cmd_lift_compute)
    lv = lift.add_parser("verify", help="replay and check freeness of a lift file")
    lv.add_argument("--lift", required=True)
    lv.add_argument("--cover", required=True)
    lv.set_defaults(func=cmd_lift_verify)

    cost = sub.add_parser("cost", help="exact cost checks").add_subparsers(
        dest="subcommand", required=True
    )
    cc = cost.add_parser("check", help="relation cost and the section formula")
    cc.add_argument("--points", type=int, required=True)
    cc.add_argument("--classes", required=True, help="classes as '0 1 2|3 4|5'")
    cc.add_argument("--section", help="comma-separated complete section")
    cc.add_argument("--out")
    cc.set_defaults(func=cmd_cost_check)

    certify = sub.add_parser("certify", help="emit and verify certificates").add_subparsers(
        dest="subcommand", required=True
    )
    cp = certify.add_parser("prove", help="run a built-in derivation script")
    cp.add_argument(
        "theorem",
        choices=["two_letter", "three_letter", "bswords", "nonorientable_boundary", "vfree", "surface_comm"],
    )
    cp.add_argument("--k", type=int)
    cp.add_argument("--n", type=int)
    cp.add_argument("--p", type=int)
    cp.add_argument("--g", type=int)
    cp.add_argument("--m", help="comma-separated exponents for bswords")
    cp.add_argument("--v", help="free-part word for vfree")
    cp.add_argument("--orders", help="comma-separated torsion orders")
    cp.add_argument("--powers", help="comma-separated torsion powers")
    cp.add_argument("--out")
    cp.set_defaults(func=cmd_certify_prove)
    ck = certify.add_parser("check", help="verify a certificate file")
    ck.add_argument("certificate")
    ck.set_defaults(func=cmd_certify_check)

    rp = sub.add_parser("report", help="figure + delimited tables for a lift")
    rp.add_argument("--cover", required=True)
    rp.add_argument("--word", required=True)
    rp.add_argument("--tree", choices=["bfs", "chain"], default="bfs")
    rp.add_argument("--out-dir", required=True)
    rp.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CertifyError, LiftError, CostError, VFreeError) as e:
        print(f"rejected: {e}", file=sys.stderr)
        return 1
    except (InputError, WordError, CoverError, FileNotFoundError, json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        print(f"input error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
