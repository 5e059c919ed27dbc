"""Batch driver: tree enumeration, verification suites and homology ranks.

Exit codes are 0 when everything passes, 1 when a verified identity fails and
2 for usage or parse errors. Output depends only on the arguments, so the same
command line always prints the same bytes.
"""

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

from .ring_linear import F2, Complex, Report, Ring, from_json, homology_ranks
from .trees import Tree, enumerate_reduced

TARGETS = ("be", "cubical", "segal", "cobar", "w", "treesq")
EXAMPLES = ("com", "as-operad", "solver-f2")
COMPLEXES = ("cobar", "w", "w-dec", "treesq", "zero")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if n < 1:
        raise argparse.ArgumentTypeError(f"bound must be positive, got {n}")
    return n


def _ring(text: str) -> Ring:
    try:
        return Ring.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--ring", type=_ring, default=Ring.parse("q"), help="q, z or f<p> (default q)")
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--seed", type=int, default=0, help="recorded in the report; all sweeps are exhaustive")
    common.add_argument("--out", help="write output to this path instead of stdout")

    p = _Parser(prog="segal-cobar", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("trees", parents=[common], help="list reduced trees with r leaves")
    t.add_argument("r", type=int)
    t.add_argument("--reduced", action="store_true",
                   help="reduced trees only (always the case: with unary vertices the list is infinite)")

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("target", choices=TARGETS)
    v.add_argument("--example", choices=EXAMPLES, default="com")
    v.add_argument("--arity", type=_positive, help="arity bound")
    v.add_argument("--deg", type=_positive, help="simplex degree bound (be)")
    v.add_argument("--k", type=_positive, help="cube dimension bound (cubical)")
    v.add_argument("--homology", action="store_true", help="also print homology ranks per arity (cobar)")

    h = sub.add_parser("homology", parents=[common], help="homology ranks of a complex")
    h.add_argument("file", nargs="?", help="complex in the ring_linear JSON format")
    h.add_argument("--complex", choices=COMPLEXES, default="cobar")
    h.add_argument("--example", choices=EXAMPLES, default="com")
    h.add_argument("--arity", type=_positive, default=3)
    h.add_argument("--source", help="source tree (treesq), e.g. '((1 2) 3)'")
    h.add_argument("--target", help="target tree (treesq, w, w-dec); default the corolla")
    h.add_argument("--range", dest="deg_range", help="only report degrees LO:HI (write --range=-3:0 for negative LO)")
    return p


# examples ---------------------------------------------------------------

def _strict_example(name: str, r: int, ring: Ring):
    from .segal_cooperads import (associative_operad, cochains_of_simplicial_operad, example_com,
                                  forget_to_dg)
    if name == "com":
        return example_com(r, ring)
    if name == "as-operad":
        return forget_to_dg(cochains_of_simplicial_operad(associative_operad(), r, ring))
    raise UsageError(f"example {name!r} is not a strict Segal cooperad")


def _any_example(name: str, r: int, ring: Ring):
    if name == "solver-f2":
        from .segal_cooperads import solver_instance
        return solver_instance(F2, max(r, 4))
    return _strict_example(name, r, ring)


# suite items ------------------------------------------------------------
# Each item is a (name, args) pair of plain values so it can run in a worker.

def _suite(args) -> List[Tuple[str, tuple]]:
    ring = args.ring.name
    target, ex = args.target, args.example
    if target == "be":
        return [("be", (args.arity or 3, args.deg or 2, ring))]
    if target == "cubical":
        return [("cubical", (args.k or 4, ring))]
    r = args.arity or (3 if ex == "as-operad" else 4)
    if target == "segal":
        items = [("segal-structure", (ex, r, ring)), ("segal-maps", (ex, r, ring))]
        if ex == "as-operad":
            items.append(("ehopf", (r, ring)))
        return items
    if target == "cobar":
        items = [("cobar", (ex, r, ring)), ("cobar-filtration", (ex, r, ring))]
        if args.homology:
            items.append(("cobar-homology", (ex, r, ring)))
        return items
    if target == "w":
        if ex == "solver-f2":
            raise UsageError("the W-construction needs a strict Segal cooperad (com or as-operad)")
        return [("zigzag", (ex, r, ring))]
    items = [("treesq", (r, ring))]
    if ex == "solver-f2":
        items.append(("treesq-action", (r,)))
    return items


def run_item(name: str, args: tuple) -> Report:
    from . import barratt_eccles, cobar, cubical, segal_cooperads, w_construction
    if name == "be":
        arity, deg, ring = args
        return barratt_eccles.verify_barratt_eccles(arity, deg, Ring.parse(ring))
    if name == "cubical":
        k, ring = args
        return cubical.verify_cubical(k, Ring.parse(ring))
    if name == "ehopf":
        r, ring = args
        E = segal_cooperads.cochains_of_simplicial_operad(segal_cooperads.associative_operad(), r,
                                                          Ring.parse(ring))
        return segal_cooperads.verify_ehopf(E)
    if name == "treesq":
        r, ring = args
        return w_construction.treesq_verify(r, Ring.parse(ring))
    if name == "treesq-action":
        (r,) = args
        H = segal_cooperads.solver_instance(F2, max(r, 4))
        return w_construction.treesq_action_verify(H, r)
    ex, r, ring = args
    S = _any_example(ex, r, Ring.parse(ring))
    if name == "segal-structure":
        if isinstance(S, segal_cooperads.HomotopySegalDg):
            return segal_cooperads.verify_homotopy(S)
        return segal_cooperads.verify_strict(S)
    if name == "segal-maps":
        return segal_cooperads.verify_segal(S)
    if name == "zigzag":
        return w_construction.zigzag_verify(S, r)
    O = cobar.cobar_homotopy(S) if isinstance(S, segal_cooperads.HomotopySegalDg) else cobar.cobar_strict(S)
    if name == "cobar":
        return cobar.operad_verify(O, r)
    if name == "cobar-filtration":
        return cobar.vertex_filtration_check(O, r)
    if name == "cobar-homology":
        rep = Report(f"cobar homology of {ex}")
        table = {}
        for n in range(2, r + 1):
            table[str(n)] = _str_keys(homology_ranks(O(tuple(range(1, n + 1)))))
        rep.data["homology"] = table
        return rep
    raise ValueError(f"unknown suite item {name!r}")


def _threads() -> int:
    raw = os.environ.get("SEGAL_COBAR_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"SEGAL_COBAR_THREADS must be a positive integer, got {raw!r}")
    if n < 1:
        raise UsageError(f"SEGAL_COBAR_THREADS must be a positive integer, got {raw!r}")
    return n


def run_suite(items: Sequence[Tuple[str, tuple]], threads: int = 1) -> List[Report]:
    """Run the items, in parallel when allowed; results keep the item order."""
    if threads <= 1 or len(items) <= 1:
        return [run_item(n, a) for n, a in items]
    with ProcessPoolExecutor(max_workers=min(threads, len(items))) as pool:
        futures = [pool.submit(run_item, n, a) for n, a in items]
        return [f.result() for f in futures]


# output -----------------------------------------------------------------

def _str_keys(d: Dict[int, int]) -> Dict[str, int]:
    return {str(k): v for k, v in sorted(d.items())}


def _csv(rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def _dumps(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def cmd_trees(args) -> Tuple[str, int]:
    if args.r < 1:
        raise UsageError(f"arity must be at least 1, got {args.r}")
    trees = enumerate_reduced(args.r)
    rows = [(str(t), len(t.vertices())) for t in trees]
    if args.format == "json":
        return _dumps({"r": args.r, "count": len(rows),
                       "trees": [{"tree": t, "vertices": v} for t, v in rows]}), 0
    if args.format == "csv":
        return _csv([("tree", "vertices")] + rows), 0
    lines = [f"{t}\t{v}" for t, v in rows]
    lines.append(f"# {len(rows)} reduced trees with {args.r} leaves")
    return "\n".join(lines) + "\n", 0


def cmd_verify(args) -> Tuple[str, int]:
    if args.example == "solver-f2":
        args.ring = F2
    reports = run_suite(_suite(args), _threads())
    ok = all(r.ok for r in reports)
    code = 0 if ok else 1
    if args.format == "json":
        return _dumps({"target": args.target, "ring": args.ring.name, "seed": args.seed, "ok": ok,
                       "reports": [r.to_dict() for r in reports]}), code
    if args.format == "csv":
        rows = [("report", "check", "passed", "count")]
        for r in reports:
            rows += [(r.title, c.name, c.passed, c.count) for c in r.checks]
        return _csv(rows), code
    parts = [r.summary() for r in reports if r.checks]
    for r in reports:
        if "homology" in r.data:
            parts.append(r.title + ":")
            parts += [f"  arity {n}: {_text_ranks(ranks)}" for n, ranks in r.data["homology"].items()]
    parts.append(f"{'PASS' if ok else 'FAIL'}: {sum(len(r.checks) for r in reports)} identities checked")
    return "\n".join(parts) + "\n", code


def _text_ranks(ranks: Dict[str, int]) -> str:
    return "{" + ", ".join(f"{k}: {v}" for k, v in ranks.items()) + "}"


def _parse_range(text: Optional[str]) -> Optional[Tuple[int, int]]:
    if text is None:
        return None
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError:
        raise UsageError(f"--range expects LO:HI, got {text!r}")


def _homology_input(args) -> Complex:
    ring = args.ring
    if args.file:
        with open(args.file) as fh:
            return from_json(fh.read(), ring)
    if args.complex == "zero":
        return Complex(ring, {}, lambda lab: None, "zero")
    r = args.arity
    if args.complex == "cobar":
        S = _any_example(args.example, r, ring)
        from .cobar import cobar_homotopy, cobar_strict
        from .segal_cooperads import HomotopySegalDg
        O = cobar_homotopy(S) if isinstance(S, HomotopySegalDg) else cobar_strict(S)
        return O(tuple(range(1, r + 1)))
    target = Tree.parse(args.target) if args.target else Tree.corolla(range(1, r + 1))
    if args.complex == "treesq":
        from .w_construction import treesq
        source = Tree.parse(args.source) if args.source else _left_comb(len(target.leaves))
        return treesq(source, target, ring)
    from .w_construction import WConstruction
    S = _strict_example(args.example, len(target.leaves), ring)
    return WConstruction(S, decomposed=args.complex == "w-dec")(target)


def _left_comb(r: int) -> Tree:
    text = "1"
    for i in range(2, r + 1):
        text = f"({text} {i})"
    return Tree.parse(text)


def cmd_homology(args) -> Tuple[str, int]:
    if not args.ring.is_field:
        raise UsageError("homology ranks need a field; use --ring q or f<p>")
    if args.example == "solver-f2" and args.complex == "cobar" and not args.file:
        args.ring = F2
    c = _homology_input(args)
    ranks = homology_ranks(c)
    window = _parse_range(args.deg_range)
    if window:
        ranks = {d: h for d, h in ranks.items() if window[0] <= d <= window[1]}
    ranks = dict(sorted(ranks.items()))
    if args.format == "json":
        return _dumps({"ring": args.ring.name, "ranks": _str_keys(ranks)}), 0
    if args.format == "csv":
        return _csv([("degree", "rank")] + list(ranks.items())), 0
    return "{" + ", ".join(f"{d}: {h}" for d, h in ranks.items()) + "}\n", 0


COMMANDS = {"trees": cmd_trees, "verify": cmd_verify, "homology": cmd_homology}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        text, code = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"segal-cobar: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, KeyError) as exc:
        print(f"segal-cobar: error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
