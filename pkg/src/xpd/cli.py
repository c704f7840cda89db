"""The ``xpd`` command line.

Exit codes: 0 on success, 1 on a negative answer (UNSAT, DIFFER, false,
rejected, counterexamples found), 2 on usage or input errors and 3 when a
budget or level cap is exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Callable, Sequence

from . import axioms, decision, oracle
from .ast import (
    Fragment, FragmentError, NodeExpr, ParseError, dd, parse_expr, parse_node, path_len, to_text,
)
from .canonical import Classification, build_model, classify
from .normal_form import BudgetExceeded, Limits, normalize_node, normalize_path
from .semantics import DataTree, Evaluator, TreeSyntaxError, parse_tree, print_tree

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


class Result:
    """What a subcommand produced: an exit code, a JSON payload and text lines."""

    def __init__(self, code: int, payload: dict, lines: Sequence[str]):
        self.code = code
        self.payload = payload
        self.lines = list(lines)


def _address(t: DataTree, x: int) -> str:
    steps = []
    while t.parent(x) is not None:
        p = t.parent(x)
        steps.append(t.children(p).index(x))
        x = p
    return ".".join(map(str, reversed(steps))) or "root"


def _alphabet(args) -> tuple[str, ...]:
    if not args.alphabet:
        raise UsageError("--alphabet is required")
    out = tuple(sorted({a.strip() for a in args.alphabet.split(",") if a.strip()}))
    if not out:
        raise UsageError("--alphabet must list at least one label")
    return out


def _limits(args) -> Limits:
    return Limits(level_cap=args.level_cap, budget=args.budget)


def _node(text: str, args) -> NodeExpr:
    return parse_node(text, _alphabet(args), args.fragment)


def _expr_arg(args) -> str:
    text = args.expr if args.expr is not None else args.text
    if text is None:
        raise UsageError("an expression is required (positional or --expr)")
    return text


# ---------------------------------------------------------------------------
# subcommands

def cmd_parse(args) -> Result:
    e, _ = parse_expr(_expr_arg(args), _alphabet(args), args.fragment)
    sort = "node" if isinstance(e, NodeExpr) else "path"
    payload = {"sort": sort, "printed": to_text(e), "ast": repr(e), "dd": dd(e)}
    lines = [to_text(e), f"sort: {sort}", f"dd: {dd(e)}"]
    if sort == "path":
        payload["len"] = path_len(e)
        lines.append(f"len: {path_len(e)}")
    lines.append(f"ast: {e!r}")
    return Result(EXIT_OK, payload, lines)


def cmd_eval(args) -> Result:
    alphabet = _alphabet(args)
    try:
        t = parse_tree(Path(args.tree).read_text(), alphabet)
    except OSError as exc:
        raise UsageError(f"cannot read {args.tree}: {exc}")
    address = [] if args.at in (None, "", "root") else [int(i) for i in args.at.split(".")]
    try:
        x = t.node_at(address)
    except (IndexError, KeyError, ValueError):
        raise UsageError(f"no node at address {args.at}")
    e = _node(_expr_arg(args), args)
    value = Evaluator(t).holds(x, e)
    return Result(EXIT_OK if value else EXIT_NEGATIVE, {"value": value, "at": args.at or "root"},
                  ["true" if value else "false"])


def cmd_normalize(args) -> Result:
    alphabet = _alphabet(args)
    e, _ = parse_expr(_expr_arg(args), alphabet, args.fragment)
    log: list[str] = []
    if isinstance(e, NodeExpr):
        forms = normalize_node(e, args.fragment, alphabet, args.level, _limits(args), log)
        items = [{"label": f.label, "level": f.level,
                  "positives": [str(d) for d in sorted(f.positives, key=lambda d: d.key)]} for f in forms]
        lines = [f"{len(forms)} disjuncts"] + [f"  {f}" for f in forms]
        payload = {"sort": "node", "disjuncts": items}
    else:
        pairs = normalize_path(e, args.fragment, alphabet, args.level, _limits(args), log)
        items = [{"guard": None if g is None else str(g), "path": str(p)} for g, p in pairs]
        lines = [f"{len(pairs)} disjuncts"] + [
            f"  {p}" if g is None else f"  [{g}] {p}" for g, p in pairs]
        payload = {"sort": "path", "disjuncts": items}
    if args.log:
        payload["axioms"] = log
        lines.append("axioms: " + ", ".join(log))
    return Result(EXIT_OK, payload, lines)


def _trace_lines(verdict) -> list[str]:
    if not verdict.disjuncts:
        return []
    trace: list[str] = []
    build_model(verdict.disjuncts[0], trace)
    return ["trace:"] + [f"  {line}" for line in trace]


def cmd_sat(args) -> Result:
    alphabet = _alphabet(args)
    e = _node(_expr_arg(args), args)
    v = decision.sat(e, args.fragment, alphabet, _limits(args), _bounds(args))
    payload = {"verdict": str(v), "level": v.level, "method": v.method}
    lines = [str(v)]
    if v.sat:
        tree = print_tree(v.model)
        payload |= {"model": tree, "model_size": v.model_size}
        lines += [f"model ({v.model_size} nodes, {v.method}): {tree}"]
        if args.emit_model:
            Path(args.emit_model).write_text(tree + "\n")
            lines.append(f"model written to {args.emit_model}")
        if args.trace:
            lines += _trace_lines(v)
    return Result(EXIT_OK if v.sat else EXIT_NEGATIVE, payload, lines)


def cmd_model(args) -> Result:
    if not args.emit_model:
        raise UsageError("model needs --emit-model FILE")
    return cmd_sat(args)


def cmd_equiv(args) -> Result:
    alphabet = _alphabet(args)
    e1, _ = parse_expr(args.left, alphabet, args.fragment)
    e2, _ = parse_expr(args.right, alphabet, args.fragment)
    if isinstance(e1, NodeExpr) != isinstance(e2, NodeExpr):
        raise UsageError("cannot compare a node expression with a path expression")
    if isinstance(e1, NodeExpr):
        v = decision.equiv_node(e1, e2, args.fragment, alphabet, _limits(args), _bounds(args))
        payload = {"verdict": str(v), "level": v.level}
        lines = [str(v)]
        if not v.equivalent:
            tree = print_tree(v.tree)
            payload |= {"tree": tree, "node": _address(v.tree, v.node), "holds": v.side}
            lines.append(f"witness: {tree} at {_address(v.tree, v.node)} ({v.side} side holds)")
    else:
        v = decision.equiv_path(e1, e2, args.fragment, alphabet, _limits(args))
        payload = {"verdict": str(v), "level": v.level}
        lines = [str(v)]
        if not v.equivalent:
            tree = print_tree(v.tree)
            x, y = v.pair
            pair = [_address(v.tree, x), _address(v.tree, y)]
            payload |= {"tree": tree, "pair": pair, "holds": v.side}
            lines.append(f"witness: {tree} pair {pair[0]} -> {pair[1]} ({v.side} side relates them)")
    return Result(EXIT_OK if v.equivalent else EXIT_NEGATIVE, payload, lines)


def _bounds(args) -> oracle.Bounds:
    d = oracle.DEFAULT_BOUNDS
    return oracle.Bounds(
        getattr(args, "max_nodes", None) or d.max_nodes,
        d.max_depth if getattr(args, "max_depth", None) is None else args.max_depth,
        d.max_branch if getattr(args, "max_branch", None) is None else args.max_branch,
        getattr(args, "max_classes", None) or d.max_classes,
    )


def cmd_oracle_sat(args) -> Result:
    alphabet = _alphabet(args)
    e = _node(_expr_arg(args), args)
    b = _bounds(args)
    t = oracle.brute_sat(e, alphabet, b)
    if t is None:
        return Result(EXIT_NEGATIVE, {"verdict": "UNSAT", "bounds": str(b)}, [f"UNSAT within {b}"])
    return Result(EXIT_OK, {"verdict": "SAT", "model": print_tree(t), "bounds": str(b)},
                  ["SAT", f"model: {print_tree(t)}"])


def cmd_fuzz_axioms(args) -> Result:
    alphabet = _alphabet(args)
    r = axioms.fuzz_soundness(args.fragment, alphabet, args.trees, args.seed)
    bad = sum(len(v) for v in r.counterexamples.values())
    payload = {"trees": r.trees, "seed": r.seed, "instances": r.instances,
               "counterexamples": {k: [c.__dict__ for c in v] for k, v in r.counterexamples.items() if v}}
    lines = r.lines() + [f"{bad} counterexamples over {sum(r.instances.values())} instances"]
    return Result(EXIT_OK if r.ok else EXIT_NEGATIVE, payload, lines)


def cmd_check_proof(args) -> Result:
    try:
        text = Path(args.file).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {args.file}: {exc}")
    v = axioms.check_script(text)
    payload = {"accepted": v.accepted, "step": v.step, "reason": v.reason}
    return Result(EXIT_OK if v.accepted else EXIT_NEGATIVE, payload, [str(v)])


def cmd_cross_check(args) -> Result:
    alphabet = _alphabet(args)
    corpus, pairs = oracle.default_corpus(args.fragment, alphabet, args.seed, args.fuzzed)
    r = oracle.cross_check(args.fragment, corpus, pairs, alphabet, _bounds(args), args.seed)
    return Result(EXIT_OK if r.ok else EXIT_NEGATIVE, r.to_dict(), r.lines())


# ---------------------------------------------------------------------------
# argument parsing

def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alphabet", help="comma-separated labels")
    common.add_argument("--fragment", choices=["eq", "full"], default="full")
    common.add_argument("--level-cap", type=int, default=2)
    common.add_argument("--budget", type=int, default=200_000)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", action="store_true", help="machine-readable output")

    p = argparse.ArgumentParser(prog="xpd", description="Reasoning about downward XPath with data tests.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name: str, fn: Callable, help_text: str, expr: bool = True) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, parents=[common], help=help_text)
        sp.set_defaults(fn=fn)
        if expr:
            sp.add_argument("text", nargs="?", help="expression")
            sp.add_argument("--expr", help="expression (alternative to the positional form)")
        return sp

    def bounds(sp):
        sp.add_argument("--max-nodes", type=int)
        sp.add_argument("--max-depth", type=int)
        sp.add_argument("--max-branch", type=int)
        sp.add_argument("--max-classes", type=int)

    add("parse", cmd_parse, "parse and pretty-print an expression")
    sp = add("eval", cmd_eval, "evaluate a node expression on a tree")
    sp.add_argument("--tree", required=True, help="tree file")
    sp.add_argument("--at", help="dotted child-index address, default the root")
    sp = add("normalize", cmd_normalize, "print the normal form")
    sp.add_argument("--level", type=int, help="target level (default: the downward depth)")
    sp.add_argument("--log", action="store_true", help="list the axioms used")
    for name, fn in (("sat", cmd_sat), ("model", cmd_model)):
        sp = add(name, fn, "decide satisfiability" if name == "sat" else "build a model (sat with --emit-model)")
        sp.add_argument("--emit-model", metavar="FILE")
        sp.add_argument("--trace", action="store_true", help="show the canonical construction log")
        bounds(sp)
    sp = add("equiv", cmd_equiv, "decide equivalence of two expressions", expr=False)
    sp.add_argument("left")
    sp.add_argument("right")
    bounds(sp)
    sp = add("oracle-sat", cmd_oracle_sat, "brute-force model search")
    bounds(sp)
    sp = add("fuzz-axioms", cmd_fuzz_axioms, "check axiom soundness on random trees", expr=False)
    sp.add_argument("--trees", type=int, default=300)
    sp = add("check-proof", cmd_check_proof, "check a proof script", expr=False)
    sp.add_argument("file")
    sp = add("cross-check", cmd_cross_check, "compare the decision procedures with the oracle", expr=False)
    sp.add_argument("--fuzzed", type=int, default=100)
    bounds(sp)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    args.fragment = Fragment.coerce(args.fragment)
    try:
        result = args.fn(args)
    except UsageError as exc:
        print(f"xpd: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, FragmentError, TreeSyntaxError, ValueError) as exc:
        print(f"xpd: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        if args.json:
            print(json.dumps({"verdict": "BUDGET", "reason": str(exc)}))
        else:
            print(f"budget exceeded: {exc}")
        return EXIT_BUDGET
    if args.json:
        print(json.dumps(result.payload, sort_keys=True, default=str))
    else:
        for line in result.lines:
            print(line)
    return result.code


if __name__ == "__main__":
    sys.exit(main())
