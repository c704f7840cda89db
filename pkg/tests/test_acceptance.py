"""Acceptance criteria 1-9.

Run under pytest for one test per criterion plus a summary section, or
directly with ``python tests/test_acceptance.py`` for one line per criterion.
"""

import random
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import ACCEPTANCE  # noqa: E402
from xpd.ast import FALSE, Or, disj, parse_node, parse_path  # noqa: E402
from xpd.axioms import BUNDLED_PROOF, check_script, fuzz_soundness  # noqa: E402
from xpd.canonical import build_model  # noqa: E402
from xpd.decision import equiv_node  # noqa: E402
from xpd.normal_form import (  # noqa: E402
    as_expression, enum_D, enum_N, enum_P, normalize_node, normalize_path,
)
from xpd.oracle import brute_sat_many, cross_check, random_node, random_path, random_tree, trees  # noqa: E402
from xpd.semantics import Evaluator, eval_node, eval_path, parse_tree, restrict  # noqa: E402

AB = ("a", "b")
FRAGMENTS = ("eq", "full")

N0 = "a & <eps=eps>"
A1 = "down[a & <eps=eps>]/eps"
B1 = "down[b & <eps=eps>]/eps"


def criterion_1():
    t = parse_tree("(a 0 (a 0 (b 1)) (b 1))", AB)
    items = [
        ("<down = down[a]/down[b]>", True),
        ("<eps = down/down>", False),
        ("!<down/down != down/down>", True),
        ("<down[a]/down[b] = eps>", False),
        ("<down[a & <down[b]>] = eps>", True),
    ]
    got = [eval_node(t, t.root, parse_node(s, AB)) for s, _ in items]
    want = [v for _, v in items]
    return got == want, f"root values {got}, expected {want}"


def criterion_2():
    details, ok = [], True
    for fragment in FRAGMENTS:
        r = fuzz_soundness(fragment, AB, trees=300, seed=0, max_nodes=8, max_depth=3)
        bad = sum(len(v) for v in r.counterexamples.values())
        missing = {"Der12", "Der13", "Der21"} - set(r.instances)
        ok &= r.ok and not missing
        details.append(f"{fragment}: {len(r.instances)} schemes, {sum(r.instances.values())} instances, "
                       f"{bad} counterexamples")
    return ok, "; ".join(details)


def criterion_3():
    ts = trees(AB)
    details, mismatches = [], 0
    for fragment in FRAGMENTS:
        rng = random.Random(2024)
        pairs = []
        for _ in range(200):
            phi = random_node(rng, AB, fragment, 1, rng.randint(2, 6))
            forms = normalize_node(phi, fragment, AB, 1)
            pairs.append((phi, disj([as_expression(f, AB) for f in forms]) if forms else FALSE))
        bad = 0
        for t in ts:
            ev = Evaluator(t)
            bad += sum(ev.nodes(phi) != ev.nodes(alt) for phi, alt in pairs)
        mismatches += bad
        details.append(f"{fragment}: 200 expressions x {len(ts)} trees, {bad} mismatches")
    return mismatches == 0, "; ".join(details)


def criterion_4():
    abc = ("a", "b", "c")
    v1 = equiv_node(parse_node("!a", abc), parse_node("(b & <eps=eps>) | (c & <eps=eps>)", abc), "eq", abc)
    phi = parse_node("<[a]/down[a] = down[b]> & !<eps = down[a]>", AB, "eq")
    psi = (f"{N0} & <{A1} = {B1}> & <{A1} = {A1}> & <{B1} = {B1}> & !<eps = {A1}>")
    psi1 = parse_node(f"{psi} & !<eps = {B1}>", AB, "eq")
    psi2 = parse_node(f"{psi} & <eps = {B1}>", AB, "eq")
    v2 = equiv_node(phi, Or(psi1, psi2), "eq", AB)
    e1, e2 = parse_node("<down[a]/down[b] = eps>", AB), parse_node("<down[a & <down[b]>] = eps>", AB)
    v3 = equiv_node(e1, e2, "eq", AB)
    verified = False
    if not v3.equivalent:
        ev = Evaluator(v3.tree)
        verified = ev.holds(v3.node, e1) != ev.holds(v3.node, e2)
    ok = v1.equivalent and v2.equivalent and not v3.equivalent and verified
    return ok, f"!a: {v1}; worked pair: {v2}; depth-2 pair: {v3} (witness verified: {verified})"


def criterion_5():
    details, failures = [], 0
    for fragment in FRAGMENTS:
        forms = list(enum_N(1, fragment, AB))
        exprs = [as_expression(f, AB) for f in forms]
        built = 0
        for f, e in zip(forms, exprs):
            t = build_model(f)
            if Evaluator(t).holds(t.root, e):
                built += 1
        found = brute_sat_many(exprs, AB)
        searched = sum(t is not None for t in found)
        failures += (len(forms) - built) + (len(forms) - searched)
        details.append(f"{fragment}: {len(forms)} forms, {built} models verified, {searched} found by search")
    return failures == 0, "; ".join(details)


def criterion_6():
    details, ok = [], True
    for fragment in FRAGMENTS:
        r = cross_check(fragment, alphabet=AB, seed=0)
        ok &= r.ok
        details.append(f"{fragment}: {r.checked} checks, {len(r.disagreements)} disagreements")
    return ok, "; ".join(details)


def criterion_7():
    full = check_script(BUNDLED_PROOF)
    short = check_script("\n".join(l for l in BUNDLED_PROOF.splitlines() if not l.startswith("3.")))
    bogus = check_script("alphabet: a,b\nfragment: eq\ngoal: a == b\n1. a == b by IsAx5.1\n")
    ok = full.accepted and not short.accepted and short.step == "goal" and not bogus.accepted and bogus.step == 1
    return ok, f"bundled: {full}; without step 3: {short}; non-instance: {bogus}"


def criterion_8():
    listing = {
        "eq": ["eps", "down[a & <eps=eps>]/eps", "down[b & <eps=eps>]/eps"],
        "full": ["eps", "down[a & <eps=eps> & !<eps != eps>]/eps", "down[b & <eps=eps> & !<eps != eps>]/eps"],
    }
    counts, exact = {}, True
    for fragment, texts in listing.items():
        paths = enum_P(1, fragment, AB)
        # each listed path must normalize to exactly one member of P_1, all distinct
        named = [normalize_path(parse_path(t, AB), fragment, AB, 1) for t in texts]
        exact &= all(len(n) == 1 and n[0][0] is None for n in named)
        exact &= {n[0][1] for n in named} == set(paths)
        ops = ["=", "!="] if fragment == "full" else ["="]
        pairs = {(op, frozenset((p, q))) for op in ops for p in paths for q in paths}
        atoms = enum_D(1, fragment, AB)
        exact &= {(d.op, frozenset((d.left, d.right))) for d in atoms} == pairs
        counts[fragment] = (len(paths), len(atoms))
    ok = exact and counts == {"eq": (3, 6), "full": (3, 12)}
    return ok, (f"|P_1| = {counts['eq'][0]}, |D_1| = {counts['eq'][1]} (eq) / {counts['full'][1]} (full), "
                f"members match the listing: {exact}")


def criterion_9():
    rng = random.Random(9)
    violations = 0
    for _ in range(500):
        t = random_tree(rng, AB, max_nodes=8, max_depth=3, max_classes=4)
        x = rng.choice(t.nodes)
        phi = random_node(rng, AB, "full", rng.randint(0, 3), rng.randint(1, 6))
        sub = restrict(t, x)
        if eval_node(t, x, phi) != eval_node(sub, x, phi):
            violations += 1
        alpha = random_path(rng, AB, "full", 2, 3)
        y, z = rng.choice(sub.nodes), rng.choice(sub.nodes)
        if eval_path(t, y, z, alpha) != eval_path(sub, y, z, alpha):
            violations += 1
    return violations == 0, f"500 triples (node and path forms), {violations} violations"


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 10)}


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k):
    start = time.perf_counter()
    ok, detail = CRITERIA[k]()
    detail = f"{detail} [{time.perf_counter() - start:.1f}s]"
    ACCEPTANCE[k] = (ok, detail)
    print(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for k, fn in CRITERIA.items():
        start = time.perf_counter()
        ok, detail = fn()
        failed += not ok
        print(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail} [{time.perf_counter() - start:.1f}s]",
              flush=True)
    sys.exit(1 if failed else 0)
