import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from xpd.ast import (
    And, Atom, BotPath, Concat, Diamond, Down, Eps, EqDiamond, FalseNode, NeqDiamond, Not, Or, Test,
    TrueNode, Union,
)
from xpd.semantics import DataTree

settings.register_profile("ci", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")

ALPHABET = ("a", "b")

# acceptance results, filled in by tests/test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")


def node_exprs(alphabet=ALPHABET, full=True, max_leaves=6):
    """Random node expressions, nested at most three levels."""
    atoms = st.sampled_from([Atom(a) for a in alphabet] + [TrueNode(), FalseNode()])

    def node(depth):
        if depth == 0:
            return atoms
        sub = node(depth - 1)
        p = path(depth - 1)
        options = [
            atoms,
            sub.map(Not),
            st.builds(And, sub, sub),
            st.builds(Or, sub, sub),
            st.builds(Diamond, p),
            st.builds(EqDiamond, p, p),
        ]
        if full:
            options.append(st.builds(NeqDiamond, p, p))
        return st.one_of(options)

    def path(depth):
        base = st.sampled_from([Eps(), Down()])
        if depth == 0:
            return base
        sub = path(depth - 1)
        return st.one_of(
            base,
            st.builds(Test, node(depth - 1)),
            st.builds(Concat, sub, sub),
            st.builds(Union, sub, sub),
            st.just(BotPath()) if full else base,
        )

    return node(3)


@st.composite
def data_trees(draw, alphabet=ALPHABET, max_nodes=8, max_depth=3, max_classes=4):
    """Random data trees with node ids 0..n-1 in preorder."""
    n = draw(st.integers(1, max_nodes))
    parents = [None]
    depth = [0]
    for i in range(1, n):
        cands = [j for j in range(i) if depth[j] < max_depth]
        p = draw(st.sampled_from(cands))
        parents.append(p)
        depth.append(depth[p] + 1)
    shape = {}
    for i in range(n):
        shape[i] = (draw(st.sampled_from(alphabet)), draw(st.integers(0, max_classes - 1)))

    def nested(i):
        lab, d = shape[i]
        return (lab, d, [nested(j) for j in range(n) if parents[j] == i])

    return DataTree.from_nested(nested(0))


@pytest.fixture(scope="session")
def alphabet():
    return ALPHABET
