"""Reasoning about downward XPath with data equality and inequality tests.

The usual entry points::

    from xpd import parse_node, sat, equiv_node, parse_tree, eval_node

    phi = parse_node("<down[a]/down[b] = eps>", ["a", "b"], "eq")
    sat(phi, "eq", ["a", "b"]).model
"""

from .ast import (
    Fragment, FragmentError, NodeExpr, ParseError, PathExpr, dd, parse_node, parse_path, to_text,
)
from .axioms import BUNDLED_PROOF, check_script, fuzz_soundness
from .canonical import NotConsistent, build_model, is_consistent
from .decision import equiv_node, equiv_path, sat, valid
from .normal_form import (
    BudgetExceeded, Limits, NormalForm, enum_D, enum_N, enum_P, normalize_node, normalize_path,
)
from .oracle import Bounds, brute_equiv, brute_sat, cross_check
from .semantics import DataTree, Evaluator, eval_node, eval_path, parse_tree, print_tree, restrict

__all__ = [
    "Fragment", "FragmentError", "NodeExpr", "ParseError", "PathExpr", "dd", "parse_node", "parse_path",
    "to_text", "BUNDLED_PROOF", "check_script", "fuzz_soundness", "NotConsistent", "build_model",
    "is_consistent", "equiv_node", "equiv_path", "sat", "valid", "BudgetExceeded", "Limits", "NormalForm",
    "enum_D", "enum_N", "enum_P", "normalize_node", "normalize_path", "Bounds", "brute_equiv", "brute_sat",
    "cross_check", "DataTree", "Evaluator", "eval_node", "eval_path", "parse_tree", "print_tree", "restrict",
]
