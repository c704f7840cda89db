"""Abstract syntax for downward XPath with data tests.

Two sorts of expressions exist.  Node expressions denote sets of nodes and
path expressions denote sets of node pairs.  Every constructor is an
immutable dataclass with a cached hash, so expressions can be used freely
as dictionary keys and memo-table entries.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

__all__ = [
    "Fragment", "ParseError", "UnknownLabelError", "FragmentError",
    "NodeExpr", "PathExpr", "Expr",
    "Atom", "Not", "And", "Or", "Diamond", "EqDiamond", "NeqDiamond", "TrueNode", "FalseNode",
    "Eps", "Down", "Test", "Concat", "Union", "BotPath",
    "TRUE", "FALSE", "EPS", "DOWN", "BOT",
    "parse_node", "parse_path", "print_node", "print_path", "to_text",
    "path_len", "dd_node", "dd_path", "dd", "desugar", "flatten", "concat_all",
    "conj", "disj", "union_all", "labels_of", "uses_neq", "check_fragment",
    "sort_key", "size", "subexpressions", "NodeHole", "PathHole", "NodeVar", "PathVar",
    "children", "rebuild",
]


class Fragment(str, enum.Enum):
    """Language fragment: equality tests only, or both kinds of data test."""

    EQ = "eq"
    FULL = "full"

    @classmethod
    def coerce(cls, value: "Fragment | str") -> "Fragment":
        if isinstance(value, Fragment):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown fragment {value!r}; expected 'eq' or 'full'") from None


class ParseError(ValueError):
    """Raised on malformed expression text.  ``pos`` is a character offset."""

    def __init__(self, message: str, pos: int | None = None):
        self.pos = pos
        if pos is not None:
            message = f"{message} (at position {pos})"
        super().__init__(message)


class UnknownLabelError(ParseError):
    def __init__(self, label: str, pos: int | None = None):
        self.label = label
        super().__init__(f"unknown label {label!r}", pos)


class FragmentError(ValueError):
    """An inequality test was used where only equality tests are allowed."""


# ---------------------------------------------------------------------------
# constructors

class _Expr:
    __slots__ = ()
    TAG = 0

    def _fields(self) -> tuple:
        raise NotImplementedError

    def __str__(self) -> str:
        return to_text(self)


def _hashed(cls):
    """Give a frozen dataclass a hash computed once at construction."""
    cls = dataclass(frozen=True, eq=True, repr=False)(cls)
    init = cls.__init__

    def __init__(self, *args, **kwargs):
        init(self, *args, **kwargs)
        object.__setattr__(self, "_h", hash((cls.TAG,) + self._fields()))

    cls.__init__ = __init__
    cls.__hash__ = lambda self: self._h
    return cls


class NodeExpr(_Expr):
    __slots__ = ()


class PathExpr(_Expr):
    __slots__ = ()


Expr = NodeExpr | PathExpr


@_hashed
class Atom(NodeExpr):
    name: str
    _h: int = field(init=False, compare=False, repr=False)
    TAG = 1

    def _fields(self):
        return (self.name,)

    def __repr__(self):
        return f"Atom({self.name!r})"


@_hashed
class Not(NodeExpr):
    arg: NodeExpr
    _h: int = field(init=False, compare=False, repr=False)
    TAG = 2

    def _fields(self):
        return (self.arg,)

    def __repr__(self):
        return f"Not({self.arg!r})"


@_hashed
class And(NodeExpr):
    left: NodeExpr
    right: NodeExpr
    _h: int = field(init=False, compare=False, repr=False)
    TAG = 3

    def _fields(self):
        return (self.left, self.right)

    def __repr__(self):
        return f"And({self.left!r}, {self.right!r})"


@_hashed
class Or(NodeExpr):
    left: NodeExpr
    right: NodeExpr
    _h: int = field(init=False, compare=False, repr=False)
    TAG = 4

    def _fields(self):
        return (self.left, self.right)

    def __repr__(self):
        return f"Or({self.left!r}, {self.right!r})"


@_hashed
class Diamond(NodeExpr):
    path: PathExpr
    _h: int = field(init=False, compare=False, repr=False)
    TAG = 5

    def _fields(self):
        return (self.path,)

    def __repr__(self):
        return f"Diamond({self.path!r})"


@_hashed
class EqDiamond(NodeExpr):
    left: PathExpr
    right: PathExpr
    _h: int = field(init=False, compare=False, repr=False)
    TAG = 6

    def _fields(self):
        return (self.left, self.right)

    def __repr__(self):
        return f"EqDiamond({self.left!r}, {self.right!r})"


@_hashed
class NeqDiamond(NodeExpr):
    left: PathExpr
    right: PathExpr
    _h: int = field(init=False, compare=False, repr=False)
    TAG = 7

    def _fields(self):
        return (self.left, self.right)

    def __repr__(self):
        return f"NeqDiamond({self.left!r}, {self.right!r})"


@_hashed
class TrueNode(NodeExpr):
    _h: int = field(init=False, compare=False, repr=False)
    TAG = 8

    def _fields(self):
        return ()

    def __repr__(self):
        return "TrueNode()"


@_hashed
class FalseNode(NodeExpr):
    _h: int = field(init=False, compare=False, repr=False)
    TAG = 9

    def _fields(self):
        return ()

    def __repr__(self):
        return "FalseNode()"


@_hashed
class Eps(PathExpr):
    _h: int = field(init=False, compare=False, repr=False)
    TAG = 10

    def _fields(self):
        return ()

    def __repr__(self):
        return "Eps()"


@_hashed
class Down(PathExpr):
    _h: int = field(init=False, compare=False, repr=False)
    TAG = 11

    def _fields(self):
        return ()

    def __repr__(self):
        return "Down()"


@_hashed
class Test(PathExpr):
    node: NodeExpr
    _h: int = field(init=False, compare=False, repr=False)
    TAG = 12

    def _fields(self):
        return (self.node,)

    def __repr__(self):
        return f"Test({self.node!r})"


@_hashed
class Concat(PathExpr):
    left: PathExpr
    right: PathExpr
    _h: int = field(init=False, compare=False, repr=False)
    TAG = 13

    def _fields(self):
        return (self.left, self.right)

    def __repr__(self):
        return f"Concat({self.left!r}, {self.right!r})"


@_hashed
class Union(PathExpr):
    left: PathExpr
    right: PathExpr
    _h: int = field(init=False, compare=False, repr=False)
    TAG = 14

    def _fields(self):
        return (self.left, self.right)

    def __repr__(self):
        return f"Union({self.left!r}, {self.right!r})"


@_hashed
class BotPath(PathExpr):
    _h: int = field(init=False, compare=False, repr=False)
    TAG = 15

    def _fields(self):
        return ()

    def __repr__(self):
        return "BotPath()"


TRUE = TrueNode()
FALSE = FalseNode()
EPS = Eps()
DOWN = Down()
BOT = BotPath()


# ---------------------------------------------------------------------------
# small builders

def conj(items: Iterable[NodeExpr]) -> NodeExpr:
    """Right-associated conjunction; the empty conjunction is ``true``."""
    items = list(items)
    if not items:
        return TRUE
    out = items[-1]
    for e in reversed(items[:-1]):
        out = And(e, out)
    return out


def disj(items: Iterable[NodeExpr]) -> NodeExpr:
    """Right-associated disjunction; the empty disjunction is ``false``."""
    items = list(items)
    if not items:
        return FALSE
    out = items[-1]
    for e in reversed(items[:-1]):
        out = Or(e, out)
    return out


def union_all(items: Iterable[PathExpr]) -> PathExpr:
    items = list(items)
    if not items:
        return BOT
    out = items[-1]
    for e in reversed(items[:-1]):
        out = Union(e, out)
    return out


def concat_all(steps: Sequence[PathExpr]) -> PathExpr:
    """Right-associated concatenation of ``steps``; empty gives ``eps``."""
    if not steps:
        return EPS
    out = steps[-1]
    for s in reversed(steps[:-1]):
        out = Concat(s, out)
    return out


def flatten(path: PathExpr) -> list[PathExpr]:
    """The list of non-concatenation factors of ``path`` in order."""
    out: list[PathExpr] = []
    stack = [path]
    while stack:
        p = stack.pop()
        if isinstance(p, Concat):
            stack.append(p.right)
            stack.append(p.left)
        else:
            out.append(p)
    return out


# ---------------------------------------------------------------------------
# measures

def path_len(a: PathExpr) -> int:
    if isinstance(a, (Eps, Test, BotPath)):
        return 0
    if isinstance(a, Down):
        return 1
    if isinstance(a, Concat):
        return path_len(a.left) + path_len(a.right)
    if isinstance(a, Union):
        return max(path_len(a.left), path_len(a.right))
    raise TypeError(f"not a path expression: {a!r}")


def dd_node(e: NodeExpr) -> int:
    """Downward depth of a node expression."""
    if isinstance(e, (Atom, TrueNode, FalseNode)):
        return 0
    if isinstance(e, Not):
        return dd_node(e.arg)
    if isinstance(e, (And, Or)):
        return max(dd_node(e.left), dd_node(e.right))
    if isinstance(e, Diamond):
        return dd_path(e.path)
    if isinstance(e, (EqDiamond, NeqDiamond)):
        return max(dd_path(e.left), dd_path(e.right))
    raise TypeError(f"not a node expression: {e!r}")


def dd_path(a: PathExpr) -> int:
    if isinstance(a, (Eps, BotPath)):
        return 0
    if isinstance(a, Down):
        return 1
    if isinstance(a, Test):
        return dd_node(a.node)
    if isinstance(a, Concat):
        return max(dd_path(a.left), dd_path(a.right), path_len(a.left) + dd_path(a.right))
    if isinstance(a, Union):
        return max(dd_path(a.left), dd_path(a.right))
    raise TypeError(f"not a path expression: {a!r}")


def dd(e: Expr) -> int:
    return dd_node(e) if isinstance(e, NodeExpr) else dd_path(e)


def size(e: Expr) -> int:
    return 1 + sum(size(c) for c in e._fields() if isinstance(c, _Expr))


def subexpressions(e: Expr) -> Iterator[Expr]:
    """All subexpressions of ``e`` in preorder, ``e`` included."""
    yield e
    for c in e._fields():
        if isinstance(c, _Expr):
            yield from subexpressions(c)


def children(e: Expr) -> tuple:
    """The constructor arguments of ``e`` (subexpressions and, for atoms, the name)."""
    return e._fields()


def rebuild(e: Expr, args: Sequence) -> Expr:
    """A node of the same constructor as ``e`` with new arguments."""
    return type(e)(*args)


def labels_of(e: Expr) -> set[str]:
    return {s.name for s in subexpressions(e) if isinstance(s, Atom)}


def uses_neq(e: Expr) -> bool:
    return any(isinstance(s, NeqDiamond) for s in subexpressions(e))


def check_fragment(e: Expr, fragment: Fragment | str) -> None:
    if Fragment.coerce(fragment) is Fragment.EQ and uses_neq(e):
        raise FragmentError("inequality tests are not allowed in the 'eq' fragment")


def desugar(e: Expr) -> Expr:
    """Expand ``true``, ``false`` and ``bot`` into their definitions."""
    if isinstance(e, TrueNode):
        return Diamond(EPS)
    if isinstance(e, FalseNode):
        return Not(Diamond(EPS))
    if isinstance(e, BotPath):
        return Test(Not(Diamond(EPS)))
    if isinstance(e, (Atom, Eps, Down)):
        return e
    return type(e)(*(desugar(c) for c in e._fields()))


def sort_key(e: Expr) -> tuple:
    """Total syntactic order: constructor tag first, then children, labels by name."""
    return (e.TAG,) + tuple(c if isinstance(c, str) else sort_key(c) for c in e._fields())


# ---------------------------------------------------------------------------
# parsing

_KEYWORDS = {"true", "false", "eps", "down", "bot"}
_TOKEN = re.compile(r"\s*(?:(?P<word>[a-z][a-z0-9_]*)|(?P<op>!=|[!&|<>=\[\]/+()_]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos:].lstrip()[:1]!r}",
                             pos + len(text[pos:]) - len(text[pos:].lstrip()))
        start = m.start("word") if m.group("word") else m.start("op")
        if m.group("word"):
            w = m.group("word")
            tokens.append(("kw" if w in _KEYWORDS else "label", w, start))
        else:
            tokens.append(("op", m.group("op"), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, alphabet, fragment, allow_hole: bool = False):
        self.toks = _tokenize(text)
        self.i = 0
        self.alphabet = None if alphabet is None else set(alphabet)
        self.fragment = Fragment.coerce(fragment)
        self.allow_hole = allow_hole
        self.holes = 0

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.i]

    def take(self) -> tuple[str, str, int]:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, op: str) -> None:
        kind, val, pos = self.take()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r} but found {val or 'end of input'!r}", pos)

    def at(self, op: str) -> bool:
        kind, val, _ = self.peek()
        return kind == "op" and val == op

    def finish(self) -> None:
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected trailing token {val!r}", pos)

    # node := or
    def node(self) -> NodeExpr:
        left = self.conj()
        while self.at("|"):
            self.take()
            left = Or(left, self.conj())
        return left

    def conj(self) -> NodeExpr:
        left = self.unary()
        while self.at("&"):
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self) -> NodeExpr:
        kind, val, pos = self.peek()
        if kind == "op" and val == "!":
            self.take()
            return Not(self.unary())
        if kind == "op" and val == "(":
            self.take()
            e = self.node()
            self.expect(")")
            return e
        if kind == "op" and val == "<":
            self.take()
            left = self.path()
            kind, val, pos = self.take()
            if kind == "op" and val == ">":
                return Diamond(left)
            if kind == "op" and val in ("=", "!="):
                if val == "!=" and self.fragment is Fragment.EQ:
                    raise FragmentError(f"inequality test at position {pos} not allowed in the 'eq' fragment")
                right = self.path()
                self.expect(">")
                return EqDiamond(left, right) if val == "=" else NeqDiamond(left, right)
            raise ParseError(f"expected '>', '=' or '!=' but found {val or 'end of input'!r}", pos)
        if kind == "kw" and val == "true":
            self.take()
            return TRUE
        if kind == "kw" and val == "false":
            self.take()
            return FALSE
        if kind == "label":
            self.take()
            if self.alphabet is not None and val not in self.alphabet:
                raise UnknownLabelError(val, pos)
            return Atom(val)
        if kind == "op" and val == "_" and self.allow_hole:
            self.take()
            self.holes += 1
            return _NODE_HOLE
        raise ParseError(f"expected a node expression but found {val or 'end of input'!r}", pos)

    # path := union
    def path(self) -> PathExpr:
        left = self.concat()
        while self.at("+"):
            self.take()
            left = Union(left, self.concat())
        return left

    def concat(self) -> PathExpr:
        steps = [self.path_atom()]
        while True:
            if self.at("/"):
                self.take()
            elif not self.at("["):
                break
            # "down[a]" is read as "down/[a]"
            steps.append(self.path_atom())
        return concat_all(steps)

    def path_atom(self) -> PathExpr:
        kind, val, pos = self.take()
        if kind == "kw" and val == "eps":
            return EPS
        if kind == "kw" and val == "down":
            return DOWN
        if kind == "kw" and val == "bot":
            return BOT
        if kind == "op" and val == "[":
            e = self.node()
            self.expect("]")
            return Test(e)
        if kind == "op" and val == "(":
            e = self.path()
            self.expect(")")
            return e
        if kind == "op" and val == "_" and self.allow_hole:
            self.holes += 1
            return _PATH_HOLE
        raise ParseError(f"expected a path expression but found {val or 'end of input'!r}", pos)


def parse_node(text: str, alphabet: Iterable[str] | None = None,
               fragment: Fragment | str = Fragment.FULL) -> NodeExpr:
    """Parse a node expression.

    Labels outside ``alphabet`` raise :class:`UnknownLabelError`; with the
    ``eq`` fragment any ``!=`` test raises :class:`FragmentError`.
    """
    p = _Parser(text, alphabet, fragment)
    e = p.node()
    p.finish()
    return e


def parse_path(text: str, alphabet: Iterable[str] | None = None,
               fragment: Fragment | str = Fragment.FULL) -> PathExpr:
    p = _Parser(text, alphabet, fragment)
    e = p.path()
    p.finish()
    return e


def parse_expr(text: str, alphabet=None, fragment=Fragment.FULL, allow_hole=False) -> tuple[Expr, int]:
    """Parse either sort, trying node first.  Returns the expression and hole count."""
    errors = []
    for kind in ("node", "path"):
        p = _Parser(text, alphabet, fragment, allow_hole)
        try:
            e = p.node() if kind == "node" else p.path()
            p.finish()
            return e, p.holes
        except FragmentError:
            raise
        except UnknownLabelError:
            raise
        except ParseError as exc:
            errors.append(exc)
    # report the error that got furthest
    raise max(errors, key=lambda x: x.pos or 0)


# Holes are used by the proof checker for congruence contexts.
@_hashed
class NodeHole(NodeExpr):
    _h: int = field(init=False, compare=False, repr=False)
    TAG = 90

    def _fields(self):
        return ()

    def __repr__(self):
        return "NodeHole()"


@_hashed
class PathHole(PathExpr):
    _h: int = field(init=False, compare=False, repr=False)
    TAG = 91

    def _fields(self):
        return ()

    def __repr__(self):
        return "PathHole()"


_NODE_HOLE = NodeHole()
_PATH_HOLE = PathHole()


# Metavariables appear only in axiom templates.
@_hashed
class NodeVar(NodeExpr):
    name: str
    _h: int = field(init=False, compare=False, repr=False)
    TAG = 92

    def _fields(self):
        return (self.name,)

    def __repr__(self):
        return f"NodeVar({self.name!r})"


@_hashed
class PathVar(PathExpr):
    name: str
    _h: int = field(init=False, compare=False, repr=False)
    TAG = 93

    def _fields(self):
        return (self.name,)

    def __repr__(self):
        return f"PathVar({self.name!r})"


# ---------------------------------------------------------------------------
# printing

# precedence levels: or=1, and=2, unary=3 ; union=1, concat=2, atom=3

def print_node(e: NodeExpr) -> str:
    return _pn(e, 0)


def print_path(a: PathExpr) -> str:
    return _pp(a, 0)


def to_text(e: Expr) -> str:
    return print_node(e) if isinstance(e, NodeExpr) else print_path(e)


def _paren(s: str, needed: bool) -> str:
    return f"({s})" if needed else s


def _pn(e: NodeExpr, ctx: int) -> str:
    if isinstance(e, Atom):
        return e.name
    if isinstance(e, TrueNode):
        return "true"
    if isinstance(e, FalseNode):
        return "false"
    if isinstance(e, NodeHole):
        return "_"
    if isinstance(e, NodeVar):
        return e.name
    if isinstance(e, Not):
        return "!" + _pn(e.arg, 3)
    if isinstance(e, Or):
        # left-associative: a right operand at the same level needs parentheses
        return _paren(f"{_pn(e.left, 1)} | {_pn(e.right, 2)}", ctx > 1)
    if isinstance(e, And):
        return _paren(f"{_pn(e.left, 2)} & {_pn(e.right, 3)}", ctx > 2)
    if isinstance(e, Diamond):
        return f"<{_pp(e.path, 0)}>"
    if isinstance(e, EqDiamond):
        return f"<{_pp(e.left, 0)} = {_pp(e.right, 0)}>"
    if isinstance(e, NeqDiamond):
        return f"<{_pp(e.left, 0)} != {_pp(e.right, 0)}>"
    raise TypeError(f"not a node expression: {e!r}")


def _pp(a: PathExpr, ctx: int) -> str:
    if isinstance(a, Eps):
        return "eps"
    if isinstance(a, Down):
        return "down"
    if isinstance(a, BotPath):
        return "bot"
    if isinstance(a, PathHole):
        return "_"
    if isinstance(a, PathVar):
        return a.name
    if isinstance(a, Test):
        return f"[{_pn(a.node, 0)}]"
    if isinstance(a, Union):
        return _paren(f"{_pp(a.left, 1)} + {_pp(a.right, 2)}", ctx > 1)
    if isinstance(a, Concat):
        # a slash chain reads back right-nested, so only a nested left
        # concatenation needs parentheses
        left = _pp(a.left, 3)
        right = _pp(a.right, 2)
        return _paren(f"{left}/{right}", ctx > 2)
    raise TypeError(f"not a path expression: {a!r}")
