"""Payload terms, payload patterns and the integer constraint language.

Terms are plain immutable Python values:

* ``Atom("process")`` for atoms,
* ``int`` for integers (``bool`` is rejected),
* ``Ref`` for unique tokens,
* ``Pid`` for process identifiers,
* ``tuple`` of terms for tuples.

Patterns and constraint expressions are small frozen dataclasses so they can be
hashed, compared structurally and shared across threads.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Any, Mapping, Optional, Union


class TermError(ValueError):
    pass


@dataclass(frozen=True)
class Atom:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Ref:
    """Opaque unique token. Two refs are equal iff they carry the same serial."""

    serial: int

    def __str__(self) -> str:
        return f"#ref<{self.serial}>"


@dataclass(frozen=True)
class Pid:
    node: int
    serial: int
    creation: int = 0

    def __str__(self) -> str:
        return f"<{self.node}.{self.serial}.{self.creation}>"


Term = Union[Atom, int, Ref, Pid, tuple]

# serial 0 is reserved for the root context
_ref_serials = itertools.count(1)


def make_ref() -> Ref:
    return Ref(next(_ref_serials))


def is_term(value: Any) -> bool:
    if isinstance(value, bool):
        return False
    if isinstance(value, (Atom, int, Ref, Pid)):
        return True
    if isinstance(value, tuple):
        return all(is_term(v) for v in value)
    return False


def atom(name: str) -> Atom:
    return Atom(name)


# --------------------------------------------------------------------------
# Text syntax: atoms bare, ints decimal, {a, b}, #ref<N>, <A.B.C>

_TEXT_TOKEN = re.compile(
    r"\s*(?:(?P<ref>#ref<\d+>)|(?P<pid><\d+\.\d+\.\d+>)|(?P<int>-?\d+)"
    r"|(?P<atom>[a-z][A-Za-z0-9_@]*)|(?P<punct>[{},]))"
)


def format_term(t: Term) -> str:
    if isinstance(t, tuple):
        return "{" + ", ".join(format_term(x) for x in t) + "}"
    if isinstance(t, bool) or not is_term(t):
        raise TermError(f"not a term: {t!r}")
    return str(t)


def parse_term(text: str) -> Term:
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TEXT_TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise TermError(f"bad term text at offset {pos}: {text!r}")
        tokens.append((m.lastgroup, m.group(m.lastgroup)))
        pos = m.end()

    def parse_at(i: int) -> tuple[Term, int]:
        if i >= len(tokens):
            raise TermError("unexpected end of term text")
        kind, val = tokens[i]
        if kind == "ref":
            return Ref(int(val[5:-1])), i + 1
        if kind == "pid":
            a, b, c = val[1:-1].split(".")
            return Pid(int(a), int(b), int(c)), i + 1
        if kind == "int":
            return int(val), i + 1
        if kind == "atom":
            return Atom(val), i + 1
        if val != "{":
            raise TermError(f"unexpected {val!r}")
        items = []
        i += 1
        if i < len(tokens) and tokens[i][1] == "}":
            return (), i + 1
        while True:
            item, i = parse_at(i)
            items.append(item)
            if i >= len(tokens):
                raise TermError("unterminated tuple")
            if tokens[i][1] == "}":
                return tuple(items), i + 1
            if tokens[i][1] != ",":
                raise TermError(f"expected ',' or '}}', got {tokens[i][1]!r}")
            i += 1

    term, end = parse_at(0)
    if end != len(tokens):
        raise TermError(f"trailing input in term text: {text!r}")
    return term


# --------------------------------------------------------------------------
# Tagged JSON encoding used by trace dumps and verdict logs


def context_label(ref: Ref) -> str:
    return f"ctx-{ref.serial}"


def parse_context_label(label: str) -> Ref:
    if not label.startswith("ctx-"):
        raise TermError(f"bad context label: {label!r}")
    return Ref(int(label[4:]))


def term_to_json(t: Term) -> dict:
    if isinstance(t, bool):
        raise TermError(f"not a term: {t!r}")
    if isinstance(t, Atom):
        return {"atom": t.name}
    if isinstance(t, int):
        return {"int": t}
    if isinstance(t, Ref):
        return {"ref": context_label(t)}
    if isinstance(t, Pid):
        return {"pid": [t.node, t.serial, t.creation]}
    if isinstance(t, tuple):
        return {"tuple": [term_to_json(x) for x in t]}
    raise TermError(f"not a term: {t!r}")


def term_from_json(obj: Mapping) -> Term:
    if len(obj) != 1:
        raise TermError(f"bad tagged term: {obj!r}")
    (tag, val), = obj.items()
    if tag == "atom":
        return Atom(val)
    if tag == "int":
        return int(val)
    if tag == "ref":
        return parse_context_label(val)
    if tag == "pid":
        return Pid(*val)
    if tag == "tuple":
        return tuple(term_from_json(x) for x in val)
    raise TermError(f"unknown term tag {tag!r}")


# --------------------------------------------------------------------------
# Patterns


@dataclass(frozen=True)
class Const:
    value: Term


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Wildcard:
    pass


@dataclass(frozen=True)
class TuplePat:
    items: tuple


Pattern = Union[Const, Var, Wildcard, TuplePat]
Bindings = dict  # variable name -> Term


class BindingConflict(ValueError):
    def __init__(self, name: str):
        super().__init__(f"conflicting bindings for {name}")
        self.name = name


def merge_bindings(a: Mapping[str, Term], b: Mapping[str, Term]) -> Bindings:
    merged = dict(a)
    for name, value in b.items():
        if name in merged and merged[name] != value:
            raise BindingConflict(name)
        merged[name] = value
    return merged


def _terms_equal(x: Term, y: Term) -> bool:
    # 1 == True in Python; a stray bool in a payload must not match Const(1)
    if isinstance(x, bool) or isinstance(y, bool):
        return False
    return x == y


def match_pattern(p: Pattern, t: Term) -> Optional[Bindings]:
    """Return the bindings produced by matching ``p`` against ``t``, or None."""
    out: Bindings = {}
    if _match_into(p, t, out):
        return out
    return None


def _match_into(p: Pattern, t: Term, out: Bindings) -> bool:
    if isinstance(p, Wildcard):
        return True
    if isinstance(p, Var):
        if p.name in out:
            return out[p.name] == t
        out[p.name] = t
        return True
    if isinstance(p, Const):
        return _terms_equal(p.value, t)
    if isinstance(p, TuplePat):
        if not isinstance(t, tuple) or len(t) != len(p.items):
            return False
        return all(_match_into(sp, st, out) for sp, st in zip(p.items, t))
    raise TypeError(f"not a pattern: {p!r}")


def pattern_variables(p: Pattern) -> list[str]:
    """Variable names in left-to-right order, duplicates kept."""
    if isinstance(p, Var):
        return [p.name]
    if isinstance(p, TuplePat):
        return [v for item in p.items for v in pattern_variables(item)]
    return []


# --------------------------------------------------------------------------
# Constraint expressions


class ConstraintError(ValueError):
    pass


class UnboundVariable(ConstraintError):
    def __init__(self, name: str):
        super().__init__(f"unbound variable {name}")
        self.name = name


class NonNumericOperand(ConstraintError):
    def __init__(self, name: str):
        super().__init__(f"variable {name} is not bound to an integer")
        self.name = name


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*'
    left: Any
    right: Any


@dataclass(frozen=True)
class TrueC:
    pass


@dataclass(frozen=True)
class FalseC:
    pass


@dataclass(frozen=True)
class Not:
    body: Any


@dataclass(frozen=True)
class Cmp:
    op: str  # '==', '!=', '<', '<=', '>', '>='
    left: Any
    right: Any


ArithExpr = Union[IntLit, VarRef, BinOp]
ConstraintExpr = Union[TrueC, FalseC, Not, Cmp]

ARITH_OPS = ("+", "-", "*")
CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")

_ARITH = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
}
_CMP = {
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def eval_arith(e: ArithExpr, b: Mapping[str, Term]) -> int:
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, VarRef):
        if e.name not in b:
            raise UnboundVariable(e.name)
        v = b[e.name]
        if isinstance(v, bool) or not isinstance(v, int):
            raise NonNumericOperand(e.name)
        return v
    if isinstance(e, BinOp):
        return _ARITH[e.op](eval_arith(e.left, b), eval_arith(e.right, b))
    raise TypeError(f"not an arithmetic expression: {e!r}")


def eval_constraint(e: ConstraintExpr, b: Mapping[str, Term]) -> bool:
    if isinstance(e, TrueC):
        return True
    if isinstance(e, FalseC):
        return False
    if isinstance(e, Not):
        return not eval_constraint(e.body, b)
    if isinstance(e, Cmp):
        return _CMP[e.op](eval_arith(e.left, b), eval_arith(e.right, b))
    raise TypeError(f"not a constraint: {e!r}")


def constraint_holds(e: ConstraintExpr, b: Mapping[str, Term]) -> bool:
    """Like eval_constraint, but a non-integer operand makes the constraint false.

    Monitors and the semantics oracle both go through here, so a type mismatch
    in a payload is reported as a failed constraint rather than a crash.
    """
    try:
        return eval_constraint(e, b)
    except NonNumericOperand:
        return False


def constraint_variables(e: Any) -> list[str]:
    if isinstance(e, VarRef):
        return [e.name]
    if isinstance(e, (BinOp, Cmp)):
        return constraint_variables(e.left) + constraint_variables(e.right)
    if isinstance(e, Not):
        return constraint_variables(e.body)
    return []
