"""WALTZ formulas: AST, parser, well-formedness check and printer.

Surface syntax::

    formula    ::= unit [ ";" formula ]
    unit       ::= ("omega" | "theta") "(" formula ")" | "(" formula ")" | step
    step       ::= "send" ident "->" ident payload ":" constraint
    payload    ::= "{" item { "," item } "}"
    item       ::= payload | int | atom | Var | "_"
    constraint ::= "true" | "false" | "!" constraint | "(" constraint ")"
                 | arith cmp arith
    cmp        ::= "==" | "=" | "!=" | "<" | "<=" | ">" | ">="
    arith      ::= term { ("+" | "-") term }
    term       ::= factor { "*" factor }
    factor     ::= int | "-" int | Var | "(" arith ")"

``;`` is right-associative, ``#`` starts a line comment, lowercase identifiers
are atoms and uppercase identifiers are variables.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Union

from .terms import (
    Atom, BinOp, Cmp, Const, FalseC, IntLit, Not, TrueC, TuplePat, Var, VarRef, Wildcard,
    constraint_variables, pattern_variables,
)


@dataclass(frozen=True)
class Signature:
    from_: str
    to: str
    pattern: TuplePat


@dataclass(frozen=True)
class Step:
    signature: Signature
    constraint: Any


@dataclass(frozen=True)
class Chain:
    left: Any
    right: Any


@dataclass(frozen=True)
class Omega:
    body: Any


@dataclass(frozen=True)
class Theta:
    body: Any


Formula = Union[Omega, Theta, Chain, Step]


# --------------------------------------------------------------------------
# Errors


class ParseError(ValueError):
    def __init__(self, line: int, column: int, expected: frozenset, found: str):
        exp = ", ".join(sorted(expected))
        super().__init__(f"{line}:{column}: expected {exp}; found {found}")
        self.line = line
        self.column = column
        self.expected = expected
        self.found = found


class WellFormednessError(ValueError):
    pass


class MissingModalWrapper(WellFormednessError):
    def __init__(self):
        super().__init__("formula must be wrapped in omega(...) or theta(...)")


class NestedModal(WellFormednessError):
    def __init__(self):
        super().__init__("modal operators are only supported at top level")


class UnboundConstraintVariable(WellFormednessError):
    def __init__(self, name: str, step: int):
        super().__init__(f"variable {name} in step {step} is not bound by this or an earlier signature")
        self.name = name
        self.step = step


class DuplicatePatternVariable(WellFormednessError):
    def __init__(self, name: str):
        super().__init__(f"variable {name} appears twice in one signature")
        self.name = name


# --------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<comment>\#[^\n]*)"
    r"|(?P<op>->|==|!=|<=|>=|[<>=!+\-*{}(),:;])"
    r"|(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
)

_MODALS = {"omega": Omega, "theta": Theta}
_CMP_TOKENS = {"==": "==", "=": "==", "!=": "!=", "<": "<", "<=": "<=", ">": ">", ">=": ">="}


@dataclass(frozen=True)
class _Tok:
    kind: str  # 'op', 'int', 'ident', 'eof'
    text: str
    line: int
    col: int


def tokenize(src: str) -> list[_Tok]:
    toks = []
    line, line_start, pos = 1, 0, 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise ParseError(line, pos - line_start + 1, frozenset({"token"}), repr(src[pos]))
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("op", "int", "ident"):
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


# --------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, *expected: str) -> ParseError:
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        return ParseError(t.line, t.col, frozenset(expected), found)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "ident") and self.tok.text == text

    def expect(self, text: str) -> _Tok:
        if not self.at(text):
            raise self.error(repr(text))
        t = self.tok
        self.i += 1
        return t

    def parse(self) -> Formula:
        f = self.formula()
        if self.tok.kind != "eof":
            raise self.error("';'", "end of input")
        return f

    def formula(self) -> Formula:
        left = self.unit()
        if self.at(";"):
            self.i += 1
            return Chain(left, self.formula())
        return left

    def unit(self) -> Formula:
        t = self.tok
        if t.kind == "ident" and t.text in _MODALS and self.toks[self.i + 1].text == "(":
            self.i += 2
            body = self.formula()
            self.expect(")")
            return _MODALS[t.text](body)
        if self.at("("):
            self.i += 1
            f = self.formula()
            self.expect(")")
            return f
        if self.at("send"):
            return self.step()
        raise self.error("'omega'", "'theta'", "'send'", "'('")

    def module(self) -> str:
        t = self.tok
        if t.kind != "ident" or not t.text[0].islower():
            raise self.error("module identifier")
        self.i += 1
        return t.text

    def step(self) -> Step:
        self.expect("send")
        src = self.module()
        self.expect("->")
        dst = self.module()
        pattern = self.payload()
        self.expect(":")
        return Step(Signature(src, dst, pattern), self.constraint())

    def payload(self) -> TuplePat:
        self.expect("{")
        items = [self.item()]
        while self.at(","):
            self.i += 1
            items.append(self.item())
        self.expect("}")
        return TuplePat(tuple(items))

    def item(self):
        t = self.tok
        if self.at("{"):
            return self.payload()
        if t.kind == "int":
            self.i += 1
            return Const(int(t.text))
        if self.at("-") and self.toks[self.i + 1].kind == "int":
            self.i += 2
            return Const(-int(self.toks[self.i - 1].text))
        if t.kind == "ident":
            self.i += 1
            if t.text == "_":
                return Wildcard()
            if t.text[0].isupper() or t.text[0] == "_":
                return Var(t.text)
            return Const(Atom(t.text))
        raise self.error("'{'", "integer", "atom", "variable", "'_'")

    def constraint(self):
        if self.at("!"):
            self.i += 1
            return Not(self.constraint())
        if self.at("true"):
            self.i += 1
            return TrueC()
        if self.at("false"):
            self.i += 1
            return FalseC()
        if self.at("("):
            start = self.i
            try:
                return self.comparison()
            except ParseError as first:
                self.i = start
                try:
                    self.i += 1
                    c = self.constraint()
                    self.expect(")")
                    return c
                except ParseError as second:
                    raise max(first, second, key=lambda e: (e.line, e.column))
        return self.comparison()

    def comparison(self) -> Cmp:
        left = self.arith()
        op = _CMP_TOKENS.get(self.tok.text) if self.tok.kind == "op" else None
        if op is None:
            raise self.error(*(repr(k) for k in _CMP_TOKENS), "'+'", "'-'", "'*'")
        self.i += 1
        return Cmp(op, left, self.arith())

    def arith(self):
        e = self.term()
        while self.at("+") or self.at("-"):
            op = self.tok.text
            self.i += 1
            e = BinOp(op, e, self.term())
        return e

    def term(self):
        e = self.factor()
        while self.at("*"):
            self.i += 1
            e = BinOp("*", e, self.factor())
        return e

    def factor(self):
        t = self.tok
        if t.kind == "int":
            self.i += 1
            return IntLit(int(t.text))
        if self.at("-") and self.toks[self.i + 1].kind == "int":
            self.i += 2
            return IntLit(-int(self.toks[self.i - 1].text))
        if t.kind == "ident" and (t.text[0].isupper() or (t.text[0] == "_" and len(t.text) > 1)):
            self.i += 1
            return VarRef(t.text)
        if self.at("("):
            self.i += 1
            e = self.arith()
            self.expect(")")
            return e
        raise self.error("integer", "variable", "'('")


def parse(src: str) -> Formula:
    return _Parser(src).parse()


# --------------------------------------------------------------------------
# Well-formedness


def flatten_steps(f: Formula) -> list[Step]:
    """Steps of a chain in observation order; raises NestedModal on any modal inside."""
    if isinstance(f, Step):
        return [f]
    if isinstance(f, Chain):
        return flatten_steps(f.left) + flatten_steps(f.right)
    if isinstance(f, (Omega, Theta)):
        raise NestedModal()
    raise TypeError(f"not a formula: {f!r}")


def check_well_formed(f: Formula) -> None:
    """Raise a WellFormednessError subclass unless ``f`` is a valid top-level formula."""
    if not isinstance(f, (Omega, Theta)):
        raise MissingModalWrapper()
    bound: set[str] = set()
    for index, step in enumerate(flatten_steps(f.body)):
        names = pattern_variables(step.signature.pattern)
        seen: set[str] = set()
        for name in names:
            if name in seen:
                raise DuplicatePatternVariable(name)
            seen.add(name)
        bound |= seen
        for name in constraint_variables(step.constraint):
            if name not in bound:
                raise UnboundConstraintVariable(name, index)


def is_well_formed(f: Formula) -> bool:
    try:
        check_well_formed(f)
    except WellFormednessError:
        return False
    return True


def load_spec(path: Union[str, Path]) -> Formula:
    """Read a ``.waltz`` file, parse it and check it."""
    f = parse(Path(path).read_text(encoding="utf-8"))
    check_well_formed(f)
    return f


# --------------------------------------------------------------------------
# Printer

_PREC = {"+": 1, "-": 1, "*": 2}
_IDENT_RE = re.compile(r"[a-z][A-Za-z0-9_]*\Z")


def _print_item(p) -> str:
    if isinstance(p, TuplePat):
        return "{" + ", ".join(_print_item(x) for x in p.items) + "}"
    if isinstance(p, Wildcard):
        return "_"
    if isinstance(p, Var):
        return p.name
    if isinstance(p, Const):
        v = p.value
        if isinstance(v, Atom) and _IDENT_RE.match(v.name):
            return v.name
        if isinstance(v, int) and not isinstance(v, bool):
            return str(v)
    raise ValueError(f"pattern has no surface syntax: {p!r}")


def _print_arith(e, parent_prec: int = 0, right: bool = False) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, VarRef):
        return e.name
    prec = _PREC[e.op]
    text = f"{_print_arith(e.left, prec)} {e.op} {_print_arith(e.right, prec, True)}"
    if prec < parent_prec or (right and prec == parent_prec):
        return f"({text})"
    return text


def _print_constraint(c) -> str:
    if isinstance(c, TrueC):
        return "true"
    if isinstance(c, FalseC):
        return "false"
    if isinstance(c, Not):
        inner = _print_constraint(c.body)
        return "!" + (inner if isinstance(c.body, (TrueC, FalseC, Not)) else f"({inner})")
    if isinstance(c, Cmp):
        return f"{_print_arith(c.left)} {c.op} {_print_arith(c.right)}"
    raise TypeError(f"not a constraint: {c!r}")


def print_formula(f: Formula) -> str:
    if isinstance(f, Omega):
        return f"omega( {print_formula(f.body)} )"
    if isinstance(f, Theta):
        return f"theta( {print_formula(f.body)} )"
    if isinstance(f, Chain):
        left = print_formula(f.left)
        if isinstance(f.left, Chain):
            left = f"( {left} )"
        return f"{left} ; {print_formula(f.right)}"
    if isinstance(f, Step):
        s = f.signature
        return (f"send {s.from_} -> {s.to} {_print_item(s.pattern)} : "
                f"{_print_constraint(f.constraint)}")
    raise TypeError(f"not a formula: {f!r}")
