"""Modal formulas: AST, parser, printer, substitution and Sahlqvist classifiers.

Grammar (loosest binding first)::

    imp   := disj ( "->" imp )?          right associative
    disj  := conj ( "|" conj )*
    conj  := unary ( "&" unary )*
    unary := ("~" | "[]" | "<>") unary | atom
    atom  := IDENT | "F" | "T" | "(" imp ")"

``T`` and ``~`` are sugar: ``T`` is ``F -> F`` and ``~a`` is ``a -> F``.  The
sugar is remembered in a flag that takes no part in equality, so a parsed
``T`` equals a hand-built ``Implies(BOTTOM, BOTTOM)`` but prints as ``T`` and
counts as a positive constant.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping

from .errors import ParseError


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return to_text(self)

    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)

    def __rshift__(self, other: "Formula") -> "Formula":
        return Implies(self, other)


@dataclass(frozen=True, repr=False)
class Atom(Formula):
    name: str

    def __repr__(self):
        return f"Atom({self.name!r})"


@dataclass(frozen=True, repr=False)
class Bottom(Formula):
    def __repr__(self):
        return "Bottom"


@dataclass(frozen=True, repr=False)
class And(Formula):
    left: Formula
    right: Formula

    def __repr__(self):
        return f"And({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class Or(Formula):
    left: Formula
    right: Formula

    def __repr__(self):
        return f"Or({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class Implies(Formula):
    left: Formula
    right: Formula
    # "top" or "not" when the node came from sugar; ignored by == and hash
    sugar: str | None = field(default=None, compare=False)

    def __repr__(self):
        if self.sugar == "top":
            return "Top"
        return f"Implies({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class Box(Formula):
    body: Formula

    def __repr__(self):
        return f"Box({self.body!r})"


@dataclass(frozen=True, repr=False)
class Diamond(Formula):
    body: Formula

    def __repr__(self):
        return f"Diamond({self.body!r})"


BOTTOM = Bottom()
TOP = Implies(BOTTOM, BOTTOM, sugar="top")


def Not(phi: Formula) -> Implies:
    return Implies(phi, BOTTOM, sugar="not")


def is_top(phi: Formula) -> bool:
    """True for the parsed constant ``T`` (not for a hand-written ``F -> F``)."""
    return isinstance(phi, Implies) and phi.sugar == "top"


def big_and(parts, empty: Formula = TOP) -> Formula:
    parts = list(parts)
    if not parts:
        return empty
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def big_or(parts, empty: Formula = BOTTOM) -> Formula:
    parts = list(parts)
    if not parts:
        return empty
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


# ---------------------------------------------------------------- structure

def atoms(phi: Formula) -> frozenset[str]:
    out: set[str] = set()
    stack = [phi]
    while stack:
        f = stack.pop()
        if isinstance(f, Atom):
            out.add(f.name)
        elif isinstance(f, (And, Or, Implies)):
            stack.append(f.left)
            stack.append(f.right)
        elif isinstance(f, (Box, Diamond)):
            stack.append(f.body)
    return frozenset(out)


def depth(phi: Formula) -> int:
    """Nesting depth of connectives; atoms and the constants F, T have depth 0."""
    if isinstance(phi, (Atom, Bottom)) or is_top(phi):
        return 0
    if isinstance(phi, (And, Or, Implies)):
        return 1 + max(depth(phi.left), depth(phi.right))
    return 1 + depth(phi.body)


def size(phi: Formula) -> int:
    if isinstance(phi, (Atom, Bottom)) or is_top(phi):
        return 1
    if isinstance(phi, (And, Or, Implies)):
        return 1 + size(phi.left) + size(phi.right)
    return 1 + size(phi.body)


def subformulas(phi: Formula) -> Iterator[Formula]:
    yield phi
    if isinstance(phi, (And, Or, Implies)) and not is_top(phi):
        yield from subformulas(phi.left)
        yield from subformulas(phi.right)
    elif isinstance(phi, (Box, Diamond)):
        yield from subformulas(phi.body)


def substitute(phi: Formula, sigma: Mapping[str, Formula]) -> Formula:
    """Replace every atom ``p`` in ``dom(sigma)`` by ``sigma[p]`` simultaneously."""
    if isinstance(phi, Atom):
        return sigma.get(phi.name, phi)
    if isinstance(phi, Bottom):
        return phi
    if isinstance(phi, Implies):
        if phi.sugar == "top":
            return phi
        return Implies(substitute(phi.left, sigma), substitute(phi.right, sigma), sugar=phi.sugar)
    if isinstance(phi, And):
        return And(substitute(phi.left, sigma), substitute(phi.right, sigma))
    if isinstance(phi, Or):
        return Or(substitute(phi.left, sigma), substitute(phi.right, sigma))
    if isinstance(phi, Box):
        return Box(substitute(phi.body, sigma))
    if isinstance(phi, Diamond):
        return Diamond(substitute(phi.body, sigma))
    raise TypeError(f"not a formula: {phi!r}")


def fold(phi: Formula, atom: Callable, bottom, conj: Callable, disj: Callable,
         imp: Callable, box: Callable, dia: Callable):
    """Homomorphic evaluation of ``phi`` in any structure given by the callbacks."""
    def go(f):
        if isinstance(f, Atom):
            return atom(f.name)
        if isinstance(f, Bottom):
            return bottom
        if isinstance(f, And):
            return conj(go(f.left), go(f.right))
        if isinstance(f, Or):
            return disj(go(f.left), go(f.right))
        if isinstance(f, Implies):
            return imp(go(f.left), go(f.right))
        if isinstance(f, Box):
            return box(go(f.body))
        if isinstance(f, Diamond):
            return dia(go(f.body))
        raise TypeError(f"not a formula: {f!r}")
    return go(phi)


# ---------------------------------------------------------------- classifiers

def is_positive(phi: Formula) -> bool:
    if isinstance(phi, (Atom, Bottom)) or is_top(phi):
        return True
    if isinstance(phi, (And, Or)):
        return is_positive(phi.left) and is_positive(phi.right)
    if isinstance(phi, (Box, Diamond)):
        return is_positive(phi.body)
    return False


def is_boxed_atom(phi: Formula) -> tuple[int, str] | None:
    n = 0
    while isinstance(phi, Box):
        n += 1
        phi = phi.body
    if isinstance(phi, Atom):
        return n, phi.name
    return None


def is_sahlqvist_antecedent(phi: Formula) -> bool:
    if isinstance(phi, Bottom) or is_top(phi):
        return True
    if isinstance(phi, (And, Or)):
        return is_sahlqvist_antecedent(phi.left) and is_sahlqvist_antecedent(phi.right)
    return is_boxed_atom(phi) is not None


def is_sahlqvist(phi: Formula) -> tuple[Formula, Formula] | None:
    if not isinstance(phi, Implies) or is_top(phi):
        return None
    if is_sahlqvist_antecedent(phi.left) and is_positive(phi.right):
        return phi.left, phi.right
    return None


# ---------------------------------------------------------------- printing

_IMP, _OR, _AND, _PREFIX, _ATOM = 1, 2, 3, 4, 5

_ASCII = {"bot": "F", "top": "T", "not": "~", "box": "[]", "dia": "<>",
          "and": " & ", "or": " | ", "imp": " -> "}
_UNICODE = {"bot": "⊥", "top": "⊤", "not": "¬", "box": "□", "dia": "◇",
            "and": " ∧ ", "or": " ∨ ", "imp": " → "}


def _level(phi: Formula) -> int:
    if isinstance(phi, (Atom, Bottom)) or is_top(phi):
        return _ATOM
    if isinstance(phi, Implies):
        return _PREFIX if phi.sugar == "not" else _IMP
    if isinstance(phi, Or):
        return _OR
    if isinstance(phi, And):
        return _AND
    return _PREFIX


def to_text(phi: Formula, unicode: bool = False) -> str:
    sym = _UNICODE if unicode else _ASCII

    def wrap(f, min_level):
        s = go(f)
        return f"({s})" if _level(f) < min_level else s

    def go(f):
        if isinstance(f, Atom):
            return f.name
        if isinstance(f, Bottom):
            return sym["bot"]
        if isinstance(f, Implies):
            if f.sugar == "top":
                return sym["top"]
            if f.sugar == "not":
                return sym["not"] + wrap(f.left, _PREFIX)
            return wrap(f.left, _IMP + 1) + sym["imp"] + wrap(f.right, _IMP)
        if isinstance(f, Or):
            return wrap(f.left, _OR) + sym["or"] + wrap(f.right, _OR + 1)
        if isinstance(f, And):
            return wrap(f.left, _AND) + sym["and"] + wrap(f.right, _AND + 1)
        if isinstance(f, Box):
            return sym["box"] + wrap(f.body, _PREFIX)
        if isinstance(f, Diamond):
            return sym["dia"] + wrap(f.body, _PREFIX)
        raise TypeError(f"not a formula: {f!r}")

    return go(phi)


# ---------------------------------------------------------------- parsing

_SYMBOLS = [
    ("->", "imp"), ("[]", "box"), ("<>", "dia"), ("~", "not"), ("&", "and"),
    ("|", "or"), ("(", "lpar"), (")", "rpar"),
    ("→", "imp"), ("□", "box"), ("◇", "dia"), ("¬", "not"), ("∧", "and"),
    ("∨", "or"), ("⊥", "bot"), ("⊤", "top"),
]
_WORD = re.compile(r"[A-Za-z0-9_]+")
_IDENT = re.compile(r"[a-z][a-zA-Z0-9_]*\Z")


def _tokens(text: str) -> list[tuple[str, str, int]]:
    out = []
    i = 0
    byte = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            byte += len(ch.encode())
            i += 1
            continue
        for lit, kind in _SYMBOLS:
            if text.startswith(lit, i):
                out.append((kind, lit, byte))
                byte += len(lit.encode())
                i += len(lit)
                break
        else:
            m = _WORD.match(text, i)
            if not m:
                raise ParseError(f"lexical error: unexpected character {ch!r}", byte)
            word = m.group()
            if word == "F":
                out.append(("bot", word, byte))
            elif word == "T":
                out.append(("top", word, byte))
            elif _IDENT.match(word):
                out.append(("atom", word, byte))
            else:
                raise ParseError(f"lexical error: invalid identifier {word!r}", byte)
            byte += len(word.encode())
            i = m.end()
    out.append(("end", "", byte))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokens(text)
        self.pos = 0

    def peek(self):
        return self.toks[self.pos]

    def take(self):
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def parse(self) -> Formula:
        if self.peek()[0] == "end":
            raise ParseError("empty formula", self.peek()[2])
        f = self.imp()
        kind, lit, off = self.peek()
        if kind == "rpar":
            raise ParseError("unbalanced parenthesis: unexpected ')'", off)
        if kind != "end":
            raise ParseError(f"unexpected token {lit!r}", off)
        return f

    def imp(self) -> Formula:
        left = self.disj()
        if self.peek()[0] == "imp":
            self.take()
            return Implies(left, self.imp())
        return left

    def disj(self) -> Formula:
        left = self.conj()
        while self.peek()[0] == "or":
            self.take()
            left = Or(left, self.conj())
        return left

    def conj(self) -> Formula:
        left = self.unary()
        while self.peek()[0] == "and":
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        kind, lit, off = self.peek()
        if kind == "not":
            self.take()
            return Not(self.unary())
        if kind == "box":
            self.take()
            return Box(self.unary())
        if kind == "dia":
            self.take()
            return Diamond(self.unary())
        return self.atom()

    def atom(self) -> Formula:
        kind, lit, off = self.take()
        if kind == "atom":
            return Atom(lit)
        if kind == "bot":
            return BOTTOM
        if kind == "top":
            return TOP
        if kind == "lpar":
            inner = self.imp()
            k2, l2, o2 = self.peek()
            if k2 != "rpar":
                raise ParseError("unbalanced parenthesis: '(' never closed", off)
            self.take()
            return inner
        if kind == "rpar":
            raise ParseError("unbalanced parenthesis: unexpected ')'", off)
        if kind in ("and", "or", "imp"):
            raise ParseError(f"dangling binary operator {lit!r}", off)
        if kind == "end":
            prev = self.toks[self.pos - 2] if self.pos >= 2 else None
            if prev is not None and prev[0] in ("and", "or", "imp"):
                raise ParseError(f"dangling binary operator {prev[1]!r}", prev[2])
            raise ParseError("unexpected end of input", off)
        raise ParseError(f"unexpected token {lit!r}", off)


def parse(text: str) -> Formula:
    """Parse the surface syntax; raises ParseError with a byte offset."""
    return _Parser(text).parse()


# ---------------------------------------------------------------- generation

def formulas_up_to_depth(max_depth: int, atom_names=("p", "q"),
                         constants: bool = True, modal: bool = True) -> list[Formula]:
    """Every formula of depth <= max_depth (literal enumeration, grows fast)."""
    level = [Atom(a) for a in atom_names] + ([BOTTOM] if constants else [])
    seen = list(level)
    for _ in range(max_depth):
        new = []
        for a in seen:
            if modal:
                new.append(Box(a))
                new.append(Diamond(a))
            for b in seen:
                new.append(And(a, b))
                new.append(Or(a, b))
                new.append(Implies(a, b))
        seen = list(dict.fromkeys(seen + new))
    return seen
