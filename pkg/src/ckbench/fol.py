"""First-order formulas over ≤, R, =, unary predicates and the constant ff.

Terms are variable names (strings) or the constant ``FF``.  Concrete syntax::

    forall x. exists y. (R(x,y) & (y != ff -> x <= y))

Evaluation compiles a formula to closures; quantifiers guarded by an atom
such as ``x <= y`` or ``R(x,y)`` only range over the relevant successors.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

from .errors import ParseError, UnboundPredicate
from .frames import CKFrame, bits

FF = "ff"


class FO:
    __slots__ = ()

    def __str__(self):
        return fo_text(self)


@dataclass(frozen=True)
class Eq(FO):
    left: str
    right: str


@dataclass(frozen=True)
class Leq(FO):
    left: str
    right: str


@dataclass(frozen=True)
class Rel(FO):
    left: str
    right: str


@dataclass(frozen=True)
class Pred(FO):
    name: str
    term: str


@dataclass(frozen=True)
class TrueF(FO):
    pass


@dataclass(frozen=True)
class FalseF(FO):
    pass


@dataclass(frozen=True)
class Not(FO):
    body: FO


@dataclass(frozen=True)
class And(FO):
    left: FO
    right: FO


@dataclass(frozen=True)
class Or(FO):
    left: FO
    right: FO


@dataclass(frozen=True)
class Implies(FO):
    left: FO
    right: FO


@dataclass(frozen=True)
class Forall(FO):
    var: str
    body: FO


@dataclass(frozen=True)
class Exists(FO):
    var: str
    body: FO


TRUE = TrueF()
FALSE = FalseF()


def neq(a: str, b: str) -> FO:
    return Not(Eq(a, b))


def conj(parts: Iterable[FO]) -> FO:
    parts = list(parts)
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(parts: Iterable[FO]) -> FO:
    parts = list(parts)
    if not parts:
        return FALSE
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def forall(vars_: Iterable[str], body: FO) -> FO:
    for v in reversed(list(vars_)):
        body = Forall(v, body)
    return body


def exists(vars_: Iterable[str], body: FO) -> FO:
    for v in reversed(list(vars_)):
        body = Exists(v, body)
    return body


_ATOMS = (Eq, Leq, Rel)


def free_vars(f: FO) -> frozenset[str]:
    if isinstance(f, _ATOMS):
        return frozenset(t for t in (f.left, f.right) if t != FF)
    if isinstance(f, Pred):
        return frozenset() if f.term == FF else frozenset([f.term])
    if isinstance(f, (TrueF, FalseF)):
        return frozenset()
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, (And, Or, Implies)):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, (Forall, Exists)):
        return free_vars(f.body) - {f.var}
    raise TypeError(f"not a first-order formula: {f!r}")


def predicates(f: FO) -> frozenset[str]:
    if isinstance(f, Pred):
        return frozenset([f.name])
    if isinstance(f, Not):
        return predicates(f.body)
    if isinstance(f, (And, Or, Implies)):
        return predicates(f.left) | predicates(f.right)
    if isinstance(f, (Forall, Exists)):
        return predicates(f.body)
    return frozenset()


def bound_vars(f: FO) -> list[str]:
    if isinstance(f, Not):
        return bound_vars(f.body)
    if isinstance(f, (And, Or, Implies)):
        return bound_vars(f.left) + bound_vars(f.right)
    if isinstance(f, (Forall, Exists)):
        return [f.var] + bound_vars(f.body)
    return []


def rename_term(t: str, ren: Mapping[str, str]) -> str:
    return ren.get(t, t)


def subst_vars(f: FO, ren: Mapping[str, str]) -> FO:
    """Rename free occurrences of variables (no capture checks; callers use fresh names)."""
    if isinstance(f, _ATOMS):
        return type(f)(rename_term(f.left, ren), rename_term(f.right, ren))
    if isinstance(f, Pred):
        return Pred(f.name, rename_term(f.term, ren))
    if isinstance(f, (TrueF, FalseF)):
        return f
    if isinstance(f, Not):
        return Not(subst_vars(f.body, ren))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(subst_vars(f.left, ren), subst_vars(f.right, ren))
    if isinstance(f, (Forall, Exists)):
        inner = {k: v for k, v in ren.items() if k != f.var}
        return type(f)(f.var, subst_vars(f.body, inner))
    raise TypeError(f"not a first-order formula: {f!r}")


def replace_predicates(f: FO, sigma: Mapping[str, Callable[[str], FO]]) -> FO:
    """Replace each Pred(P, t) with P in sigma by sigma[P](t)."""
    if isinstance(f, Pred):
        return sigma[f.name](f.term) if f.name in sigma else f
    if isinstance(f, Not):
        return Not(replace_predicates(f.body, sigma))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(replace_predicates(f.left, sigma), replace_predicates(f.right, sigma))
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.var, replace_predicates(f.body, sigma))
    return f


# ---------------------------------------------------------------- printing

_IMP, _OR, _AND, _NOT, _ATOM, _QUANT = 1, 2, 3, 4, 5, 0


def _lvl(f: FO) -> int:
    if isinstance(f, (Forall, Exists)):
        return _QUANT
    if isinstance(f, Implies):
        return _IMP
    if isinstance(f, Or):
        return _OR
    if isinstance(f, And):
        return _AND
    if isinstance(f, Not) and not isinstance(f.body, Eq):
        return _NOT
    return _ATOM


def _open_tail(f: FO) -> bool:
    """Whether the printed form ends in a quantifier that is not parenthesized."""
    if isinstance(f, (Forall, Exists)):
        return True
    if isinstance(f, (And, Or, Implies)):
        r = f.right
        if _lvl(r) != _QUANT and _lvl(r) < {Implies: _IMP, Or: _OR + 1, And: _AND + 1}[type(f)]:
            return False
        return _open_tail(r)
    return False


def fo_text(f: FO, unicode: bool = False) -> str:
    if unicode:
        sym = {"all": "∀", "ex": "∃", "dot": ". ", "not": "¬", "and": " ∧ ", "or": " ∨ ",
               "imp": " → ", "le": " ≤ ", "ne": " ≠ ", "eq": " = ", "true": "⊤", "false": "⊥"}
    else:
        sym = {"all": "forall ", "ex": "exists ", "dot": ". ", "not": "~", "and": " & ", "or": " | ",
               "imp": " -> ", "le": " <= ", "ne": " != ", "eq": " = ", "true": "true", "false": "false"}

    def wrap(g, min_level, tail=False):
        s = go(g)
        lv = _lvl(g)
        if lv == _QUANT:
            return s if tail else f"({s})"
        if lv < min_level or (not tail and _open_tail(g)):
            return f"({s})"
        return s

    def go(g):
        if isinstance(g, Eq):
            return g.left + sym["eq"] + g.right
        if isinstance(g, Leq):
            return g.left + sym["le"] + g.right
        if isinstance(g, Rel):
            return f"R({g.left},{g.right})"
        if isinstance(g, Pred):
            return f"{g.name}({g.term})"
        if isinstance(g, TrueF):
            return sym["true"]
        if isinstance(g, FalseF):
            return sym["false"]
        if isinstance(g, Not):
            if isinstance(g.body, Eq):
                return g.body.left + sym["ne"] + g.body.right
            return sym["not"] + wrap(g.body, _NOT)
        if isinstance(g, Implies):
            return wrap(g.left, _IMP + 1) + sym["imp"] + wrap(g.right, _IMP, tail=True)
        if isinstance(g, Or):
            return wrap(g.left, _OR) + sym["or"] + wrap(g.right, _OR + 1, tail=True)
        if isinstance(g, And):
            return wrap(g.left, _AND) + sym["and"] + wrap(g.right, _AND + 1, tail=True)
        if isinstance(g, (Forall, Exists)):
            q = sym["all"] if isinstance(g, Forall) else sym["ex"]
            body = g.body
            if isinstance(body, (Forall, Exists)) or _lvl(body) == _ATOM or _lvl(body) == _NOT:
                return f"{q}{g.var}{sym['dot']}{go(body)}"
            return f"{q}{g.var}{sym['dot']}({go(body)})"
        raise TypeError(f"not a first-order formula: {g!r}")

    return go(f)


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<sym>->|<=|!=|[=~&|().,]|∀|∃|≤|≠|¬|∧|∨|→|⊤|⊥)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
""", re.VERBOSE)

_SYM_ALIASES = {"≤": "<=", "≠": "!=", "¬": "~", "∧": "&", "∨": "|", "→": "->",
                "∀": "forall", "∃": "exists", "⊤": "true", "⊥": "false"}


def _fo_tokens(text: str):
    out = []
    i = 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if not m:
            raise ParseError(f"lexical error: unexpected character {text[i]!r}", len(text[:i].encode()))
        off = len(text[:i].encode())
        if m.lastgroup == "sym":
            out.append(_SYM_ALIASES.get(m.group(), m.group()) if m.group() in _SYM_ALIASES else m.group())
            out[-1] = (out[-1], off)
        elif m.lastgroup == "word":
            out.append((m.group(), off))
        i = m.end()
    out.append(("<end>", len(text.encode())))
    return out


_KEYWORDS = {"forall", "exists", "true", "false"}


class _FOParser:
    def __init__(self, text):
        self.toks = _fo_tokens(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i][0]

    def off(self):
        return self.toks[self.i][1]

    def take(self, expect=None):
        tok, off = self.toks[self.i]
        if expect is not None and tok != expect:
            raise ParseError(f"expected {expect!r}, found {tok!r}", off)
        self.i += 1
        return tok

    def parse(self):
        f = self.formula()
        if self.peek() != "<end>":
            raise ParseError(f"unexpected token {self.peek()!r}", self.off())
        return f

    def formula(self):
        if self.peek() in ("forall", "exists"):
            return self.quant()
        return self.imp()

    def quant(self):
        q = self.take()
        vars_ = []
        while self.peek() not in (".", "<end>") and self._is_var(self.peek()):
            vars_.append(self.take())
            if self.peek() == ",":
                self.take()
        if not vars_:
            raise ParseError("quantifier without variable", self.off())
        if self.peek() == ".":
            self.take()
        body = self.formula()
        return forall(vars_, body) if q == "forall" else exists(vars_, body)

    @staticmethod
    def _is_var(tok):
        return re.fullmatch(r"[a-z][A-Za-z0-9_]*", tok) is not None and tok not in _KEYWORDS and tok != FF

    def imp(self):
        left = self.disj()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.formula())
        return left

    def disj(self):
        left = self.conj()
        while self.peek() == "|":
            self.take()
            left = Or(left, self.operand(self.conj))
        return left

    def conj(self):
        left = self.unary()
        while self.peek() == "&":
            self.take()
            left = And(left, self.operand(self.unary))
        return left

    def operand(self, nxt):
        if self.peek() in ("forall", "exists"):
            return self.quant()
        return nxt()

    def unary(self):
        if self.peek() == "~":
            self.take()
            return Not(self.operand(self.unary))
        if self.peek() in ("forall", "exists"):
            return self.quant()
        return self.primary()

    def term(self):
        tok, off = self.toks[self.i]
        if tok == FF or self._is_var(tok):
            self.i += 1
            return tok
        raise ParseError(f"expected a term, found {tok!r}", off)

    def primary(self):
        tok, off = self.toks[self.i]
        if tok == "(":
            self.take()
            f = self.formula()
            if self.peek() != ")":
                raise ParseError("unbalanced parenthesis", off)
            self.take()
            return f
        if tok == "true":
            self.take()
            return TRUE
        if tok == "false":
            self.take()
            return FALSE
        if re.fullmatch(r"[A-Z][A-Za-z0-9_]*", tok):
            self.take()
            self.take("(")
            a = self.term()
            if self.peek() == ",":
                self.take()
                b = self.term()
                self.take(")")
                if tok != "R":
                    raise ParseError(f"unknown binary relation {tok!r}", off)
                return Rel(a, b)
            self.take(")")
            return Pred(tok, a)
        a = self.term()
        op = self.peek()
        if op not in ("=", "!=", "<="):
            raise ParseError(f"expected '=', '!=' or '<=', found {op!r}", self.off())
        self.take()
        b = self.term()
        if op == "=":
            return Eq(a, b)
        if op == "!=":
            return neq(a, b)
        return Leq(a, b)


def parse_fo(text: str) -> FO:
    return _FOParser(text).parse()


# ---------------------------------------------------------------- evaluation

def _guard(body: FO, v: str, conjunctive: bool):
    """Split a quantifier body into (guard atom, remainder) when the guard bounds v."""
    if conjunctive:
        if isinstance(body, And):
            g, rest = body.left, body.right
        else:
            g, rest = body, None
    else:
        if not isinstance(body, Implies):
            return None
        g, rest = body.left, body.right
        if isinstance(g, And):
            g, extra = g.left, g.right
            rest = Implies(extra, rest)
    if isinstance(g, (Leq, Rel, Eq)) and (g.left == v) != (g.right == v):
        other = g.right if g.left == v else g.left
        return g, other, g.left == v, rest
    return None


def compile_fo(frame: CKFrame, f: FO, interp: Mapping[str, int], slots: dict[str, int]):
    n = frame.n
    up, down, succ, bot = frame.up, frame.down, frame.succ, frame.bot
    pred_of = [0] * n
    for y, m in enumerate(succ):
        for z in bits(m):
            pred_of[z] |= 1 << y

    def neighbours(g, other_fn, v_is_left):
        """Function env -> bitset of candidate values for the bound variable."""
        if isinstance(g, Eq):
            return lambda env: 1 << other_fn(env)
        if isinstance(g, Leq):
            table = down if v_is_left else up
        else:
            table = pred_of if v_is_left else succ
        return lambda env: table[other_fn(env)]

    def go(g, slots):
        if isinstance(g, (Eq, Leq, Rel)):
            a, b = term_in(g.left, slots), term_in(g.right, slots)
            if isinstance(g, Eq):
                return lambda env: a(env) == b(env)
            table = up if isinstance(g, Leq) else succ
            return lambda env: bool(table[a(env)] >> b(env) & 1)
        if isinstance(g, Pred):
            if g.name not in interp:
                raise UnboundPredicate(g.name)
            mask = interp[g.name]
            t = term_in(g.term, slots)
            return lambda env: bool(mask >> t(env) & 1)
        if isinstance(g, TrueF):
            return lambda env: True
        if isinstance(g, FalseF):
            return lambda env: False
        if isinstance(g, Not):
            b = go(g.body, slots)
            return lambda env: not b(env)
        if isinstance(g, And):
            l, r = go(g.left, slots), go(g.right, slots)
            return lambda env: l(env) and r(env)
        if isinstance(g, Or):
            l, r = go(g.left, slots), go(g.right, slots)
            return lambda env: l(env) or r(env)
        if isinstance(g, Implies):
            l, r = go(g.left, slots), go(g.right, slots)
            return lambda env: (not l(env)) or r(env)
        if isinstance(g, (Forall, Exists)):
            inner = dict(slots)
            k = max(slots.values(), default=-1) + 1   # by depth: shadowed names keep their slot
            inner[g.var] = k
            is_all = isinstance(g, Forall)
            guard = _guard(g.body, g.var, conjunctive=not is_all)
            if guard is not None:
                atom, other, v_left, rest = guard
                cand = neighbours(atom, term_in(other, slots), v_left)
                body = go(rest, inner) if rest is not None else (lambda env: True)
                if is_all:
                    def fa(env, cand=cand, body=body, k=k):
                        for y in bits(cand(env)):
                            env[k] = y
                            if not body(env):
                                return False
                        return True
                    return fa

                def ex(env, cand=cand, body=body, k=k):
                    for y in bits(cand(env)):
                        env[k] = y
                        if body(env):
                            return True
                    return False
                return ex
            body = go(g.body, inner)
            if is_all:
                def fa2(env, body=body, k=k):
                    for y in range(n):
                        env[k] = y
                        if not body(env):
                            return False
                    return True
                return fa2

            def ex2(env, body=body, k=k):
                for y in range(n):
                    env[k] = y
                    if body(env):
                        return True
                return False
            return ex2
        raise TypeError(f"not a first-order formula: {g!r}")

    def term_in(t, sl):
        if t == FF:
            return lambda env: bot
        if t not in sl:
            raise ValueError(f"free variable {t!r} has no value")
        k = sl[t]
        return lambda env: env[k]

    return go(f, slots)


def _interp_masks(frame: CKFrame, interp: Mapping | None) -> dict[str, int]:
    out = {}
    for k, v in (interp or {}).items():
        out[k] = v if isinstance(v, int) else frame.mask(v)
    return out


def fo_eval(frame: CKFrame, f: FO, interp: Mapping | None = None,
            assignment: Mapping[str, str] | None = None) -> bool:
    """Classical satisfaction on the finite frame; ff denotes the exploding world.

    ``interp`` maps predicate names to world-name collections or bitsets;
    ``assignment`` gives values (world names) to free variables."""
    assignment = assignment or {}
    missing = free_vars(f) - set(assignment)
    if missing:
        raise ValueError(f"free variables without values: {sorted(missing)}")
    slots = {v: i for i, v in enumerate(sorted(assignment))}
    fn = compile_fo(frame, f, _interp_masks(frame, interp), slots)
    env = [frame.index[assignment[v]] for v in sorted(assignment)] + [0] * (len(bound_vars(f)) + 1)
    return fn(env)


def fo_evaluator(frame: CKFrame, f: FO, interp: Mapping | None = None, var: str | None = None):
    """Compile once; returns ``g(world_index) -> bool`` (or ``g() -> bool`` for sentences)."""
    slots = {var: 0} if var is not None else {}
    fn = compile_fo(frame, f, _interp_masks(frame, interp), slots)
    size = len(slots) + len(bound_vars(f)) + 1
    if var is None:
        return lambda: fn([0] * size)

    def at(w: int) -> bool:
        env = [0] * size
        env[0] = w
        return fn(env)
    return at
