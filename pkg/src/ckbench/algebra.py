"""Finite CK-algebras.

Elements are addressed by index; ``leq[i]`` is the bitset of elements above
element i.  Operation tables are tuples of indices.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import AlgebraError, BudgetExceeded, Violation
from .frames import DEFAULT_BUDGET, bits, valuations
from .syntax import And, Atom, Bottom, Box, Diamond, Formula, Implies, Or, atoms

Table = tuple  # tuple[tuple[int, ...], ...]


@dataclass(frozen=True, eq=False)
class FiniteCKAlgebra:
    elements: tuple[str, ...]
    leq: tuple[int, ...]
    meet: Table
    join: Table
    implies: Table
    top: int
    bottom: int
    box: tuple[int, ...]
    dia: tuple[int, ...]
    # optional concrete carrier objects (e.g. upset bitsets), aligned with elements
    payload: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {e: i for i, e in enumerate(self.elements)})

    def _key(self):
        return (self.elements, self.leq, self.meet, self.join, self.implies,
                self.top, self.bottom, self.box, self.dia)

    def __eq__(self, other):
        return isinstance(other, FiniteCKAlgebra) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __len__(self):
        return len(self.elements)

    @property
    def size(self) -> int:
        return len(self.elements)

    def index(self, e) -> int:
        if isinstance(e, int):
            return e
        return self._index[e]

    def le(self, a: int, b: int) -> bool:
        return bool(self.leq[a] >> b & 1)

    def up(self, a: int) -> int:
        return self.leq[a]

    def to_json(self) -> dict:
        el = self.elements
        return {
            "elements": list(el),
            "leq": [[el[a], el[b]] for a in range(self.size) for b in bits(self.leq[a])],
            "top": el[self.top],
            "bottom": el[self.bottom],
            "meet": {el[a]: {el[b]: el[self.meet[a][b]] for b in range(self.size)} for a in range(self.size)},
            "join": {el[a]: {el[b]: el[self.join[a][b]] for b in range(self.size)} for a in range(self.size)},
            "implies": {el[a]: {el[b]: el[self.implies[a][b]] for b in range(self.size)} for a in range(self.size)},
            "box": {el[a]: el[self.box[a]] for a in range(self.size)},
            "dia": {el[a]: el[self.dia[a]] for a in range(self.size)},
        }

    def __repr__(self):
        return f"FiniteCKAlgebra({len(self.elements)} elements)"


# ---------------------------------------------------------------- validation

def _order_violations(elements, leq) -> list[Violation]:
    out = []
    n = len(elements)
    for a in range(n):
        if not leq[a] >> a & 1:
            out.append(Violation("NotPartialOrder", (elements[a], elements[a])))
        for b in bits(leq[a]):
            if b != a and leq[b] >> a & 1:
                out.append(Violation("NotPartialOrder", (elements[a], elements[b])))
            for c in bits(leq[b] & ~leq[a]):
                out.append(Violation("NotPartialOrder", (elements[a], elements[c])))
    return out


def _glb(leq, n, a, b):
    lower = [c for c in range(n) if leq[c] >> a & 1 and leq[c] >> b & 1]
    for c in lower:
        if all(leq[d] >> c & 1 for d in lower):
            return c
    return None


def _lub(leq, n, a, b):
    common = leq[a] & leq[b]
    for c in bits(common):
        if not common & ~leq[c]:
            return c
    return None


def lattice_tables(elements: Sequence[str], leq: Sequence[int]):
    """Derive meet and join from the order; raises AlgebraError(NotLattice)."""
    n = len(elements)
    meet, join, problems = [], [], []
    for a in range(n):
        mrow, jrow = [], []
        for b in range(n):
            m, j = _glb(leq, n, a, b), _lub(leq, n, a, b)
            if m is None or j is None:
                problems.append(Violation("NotLattice", (elements[a], elements[b])))
            mrow.append(0 if m is None else m)
            jrow.append(0 if j is None else j)
        meet.append(tuple(mrow))
        join.append(tuple(jrow))
    if problems:
        raise AlgebraError(problems)
    return tuple(meet), tuple(join)


def implication_table(elements, leq, meet):
    """Relative pseudocomplements from the order; raises AlgebraError(NotHeyting)."""
    n = len(elements)
    out, problems = [], []
    for a in range(n):
        row = []
        for b in range(n):
            cands = [c for c in range(n) if leq[meet[c][a]] >> b & 1]
            best = [c for c in cands if all(leq[d] >> c & 1 for d in cands)]
            if not best:
                problems.append(Violation("NotHeyting", (elements[a], elements[b])))
                row.append(0)
            else:
                row.append(best[0])
        out.append(tuple(row))
    if problems:
        raise AlgebraError(problems)
    return tuple(out)


def algebra_violations(A: FiniteCKAlgebra) -> list[Violation]:
    el, n, leq = A.elements, A.size, A.leq
    out = _order_violations(el, leq)
    if out:
        return out
    for a in range(n):
        for b in range(n):
            if _glb(leq, n, a, b) != A.meet[a][b] or _lub(leq, n, a, b) != A.join[a][b]:
                out.append(Violation("NotLattice", (el[a], el[b])))
    if any(not leq[A.bottom] >> a & 1 or not leq[a] >> A.top & 1 for a in range(n)):
        out.append(Violation("NotLattice", ("bounds", el[A.bottom], el[A.top])))
    if out:
        return out
    for a in range(n):
        for b in range(n):
            ab = A.implies[a][b]
            for c in range(n):
                if bool(leq[c] >> ab & 1) != bool(leq[A.meet[c][a]] >> b & 1):
                    out.append(Violation("NotHeyting", (el[c], el[a], el[b])))
    if out:
        return out
    box, dia, meet, join = A.box, A.dia, A.meet, A.join
    if box[A.top] != A.top:
        out.append(Violation("CKAxiomViolation", ("box top = top", el[box[A.top]])))
    for a in range(n):
        for b in range(n):
            if meet[box[a]][box[b]] != box[meet[a][b]]:
                out.append(Violation("CKAxiomViolation", ("box a & box b = box(a & b)", el[a], el[b])))
            if not leq[dia[a]] >> dia[join[a][b]] & 1:
                out.append(Violation("CKAxiomViolation", ("dia a <= dia(a | b)", el[a], el[b])))
            if not leq[meet[box[a]][dia[b]]] >> dia[meet[a][b]] & 1:
                out.append(Violation("CKAxiomViolation", ("box a & dia b <= dia(a & b)", el[a], el[b])))
    return out


def check_algebra(A: FiniteCKAlgebra) -> FiniteCKAlgebra:
    problems = algebra_violations(A)
    if problems:
        raise AlgebraError(problems)
    return A


def _table(raw, elements, index, arity):
    if arity == 1:
        return tuple(index[raw[e]] for e in elements)
    return tuple(tuple(index[raw[a][b]] for b in elements) for a in elements)


def build_algebra(elements: Sequence[str], leq: Iterable[tuple[str, str]],
                  box: Mapping[str, str], dia: Mapping[str, str],
                  meet: Mapping | None = None, join: Mapping | None = None,
                  implies: Mapping | None = None, validate: bool = True,
                  payload: Sequence | None = None) -> FiniteCKAlgebra:
    """Assemble an algebra from named data; missing lattice tables are derived from the order."""
    elements = tuple(elements)
    index = {e: i for i, e in enumerate(elements)}
    problems = []
    if len(index) != len(elements):
        problems.append(Violation("DuplicateElement", ()))
    order = [1 << i for i in range(len(elements))]
    for a, b in leq:
        if a not in index or b not in index:
            problems.append(Violation("UnknownElement", (a, b)))
        else:
            order[index[a]] |= 1 << index[b]
    for name, op in (("box", box), ("dia", dia)):
        for e in elements:
            if e not in op or op[e] not in index:
                problems.append(Violation("BadTable", (name, e)))
    if problems:
        raise AlgebraError(problems)
    order = tuple(order)
    bad = _order_violations(elements, order)
    if bad:
        raise AlgebraError(bad)
    if meet is None or join is None:
        m, j = lattice_tables(elements, order)
    try:
        mt = m if meet is None else _table(meet, elements, index, 2)
        jt = j if join is None else _table(join, elements, index, 2)
        it = implication_table(elements, order, mt) if implies is None else _table(implies, elements, index, 2)
    except KeyError as exc:
        raise AlgebraError([Violation("BadTable", (str(exc),))]) from None
    n = len(elements)
    tops = [a for a in range(n) if all(order[b] >> a & 1 for b in range(n))]
    bots = [a for a in range(n) if order[a] == (1 << n) - 1]
    if not tops or not bots:
        raise AlgebraError([Violation("NotLattice", ("unbounded",))])
    A = FiniteCKAlgebra(elements, order, mt, jt, it, tops[0], bots[0],
                        _table(box, elements, index, 1), _table(dia, elements, index, 1),
                        None if payload is None else tuple(payload))
    return check_algebra(A) if validate else A


def from_lattice(elements: Sequence[str], order: Sequence[int], box: Sequence[int],
                 dia: Sequence[int], meet=None, join=None, implies=None,
                 validate: bool = True, payload=None) -> FiniteCKAlgebra:
    """Index-level constructor: ``order[i]`` is the bitset of elements above i."""
    order = tuple(order)
    if meet is None or join is None:
        meet, join = lattice_tables(elements, order)
    if implies is None:
        implies = implication_table(elements, order, meet)
    n = len(elements)
    top = next(a for a in range(n) if all(order[b] >> a & 1 for b in range(n)))
    bottom = next(a for a in range(n) if order[a] == (1 << n) - 1)
    A = FiniteCKAlgebra(tuple(elements), order, tuple(map(tuple, meet)), tuple(map(tuple, join)),
                        tuple(map(tuple, implies)), top, bottom, tuple(box), tuple(dia),
                        None if payload is None else tuple(payload))
    return check_algebra(A) if validate else A


def with_operators(L: FiniteCKAlgebra, box: Sequence[int], dia: Sequence[int],
                   validate: bool = True) -> FiniteCKAlgebra:
    A = FiniteCKAlgebra(L.elements, L.leq, L.meet, L.join, L.implies, L.top, L.bottom,
                        tuple(box), tuple(dia), L.payload)
    return check_algebra(A) if validate else A


# ---------------------------------------------------------------- semantics

def compile_formula(A: FiniteCKAlgebra, phi: Formula, atom_order: Sequence[str]):
    pos = {a: i for i, a in enumerate(atom_order)}
    bot = A.bottom
    meet, join, imp, box, dia = A.meet, A.join, A.implies, A.box, A.dia

    def go(f):
        if isinstance(f, Atom):
            if f.name in pos:
                i = pos[f.name]
                return lambda v: v[i]
            return lambda v: bot
        if isinstance(f, Bottom):
            return lambda v: bot
        if isinstance(f, And):
            l, r = go(f.left), go(f.right)
            return lambda v: meet[l(v)][r(v)]
        if isinstance(f, Or):
            l, r = go(f.left), go(f.right)
            return lambda v: join[l(v)][r(v)]
        if isinstance(f, Implies):
            l, r = go(f.left), go(f.right)
            return lambda v: imp[l(v)][r(v)]
        if isinstance(f, Box):
            b = go(f.body)
            return lambda v: box[b(v)]
        if isinstance(f, Diamond):
            b = go(f.body)
            return lambda v: dia[b(v)]
        raise TypeError(f"not a formula: {f!r}")

    return go(phi)


def interpret(A: FiniteCKAlgebra, v: Mapping[str, int | str], phi: Formula) -> int:
    """⟦v⟧(φ) as an element index; atoms missing from v denote ⊥."""
    names = sorted(atoms(phi))
    vals = [A.index(v[a]) if a in v else A.bottom for a in names]
    return compile_formula(A, phi, names)(vals)


@dataclass(frozen=True)
class AlgValid:
    def __bool__(self):
        return True

    def to_json(self):
        return None


@dataclass(frozen=True)
class Counterexample:
    valuation: dict
    value: str

    def __bool__(self):
        return False

    def to_json(self):
        return {"valuation": dict(self.valuation), "value": self.value}


def alg_valid(A: FiniteCKAlgebra, phi: Formula, budget: int = DEFAULT_BUDGET):
    names = sorted(atoms(phi))
    fn = compile_formula(A, phi, names)
    for vals in valuations(range(A.size), names, budget):
        got = fn(vals)
        if got != A.top:
            return Counterexample({a: A.elements[x] for a, x in zip(names, vals)}, A.elements[got])
    return AlgValid()


@dataclass(frozen=True)
class PdtHolds:
    def __bool__(self):
        return True

    def to_json(self):
        return None


@dataclass(frozen=True)
class PdtFails:
    algebra: int
    valuation: dict
    element: str

    def __bool__(self):
        return False

    def to_json(self):
        return {"algebra": self.algebra, "valuation": dict(self.valuation), "element": self.element}


def pdt_check(algebras: Sequence[FiniteCKAlgebra], premises: Sequence[Formula],
              conclusion: Formula, budget: int = DEFAULT_BUDGET):
    """Degree-of-truth consequence over finitely many finite algebras.

    Fails iff some algebra, valuation and element ``a`` have ``a`` below every
    premise but not below the conclusion; the largest such ``a`` is the meet
    of the premises, so that element is reported.
    """
    names = sorted(set().union(atoms(conclusion), *[atoms(p) for p in premises]))
    for k, A in enumerate(algebras):
        prem = [compile_formula(A, p, names) for p in premises]
        conc = compile_formula(A, conclusion, names)
        for vals in valuations(range(A.size), names, budget):
            a = A.top
            for f in prem:
                a = A.meet[a][f(vals)]
            if not A.le(a, conc(vals)):
                return PdtFails(k, {x: A.elements[y] for x, y in zip(names, vals)}, A.elements[a])
    return PdtHolds()


# ---------------------------------------------------------------- morphisms and constructions

def homomorphism_violations(h: Sequence[int], A: FiniteCKAlgebra, B: FiniteCKAlgebra) -> list[Violation]:
    ea, eb = A.elements, B.elements
    out = []
    if h[A.top] != B.top:
        out.append(Violation("top", (ea[A.top], eb[h[A.top]])))
    if h[A.bottom] != B.bottom:
        out.append(Violation("bottom", (ea[A.bottom], eb[h[A.bottom]])))
    for a in range(A.size):
        if h[A.box[a]] != B.box[h[a]]:
            out.append(Violation("box", (ea[a],)))
        if h[A.dia[a]] != B.dia[h[a]]:
            out.append(Violation("dia", (ea[a],)))
        for b in range(A.size):
            for name, ta, tb in (("meet", A.meet, B.meet), ("join", A.join, B.join),
                                 ("implies", A.implies, B.implies)):
                if h[ta[a][b]] != tb[h[a]][h[b]]:
                    out.append(Violation(name, (ea[a], ea[b])))
    return out


def _as_indices(h, A, B) -> list[int]:
    if isinstance(h, Mapping):
        return [B.index(h[e]) for e in A.elements]
    return [B.index(x) for x in h]


def check_homomorphism(h, A: FiniteCKAlgebra, B: FiniteCKAlgebra) -> list[Violation]:
    """Violated operations (empty when h is a homomorphism).  h: mapping of names or index list."""
    try:
        idx = _as_indices(h, A, B)
    except KeyError as exc:
        return [Violation("NotTotal", (str(exc),))]
    return homomorphism_violations(idx, A, B)


def is_homomorphism(h, A, B) -> bool:
    return not check_homomorphism(h, A, B)


def product(algebras: Sequence[FiniteCKAlgebra]) -> FiniteCKAlgebra:
    """Componentwise product; elements are named "(a,b,...)" and carry index tuples as payload."""
    tuples = list(itertools.product(*[range(A.size) for A in algebras]))
    pos = {t: i for i, t in enumerate(tuples)}
    names = ["(" + ",".join(A.elements[x] for A, x in zip(algebras, t)) + ")" for t in tuples]

    def un(op):
        return tuple(pos[tuple(getattr(A, op)[x] for A, x in zip(algebras, t))] for t in tuples)

    def bin_(op):
        return tuple(tuple(pos[tuple(getattr(A, op)[x][y] for A, x, y in zip(algebras, s, t))]
                           for t in tuples) for s in tuples)

    order = []
    for s in tuples:
        m = 0
        for j, t in enumerate(tuples):
            if all(A.le(x, y) for A, x, y in zip(algebras, s, t)):
                m |= 1 << j
        order.append(m)
    return FiniteCKAlgebra(tuple(names), tuple(order), bin_("meet"), bin_("join"), bin_("implies"),
                           pos[tuple(A.top for A in algebras)], pos[tuple(A.bottom for A in algebras)],
                           un("box"), un("dia"), tuple(tuples))


def closure(B: FiniteCKAlgebra, seed: Iterable[int]) -> list[int]:
    """Indices of the subalgebra generated by ``seed`` (sorted)."""
    got = set(seed) | {B.top, B.bottom}
    frontier = list(got)
    while frontier:
        new = set()
        for a in frontier:
            new.add(B.box[a])
            new.add(B.dia[a])
            for b in list(got):
                for t in (B.meet, B.join):
                    new.add(t[a][b])
                new.add(B.implies[a][b])
                new.add(B.implies[b][a])
        frontier = [x for x in new if x not in got]
        got |= new
    return sorted(got)


def restrict_algebra(B: FiniteCKAlgebra, members: Sequence[int]) -> FiniteCKAlgebra:
    """The subalgebra on a closed set of indices (assumed closed)."""
    members = list(members)
    pos = {old: new for new, old in enumerate(members)}

    def sq(m):
        out = 0
        for old in bits(m):
            if old in pos:
                out |= 1 << pos[old]
        return out

    return FiniteCKAlgebra(
        tuple(B.elements[i] for i in members),
        tuple(sq(B.leq[i]) for i in members),
        tuple(tuple(pos[B.meet[i][j]] for j in members) for i in members),
        tuple(tuple(pos[B.join[i][j]] for j in members) for i in members),
        tuple(tuple(pos[B.implies[i][j]] for j in members) for i in members),
        pos[B.top], pos[B.bottom],
        tuple(pos[B.box[i]] for i in members),
        tuple(pos[B.dia[i]] for i in members),
        None if B.payload is None else tuple(B.payload[i] for i in members))


def subalgebra_generated(B: FiniteCKAlgebra, seed: Iterable) -> tuple[FiniteCKAlgebra, list[int]]:
    """Smallest subalgebra containing ``seed``; returns it with the inclusion (index list)."""
    members = closure(B, [B.index(s) for s in seed])
    return restrict_algebra(B, members), members


def image_subalgebra(h: Sequence[int], B: FiniteCKAlgebra) -> FiniteCKAlgebra:
    """h[A] as a subalgebra of B (for a homomorphism h it is closed)."""
    members = sorted(set(h))
    if closure(B, members) != members:
        raise ValueError("image is not closed; h is not a homomorphism")
    return restrict_algebra(B, members)


def _fingerprint(A: FiniteCKAlgebra, a: int) -> tuple:
    below = sum(1 for b in range(A.size) if A.le(b, a))
    above = bin(A.leq[a]).count("1")
    return (below, above, A.box[a] == a, A.dia[a] == a, A.box[a] == A.top, A.dia[a] == A.bottom,
            a == A.top, a == A.bottom)


def find_homomorphisms(A: FiniteCKAlgebra, B: FiniteCKAlgebra, injective: bool = False,
                       limit: int | None = None, budget: int = DEFAULT_BUDGET,
                       fingerprints: bool = False) -> list[list[int]]:
    """Backtracking search for homomorphisms A → B (index lists), in lexicographic order."""
    n = A.size
    order = sorted(range(n), key=lambda a: (a not in (A.top, A.bottom), a))
    found: list[list[int]] = []
    h = [-1] * n
    used: set[int] = set()
    nodes = 0
    fa = [_fingerprint(A, a) for a in range(n)] if fingerprints else None
    fb = [_fingerprint(B, b) for b in range(B.size)] if fingerprints else None

    def ok(a):
        ha = h[a]
        if a == A.top and ha != B.top or a == A.bottom and ha != B.bottom:
            return False
        for unary, ub in ((A.box, B.box), (A.dia, B.dia)):
            if h[unary[a]] >= 0 and h[unary[a]] != ub[ha]:
                return False
            for c in range(n):
                if unary[c] == a and h[c] >= 0 and ub[h[c]] != ha:
                    return False
        for b in range(n):
            hb = h[b]
            if hb < 0:
                continue
            for ta, tb in ((A.meet, B.meet), (A.join, B.join), (A.implies, B.implies)):
                for x, y, hx, hy in ((a, b, ha, hb), (b, a, hb, ha)):
                    r = ta[x][y]
                    if h[r] >= 0 and h[r] != tb[hx][hy]:
                        return False
        return True

    def rec(k):
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded(nodes, budget, "search nodes")
        if limit is not None and len(found) >= limit:
            return
        if k == n:
            if not homomorphism_violations(h, A, B):
                found.append(list(h))
            return
        a = order[k]
        for b in range(B.size):
            if injective and b in used:
                continue
            if fingerprints and fa[a] != fb[b]:
                continue
            h[a] = b
            if ok(a):
                used.add(b)
                rec(k + 1)
                used.discard(b)
            h[a] = -1

    rec(0)
    return found


def find_isomorphism(A: FiniteCKAlgebra, B: FiniteCKAlgebra,
                     budget: int = DEFAULT_BUDGET) -> list[int] | None:
    if A.size != B.size:
        return None
    if sorted(_fingerprint(A, a) for a in range(A.size)) != sorted(_fingerprint(B, b) for b in range(B.size)):
        return None
    got = find_homomorphisms(A, B, injective=True, limit=1, budget=budget, fingerprints=True)
    return got[0] if got else None


def trivial_algebra() -> FiniteCKAlgebra:
    return FiniteCKAlgebra(("0",), (1,), ((0,),), ((0,),), ((0,),), 0, 0, (0,), (0,))


def chain(n: int, box: Sequence[int] | None = None, dia: Sequence[int] | None = None,
          validate: bool = True) -> FiniteCKAlgebra:
    """The n-element chain 0 < 1 < ... < n-1 (identity operators by default)."""
    els = tuple(str(i) for i in range(n))
    order = tuple(sum(1 << j for j in range(i, n)) for i in range(n))
    ident = tuple(range(n))
    return from_lattice(els, order, ident if box is None else box, ident if dia is None else dia,
                        validate=validate)
