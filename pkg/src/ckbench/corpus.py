"""Generators of finite structures and formulas used by tests and the CLI.

Everything here is deterministic for a fixed seed.
"""
from __future__ import annotations

import itertools
import random
from functools import lru_cache
from typing import Iterator, Sequence

from .algebra import FiniteCKAlgebra, alg_valid, chain, from_lattice, product
from .duality import GeneralFrame, dual_frame
from .errors import BudgetExceeded
from .frames import CKFrame, CKModel, DEFAULT_BUDGET, bits, complex_algebra, eval_formula
from .syntax import (BOTTOM, TOP, And, Atom, Box, Diamond, Formula, Implies, Or, atoms,
                     big_and, big_or, depth)

# ---------------------------------------------------------------- frames

EXPLODING = "e"


def _names(k: int) -> list[str]:
    width = len(str(k))
    return [f"w{str(i + 1).zfill(width)}" for i in range(k)]


def _preorders(k: int) -> list[tuple[int, ...]]:
    """All preorders on range(k) as up-bitsets."""
    pairs = [(i, j) for i in range(k) for j in range(k) if i != j]
    out = []
    for chosen in range(1 << len(pairs)):
        up = [1 << i for i in range(k)]
        for b, (i, j) in enumerate(pairs):
            if chosen >> b & 1:
                up[i] |= 1 << j
        if all(up[j] & ~up[i] == 0 for i in range(k) for j in bits(up[i])):
            out.append(tuple(up))
    return out


def _downsets(up: Sequence[int], k: int) -> list[int]:
    out = []
    for s in range(1 << k):
        if all(not (up[j] >> i & 1) or s >> j & 1 for i in bits(s) for j in range(k)):
            out.append(s)
    return out


def _canon(k: int, up, succ, perms) -> tuple:
    """Least relabelling of the non-exploding worlds (☇ = index k stays fixed)."""
    best = None
    for p in perms:
        def rl(m):
            out = 0
            for i in bits(m):
                out |= 1 << (p[i] if i < k else k)
            return out
        nu = [0] * k
        ns = [0] * k
        for i in range(k):
            nu[p[i]] = rl(up[i])
            ns[p[i]] = rl(succ[i])
        key = (tuple(nu), tuple(ns))
        if best is None or key < best:
            best = key
    return best


def _build(k: int, up, succ) -> CKFrame:
    """Frame from internal indices (non-☇ worlds 0..k-1, ☇ = k)."""
    names = _names(k) + [EXPLODING]
    leq = [(names[i], names[j]) for i in range(k) for j in bits(up[i])] + [(EXPLODING, EXPLODING)]
    r = [(names[i], names[j]) for i in range(k) for j in bits(succ[i])] + [(EXPLODING, EXPLODING)]
    return CKFrame(names, EXPLODING, leq, r)


@lru_cache(maxsize=None)
def _enumerate(n: int) -> tuple[CKFrame, ...]:
    k = n - 1
    if k < 0:
        return ()
    perms = list(itertools.permutations(range(k)))
    seen = set()
    out = []
    e = 1 << k
    for pre in _preorders(k):
        for below in _downsets(pre, k):
            up = tuple(pre[i] | (e if below >> i & 1 else 0) for i in range(k))
            for succ in itertools.product(range(1 << (k + 1)), repeat=k):
                key = _canon(k, up, succ, perms)
                if key in seen:
                    continue
                seen.add(key)
                out.append(_build(k, *key))
    return tuple(out)


def enumerate_frames(n: int) -> tuple[CKFrame, ...]:
    """All CK-frames with exactly n worlds (☇ included), one per isomorphism class."""
    return _enumerate(n)


def frames_up_to(n: int) -> list[CKFrame]:
    return [f for m in range(1, n + 1) for f in enumerate_frames(m)]


def random_frame(rng: random.Random, n: int, p_leq: float = 0.3, p_r: float = 0.35) -> CKFrame:
    """A random CK-frame with n worlds (☇ included)."""
    k = n - 1
    up = [1 << i for i in range(k)]
    for i in range(k):
        for j in range(k):
            if i != j and rng.random() < p_leq:
                up[i] |= 1 << j
    changed = True
    while changed:
        changed = False
        for i in range(k):
            m = up[i]
            for j in bits(up[i]):
                m |= up[j]
            if m != up[i]:
                up[i], changed = m, True
    e = 1 << k
    for i in range(k):
        if rng.random() < 0.5:
            for j in range(k):
                if up[j] >> i & 1:
                    up[j] |= e
    succ = [sum(1 << j for j in range(k + 1) if rng.random() < p_r) for _ in range(k)]
    return _build(k, up, succ)


def cluster_frame() -> CKFrame:
    """Two ≤-equivalent worlds seeing different R-successors."""
    ws = ["x1", "x2", "y1", "y2", EXPLODING]
    leq = [(w, w) for w in ws] + [("x1", "x2"), ("x2", "x1")]
    r = [("x1", "y1"), ("x2", "y2"), (EXPLODING, EXPLODING)]
    return CKFrame(ws, EXPLODING, leq, r)


def one_world() -> CKFrame:
    return CKFrame([EXPLODING], EXPLODING, [(EXPLODING, EXPLODING)], [(EXPLODING, EXPLODING)])


def models_of(frame: CKFrame, atom_names=("p", "q")) -> Iterator[CKModel]:
    ups = frame.upsets()
    for vals in itertools.product(ups, repeat=len(atom_names)):
        yield CKModel(frame, dict(zip(atom_names, vals)))


# ---------------------------------------------------------------- algebras

def heyting_lattices(max_size: int = 4) -> list[FiniteCKAlgebra]:
    """The finite Heyting lattices with at most max_size (<= 4) elements, identity operators."""
    if max_size > 4:
        raise ValueError("only lattices with at most 4 elements are listed")
    out = [chain(n) for n in range(1, max_size + 1)]
    if max_size >= 4:
        out.append(product([chain(2), chain(2)]))
    return out


def _automorphisms(L: FiniteCKAlgebra) -> list[tuple[int, ...]]:
    n = L.size
    out = []
    for p in itertools.permutations(range(n)):
        if all((L.leq[a] >> b & 1) == (L.leq[p[a]] >> p[b] & 1) for a in range(n) for b in range(n)):
            out.append(p)
    return out


def _conjugate(p, f, g):
    inv = [0] * len(p)
    for a, b in enumerate(p):
        inv[b] = a
    return (tuple(p[f[inv[b]]] for b in range(len(p))),
            tuple(p[g[inv[b]]] for b in range(len(p))))


def ck_operators(L: FiniteCKAlgebra) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Every (□, ◇) pair making the lattice L a CK-algebra."""
    n = L.size
    meet, join, le = L.meet, L.join, L.le
    boxes = [f for f in itertools.product(range(n), repeat=n)
             if f[L.top] == L.top and all(f[meet[a][b]] == meet[f[a]][f[b]]
                                          for a in range(n) for b in range(n))]
    dias = [g for g in itertools.product(range(n), repeat=n)
            if all(le(g[a], g[join[a][b]]) for a in range(n) for b in range(n))]
    for f in boxes:
        for g in dias:
            if all(le(meet[f[a]][g[b]], g[meet[a][b]]) for a in range(n) for b in range(n)):
                yield f, g


def ck_algebras(max_size: int = 3) -> list[FiniteCKAlgebra]:
    """All CK-algebras on Heyting lattices with <= max_size elements, up to isomorphism."""
    out = []
    for L in heyting_lattices(max_size):
        autos = _automorphisms(L)
        seen = set()
        for f, g in ck_operators(L):
            key = min(_conjugate(p, f, g) for p in autos)
            if key in seen:
                continue
            seen.add(key)
            out.append(from_lattice(L.elements, L.leq, f, g, L.meet, L.join, L.implies))
    return out


def algebra_corpus(seed: int = 0, sample4: int = 40) -> list[FiniteCKAlgebra]:
    """A mixed collection of checked CK-algebras with at most 8 elements."""
    rng = random.Random(seed)
    out = list(ck_algebras(3))
    four = ck_algebras(4)[len(out):]
    out += rng.sample(four, min(sample4, len(four)))
    two = chain(2)
    out.append(product([two, two, two]))
    out.append(product([two, chain(4)]))
    ops = ck_algebras(2)
    out.append(product([ops[0 if len(ops) == 1 else 1], two]))
    for fr in frames_up_to(3):
        A = complex_algebra(fr)
        if 2 <= A.size <= 8:
            out.append(A)
    out.append(complex_algebra(cluster_frame()))
    return out


# ---------------------------------------------------------------- general frames

def general_frame_corpus(seed: int = 0) -> list[tuple[str, GeneralFrame]]:
    """Labelled general frames; descriptive ones and deliberately broken ones."""
    rng = random.Random(seed)
    out: list[tuple[str, GeneralFrame]] = []
    for i, A in enumerate(ck_algebras(3)[:12]):
        out.append((f"dual-{i}", dual_frame(A).general))
    fr3 = list(enumerate_frames(3))
    for i, fr in enumerate(rng.sample(fr3, 8)):
        out.append((f"full-{i}", GeneralFrame.full(fr)))
    for i, fr in enumerate(rng.sample(fr3, 6)):
        out.append((f"coarse-{i}", GeneralFrame.generated(fr, [])))
    out.append(("twin", twin_frame()))
    out.append(("cluster-full", GeneralFrame.full(cluster_frame())))
    for i, fr in enumerate(rng.sample(fr3, 6)):
        ups = fr.upsets()
        seed_sets = rng.sample(ups, min(1, len(ups)))
        out.append((f"generated-{i}", GeneralFrame.generated(fr, seed_sets)))
    return out


def twin_frame() -> GeneralFrame:
    """Two ≤-equivalent worlds with equal successor sets and coarse admissible sets."""
    ws = ["x", "y", EXPLODING]
    leq = [(a, b) for a in ws for b in ws if not (a == EXPLODING and b != EXPLODING)]
    fr = CKFrame(ws, EXPLODING, leq, [("x", EXPLODING), ("y", EXPLODING), (EXPLODING, EXPLODING)])
    return GeneralFrame(fr, [fr.bot_mask, fr.full])


# ---------------------------------------------------------------- formulas

def boxed(n: int, p: str) -> Formula:
    f: Formula = Atom(p)
    for _ in range(n):
        f = Box(f)
    return f


def sahlqvist_antecedents(max_depth: int = 2, atom_names=("p", "q")) -> list[Formula]:
    level = [TOP, BOTTOM] + [boxed(n, p) for p in atom_names for n in range(max_depth + 1)]
    seen = list(dict.fromkeys(level))
    for _ in range(max_depth):
        new = [op(a, b) for a in seen for b in seen for op in (And, Or)]
        seen = list(dict.fromkeys(seen + [f for f in new if depth(f) <= max_depth]))
    return seen


def positive_formulas(max_depth: int = 2, atom_names=("p", "q")) -> list[Formula]:
    seen = [Atom(p) for p in atom_names] + [BOTTOM, TOP]
    for _ in range(max_depth):
        new = [Box(a) for a in seen] + [Diamond(a) for a in seen]
        new += [op(a, b) for a in seen for b in seen for op in (And, Or)]
        seen = list(dict.fromkeys(seen + new))
    return seen


PAPER_EXAMPLES = ("[]p -> p", "p -> <>p", "[]p -> <>p", "[]p -> [][]p")


def sahlqvist_corpus(count: int = 120, seed: int = 7, max_depth: int = 2) -> list[Formula]:
    """Sahlqvist formulas with antecedent and consequent of depth <= max_depth."""
    from .syntax import parse
    rng = random.Random(seed)
    ants = sahlqvist_antecedents(max_depth)
    cons = positive_formulas(max_depth)
    out = [parse(s) for s in PAPER_EXAMPLES]
    seen = set(out)
    while len(out) < count:
        f = Implies(rng.choice(ants), rng.choice(cons))
        if f not in seen and atoms(f):
            seen.add(f)
            out.append(f)
    return out


def semantic_cover(contexts: Sequence[tuple[CKFrame, dict]], max_depth: int,
                   atom_names=("p", "q"), top: bool = True,
                   budget: int = DEFAULT_BUDGET) -> dict[tuple, Formula]:
    """One representative formula for every value tuple realised by a formula of depth <= max_depth.

    A context is a (frame, valuation) pair; a formula's value tuple lists its
    extension in every context.  Any formula of bounded depth has the same
    tuple as some representative, so checks over the representatives cover
    all such formulas.
    """
    def const(f):
        return tuple(eval_formula(CKModel(fr, val), f) for fr, val in contexts)

    reps: dict[tuple, Formula] = {}
    base = [Atom(p) for p in atom_names] + [BOTTOM] + ([TOP] if top else [])
    for f in base:
        reps.setdefault(const(f), f)
    frames = [fr for fr, _ in contexts]
    for _ in range(max_depth):
        items = list(reps.items())
        if len(items) ** 2 > budget:
            raise BudgetExceeded(len(items) ** 2, budget, "formula pairs")
        new: dict[tuple, Formula] = {}

        def add(t, f):
            if t not in reps and t not in new:
                new[t] = f
        for t, f in items:
            add(tuple(fr.box(a) for fr, a in zip(frames, t)), Box(f))
            add(tuple(fr.dia(a) for fr, a in zip(frames, t)), Diamond(f))
        for t, f in items:
            for u, g in items:
                add(tuple(a & b for a, b in zip(t, u)), And(f, g))
                add(tuple(a | b for a, b in zip(t, u)), Or(f, g))
                add(tuple(fr.implies(a, b) for fr, a, b in zip(frames, t, u)), Implies(f, g))
        if not new:
            break
        reps.update(new)
    return reps


# ---------------------------------------------------------------- countermodel search

def dual_countermodel(phi: Formula, algebras: Sequence[FiniteCKAlgebra] | None = None,
                      max_size: int = 8):
    """Search algebras for one refuting φ and transfer the refutation to its dual frame.

    Returns (algebra, dual, model, world) with the model's valuation admissible
    (V(p) = θ̄(v(p))), or None if no algebra in the list refutes φ.
    """
    if algebras is None:
        algebras = algebra_corpus()
    for A in algebras:
        if A.size > max_size:
            continue
        verdict = alg_valid(A, phi)
        if verdict:
            continue
        D = dual_frame(A)
        val = {p: D.theta[A.index(e)] for p, e in verdict.valuation.items()}
        M = CKModel(D.frame, val)
        ext = eval_formula(M, phi)
        missing = D.frame.full & ~ext
        if missing:
            w = (missing & -missing).bit_length() - 1
            return A, D, M, D.frame.worlds[w]
    return None
