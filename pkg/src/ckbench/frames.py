"""Finite CK-frames and models.

Worlds are kept in lexicographic order and addressed by index internally.  A
set of worlds is an int bitset (bit i is world i); ``up[i]`` is the set of
``≤``-successors of world i and ``succ[i]`` its ``R``-successors.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import ArgumentNotUpset, BudgetExceeded, FrameError, MorphismError, Violation
from .syntax import And, Atom, Bottom, Box, Diamond, Formula, Implies, Or, atoms

DEFAULT_BUDGET = 10**6


def bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def upset_key(mask: int) -> tuple:
    """Canonical order on sets of worlds: by size, then by sorted member indices."""
    return (popcount(mask), tuple(bits(mask)))


class CKFrame:
    """A finite CK-frame.  Construction validates; instances are immutable."""

    __slots__ = ("worlds", "exploding", "up", "succ", "index", "bot", "full",
                 "_down", "_boxreach", "_upsets")

    def __init__(self, worlds: Iterable[str], exploding: str,
                 leq: Iterable[tuple[str, str]], r: Iterable[tuple[str, str]]):
        worlds = list(worlds)
        problems = []
        if len(set(worlds)) != len(worlds):
            dups = sorted({w for w in worlds if worlds.count(w) > 1})
            problems.append(Violation("DuplicateWorld", dups))
        ws = tuple(sorted(set(worlds)))
        index = {w: i for i, w in enumerate(ws)}
        if exploding not in index:
            problems.append(Violation("UnknownExploding", (exploding,)))
        up = [0] * len(ws)
        succ = [0] * len(ws)
        for table, rel in ((up, leq), (succ, r)):
            for a, b in rel:
                if a not in index or b not in index:
                    problems.append(Violation("UnknownWorld", (a, b)))
                    continue
                table[index[a]] |= 1 << index[b]
        if problems:
            raise FrameError(problems)
        self._set(ws, exploding, tuple(up), tuple(succ))
        self._validate()

    @classmethod
    def from_masks(cls, worlds: Sequence[str], exploding: str, up: Sequence[int],
                   succ: Sequence[int], validate: bool = True) -> "CKFrame":
        """Build from bitsets over ``worlds`` (which must already be sorted)."""
        if list(worlds) != sorted(worlds):
            raise ValueError("worlds must be given in lexicographic order")
        self = cls.__new__(cls)
        self._set(tuple(worlds), exploding, tuple(up), tuple(succ))
        if validate:
            self._validate()
        return self

    def _set(self, ws, exploding, up, succ):
        self.worlds = ws
        self.exploding = exploding
        self.index = {w: i for i, w in enumerate(ws)}
        self.bot = self.index[exploding]
        self.full = (1 << len(ws)) - 1
        self.up = up
        self.succ = succ
        self._down = None
        self._boxreach = None
        self._upsets = None

    def _validate(self):
        problems = frame_violations(self)
        if problems:
            raise FrameError(problems)

    # -- identity
    def _key(self):
        return (self.worlds, self.exploding, self.up, self.succ)

    def __eq__(self, other):
        return isinstance(other, CKFrame) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"CKFrame(worlds={list(self.worlds)}, exploding={self.exploding!r})"

    def __len__(self):
        return len(self.worlds)

    # -- derived structure
    @property
    def n(self) -> int:
        return len(self.worlds)

    @property
    def bot_mask(self) -> int:
        return 1 << self.bot

    @property
    def down(self) -> tuple[int, ...]:
        if self._down is None:
            down = [0] * self.n
            for i, m in enumerate(self.up):
                for j in bits(m):
                    down[j] |= 1 << i
            self._down = tuple(down)
        return self._down

    @property
    def boxreach(self) -> tuple[int, ...]:
        """boxreach[x] = worlds z with x ≤ y R z for some y."""
        if self._boxreach is None:
            out = []
            for m in self.up:
                acc = 0
                for y in bits(m):
                    acc |= self.succ[y]
                out.append(acc)
            self._boxreach = tuple(out)
        return self._boxreach

    def cluster(self, i: int) -> int:
        return self.up[i] & self.down[i]

    def leq_pairs(self) -> list[tuple[str, str]]:
        return [(self.worlds[i], self.worlds[j]) for i in range(self.n) for j in bits(self.up[i])]

    def r_pairs(self) -> list[tuple[str, str]]:
        return [(self.worlds[i], self.worlds[j]) for i in range(self.n) for j in bits(self.succ[i])]

    def names(self, mask: int) -> tuple[str, ...]:
        return tuple(self.worlds[i] for i in bits(mask))

    def mask(self, names: Iterable[str]) -> int:
        out = 0
        for w in names:
            out |= 1 << self.index[w]
        return out

    def is_upset(self, mask: int) -> bool:
        if not mask & self.bot_mask or mask & ~self.full:
            return False
        return all(self.up[i] & ~mask == 0 for i in bits(mask))

    def upset_closure(self, mask: int) -> int:
        out = self.bot_mask
        for i in bits(mask):
            out |= self.up[i]
        return out

    def upsets(self, budget: int = DEFAULT_BUDGET) -> list[int]:
        """All upsets containing ☇, in canonical order."""
        if self._upsets is None:
            found: list[int] = []
            n = self.n
            up, down = self.up, self.down

            def rec(i, inc, exc):
                while i < n and (inc | exc) >> i & 1:
                    i += 1
                if i == n:
                    found.append(inc)
                    if len(found) > budget:
                        raise BudgetExceeded(len(found), budget, "upsets")
                    return
                if not up[i] & exc:
                    rec(i + 1, inc | up[i], exc)
                if not down[i] & inc:
                    rec(i + 1, inc, exc | down[i])

            rec(0, self.up[self.bot] | self.bot_mask, 0)
            found.sort(key=upset_key)
            self._upsets = tuple(found)
        return list(self._upsets)

    # -- complex algebra operations on bitsets (no argument checks)
    def implies(self, a: int, b: int) -> int:
        bad = a & ~b
        out = 0
        for x, m in enumerate(self.up):
            if not m & bad:
                out |= 1 << x
        return out

    def box(self, a: int) -> int:
        out = 0
        na = ~a
        for x, m in enumerate(self.boxreach):
            if not m & na:
                out |= 1 << x
        return out

    def dia(self, a: int) -> int:
        hit = 0
        for y, m in enumerate(self.succ):
            if m & a:
                hit |= 1 << y
        miss = ~hit
        out = 0
        for x, m in enumerate(self.up):
            if not m & miss:
                out |= 1 << x
        return out

    def to_json(self) -> dict:
        return {"worlds": list(self.worlds), "exploding": self.exploding,
                "leq": [list(p) for p in self.leq_pairs()],
                "r": [list(p) for p in self.r_pairs()]}


def frame_violations(frame: CKFrame) -> list[Violation]:
    out = []
    w = frame.worlds
    up, succ, e = frame.up, frame.succ, frame.bot
    for x in range(frame.n):
        if not up[x] >> x & 1:
            out.append(Violation("NotPreorder", (w[x], w[x])))
    for x in range(frame.n):
        for y in bits(up[x]):
            missing = up[y] & ~up[x]
            for z in bits(missing):
                out.append(Violation("NotPreorder", (w[x], w[z])))
    for y in bits(up[e] & ~(1 << e)):
        out.append(Violation("ExplodingNotMaximal", (w[y],)))
    for y in bits(succ[e] & ~(1 << e)):
        out.append(Violation("ExplodingRViolation", (w[e], w[y])))
    if not succ[e] >> e & 1:
        out.append(Violation("ExplodingRViolation", (w[e], w[e])))
    return out


def check_frame(worlds: Iterable[str], exploding: str, leq: Iterable[tuple[str, str]],
                r: Iterable[tuple[str, str]]) -> CKFrame:
    """Validate a candidate frame; raises FrameError listing every violation."""
    return CKFrame(worlds, exploding, leq, r)


class HeytingOps:
    """The complex-algebra operations of a frame with argument and result checks."""

    def __init__(self, frame: CKFrame):
        self.frame = frame
        self.top = frame.full
        self.bottom = frame.bot_mask

    def _arg(self, a: int) -> int:
        if not self.frame.is_upset(a):
            raise ArgumentNotUpset(f"{set(self.frame.names(a))} is not an upset containing ☇")
        return a

    def _res(self, a: int) -> int:
        assert self.frame.is_upset(a), "operation left the upsets"
        return a

    def meet(self, a, b):
        return self._res(self._arg(a) & self._arg(b))

    def join(self, a, b):
        return self._res(self._arg(a) | self._arg(b))

    def implies(self, a, b):
        return self._res(self.frame.implies(self._arg(a), self._arg(b)))

    def box(self, a):
        return self._res(self.frame.box(self._arg(a)))

    def dia(self, a):
        return self._res(self.frame.dia(self._arg(a)))


def heyting_ops(frame: CKFrame) -> HeytingOps:
    return HeytingOps(frame)


# ---------------------------------------------------------------- models

class CKModel:
    __slots__ = ("frame", "valuation")

    def __init__(self, frame: CKFrame, valuation: Mapping[str, int]):
        bad = [Violation("ValuationNotUpset", (p, frame.names(m)))
               for p, m in sorted(valuation.items()) if not frame.is_upset(m)]
        if bad:
            raise FrameError(bad)
        self.frame = frame
        self.valuation = dict(valuation)

    @classmethod
    def from_names(cls, frame: CKFrame, valuation: Mapping[str, Iterable[str]]) -> "CKModel":
        return cls(frame, {p: frame.mask(ws) for p, ws in valuation.items()})

    def value(self, atom: str) -> int:
        return self.valuation.get(atom, self.frame.bot_mask)

    def named_valuation(self) -> dict[str, tuple[str, ...]]:
        return {p: self.frame.names(m) for p, m in sorted(self.valuation.items())}

    def to_json(self) -> dict:
        d = self.frame.to_json()
        d["valuation"] = {p: list(ws) for p, ws in self.named_valuation().items()}
        return d

    def __repr__(self):
        return f"CKModel({self.frame!r}, {self.named_valuation()})"


def compile_formula(frame: CKFrame, phi: Formula, atom_order: Sequence[str]):
    """Return ``f(values) -> bitset`` where values[i] interprets atom_order[i]."""
    pos = {a: i for i, a in enumerate(atom_order)}
    bot = frame.bot_mask

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
            return lambda v: l(v) & r(v)
        if isinstance(f, Or):
            l, r = go(f.left), go(f.right)
            return lambda v: l(v) | r(v)
        if isinstance(f, Implies):
            l, r = go(f.left), go(f.right)
            imp = frame.implies
            return lambda v: imp(l(v), r(v))
        if isinstance(f, Box):
            b = go(f.body)
            op = frame.box
            return lambda v: op(b(v))
        if isinstance(f, Diamond):
            b = go(f.body)
            op = frame.dia
            return lambda v: op(b(v))
        raise TypeError(f"not a formula: {f!r}")

    return go(phi)


def eval_formula(model: CKModel, phi: Formula) -> int:
    """V(φ) as a bitset of worlds."""
    names = sorted(atoms(phi))
    return compile_formula(model.frame, phi, names)([model.value(a) for a in names])


def forces(model: CKModel, world: str, phi: Formula) -> bool:
    return bool(eval_formula(model, phi) >> model.frame.index[world] & 1)


@dataclass(frozen=True)
class Valid:
    def __bool__(self):
        return True

    def to_json(self):
        return None


@dataclass(frozen=True)
class Countermodel:
    valuation: dict
    world: str

    def __bool__(self):
        return False

    def to_json(self):
        return {"valuation": {p: list(ws) for p, ws in self.valuation.items()}, "world": self.world}


def valuations(candidates: Sequence[int], atom_names: Sequence[str], budget: int):
    need = len(candidates) ** len(atom_names)
    if need > budget:
        raise BudgetExceeded(need, budget, "valuations")
    return itertools.product(candidates, repeat=len(atom_names))


def frame_valid(frame: CKFrame, phi: Formula, budget: int = DEFAULT_BUDGET,
                candidates: Sequence[int] | None = None):
    """Valid, or the first Countermodel in canonical order.

    ``candidates`` restricts valuations to the given upsets (used for general
    frames); by default every upset containing ☇ is tried.
    """
    names = sorted(atoms(phi))
    ups = frame.upsets(budget) if candidates is None else list(candidates)
    fn = compile_formula(frame, phi, names)
    full = frame.full
    for vals in valuations(ups, names, budget):
        got = fn(vals)
        if got != full:
            missing = full & ~got
            world = (missing & -missing).bit_length() - 1
            return Countermodel({a: frame.names(m) for a, m in zip(names, vals)}, frame.worlds[world])
    return Valid()


# ---------------------------------------------------------------- morphisms

class BoundedMorphism:
    __slots__ = ("source", "target", "idx")

    def __init__(self, source: CKFrame, target: CKFrame, idx: Sequence[int]):
        self.source = source
        self.target = target
        self.idx = tuple(idx)

    @property
    def mapping(self) -> dict[str, str]:
        return {self.source.worlds[i]: self.target.worlds[j] for i, j in enumerate(self.idx)}

    def __call__(self, world: str) -> str:
        return self.target.worlds[self.idx[self.source.index[world]]]

    def image(self, mask: int) -> int:
        out = 0
        for i in bits(mask):
            out |= 1 << self.idx[i]
        return out

    def preimage(self, mask: int) -> int:
        out = 0
        for i, j in enumerate(self.idx):
            if mask >> j & 1:
                out |= 1 << i
        return out

    def is_injective(self) -> bool:
        return len(set(self.idx)) == len(self.idx)

    def is_surjective(self) -> bool:
        return set(self.idx) == set(range(self.target.n))

    def is_embedding(self) -> bool:
        """Injective and ≤-reflecting."""
        if not self.is_injective():
            return False
        s, t = self.source, self.target
        return all(self.preimage(t.up[self.idx[x]]) == s.up[x] for x in range(s.n))

    def __repr__(self):
        return f"BoundedMorphism({self.mapping})"


def morphism_violations(source: CKFrame, target: CKFrame, idx: Sequence[int]) -> list[Violation]:
    out = []
    sw, tw = source.worlds, target.worlds
    f = BoundedMorphism(source, target, idx)
    for x in range(source.n):
        fx = idx[x]
        if (fx == target.bot) != (x == source.bot):
            out.append(Violation("B☇", (sw[x], tw[fx])))
        img = f.image(source.up[x])
        for y in bits(img & ~target.up[fx]):
            out.append(Violation("F≤", (sw[x], tw[y])))
        for z in bits(target.up[fx] & ~img):
            out.append(Violation("B≤", (sw[x], tw[z])))
        img = f.image(source.succ[x])
        for y in bits(img & ~target.succ[fx]):
            out.append(Violation("F_R", (sw[x], tw[y])))
        for z in bits(target.succ[fx] & ~img):
            out.append(Violation("B_R", (sw[x], tw[z])))
    return out


def check_bounded_morphism(mapping: Mapping[str, str], source: CKFrame,
                           target: CKFrame) -> BoundedMorphism:
    """Validate a candidate map; raises MorphismError with one entry per failed condition."""
    missing = [w for w in source.worlds if w not in mapping]
    unknown = [(a, b) for a, b in mapping.items() if a not in source.index or b not in target.index]
    if missing or unknown:
        raise MorphismError([Violation("NotTotal", (w,)) for w in missing]
                            + [Violation("UnknownWorld", p) for p in unknown])
    idx = [target.index[mapping[w]] for w in source.worlds]
    problems = morphism_violations(source, target, idx)
    if problems:
        raise MorphismError(problems)
    return BoundedMorphism(source, target, idx)


def is_model_morphism(f: BoundedMorphism, m: CKModel, m2: CKModel) -> bool:
    """Whether f is a bounded morphism of models: V(p) = f⁻¹(V'(p)) for all p."""
    keys = set(m.valuation) | set(m2.valuation)
    return all(m.value(p) == f.preimage(m2.value(p)) for p in keys)


def identity_morphism(frame: CKFrame) -> BoundedMorphism:
    return BoundedMorphism(frame, frame, range(frame.n))


def compose(f: BoundedMorphism, g: BoundedMorphism) -> BoundedMorphism:
    """g ∘ f."""
    return BoundedMorphism(f.source, g.target, [g.idx[j] for j in f.idx])


# ---------------------------------------------------------------- constructions

def disjoint_union(frames: Sequence[CKFrame]) -> tuple[CKFrame, list[BoundedMorphism]]:
    """Coproduct with all exploding worlds identified, plus the injections."""
    if not frames:
        raise ValueError("disjoint union of an empty list")
    bot_name = frames[0].exploding if ":" not in frames[0].exploding else "e"
    names = [bot_name]
    tag = []
    for i, fr in enumerate(frames):
        tag.append({x: f"{i}:{x}" for x in fr.worlds if x != fr.exploding})
        tag[i][fr.exploding] = bot_name
        names.extend(v for k, v in tag[i].items() if k != fr.exploding)
    leq, r = [(bot_name, bot_name)], [(bot_name, bot_name)]
    for i, fr in enumerate(frames):
        for a, b in fr.leq_pairs():
            if a != fr.exploding:
                leq.append((tag[i][a], tag[i][b]))
        for a, b in fr.r_pairs():
            if a != fr.exploding:
                r.append((tag[i][a], tag[i][b]))
    union = CKFrame(names, bot_name, leq, r)
    injections = [BoundedMorphism(fr, union, [union.index[tag[i][w]] for w in fr.worlds])
                  for i, fr in enumerate(frames)]
    return union, injections


def generated_closure(frame: CKFrame, seed: int) -> int:
    out = seed | frame.bot_mask
    frontier = out
    while frontier:
        nxt = 0
        for i in bits(frontier):
            nxt |= frame.up[i] | frame.succ[i]
        frontier = nxt & ~out
        out |= nxt
    return out


def submask_frame(frame: CKFrame, keep: int) -> tuple[CKFrame, list[int]]:
    """Restriction of the frame to the worlds in ``keep``; returns it with the index embedding."""
    members = list(bits(keep))
    pos = {old: new for new, old in enumerate(members)}

    def squeeze(m):
        out = 0
        for old in bits(m & keep):
            out |= 1 << pos[old]
        return out

    sub = CKFrame.from_masks([frame.worlds[i] for i in members], frame.exploding,
                             [squeeze(frame.up[i]) for i in members],
                             [squeeze(frame.succ[i]) for i in members])
    return sub, members


def generated_subframe(frame: CKFrame, seed: Iterable[str]) -> tuple[CKFrame, BoundedMorphism]:
    keep = generated_closure(frame, frame.mask(seed))
    sub, members = submask_frame(frame, keep)
    return sub, BoundedMorphism(sub, frame, members)


def is_bounded_morphic_image(source: CKFrame, target: CKFrame,
                             budget: int = DEFAULT_BUDGET) -> BoundedMorphism | None:
    """Search for a surjective bounded morphism source → target (first in canonical order)."""
    n, m = source.n, target.n
    if m > n:
        return None
    order = sorted(range(n), key=lambda x: (x != source.bot, x))
    assign = [-1] * n
    nodes = 0
    su, ss, tu, ts = source.up, source.succ, target.up, target.succ

    def consistent(x):
        fx = assign[x]
        for y in range(n):
            fy = assign[y]
            if fy < 0:
                continue
            if su[x] >> y & 1 and not tu[fx] >> fy & 1:
                return False
            if su[y] >> x & 1 and not tu[fy] >> fx & 1:
                return False
            if ss[x] >> y & 1 and not ts[fx] >> fy & 1:
                return False
            if ss[y] >> x & 1 and not ts[fy] >> fx & 1:
                return False
        return True

    def rec(k, covered):
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded(nodes, budget, "search nodes")
        if popcount(covered) + (n - k) < m:
            return None
        if k == n:
            if covered != target.full:
                return None
            if morphism_violations(source, target, assign):
                return None
            return BoundedMorphism(source, target, assign)
        x = order[k]
        choices = [target.bot] if x == source.bot else [j for j in range(m) if j != target.bot]
        for j in choices:
            assign[x] = j
            if consistent(x):
                got = rec(k + 1, covered | 1 << j)
                if got is not None:
                    return got
            assign[x] = -1
        return None

    return rec(0, 0)


def product_coproduct_iso(frames: Sequence[CKFrame]):
    """The explicit bijection ∏ Xᵢ⁺ → (∐ Xᵢ)⁺ sending a tuple to the union of its tagged parts.

    Returns (union, injections, pairs) where pairs lists (tuple of component
    upsets, union upset)."""
    union, inj = disjoint_union(frames)
    pairs = []
    for combo in itertools.product(*[fr.upsets() for fr in frames]):
        img = union.bot_mask
        for f, a in zip(inj, combo):
            img |= f.image(a)
        pairs.append((combo, img))
    return union, inj, pairs


def upset_of_names(frame: CKFrame, names: Iterable[str]) -> int:
    m = frame.mask(names)
    if not frame.is_upset(m):
        raise ArgumentNotUpset(f"{sorted(names)} is not an upset containing ☇")
    return m


def world_set_name(frame: CKFrame, mask: int) -> str:
    return "{" + ",".join(frame.names(mask)) + "}"


def set_algebra(frame: CKFrame, sets: Sequence[int], validate: bool = True):
    """The algebra of a family of upsets closed under the frame operations (canonical order)."""
    from .algebra import FiniteCKAlgebra, check_algebra

    ups = sorted(set(sets), key=upset_key)
    pos = {u: i for i, u in enumerate(ups)}
    try:
        A = FiniteCKAlgebra(
            tuple(world_set_name(frame, u) for u in ups),
            tuple(sum(1 << j for j, v in enumerate(ups) if u & ~v == 0) for u in ups),
            tuple(tuple(pos[u & v] for v in ups) for u in ups),
            tuple(tuple(pos[u | v] for v in ups) for u in ups),
            tuple(tuple(pos[frame.implies(u, v)] for v in ups) for u in ups),
            pos[frame.full], pos[frame.bot_mask],
            tuple(pos[frame.box(u)] for u in ups),
            tuple(pos[frame.dia(u)] for u in ups),
            tuple(ups))
    except KeyError:
        raise ValueError("family of upsets is not closed under the frame operations") from None
    return check_algebra(A) if validate else A


def complex_algebra(frame: CKFrame, budget: int = DEFAULT_BUDGET, validate: bool = True):
    """X⁺: all upsets containing ☇ with the frame operations; payload holds the bitsets."""
    return set_algebra(frame, frame.upsets(budget), validate)
