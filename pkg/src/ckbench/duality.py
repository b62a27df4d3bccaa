"""Prime filters, segments, dual frames, general frames and the maps between them."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .algebra import FiniteCKAlgebra, check_algebra, homomorphism_violations
from .errors import (BudgetExceeded, CompanionNotFound, CompanionNotUnique, GeneralFrameError,
                     Violation)
from .frames import (DEFAULT_BUDGET, BoundedMorphism, CKFrame, CKModel, bits, complex_algebra,
                     frame_valid, morphism_violations, popcount, set_algebra, submask_frame,
                     upset_key)
from .syntax import Formula


# ---------------------------------------------------------------- filters and segments

@dataclass(frozen=True)
class PrimeFilter:
    generator: int   # element index; the filter is ↑generator
    members: int     # bitset over elements

    def contains(self, a: int) -> bool:
        return bool(self.members >> a & 1)


def prime_filters(A: FiniteCKAlgebra) -> list[PrimeFilter]:
    """All prime filters (principal, possibly improper), ordered by generator index."""
    out = []
    for g in range(A.size):
        up = A.leq[g]
        prime = True
        for a in range(A.size):
            if not prime:
                break
            for b in range(a, A.size):
                if up >> A.join[a][b] & 1 and not (up >> a & 1 or up >> b & 1):
                    prime = False
                    break
        if prime:
            out.append(PrimeFilter(g, up))
    return out


@dataclass(frozen=True)
class Segment:
    head: int   # index into the prime filter list
    tail: int   # bitset over the prime filter list


def segments(A: FiniteCKAlgebra, pfs: Sequence[PrimeFilter] | None = None,
             budget: int = DEFAULT_BUDGET) -> list[Segment]:
    """All segments in canonical order (head generator order, then tail bitset value)."""
    pfs = prime_filters(A) if pfs is None else list(pfs)
    k = len(pfs)
    work = 0
    plans = []
    for h, p in enumerate(pfs):
        need = 0       # elements a with □a ∈ p: every tail filter must contain them
        dia_req = []   # elements a with ◇a ∈ p: some tail filter must contain a
        for a in range(A.size):
            if p.contains(A.box[a]):
                need |= 1 << a
            if p.contains(A.dia[a]):
                dia_req.append(a)
        allowed = 0
        for i, q in enumerate(pfs):
            if need & ~q.members == 0:
                allowed |= 1 << i
        hits = []
        for a in dia_req:
            hit = 0
            for i in bits(allowed):
                if pfs[i].contains(a):
                    hit |= 1 << i
            hits.append(hit)
        work += 1 << popcount(allowed)
        plans.append((allowed, hits))
    if work > budget:
        raise BudgetExceeded(work, budget, "candidate segments")
    out = []
    for h, (allowed, hits) in enumerate(plans):
        if any(hit == 0 for hit in hits):
            continue
        tails = []
        sub = allowed
        while True:
            if all(sub & hit for hit in hits):
                tails.append(sub)
            if sub == 0:
                break
            sub = (sub - 1) & allowed
        for t in sorted(tails):
            out.append(Segment(h, t))
    assert k == 0 or out, "the exploding segment always exists"
    return out


def is_segment(A: FiniteCKAlgebra, pfs: Sequence[PrimeFilter], head: int, tail: int) -> bool:
    p = pfs[head]
    for a in range(A.size):
        if p.contains(A.box[a]) and any(not pfs[i].contains(a) for i in bits(tail)):
            return False
        if p.contains(A.dia[a]) and not any(pfs[i].contains(a) for i in bits(tail)):
            return False
    return True


# ---------------------------------------------------------------- general frames

class GeneralFrame:
    """A CK-frame with a family of admissible upsets closed under all operations."""

    __slots__ = ("frame", "admissible", "_algebra", "_eta")

    def __init__(self, frame: CKFrame, admissible, validate: bool = True):
        self.frame = frame
        self.admissible = tuple(sorted(set(admissible), key=upset_key))
        self._algebra = None
        self._eta = None
        if validate:
            problems = general_frame_violations(self)
            if problems:
                raise GeneralFrameError(problems)

    @classmethod
    def full(cls, frame: CKFrame) -> "GeneralFrame":
        return cls(frame, frame.upsets(), validate=False)

    @classmethod
    def generated(cls, frame: CKFrame, seed) -> "GeneralFrame":
        """Smallest admissible family containing the given upsets."""
        fam = {frame.bot_mask, frame.full} | set(seed)
        frontier = set(fam)
        while frontier:
            new = set()
            for a in frontier:
                new.add(frame.box(a))
                new.add(frame.dia(a))
                for b in list(fam):
                    new.update((a & b, a | b, frame.implies(a, b), frame.implies(b, a)))
            frontier = new - fam
            fam |= new
        return cls(frame, fam)

    def __repr__(self):
        return f"GeneralFrame({self.frame!r}, {len(self.admissible)} admissible sets)"

    def algebra(self) -> FiniteCKAlgebra:
        """G*: the admissible sets as a CK-algebra (payload = bitsets)."""
        if self._algebra is None:
            self._algebra = set_algebra(self.frame, self.admissible)
        return self._algebra

    def eta(self) -> list[int]:
        """η(x) as a bitset over the admissible sets (in canonical order)."""
        if self._eta is None:
            out = []
            for x in range(self.frame.n):
                m = 0
                for i, a in enumerate(self.admissible):
                    if a >> x & 1:
                        m |= 1 << i
                out.append(m)
            self._eta = out
        return self._eta

    def eta_classes(self) -> list[int]:
        """Partition of the worlds into sets lying in exactly the same admissible sets."""
        groups: dict[int, int] = {}
        for x, e in enumerate(self.eta()):
            groups[e] = groups.get(e, 0) | 1 << x
        return sorted(groups.values(), key=lambda m: (m & -m).bit_length())

    def hull(self, x: int) -> int:
        """∩ of admissible sets containing world x."""
        out = self.frame.full
        for a in self.admissible:
            if a >> x & 1:
                out &= a
        return out

    def to_json(self) -> dict:
        d = self.frame.to_json()
        d["admissible"] = [list(self.frame.names(a)) for a in self.admissible]
        return d


def general_frame_violations(G: GeneralFrame) -> list[Violation]:
    fr = G.frame
    fam = set(G.admissible)
    out = []
    for a in G.admissible:
        if not fr.is_upset(a):
            out.append(Violation("NotUpset", (fr.names(a),)))
    if fr.bot_mask not in fam:
        out.append(Violation("MissingBottom", ()))
    if fr.full not in fam:
        out.append(Violation("MissingTop", ()))
    if out:
        return out
    for a in G.admissible:
        for op, val in (("box", fr.box(a)), ("dia", fr.dia(a))):
            if val not in fam:
                out.append(Violation("NotClosed", (op, fr.names(a))))
        for b in G.admissible:
            for op, val in (("meet", a & b), ("join", a | b), ("implies", fr.implies(a, b))):
                if val not in fam:
                    out.append(Violation("NotClosed", (op, fr.names(a), fr.names(b))))
    return out


def admissible_valid(G: GeneralFrame, phi: Formula, budget: int = DEFAULT_BUDGET):
    """G ⊩ φ: validity under valuations into admissible sets only."""
    return frame_valid(G.frame, phi, budget, candidates=G.admissible)


# ---------------------------------------------------------------- dual frames

class DualFrame:
    """A_* together with the data it was built from.

    World i of ``general.frame`` is ``segments[i]``; ``theta[a]`` is θ̄(a).
    """

    __slots__ = ("algebra", "filters", "segments", "general", "theta", "_lookup", "_by_members")

    def __init__(self, A: FiniteCKAlgebra, budget: int = DEFAULT_BUDGET):
        self.algebra = A
        self.filters = prime_filters(A)
        self.segments = segments(A, self.filters, budget)
        segs = self.segments
        n = len(segs)
        width = len(str(max(n - 1, 0)))
        names = [f"s{i:0{width}d}" for i in range(n)]
        improper = next(i for i, p in enumerate(self.filters) if p.generator == A.bottom)
        bomb = segs.index(Segment(improper, 1 << improper))
        by_head: dict[int, int] = {}
        for i, s in enumerate(segs):
            by_head[s.head] = by_head.get(s.head, 0) | 1 << i
        up, succ = [], []
        for s in segs:
            hm = self.filters[s.head].members
            m = 0
            for h, mask in by_head.items():
                if hm & ~self.filters[h].members == 0:
                    m |= mask
            up.append(m)
            r = 0
            for h in bits(s.tail):
                r |= by_head.get(h, 0)
            succ.append(r)
        frame = CKFrame.from_masks(names, names[bomb], up, succ)
        theta = []
        for a in range(A.size):
            m = 0
            for i, s in enumerate(segs):
                if self.filters[s.head].contains(a):
                    m |= 1 << i
            theta.append(m)
        self.theta = tuple(theta)
        self.general = GeneralFrame(frame, theta)
        self._lookup = {(s.head, s.tail): i for i, s in enumerate(segs)}
        self._by_members = {p.members: i for i, p in enumerate(self.filters)}

    @property
    def frame(self) -> CKFrame:
        return self.general.frame

    def find(self, head: int, tail: int) -> int | None:
        return self._lookup.get((head, tail))

    def filter_index(self, members: int) -> int | None:
        return self._by_members.get(members)

    def describe(self, i: int) -> str:
        s = self.segments[i]
        el = self.algebra.elements
        head = "↑" + el[self.filters[s.head].generator]
        tail = ",".join("↑" + el[self.filters[j].generator] for j in bits(s.tail))
        return f"({head}, {{{tail}}})"


def dual_frame(A: FiniteCKAlgebra, budget: int = DEFAULT_BUDGET) -> DualFrame:
    return DualFrame(A, budget)


def theta_bar(A: FiniteCKAlgebra, dual: DualFrame | None = None) -> dict[str, tuple[str, ...]]:
    dual = dual or DualFrame(A)
    return {A.elements[a]: dual.frame.names(m) for a, m in enumerate(dual.theta)}


def theta_isomorphism(A: FiniteCKAlgebra, dual: DualFrame | None = None) -> tuple[bool, list]:
    """Check θ̄ : A → (A_*)* is a CK-algebra isomorphism; returns (ok, problems)."""
    dual = dual or DualFrame(A)
    B = dual.general.algebra()
    pos = {m: i for i, m in enumerate(B.payload)}
    h = [pos.get(m, -1) for m in dual.theta]
    problems: list = []
    if -1 in h:
        problems.append(Violation("NotAdmissible", ()))
        return False, problems
    if len(set(h)) != A.size:
        problems.append(Violation("NotInjective", ()))
    if B.size != A.size:
        problems.append(Violation("NotSurjective", (B.size, A.size)))
    problems.extend(homomorphism_violations(h, A, B))
    return not problems, problems


# ---------------------------------------------------------------- descriptiveness

@dataclass(frozen=True)
class Check:
    passed: bool
    witness: tuple = ()

    def __bool__(self):
        return self.passed

    def to_json(self):
        return {"passed": self.passed, "witness": list(self.witness)}


@dataclass(frozen=True)
class Report:
    checks: dict

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def __bool__(self):
        return self.passed

    def __getitem__(self, key):
        return self.checks[key]

    def failed(self) -> list[str]:
        return [k for k, v in self.checks.items() if not v]

    def to_json(self):
        return {k: v.to_json() for k, v in self.checks.items()}


def check_d1(G: GeneralFrame) -> Check:
    fr = G.frame
    for x in range(fr.n):
        extra = G.hull(x) & ~fr.up[x]
        if extra:
            y = (extra & -extra).bit_length() - 1
            return Check(False, (fr.worlds[x], fr.worlds[y]))
    return Check(True)


def check_d2(G: GeneralFrame) -> Check:
    fr = G.frame
    for x in range(fr.n):
        for y in bits(fr.succ[x]):
            missing = fr.cluster(y) & ~fr.succ[x]
            if missing:
                z = (missing & -missing).bit_length() - 1
                return Check(False, (fr.worlds[x], fr.worlds[y], fr.worlds[z]))
    return Check(True)


def check_d3(G: GeneralFrame) -> Check:
    """Finite compactness: every prime filter of G* is η(x) for some world x.

    On finite frames this always holds (the join-irreducible generator minus
    the admissible sets strictly below it is nonempty); the check guards the
    implementation rather than the theory."""
    A = G.algebra()
    pos = {m: i for i, m in enumerate(A.payload)}
    realized = {pos[G.hull(x)] for x in range(G.frame.n)}
    for p in prime_filters(A):
        if p.generator not in realized:
            return Check(False, (A.elements[p.generator],))
    return Check(True)


def _d4_at(G: GeneralFrame, x: int, classes: list[int], budget_box: list) -> tuple | None:
    """A D4 failure witness at world x, or None."""
    fr = G.frame
    bx = fr.full
    dia_sets = []
    for a in G.admissible:
        if fr.box(a) >> x & 1:
            bx &= a
        if fr.dia(a) >> x & 1:
            dia_sets.append(a)
    inside = [c for c in classes if c & ~bx == 0]
    k = len(inside)

    def to_cls(m):
        out = 0
        for i, c in enumerate(inside):
            if c & m == c:
                out |= 1 << i
        return out

    def from_cls(cm):
        out = 0
        for i in bits(cm):
            out |= inside[i]
        return out

    hits = [to_cls(a) for a in dia_sets]
    # realized successor sets in the cluster, restricted to saturated subsets of bx
    realized: dict[int, list[int]] = {}
    for y in bits(fr.cluster(x)):
        u = fr.succ[y]
        cm = to_cls(u)
        if from_cls(cm) == u:
            realized.setdefault(cm, []).append(y)
    for cm, ys in realized.items():
        if len(ys) > 1 and all(cm & h for h in hits):
            return ("not unique", fr.worlds[x], fr.names(from_cls(cm)), tuple(fr.worlds[y] for y in ys))
    cands = list(realized)

    def rec(i, inc, exc):
        budget_box[0] -= 1
        if budget_box[0] < 0:
            raise BudgetExceeded(budget_box[1], budget_box[1], "D4 search nodes")
        rest = ((1 << k) - 1) & ~inc & ~exc & ~((1 << i) - 1)
        if any(not (inc | rest) & h for h in hits):
            return None
        alive = [r for r in cands if inc & ~r == 0 and not r & exc]
        if not alive:
            return inc | rest
        if i == k:
            return None
        got = rec(i + 1, inc | 1 << i, exc)
        if got is not None:
            return got
        return rec(i + 1, inc, exc | 1 << i)

    missing = rec(0, 0, 0)
    if missing is not None:
        return ("not realized", fr.worlds[x], fr.names(from_cls(missing)))
    return None


def check_d4(G: GeneralFrame, budget: int = DEFAULT_BUDGET) -> Check:
    """For every x and every η-saturated U meeting the two conditions, exactly one x' ~ x has R[x'] = U."""
    classes = G.eta_classes()
    box = [budget, budget]
    for x in range(G.frame.n):
        w = _d4_at(G, x, classes, box)
        if w is not None:
            return Check(False, w)
    return Check(True)


def check_descriptive(G: GeneralFrame, budget: int = DEFAULT_BUDGET) -> Report:
    return Report({"D1": check_d1(G), "D2": check_d2(G), "D3": check_d3(G), "D4": check_d4(G, budget)})


def _closed_hull(G: GeneralFrame, s: int) -> int:
    """∩{a ∈ A | s ⊆ a} ∩ ∩{-b | s ∩ b = ∅}."""
    out = G.frame.full
    for a in G.admissible:
        if s & ~a == 0:
            out &= a
        if not s & a:
            out &= ~a
    return out


def check_d2p(G: GeneralFrame) -> Check:
    fr = G.frame
    for x in range(fr.n):
        extra = _closed_hull(G, fr.succ[x]) & ~fr.succ[x]
        if extra:
            return Check(False, (fr.worlds[x], fr.names(extra)))
    return Check(True)


def check_d4p(G: GeneralFrame) -> Check:
    fr = G.frame
    for x in range(fr.n):
        target = fr.full
        for a in G.admissible:
            if fr.box(a) >> x & 1:
                target &= a
        if not any(fr.succ[y] == target for y in bits(fr.cluster(x))):
            return Check(False, (fr.worlds[x], fr.names(target)))
    return Check(True)


def check_semi_descriptive(G: GeneralFrame) -> Report:
    return Report({"D1": check_d1(G), "D2'": check_d2p(G), "D3": check_d3(G), "D4'": check_d4p(G)})


# ---------------------------------------------------------------- η̄ and morphisms

@dataclass
class EtaBar:
    general: GeneralFrame
    dual: DualFrame          # (G*)_*
    image: list              # world index -> segment index (None if not a segment)


def eta_bar(G: GeneralFrame, budget: int = DEFAULT_BUDGET) -> EtaBar:
    A = G.algebra()
    dual = DualFrame(A, budget)
    pos = {m: i for i, m in enumerate(A.payload)}
    gen_to_pf = {p.generator: i for i, p in enumerate(dual.filters)}
    fr = G.frame
    heads = [gen_to_pf.get(pos[G.hull(x)]) for x in range(fr.n)]
    assert None not in heads, "η(x) is always a prime filter"
    image = []
    for x in range(fr.n):
        tail = 0
        for y in bits(fr.succ[x]):
            tail |= 1 << heads[y]
        image.append(dual.find(heads[x], tail))
    assert None not in image, "η̄(x) is always a segment"
    return EtaBar(G, dual, image)


def general_isomorphism_problems(G: GeneralFrame, H: GeneralFrame, f: Sequence[int]) -> list[Violation]:
    """Why f (world index map) fails to be an isomorphism of general frames; empty if it is one."""
    out = []
    a, b = G.frame, H.frame
    if len(set(f)) != a.n or b.n != a.n:
        out.append(Violation("NotBijective", (a.n, b.n, len(set(f)))))
        return out
    if f[a.bot] != b.bot:
        out.append(Violation("Exploding", ()))
    for x in range(a.n):
        for y in range(a.n):
            if bool(a.up[x] >> y & 1) != bool(b.up[f[x]] >> f[y] & 1):
                out.append(Violation("Order", (a.worlds[x], a.worlds[y])))
            if bool(a.succ[x] >> y & 1) != bool(b.succ[f[x]] >> f[y] & 1):
                out.append(Violation("R", (a.worlds[x], a.worlds[y])))
    img = set()
    for s in G.admissible:
        m = 0
        for x in bits(s):
            m |= 1 << f[x]
        img.add(m)
    if img != set(H.admissible):
        out.append(Violation("Admissible", ()))
    return out


def eta_is_isomorphism(G: GeneralFrame, budget: int = DEFAULT_BUDGET) -> tuple[bool, list]:
    e = eta_bar(G, budget)
    problems = general_isomorphism_problems(G, e.dual.general, e.image)
    return not problems, problems


def general_morphism_problems(f: BoundedMorphism, G: GeneralFrame, H: GeneralFrame) -> list[Violation]:
    """Bounded morphism conditions plus admissibility of preimages."""
    out = morphism_violations(G.frame, H.frame, f.idx)
    fam = set(G.admissible)
    for a in H.admissible:
        if f.preimage(a) not in fam:
            out.append(Violation("PreimageNotAdmissible", (H.frame.names(a),)))
    return out


def dual_morphism(h: Sequence[int], A: FiniteCKAlgebra, B: FiniteCKAlgebra,
                  dA: DualFrame | None = None, dB: DualFrame | None = None) -> BoundedMorphism:
    """h_* : B_* → A_*, (p', Γ') ↦ (h⁻¹(p'), h⁻¹[Γ']) for a homomorphism h : A → B."""
    dA = dA or DualFrame(A)
    dB = dB or DualFrame(B)

    def pre(members: int) -> int:
        out = 0
        for a in range(A.size):
            if members >> h[a] & 1:
                out |= 1 << a
        return out

    pf_map = []
    for q in dB.filters:
        i = dA.filter_index(pre(q.members))
        assert i is not None, "preimage of a prime filter is a prime filter"
        pf_map.append(i)
    idx = []
    for s in dB.segments:
        tail = 0
        for j in bits(s.tail):
            tail |= 1 << pf_map[j]
        t = dA.find(pf_map[s.head], tail)
        assert t is not None, "h_* maps segments to segments"
        idx.append(t)
    return BoundedMorphism(dB.frame, dA.frame, idx)


def inverse_image_homomorphism(f: BoundedMorphism, G: GeneralFrame, H: GeneralFrame) -> list[int]:
    """f* = f⁻¹ : H* → G* as an index list."""
    A, B = G.algebra(), H.algebra()
    pos = {m: i for i, m in enumerate(A.payload)}
    return [pos[f.preimage(m)] for m in B.payload]


# ---------------------------------------------------------------- pruning

@dataclass
class Pruned:
    source: GeneralFrame
    general: GeneralFrame
    companion: list          # world index -> index of its convex closed companion
    members: list            # retained world indices of the source, in order

    @property
    def frame(self) -> CKFrame:
        return self.general.frame

    def restrict(self, mask: int) -> int:
        out = 0
        for new, old in enumerate(self.members):
            if mask >> old & 1:
                out |= 1 << new
        return out


def companions(D: GeneralFrame) -> list[int]:
    fr = D.frame
    out = []
    for x in range(fr.n):
        cx = _closed_hull(D, fr.succ[x])
        found = [y for y in bits(fr.cluster(x)) if fr.succ[y] == cx]
        if not found:
            raise CompanionNotFound(f"no world ~ {fr.worlds[x]} has successor set {fr.names(cx)}")
        if len(found) > 1:
            raise CompanionNotUnique(f"{[fr.worlds[y] for y in found]} all qualify for {fr.worlds[x]}")
        out.append(found[0])
    return out


def prune(D: GeneralFrame) -> Pruned:
    comp = companions(D)
    keep = 0
    for x, c in enumerate(comp):
        if c == x:
            keep |= 1 << x
    sub, members = submask_frame(D.frame, keep)
    p = Pruned(D, None, comp, members)
    p.general = GeneralFrame(sub, {p.restrict(a) for a in D.admissible})
    return p


def kappa(G: GeneralFrame) -> CKFrame:
    """Forget the admissible sets."""
    return G.frame


# ---------------------------------------------------------------- segment extensions

@dataclass
class SegmentExtension:
    base: CKFrame
    algebra: FiniteCKAlgebra   # X⁺
    dual: DualFrame            # (X⁺)_*

    @property
    def frame(self) -> CKFrame:
        return self.dual.frame

    def element_of(self, upset: int) -> int:
        return self.algebra.payload.index(upset)

    def eta(self) -> list[int]:
        """x ↦ ({a | x ∈ a}, {η(y) | y ∈ R[x]}) as segment indices of se X."""
        return eta_bar(GeneralFrame(self.base, self.algebra.payload, validate=False)).image


def segment_extension(X: CKFrame, budget: int = DEFAULT_BUDGET) -> SegmentExtension:
    A = complex_algebra(X, budget)
    return SegmentExtension(X, A, DualFrame(A, budget))


def segment_extension_model(M: CKModel, se: SegmentExtension | None = None) -> tuple[CKModel, SegmentExtension]:
    se = se or segment_extension(M.frame)
    val = {p: se.dual.theta[se.element_of(m)] for p, m in M.valuation.items()}
    return CKModel(se.frame, val), se


def check_algebra_dual(A: FiniteCKAlgebra) -> DualFrame:
    """Validate A and build its dual."""
    return DualFrame(check_algebra(A))
