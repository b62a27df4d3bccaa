"""Standard translation, the Sahlqvist correspondent algorithm, and semantic cross-checks."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import fol
from .duality import GeneralFrame, admissible_valid, prune
from .errors import BudgetExceeded, NotSahlqvist
from .fol import FF, FO, fo_evaluator
from .frames import CKFrame, DEFAULT_BUDGET, frame_valid
from .syntax import (And, Atom, Bottom, Box, Diamond, Formula, Implies, Or, is_boxed_atom,
                     is_sahlqvist, is_top, to_text)

DNF_CAP = 64


def predicate_name(atom: str) -> str:
    return atom[0].upper() + atom[1:]


class Fresh:
    """Deterministic variable supply v0, v1, ..."""

    def __init__(self, prefix: str = "v"):
        self.prefix = prefix
        self.count = 0

    def __call__(self) -> str:
        name = f"{self.prefix}{self.count}"
        self.count += 1
        return name


def standard_translation(phi: Formula, x: str = "x", fresh: Fresh | None = None) -> FO:
    fresh = fresh or Fresh()

    def st(f: Formula, x: str) -> FO:
        if isinstance(f, Atom):
            return fol.Pred(predicate_name(f.name), x)
        if isinstance(f, Bottom):
            return fol.Eq(x, FF)
        if isinstance(f, And):
            return fol.And(st(f.left, x), st(f.right, x))
        if isinstance(f, Or):
            return fol.Or(st(f.left, x), st(f.right, x))
        if isinstance(f, Implies):
            y = fresh()
            return fol.Forall(y, fol.Implies(fol.And(fol.Leq(x, y), st(f.left, y)), st(f.right, y)))
        if isinstance(f, Box):
            y, z = fresh(), fresh()
            return fol.Forall(y, fol.Implies(fol.Leq(x, y),
                                             fol.Forall(z, fol.Implies(fol.Rel(y, z), st(f.body, z)))))
        if isinstance(f, Diamond):
            y, z = fresh(), fresh()
            return fol.Forall(y, fol.Implies(fol.Leq(x, y),
                                             fol.Exists(z, fol.And(fol.Rel(y, z), st(f.body, z)))))
        raise TypeError(f"not a formula: {f!r}")

    return st(phi, x)


def box_path(x: str, m: int, u: str, fresh: Fresh) -> FO:
    """x R_□^m u: a ≤-step, then m times (R-step, ≤-step); m = 0 gives x ≤ u."""
    if m == 0:
        return fol.Leq(x, u)
    zs = [fresh() for _ in range(2 * m)]
    body: FO = fol.Leq(zs[-1], u)
    for i in range(2 * m - 1, -1, -1):
        prev = x if i == 0 else zs[i - 1]
        step = fol.Leq(prev, zs[i]) if i % 2 == 0 else fol.Rel(prev, zs[i])
        body = fol.Exists(zs[i], fol.And(step, body))
    return body


# ---------------------------------------------------------------- the algorithm

_BOT = ("bot",)


def _dnf_size(f: Formula) -> int:
    if isinstance(f, Or):
        return _dnf_size(f.left) + _dnf_size(f.right)
    if isinstance(f, And) and not is_top(f):
        return _dnf_size(f.left) * _dnf_size(f.right)
    return 1


def antecedent_dnf(psi: Formula, cap: int = DNF_CAP) -> list[list]:
    """Disjuncts as lists of leaves: (n, atom) for □ⁿatom, or ``_BOT``; ⊤ leaves vanish."""
    size = _dnf_size(psi)
    if size > cap:
        raise BudgetExceeded(size, cap, "DNF disjuncts")

    def go(f):
        if is_top(f):
            return [[]]
        if isinstance(f, Bottom):
            return [[_BOT]]
        if isinstance(f, Or):
            return go(f.left) + go(f.right)
        if isinstance(f, And):
            return [a + b for a in go(f.left) for b in go(f.right)]
        ba = is_boxed_atom(f)
        if ba is None:
            raise NotSahlqvist(f"not a Sahlqvist antecedent leaf: {to_text(f)}")
        return [[ba]]

    return go(psi)


@dataclass(frozen=True)
class Correspondent:
    sentence: FO
    formula: Formula
    disjunct: tuple
    instantiations: dict = field(compare=False, default_factory=dict)

    def to_json(self) -> dict:
        return {
            "sentence": fol.fo_text(self.sentence),
            "formula": to_text(self.formula),
            "disjunct": [("F" if leaf == _BOT else "[]" * leaf[0] + leaf[1]) for leaf in self.disjunct],
            "instantiations": {p: fol.fo_text(s) for p, s in self.instantiations.items()},
        }


def sahlqvist_correspondent(phi: Formula, x: str = "x") -> list[Correspondent]:
    """One predicate-free sentence per disjunct of the antecedent; their conjunction corresponds to φ."""
    split = is_sahlqvist(phi)
    if split is None:
        raise NotSahlqvist(f"not a Sahlqvist formula: {to_text(phi)}")
    psi, chi = split
    disjuncts = antecedent_dnf(psi)
    fresh = Fresh()
    out = []
    for leaves in disjuncts:
        if _BOT in leaves:
            out.append(Correspondent(fol.TRUE, phi, tuple(leaves)))
            continue
        pos = standard_translation(chi, x, fresh)
        depths: dict[str, list[int]] = {}
        for n, p in leaves:
            depths.setdefault(predicate_name(p), [])
            if n not in depths[predicate_name(p)]:
                depths[predicate_name(p)].append(n)

        def sigma_for(pred):
            ells = depths.get(pred)
            if not ells:
                return lambda u: fol.Eq(u, FF)
            return lambda u: fol.Implies(fol.neq(u, FF),
                                         fol.disj(box_path(x, m, u, fresh) for m in ells))

        sigma = {pred: sigma_for(pred) for pred in fol.predicates(pos)}
        body = fol.replace_predicates(pos, sigma)
        shown = {pred: sigma_for(pred)("u") for pred in sorted(depths)}
        out.append(Correspondent(fol.Forall(x, body), phi, tuple(leaves), shown))
    return out


def conjunction(parts: Sequence[Correspondent]) -> FO:
    return fol.conj(c.sentence for c in parts)


def correspondent(phi: Formula) -> FO:
    return conjunction(sahlqvist_correspondent(phi))


def sentence_holds(frame: CKFrame, sentence: FO) -> bool:
    return fo_evaluator(frame, sentence)()


# ---------------------------------------------------------------- semantic checks

@dataclass
class CorrespondenceReport:
    formula: Formula
    sentence: FO
    checked: int
    disagreements: list

    @property
    def passed(self) -> bool:
        return not self.disagreements

    def __bool__(self):
        return self.passed

    def to_json(self) -> dict:
        return {"formula": to_text(self.formula), "correspondent": fol.fo_text(self.sentence),
                "checked": self.checked,
                "disagreements": [{"frame": f.to_json(), "modal": m, "first_order": s}
                                  for f, m, s in self.disagreements]}


def correspondence_check(phi: Formula, frames: Iterable[CKFrame],
                         budget: int = DEFAULT_BUDGET) -> CorrespondenceReport:
    """frame_valid(X, φ) versus the correspondent on every frame."""
    sentence = correspondent(phi)
    bad = []
    n = 0
    for fr in frames:
        n += 1
        modal = bool(frame_valid(fr, phi, budget))
        first = sentence_holds(fr, sentence)
        if modal != first:
            bad.append((fr, modal, first))
    return CorrespondenceReport(phi, sentence, n, bad)


@dataclass
class Equivalent:
    checked: int

    def __bool__(self):
        return True

    def to_json(self):
        return {"checked": self.checked}


@dataclass
class Distinguished:
    frame: CKFrame
    first: bool
    second: bool

    def __bool__(self):
        return False

    def to_json(self):
        return {"frame": self.frame.to_json(), "first": self.first, "second": self.second}


def fo_equivalent(s1: FO, s2: FO, max_worlds: int = 3, frames: Iterable[CKFrame] | None = None,
                  budget: int = DEFAULT_BUDGET):
    """Compare two predicate-free sentences on every CK-frame with at most max_worlds worlds."""
    from .corpus import frames_up_to
    for s in (s1, s2):
        if fol.predicates(s):
            raise ValueError("sentences must not contain unary predicates")
        if fol.free_vars(s):
            raise ValueError(f"free variables in sentence: {sorted(fol.free_vars(s))}")
    if frames is None:
        if max_worlds > 4:
            raise BudgetExceeded(max_worlds, 4, "worlds for exhaustive frame enumeration")
        frames = frames_up_to(max_worlds)
    n = 0
    for fr in frames:
        n += 1
        if n > budget:
            raise BudgetExceeded(n, budget, "frames")
        a, b = sentence_holds(fr, s1), sentence_holds(fr, s2)
        if a != b:
            return Distinguished(fr, a, b)
    return Equivalent(n)


@dataclass
class Persistence:
    """Outcome of a p-persistence check: D ⊩ φ implies κ(prune(D)) ⊩ φ."""
    valid_on_general: bool
    valid_on_pruned: bool | None
    witness: object = None

    @property
    def ok(self) -> bool:
        return not self.valid_on_general or bool(self.valid_on_pruned)

    def __bool__(self):
        return self.ok

    def to_json(self) -> dict:
        w = self.witness.to_json() if hasattr(self.witness, "to_json") else self.witness
        return {"valid_on_general": self.valid_on_general,
                "valid_on_pruned": self.valid_on_pruned, "witness": w}


def p_persistence_check(phi: Formula, D: GeneralFrame, budget: int = DEFAULT_BUDGET) -> Persistence:
    if is_sahlqvist(phi) is None:
        raise NotSahlqvist(f"not a Sahlqvist formula: {to_text(phi)}")
    general = admissible_valid(D, phi, budget)
    if not general:
        return Persistence(False, None, general)
    pruned = prune(D).frame
    verdict = frame_valid(pruned, phi, budget)
    return Persistence(True, bool(verdict), None if verdict else verdict)


# ---------------------------------------------------------------- helpers for tests

def sigma_instance_holds(phi: Formula, frame: CKFrame) -> bool:
    """Minimal instantiation makes ISUP ∧ BOX-AT true at every world, for every disjunct."""
    split = is_sahlqvist(phi)
    if split is None:
        raise NotSahlqvist(to_text(phi))
    psi, _ = split
    for leaves in antecedent_dnf(psi):
        if _BOT in leaves:
            continue
        fresh = Fresh()
        depths: dict[str, list[int]] = {}
        for n, p in leaves:
            depths.setdefault(predicate_name(p), []).append(n)
        for pred, ells in depths.items():
            def sig(u, ells=ells):
                return fol.Implies(fol.neq(u, FF), fol.disj(box_path("x", m, u, fresh) for m in ells))
            a, b = fresh(), fresh()
            isup = fol.And(sig(FF), fol.Forall(a, fol.Forall(b, fol.Implies(
                fol.And(fol.Leq(a, b), sig(a)), sig(b)))))
            box_at = fol.conj(fol.Forall(u, fol.Implies(box_path("x", m, u, fresh), sig(u)))
                              for m in ells for u in [fresh()])
            check = fol.Forall("x", fol.And(isup, box_at))
            if not sentence_holds(frame, check):
                return False
    return True
