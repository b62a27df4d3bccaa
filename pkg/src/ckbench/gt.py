"""Frame-class closure checks behind the Goldblatt-Thomason construction."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from .algebra import check_homomorphism, product
from .duality import segment_extension
from .frames import (CKFrame, DEFAULT_BUDGET, BoundedMorphism, complex_algebra, disjoint_union,
                     frame_valid, generated_subframe, is_bounded_morphic_image,
                     morphism_violations, product_coproduct_iso)
from .syntax import Formula, to_text


def product_coproduct_problems(frames: Sequence[CKFrame]) -> list:
    """Check that tuple ↦ union of tagged parts is an isomorphism ∏ Xᵢ⁺ ≅ (∐ Xᵢ)⁺."""
    union, _, pairs = product_coproduct_iso(frames)
    factors = [complex_algebra(f) for f in frames]
    P = product(factors)
    U = complex_algebra(union)
    upos = {m: i for i, m in enumerate(U.payload)}
    img = {}
    for combo, m in pairs:
        key = tuple(A.payload.index(a) for A, a in zip(factors, combo))
        img[key] = upos[m]
    h = [img[t] for t in P.payload]
    problems = []
    if len(set(h)) != len(h) or len(h) != U.size:
        problems.append(("NotBijective", len(set(h)), U.size))
    problems += [(v.kind, v.witness) for v in check_homomorphism(h, P, U)]
    return problems


def codiagonal(frame: CKFrame) -> tuple[CKFrame, BoundedMorphism]:
    """X ⊔ X together with the fold map onto X."""
    union, inj = disjoint_union([frame, frame])
    idx = [0] * union.n
    for f in inj:
        for x, y in enumerate(f.idx):
            idx[y] = x
    return union, BoundedMorphism(union, frame, idx)


@dataclass
class Section:
    instances: int = 0
    failures: list = field(default_factory=list)

    def to_json(self):
        return {"instances": self.instances, "failures": self.failures}


@dataclass
class GTReport:
    formula: Formula
    frames: int
    validating: int
    sections: dict

    @property
    def passed(self) -> bool:
        return all(not s.failures for s in self.sections.values())

    def __bool__(self):
        return self.passed

    @property
    def instances(self) -> int:
        return sum(s.instances for name, s in self.sections.items() if name != "se_reflection")

    def to_json(self):
        return {"formula": to_text(self.formula), "frames": self.frames, "validating": self.validating,
                "sections": {k: v.to_json() for k, v in self.sections.items()}}


def gt_suite(frames: Sequence[CKFrame], phi: Formula, max_pairs: int = 40, max_images: int = 40,
             budget: int = DEFAULT_BUDGET) -> GTReport:
    """Closure of {X | X ⊩ φ} under ∐, generated subframes and bounded morphic images,
    the product/coproduct isomorphism, and reflection along segment extensions."""
    frames = list(frames)
    valid = [bool(frame_valid(f, phi, budget)) for f in frames]
    good = [f for f, v in zip(frames, valid) if v]
    sec = {k: Section() for k in ("unions", "generated", "images", "product_coproduct", "se_reflection")}

    def name(f):
        return f.to_json()

    pairs = list(itertools.combinations(range(len(frames)), 2))[:max_pairs]
    for i, j in pairs:
        union, _ = disjoint_union([frames[i], frames[j]])
        s = sec["unions"]
        s.instances += 1
        if bool(frame_valid(union, phi, budget)) != (valid[i] and valid[j]):
            s.failures.append({"frames": [name(frames[i]), name(frames[j])]})
        p = sec["product_coproduct"]
        p.instances += 1
        probs = product_coproduct_problems([frames[i], frames[j]])
        if probs:
            p.failures.append({"frames": [name(frames[i]), name(frames[j])], "problems": probs})

    for f in good:
        for w in f.worlds:
            sub, _ = generated_subframe(f, [w])
            s = sec["generated"]
            s.instances += 1
            if not frame_valid(sub, phi, budget):
                s.failures.append({"frame": name(f), "seed": w})

    s = sec["images"]
    for f in good[:max_images]:
        union, fold = codiagonal(f)
        s.instances += 1
        if morphism_violations(union, f, fold.idx) or not fold.is_surjective():
            s.failures.append({"frame": name(f), "problem": "fold map is not a surjective bounded morphism"})
        elif not frame_valid(union, phi, budget):
            s.failures.append({"frame": name(f), "problem": "union of validating frames refutes"})
    found = 0
    for f in good:
        if found >= max_images:
            break
        for g in frames:
            if g.n >= f.n or g.n < 2:
                continue
            m = is_bounded_morphic_image(f, g, budget)
            if m is None:
                continue
            found += 1
            s.instances += 1
            if not frame_valid(g, phi, budget):
                s.failures.append({"source": name(f), "image": name(g), "map": m.mapping})
            if found >= max_images:
                break

    for f in frames:
        s = sec["se_reflection"]
        se = segment_extension(f, budget)
        s.instances += 1
        if frame_valid(se.frame, phi, budget) and not frame_valid(f, phi, budget):
            s.failures.append({"frame": name(f)})
    return GTReport(phi, len(frames), len(good), sec)
