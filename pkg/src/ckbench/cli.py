"""The ``ck`` command line tool.

Exit codes: 0 affirmative verdict, 1 negative verdict (with witness),
2 usage or input error, 3 budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path
from typing import Any, Sequence

from . import correspondence as corr
from . import duality, fol, frames, serialize
from .algebra import alg_valid, pdt_check
from .errors import (BudgetExceeded, CKError, CompanionNotFound, CompanionNotUnique, InputError,
                     ParseError, StructureError)
from .frames import DEFAULT_BUDGET
from .syntax import atoms, depth, is_sahlqvist, parse, size, to_text


class Report:
    def __init__(self, verdict: str, code: int = 0, witness: Any = None,
                 stats: dict | None = None, result: Any = None):
        self.verdict = verdict
        self.code = code
        self.witness = witness
        self.stats = stats or {}
        self.result = result

    def as_json(self) -> dict:
        d = {"verdict": self.verdict, "witness": self.witness, "stats": self.stats}
        if self.result is not None:
            d["result"] = self.result
        return d

    def as_text(self) -> str:
        lines = [self.verdict]
        if self.witness is not None:
            lines.append("witness: " + _compact(self.witness))
        for k, v in self.stats.items():
            lines.append(f"{k}: {_compact(v)}")
        if self.result is not None:
            lines.append(self.result if isinstance(self.result, str)
                         else json.dumps(self.result, indent=2, ensure_ascii=False))
        return "\n".join(lines)


def _compact(v) -> str:
    return v if isinstance(v, str) else json.dumps(v, ensure_ascii=False)


def _formula(text: str):
    return parse(text)


def _emit_structure(obj, args) -> Any:
    """Write to --output if given; otherwise return the JSON for the report."""
    data = obj.to_json() if hasattr(obj, "to_json") else obj
    if getattr(args, "output", None):
        Path(args.output).write_text(json.dumps(data, indent=2, ensure_ascii=False) + "\n",
                                     encoding="utf-8")
        return None
    return data


def _violations(exc: StructureError) -> list:
    return [v.to_json() for v in exc.violations]


def _load_any(path):
    """Frame, model, general frame or algebra, by the fields present."""
    d = serialize.read_json(path)
    if "elements" in d:
        return serialize.algebra_from_json(d)
    if "admissible" in d:
        return serialize.general_from_json(d)
    if "valuation" in d:
        return serialize.model_from_json(d)
    return serialize.frame_from_json(d)


# ---------------------------------------------------------------- commands

def cmd_parse(a):
    phi = _formula(a.formula)
    return Report("OK", 0, None,
                  {"depth": depth(phi), "size": size(phi), "atoms": sorted(atoms(phi)),
                   "sahlqvist": is_sahlqvist(phi) is not None},
                  to_text(phi, unicode=a.unicode))


def _check(loader, a, ok_verdict):
    d = serialize.read_json(a.file)
    try:
        obj = loader(d)
    except StructureError as exc:
        return Report("Invalid", 1, _violations(exc))
    if hasattr(obj, "size"):
        n = obj.size
    else:
        n = getattr(obj, "frame", obj).n
    return Report(ok_verdict, 0, None, {"size": n})


def cmd_check_frame(a):
    return _check(serialize.frame_from_json, a, "Valid frame")


def cmd_check_model(a):
    return _check(serialize.model_from_json, a, "Valid model")


def cmd_check_algebra(a):
    return _check(serialize.algebra_from_json, a, "Valid algebra")


def cmd_model_check(a):
    m = serialize.load_model(a.model)
    phi = _formula(a.formula)
    ext = frames.eval_formula(m, phi)
    fr = m.frame
    if a.world:
        if a.world not in fr.index:
            raise InputError(f"unknown world {a.world!r}")
        ok = bool(ext >> fr.index[a.world] & 1)
        return Report("Forced" if ok else "NotForced", 0 if ok else 1, None if ok else {"world": a.world})
    missing = fr.full & ~ext
    stats = {"extension": list(fr.names(ext))}
    if missing:
        return Report("Fails", 1, {"worlds": list(fr.names(missing))}, stats)
    return Report("Holds", 0, None, stats)


def cmd_frame_valid(a):
    obj = _load_any(a.frame)
    phi = _formula(a.formula)
    if isinstance(obj, duality.GeneralFrame):
        v = duality.admissible_valid(obj, phi, a.budget) if a.admissible else \
            frames.frame_valid(obj.frame, phi, a.budget)
    elif isinstance(obj, frames.CKFrame):
        v = frames.frame_valid(obj, phi, a.budget)
    else:
        raise InputError("expected a frame or general frame file")
    if v:
        return Report("Valid", 0)
    return Report("Countermodel", 1, v.to_json())


def cmd_alg_valid(a):
    A = serialize.load_algebra(a.algebra)
    v = alg_valid(A, _formula(a.formula), a.budget)
    if v:
        return Report("Valid", 0)
    return Report("Counterexample", 1, v.to_json())


def cmd_pdt(a):
    algs = [serialize.load_algebra(p) for p in a.algebras]
    prem = [_formula(p) for p in a.premise]
    v = pdt_check(algs, prem, _formula(a.conclusion), a.budget)
    if v:
        return Report("Holds", 0, None, {"algebras": len(algs)})
    return Report("Fails", 1, v.to_json(), {"algebras": len(algs)})


def cmd_complex_algebra(a):
    fr = serialize.load_frame(a.frame)
    A = frames.complex_algebra(fr, a.budget)
    return Report("OK", 0, None, {"elements": A.size}, _emit_structure(A, a))


def cmd_dual_frame(a):
    A = serialize.load_algebra(a.algebra)
    D = duality.dual_frame(A, a.budget)
    stats = {"prime_filters": len(D.filters), "segments": len(D.segments),
             "worlds": {D.frame.worlds[i]: D.describe(i) for i in range(len(D.segments))}}
    return Report("OK", 0, None, stats, _emit_structure(D.general, a))


def cmd_double_dual(a):
    obj = _load_any(a.file)
    if isinstance(obj, duality.GeneralFrame):
        ok, problems = duality.eta_is_isomorphism(obj, a.budget)
        e = duality.eta_bar(obj, a.budget)
        mapping = {obj.frame.worlds[x]: e.dual.frame.worlds[s] for x, s in enumerate(e.image)}
        kind = "eta"
    elif hasattr(obj, "elements"):
        D = duality.dual_frame(obj, a.budget)
        ok, problems = duality.theta_isomorphism(obj, D)
        mapping = {k: list(v) for k, v in duality.theta_bar(obj, D).items()}
        kind = "theta"
    else:
        raise InputError("expected an algebra or a general frame")
    stats = {"map": kind, "mapping": mapping}
    if ok:
        return Report("Isomorphism", 0, None, stats)
    return Report("NotIsomorphism", 1, [p.to_json() if hasattr(p, "to_json") else str(p) for p in problems],
                  stats)


def cmd_check_descriptive(a):
    G = serialize.load_general(a.general)
    rep = duality.check_semi_descriptive(G) if a.semi else duality.check_descriptive(G, a.budget)
    name = "SemiDescriptive" if a.semi else "Descriptive"
    if rep.passed:
        return Report(name, 0, None, {"checks": rep.to_json()})
    return Report("Not" + name, 1, {k: rep[k].to_json() for k in rep.failed()}, {"checks": rep.to_json()})


def cmd_prune(a):
    G = serialize.load_general(a.general)
    rep = duality.check_descriptive(G, a.budget)
    if not rep.passed:
        return Report("NotDescriptive", 1, {k: rep[k].to_json() for k in rep.failed()})
    try:
        P = duality.prune(G)
    except (CompanionNotFound, CompanionNotUnique) as exc:
        return Report(type(exc).__name__, 1, str(exc))
    removed = [G.frame.worlds[x] for x, c in enumerate(P.companion) if c != x]
    return Report("OK", 0, None, {"kept": P.general.frame.n, "removed": removed},
                  _emit_structure(P.general, a))


def cmd_segment_extension(a):
    obj = _load_any(a.file)
    if isinstance(obj, frames.CKModel):
        M, se = duality.segment_extension_model(obj)
        return Report("OK", 0, None, {"worlds": se.frame.n}, _emit_structure(M, a))
    if isinstance(obj, frames.CKFrame):
        se = duality.segment_extension(obj, a.budget)
        return Report("OK", 0, None, {"worlds": se.frame.n}, _emit_structure(se.frame, a))
    raise InputError("expected a frame or model file")


def cmd_sahlqvist(a):
    phi = _formula(a.formula)
    parts = corr.sahlqvist_correspondent(phi)
    whole = corr.conjunction(parts)
    result = {"correspondent": fol.fo_text(whole), "parts": [c.to_json() for c in parts]}
    if a.equiv is None:
        return Report(fol.fo_text(whole), 0, None, {"disjuncts": len(parts)}, result if a.json else None)
    other = fol.parse_fo(a.equiv)
    v = corr.fo_equivalent(whole, other, a.max_worlds, budget=a.budget)
    result["compared_with"] = fol.fo_text(other)
    if v:
        return Report("Equivalent", 0, None, {"frames": v.checked}, result)
    return Report("Distinguished", 1, v.to_json(), {}, result)


def cmd_st(a):
    st = corr.standard_translation(_formula(a.formula), a.var)
    return Report(fol.fo_text(st, unicode=a.unicode), 0)


def _kv(items: Sequence[str]) -> dict[str, list[str]]:
    out = {}
    for item in items:
        if "=" not in item:
            raise InputError(f"expected NAME=w1,w2,... but got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = [w for w in (s.strip() for s in v.split(",")) if w]
    return out


def cmd_fo_eval(a):
    fr = _load_any(a.frame)
    if isinstance(fr, (frames.CKModel, duality.GeneralFrame)):
        fr = fr.frame
    if not isinstance(fr, frames.CKFrame):
        raise InputError("expected a frame file")
    s = fol.parse_fo(a.sentence)
    interp = _kv(a.pred)
    for name, ws in interp.items():
        unknown = sorted(set(ws) - set(fr.worlds))
        if unknown:
            raise InputError(f"predicate {name} mentions unknown worlds {unknown}")
    assign = {k: v[0] for k, v in _kv(a.assign).items()}
    ok = fol.fo_eval(fr, s, interp, assign)
    return Report("True" if ok else "False", 0 if ok else 1)


def cmd_fo_equiv(a):
    s1, s2 = fol.parse_fo(a.first), fol.parse_fo(a.second)
    v = corr.fo_equivalent(s1, s2, a.max_worlds, budget=a.budget)
    if v:
        return Report("Equivalent", 0, None, {"frames": v.checked})
    return Report("Distinguished", 1, v.to_json())


def cmd_disjoint_union(a):
    frs = [serialize.load_frame(p) for p in a.frames]
    union, _ = frames.disjoint_union(frs)
    return Report("OK", 0, None, {"worlds": union.n}, _emit_structure(union, a))


def cmd_gen_subframe(a):
    fr = serialize.load_frame(a.frame)
    seed = [w for w in (s.strip() for s in a.seed.split(",")) if w]
    unknown = sorted(set(seed) - set(fr.worlds))
    if unknown:
        raise InputError(f"unknown seed worlds {unknown}")
    sub, _ = frames.generated_subframe(fr, seed)
    return Report("OK", 0, None, {"worlds": list(sub.worlds)}, _emit_structure(sub, a))


def cmd_morphic_image(a):
    src, tgt = serialize.load_frame(a.source), serialize.load_frame(a.target)
    m = frames.is_bounded_morphic_image(src, tgt, a.budget)
    if m is None:
        return Report("NoImage", 1, {"source_worlds": src.n, "target_worlds": tgt.n})
    return Report("Image", 0, None, {"map": m.mapping})


def cmd_bm_check(a):
    src, tgt = serialize.load_frame(a.source), serialize.load_frame(a.target)
    if Path(a.map).is_file():
        mapping = serialize.read_json(a.map)
    else:
        pairs = [p for p in re.split(r"[,;\s]+", a.map) if p]
        if any("=" not in p for p in pairs):
            raise InputError('map must be a JSON file or pairs like "a=b c=d"')
        mapping = dict(p.split("=", 1) for p in pairs)
    try:
        f = frames.check_bounded_morphism(mapping, src, tgt)
    except StructureError as exc:
        return Report("NotBoundedMorphism", 1, _violations(exc))
    return Report("BoundedMorphism", 0, None,
                  {"surjective": f.is_surjective(), "embedding": f.is_embedding()})


def cmd_gt_suite(a):
    from .corpus import frames_up_to
    from .gt import gt_suite
    if a.directory:
        paths = sorted(Path(a.directory).glob("*.json"))
        frs = []
        for p in paths:
            d = serialize.read_json(p)
            if "elements" not in d:
                frs.append(serialize.frame_from_json(d))
        if not frs:
            raise InputError(f"no frame files in {a.directory}")
    else:
        frs = frames_up_to(a.max_worlds)
    rep = gt_suite(frs, _formula(a.formula), budget=a.budget)
    stats = {"frames": rep.frames, "validating": rep.validating,
             "sections": {k: v.instances for k, v in rep.sections.items()}}
    if rep.passed:
        return Report("Closed", 0, None, stats)
    return Report("NotClosed", 1, {k: v.failures for k, v in rep.sections.items() if v.failures}, stats)


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable report")
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                        help="search budget (default %(default)s candidates)")

    p = argparse.ArgumentParser(prog="ck", description="Workbench for the constructive modal logic CK.")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_, description=help_)
        sp.set_defaults(fn=fn)
        return sp

    def out(sp):
        sp.add_argument("-o", "--output", help="write the resulting structure to this file")

    sp = add("parse", cmd_parse, "parse and pretty-print a formula")
    sp.add_argument("formula")
    sp.add_argument("--unicode", action="store_true")

    add("check-frame", cmd_check_frame, "validate a frame file").add_argument("file")
    add("check-model", cmd_check_model, "validate a model file").add_argument("file")
    add("check-algebra", cmd_check_algebra, "validate an algebra file").add_argument("file")

    sp = add("model-check", cmd_model_check, "evaluate a formula in a model")
    sp.add_argument("model")
    sp.add_argument("formula")
    sp.add_argument("--world")

    sp = add("frame-valid", cmd_frame_valid, "frame validity by valuation enumeration")
    sp.add_argument("frame")
    sp.add_argument("formula")
    sp.add_argument("--admissible", action="store_true",
                    help="for general frames: only admissible valuations")

    sp = add("alg-valid", cmd_alg_valid, "validity in a finite algebra")
    sp.add_argument("algebra")
    sp.add_argument("formula")

    sp = add("pdt", cmd_pdt, "degrees-of-truth consequence over finite algebras")
    sp.add_argument("conclusion")
    sp.add_argument("algebras", nargs="+")
    sp.add_argument("--premise", action="append", default=[])

    sp = add("complex-algebra", cmd_complex_algebra, "the algebra of upsets of a frame")
    sp.add_argument("frame")
    out(sp)

    sp = add("dual-frame", cmd_dual_frame, "the general frame of segments of an algebra")
    sp.add_argument("algebra")
    out(sp)

    add("double-dual", cmd_double_dual,
        "check theta (algebra file) or eta (general frame file) is an isomorphism").add_argument("file")

    sp = add("check-descriptive", cmd_check_descriptive, "D1-D4 (or D1, D2', D3, D4' with --semi)")
    sp.add_argument("general")
    sp.add_argument("--semi", action="store_true")

    sp = add("prune", cmd_prune, "restrict a descriptive frame to its convex closed companions")
    sp.add_argument("general")
    out(sp)

    sp = add("segment-extension", cmd_segment_extension, "segment extension of a frame or model")
    sp.add_argument("file")
    out(sp)

    sp = add("sahlqvist", cmd_sahlqvist, "first-order correspondent of a Sahlqvist formula")
    sp.add_argument("formula")
    sp.add_argument("--equiv", help="compare with this sentence on all small frames")
    sp.add_argument("--max-worlds", type=int, default=3)

    sp = add("st", cmd_st, "standard translation")
    sp.add_argument("formula")
    sp.add_argument("--var", default="x")
    sp.add_argument("--unicode", action="store_true")

    sp = add("fo-eval", cmd_fo_eval, "evaluate a first-order sentence on a frame")
    sp.add_argument("frame")
    sp.add_argument("sentence")
    sp.add_argument("--pred", action="append", default=[], metavar="P=w1,w2")
    sp.add_argument("--assign", action="append", default=[], metavar="x=w")

    sp = add("fo-equiv", cmd_fo_equiv, "compare two sentences on all small frames")
    sp.add_argument("first")
    sp.add_argument("second")
    sp.add_argument("--max-worlds", type=int, default=3)

    sp = add("disjoint-union", cmd_disjoint_union, "disjoint union of frames")
    sp.add_argument("frames", nargs="+")
    out(sp)

    sp = add("gen-subframe", cmd_gen_subframe, "subframe generated by a set of worlds")
    sp.add_argument("frame")
    sp.add_argument("--seed", default="", help="comma-separated worlds")
    out(sp)

    sp = add("morphic-image", cmd_morphic_image, "search a surjective bounded morphism")
    sp.add_argument("source")
    sp.add_argument("target")

    sp = add("bm-check", cmd_bm_check, "check a map is a bounded morphism")
    sp.add_argument("source")
    sp.add_argument("target")
    sp.add_argument("map", help='JSON file or "a=b c=d"')

    sp = add("gt-suite", cmd_gt_suite, "closure battery for the class of frames validating a formula")
    sp.add_argument("directory", nargs="?")
    sp.add_argument("--formula", default="[]p -> p")
    sp.add_argument("--max-worlds", type=int, default=3,
                    help="enumerated frames used when no directory is given")
    return p


def run(argv: Sequence[str] | None = None) -> tuple[int, str]:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), ""
    try:
        rep = args.fn(args)
    except BudgetExceeded as exc:
        rep = Report("BudgetExceeded", 3, {"required": exc.required, "allowed": exc.allowed,
                                           "what": exc.what})
    except ParseError as exc:
        rep = Report("ParseError", 2, {"message": exc.message, "offset": exc.offset})
    except StructureError as exc:
        rep = Report(type(exc).__name__, 2, _violations(exc))
    except CKError as exc:
        rep = Report(type(exc).__name__, 2, {"message": str(exc)})
    except ValueError as exc:
        rep = Report("InputError", 2, {"message": str(exc)})
    text = json.dumps(rep.as_json(), indent=2, ensure_ascii=False) if args.json else rep.as_text()
    return rep.code, text


def main(argv: Sequence[str] | None = None) -> int:
    code, text = run(argv)
    if text:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
