"""JSON formats for frames, models, algebras and general frames."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

from .algebra import FiniteCKAlgebra, build_algebra
from .duality import GeneralFrame
from .errors import InputError
from .frames import CKFrame, CKModel


def _need(d: Mapping, *keys: str):
    missing = [k for k in keys if k not in d]
    if missing:
        raise InputError(f"missing field(s): {', '.join(missing)}")


def _pairs(raw, what: str) -> list[tuple[str, str]]:
    try:
        return [(str(a), str(b)) for a, b in raw]
    except (TypeError, ValueError):
        raise InputError(f"{what} must be a list of [a, b] pairs") from None


def frame_from_json(d: Mapping[str, Any]) -> CKFrame:
    """Reflexive ≤ pairs may be omitted; they are the only thing added on load."""
    _need(d, "worlds", "exploding", "leq", "r")
    worlds = [str(w) for w in d["worlds"]]
    leq = _pairs(d["leq"], "leq") + [(w, w) for w in worlds]
    return CKFrame(worlds, str(d["exploding"]), leq, _pairs(d["r"], "r"))


def model_from_json(d: Mapping[str, Any]) -> CKModel:
    frame = frame_from_json(d)
    _need(d, "valuation")
    val = d["valuation"]
    if not isinstance(val, Mapping):
        raise InputError("valuation must map atoms to lists of worlds")
    unknown = sorted({w for ws in val.values() for w in ws} - set(frame.worlds))
    if unknown:
        raise InputError(f"valuation mentions unknown worlds: {unknown}")
    return CKModel.from_names(frame, val)


def general_from_json(d: Mapping[str, Any]) -> GeneralFrame:
    frame = frame_from_json(d)
    _need(d, "admissible")
    sets = []
    for ws in d["admissible"]:
        unknown = sorted(set(ws) - set(frame.worlds))
        if unknown:
            raise InputError(f"admissible set mentions unknown worlds: {unknown}")
        sets.append(frame.mask(ws))
    return GeneralFrame(frame, sets)


def algebra_from_json(d: Mapping[str, Any]) -> FiniteCKAlgebra:
    _need(d, "elements", "leq", "box", "dia")
    derive = bool(d.get("derive", False))
    tables = {k: d.get(k) for k in ("meet", "join", "implies")}
    if not derive and any(v is None for v in tables.values()):
        raise InputError('give meet, join and implies tables or set "derive": true')
    if derive:
        tables = {k: None for k in tables}
    return build_algebra([str(e) for e in d["elements"]], _pairs(d["leq"], "leq"),
                         d["box"], d["dia"], **tables)


def read_json(path: str | Path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(data, dict):
        raise InputError(f"{path}: expected a JSON object")
    return data


def load_frame(path) -> CKFrame:
    return frame_from_json(read_json(path))


def load_model(path) -> CKModel:
    return model_from_json(read_json(path))


def load_algebra(path) -> FiniteCKAlgebra:
    return algebra_from_json(read_json(path))


def load_general(path) -> GeneralFrame:
    return general_from_json(read_json(path))


def dumps(obj) -> str:
    data = obj.to_json() if hasattr(obj, "to_json") else obj
    return json.dumps(data, indent=2, ensure_ascii=False)


def save(obj, path) -> None:
    Path(path).write_text(dumps(obj) + "\n", encoding="utf-8")
