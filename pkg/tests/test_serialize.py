import json

import pytest

from ckbench import serialize
from ckbench.algebra import chain
from ckbench.corpus import cluster_frame, general_frame_corpus
from ckbench.duality import dual_frame
from ckbench.errors import FrameError, InputError
from ckbench.frames import CKModel


def test_frame_round_trip(frames3, tmp_path):
    for f in frames3[::7] + [cluster_frame()]:
        path = tmp_path / "f.json"
        serialize.save(f, path)
        g = serialize.load_frame(path)
        assert g.to_json() == f.to_json()


def test_reflexive_pairs_optional():
    d = {"worlds": ["x", "e"], "exploding": "e", "leq": [["x", "e"]], "r": [["e", "e"]]}
    f = serialize.frame_from_json(d)
    assert ("x", "x") in f.leq_pairs()


def test_model_round_trip():
    m = CKModel.from_names(cluster_frame(), {"p": ["e", "y1"], "q": ["e"]})
    m2 = serialize.model_from_json(json.loads(serialize.dumps(m)))
    assert m2.to_json() == m.to_json()


def test_model_unknown_world():
    d = cluster_frame().to_json() | {"valuation": {"p": ["e", "zz"]}}
    with pytest.raises(InputError):
        serialize.model_from_json(d)


def test_algebra_round_trip(corpus_algebras):
    for A in corpus_algebras[::10]:
        B = serialize.algebra_from_json(json.loads(serialize.dumps(A)))
        assert B.to_json() == A.to_json()


def test_algebra_derive():
    d = chain(3).to_json()
    short = {k: d[k] for k in ("elements", "leq", "box", "dia")} | {"derive": True}
    assert serialize.algebra_from_json(short).to_json() == d
    with pytest.raises(InputError):
        serialize.algebra_from_json({k: d[k] for k in ("elements", "leq", "box", "dia")})


def test_general_round_trip():
    for _, G in general_frame_corpus()[:12]:
        H = serialize.general_from_json(json.loads(serialize.dumps(G)))
        assert H.to_json() == G.to_json()
    G = dual_frame(chain(2)).general
    assert serialize.general_from_json(G.to_json()).to_json() == G.to_json()


@pytest.mark.parametrize("d", [
    {"worlds": ["e"], "exploding": "e", "leq": []},
    {"worlds": ["e"], "exploding": "e", "leq": [["e"]], "r": []},
])
def test_malformed_frames(d):
    with pytest.raises(InputError):
        serialize.frame_from_json(d)


def test_structural_errors_pass_through():
    d = {"worlds": ["x", "e"], "exploding": "e", "leq": [["e", "x"]], "r": [["e", "e"]]}
    with pytest.raises(FrameError):
        serialize.frame_from_json(d)


def test_read_json_errors(tmp_path):
    with pytest.raises(InputError):
        serialize.read_json(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    with pytest.raises(InputError) as info:
        serialize.read_json(bad)
    assert "line 1" in str(info.value)
    arr = tmp_path / "arr.json"
    arr.write_text("[]")
    with pytest.raises(InputError):
        serialize.read_json(arr)
