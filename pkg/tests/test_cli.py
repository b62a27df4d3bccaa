import json
import subprocess
import sys

import pytest

from ckbench import serialize
from ckbench.algebra import chain
from ckbench.cli import run
from ckbench.corpus import cluster_frame, one_world
from ckbench.duality import dual_frame
from ckbench.frames import CKFrame, CKModel

SERIAL = "forall x. exists t. R(x,t)"


def reflexive():
    return CKFrame(["x", "e"], "e", [("x", "x"), ("x", "e"), ("e", "e")],
                   [("x", "x"), ("x", "e"), ("e", "e")])


def dead_end():
    return CKFrame(["x", "e"], "e", [("x", "x"), ("e", "e")], [("e", "e")])


@pytest.fixture
def files(tmp_path):
    out = {}

    def put(name, obj):
        path = tmp_path / name
        serialize.save(obj, path)
        out[name.split(".")[0]] = str(path)
    put("refl.json", reflexive())
    put("dead.json", dead_end())
    put("cluster.json", cluster_frame())
    put("one.json", one_world())
    put("chain2.json", chain(2))
    put("chain3.json", chain(3))
    put("dual2.json", dual_frame(chain(2)).general)
    put("model.json", CKModel.from_names(cluster_frame(), {"p": ["e", "y1"], "q": ["e", "y2"]}))
    (tmp_path / "broken.json").write_text(json.dumps(
        {"worlds": ["x", "e"], "exploding": "e", "leq": [["e", "x"]], "r": [["e", "e"]]}))
    out["broken"] = str(tmp_path / "broken.json")
    (tmp_path / "garbage.json").write_text("{nope")
    out["garbage"] = str(tmp_path / "garbage.json")
    out["dir"] = str(tmp_path)
    return out


def verdict(argv):
    code, text = run(argv + ["--json"])
    return code, json.loads(text)


class TestExamples:
    def test_frame_valid(self, files):
        assert run(["frame-valid", files["refl"], "[]p -> p"]) == (0, "Valid")

    def test_frame_valid_countermodel(self, files):
        code, rep = verdict(["frame-valid", files["cluster"], "<>(p | q) -> <>p | <>q"])
        assert code == 1 and rep["verdict"] == "Countermodel"
        assert rep["witness"]["world"] == "x1"

    def test_sahlqvist_equiv(self):
        code, text = run(["sahlqvist", "[]p -> <>p", "--equiv", SERIAL, "--max-worlds", "3"])
        assert code == 0 and text.splitlines()[0] == "Equivalent"

    def test_sahlqvist_prints_correspondent(self):
        code, text = run(["sahlqvist", "[]p -> p"])
        assert code == 0
        assert text == ("forall x. (x != ff -> exists v0. (x <= v0 & exists v1. (R(v0,v1) & v1 <= x)))"
                        "\ndisjuncts: 1")

    def test_dual_frame(self, files, tmp_path):
        out = tmp_path / "d.json"
        code, text = run(["dual-frame", files["chain2"], "-o", str(out)])
        assert code == 0
        G = serialize.load_general(out)
        assert G.frame.n == 4
        assert G.to_json() == dual_frame(chain(2)).general.to_json()


class TestVerdicts:
    def test_parse(self):
        code, rep = verdict(["parse", "[]p -> p"])
        assert code == 0 and rep["stats"]["sahlqvist"] is True and rep["result"] == "[]p -> p"

    def test_parse_error(self):
        code, rep = verdict(["parse", "[]p ->"])
        assert code == 2 and rep["verdict"] == "ParseError" and rep["witness"]["offset"] == 4

    def test_check_frame(self, files):
        assert run(["check-frame", files["refl"]])[0] == 0
        code, rep = verdict(["check-frame", files["broken"]])
        assert code == 1 and rep["verdict"] == "Invalid"
        assert {v["kind"] for v in rep["witness"]} == {"ExplodingNotMaximal"}

    def test_check_model_and_algebra(self, files):
        assert run(["check-model", files["model"]]) == (0, "Valid model\nsize: 5")
        assert run(["check-algebra", files["chain3"]]) == (0, "Valid algebra\nsize: 3")

    def test_model_check(self, files):
        code, rep = verdict(["model-check", files["model"], "<>(p | q)", "--world", "x1"])
        assert code == 0 and rep["verdict"] == "Forced"
        code, rep = verdict(["model-check", files["model"], "<>p | <>q", "--world", "x1"])
        assert code == 1 and rep["verdict"] == "NotForced"
        code, rep = verdict(["model-check", files["model"], "<>p | <>q"])
        # the y worlds have no successors at all
        assert code == 1 and rep["witness"] == {"worlds": ["x1", "x2", "y1", "y2"]}

    def test_alg_valid(self, files):
        assert run(["alg-valid", files["chain2"], "[]p -> p"])[0] == 0
        code, rep = verdict(["alg-valid", files["chain2"], "p"])
        assert code == 1 and rep["witness"]["valuation"] == {"p": "0"}

    def test_pdt(self, files):
        assert run(["pdt", "q", files["chain2"], "--premise", "p", "--premise", "p -> q"])[0] == 0
        assert run(["pdt", "q", files["chain3"], "--premise", "p"])[0] == 1

    def test_complex_algebra(self, files):
        code, rep = verdict(["complex-algebra", files["cluster"]])
        assert code == 0 and rep["stats"]["elements"] == len(cluster_frame().upsets())

    def test_double_dual(self, files):
        code, rep = verdict(["double-dual", files["chain3"]])
        assert code == 0 and rep["verdict"] == "Isomorphism" and rep["stats"]["map"] == "theta"
        code, rep = verdict(["double-dual", files["dual2"]])
        assert code == 0 and rep["stats"]["map"] == "eta"

    def test_check_descriptive(self, files):
        assert run(["check-descriptive", files["dual2"]])[0] == 0
        assert run(["check-descriptive", files["dual2"], "--semi"])[0] == 0

    def test_prune(self, files):
        code, rep = verdict(["prune", files["dual2"]])
        assert code == 0 and rep["stats"]["removed"] == []

    def test_segment_extension(self, files):
        code, rep = verdict(["segment-extension", files["one"]])
        assert code == 0 and rep["stats"]["worlds"] == 1
        assert run(["segment-extension", files["model"]])[0] == 0

    def test_st(self):
        assert run(["st", "[]p"]) == (0, "forall v0. (x <= v0 -> forall v1. (R(v0,v1) -> P(v1)))")
        assert run(["st", "p", "--var", "y"]) == (0, "P(y)")

    def test_fo_eval(self, files):
        assert run(["fo-eval", files["dead"], SERIAL]) == (1, "False")
        assert run(["fo-eval", files["refl"], SERIAL]) == (0, "True")
        assert run(["fo-eval", files["dead"], "exists y. (P(y) & y = x)",
                    "--pred", "P=x", "--assign", "x=x"]) == (0, "True")
        assert run(["fo-eval", files["dead"], "forall y. P(y)", "--pred", "P=zz"])[0] == 2

    def test_fo_equiv(self):
        assert run(["fo-equiv", "forall x. x <= x", "true"])[0] == 0
        code, rep = verdict(["fo-equiv", SERIAL, "true"])
        assert code == 1 and rep["verdict"] == "Distinguished"

    def test_constructions(self, files, tmp_path):
        code, rep = verdict(["disjoint-union", files["refl"], files["dead"]])
        assert code == 0 and rep["stats"]["worlds"] == 3
        code, rep = verdict(["gen-subframe", files["cluster"], "--seed", "y1"])
        assert code == 0 and rep["stats"]["worlds"] == ["e", "y1"]
        assert run(["gen-subframe", files["cluster"], "--seed", "zz"])[0] == 2

    def test_morphisms(self, files):
        code, rep = verdict(["morphic-image", files["refl"], files["one"]])
        assert code == 1 and rep["verdict"] == "NoImage"
        code, rep = verdict(["morphic-image", files["refl"], files["refl"]])
        assert code == 0 and rep["stats"]["map"] == {"e": "e", "x": "x"}
        assert run(["bm-check", files["refl"], files["refl"], "x=x e=e"])[0] == 0
        code, rep = verdict(["bm-check", files["refl"], files["refl"], "x=e e=e"])
        assert code == 1 and rep["verdict"] == "NotBoundedMorphism"

    def test_gt_suite(self, files):
        code, rep = verdict(["gt-suite", "--max-worlds", "2"])
        assert code == 0 and rep["verdict"] == "Closed"


class TestErrors:
    def test_budget(self, files):
        code, rep = verdict(["alg-valid", files["chain3"], "p & q & r", "--budget", "5"])
        assert code == 3 and rep["verdict"] == "BudgetExceeded" and rep["witness"]["allowed"] == 5

    def test_bad_json(self, files):
        code, rep = verdict(["check-frame", files["garbage"]])
        assert code == 2 and rep["verdict"] == "InputError"

    def test_missing_file(self, files):
        assert run(["check-frame", files["dir"] + "/nope.json"])[0] == 2

    def test_wrong_kind(self, files):
        assert run(["frame-valid", files["chain2"], "p"])[0] == 2

    def test_usage(self):
        assert run(["no-such-command"])[0] == 2
        assert run([])[0] == 2

    def test_not_sahlqvist(self):
        code, rep = verdict(["sahlqvist", "<>p -> p"])
        assert code == 2 and rep["verdict"] == "NotSahlqvist"

    def test_structure_error_is_reported(self, files):
        code, rep = verdict(["frame-valid", files["broken"], "p"])
        assert code == 2 and rep["witness"][0]["kind"] == "ExplodingNotMaximal"


def test_json_shape(files):
    _, rep = verdict(["frame-valid", files["refl"], "[]p -> p"])
    assert set(rep) == {"verdict", "witness", "stats"}


def test_deterministic(files):
    argv = ["dual-frame", files["chain3"], "--json"]
    assert run(argv) == run(argv)


def test_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "ckbench", "frame-valid", files["dead"], "[]p -> p"],
                          capture_output=True, text=True)
    assert proc.returncode == 1 and proc.stdout.startswith("Countermodel")
