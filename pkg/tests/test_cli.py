import io
import json
import pathlib
import subprocess
import sys

import pytest

from formalmod.cli import run

GOLDEN = pathlib.Path(__file__).parent / "golden"


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), stdout=out)
    return code, out.getvalue()


def call_json(*argv):
    code, text = call(*argv)
    return code, json.loads(text)


@pytest.mark.parametrize("name,argv", [
    ("galois_2_2_1", "galois --p 2 --h 2 --n 1"),
    ("torsion_3_3_2", "torsion --p 3 --q 3 --n 2"),
    ("construct_2_2_8_8", "construct --p 2 --q 2 --N 8 --D 8"),
    ("endo_2_4_2", "endo --p 2 --q 4 --m 2"),
    ("mseq_2_4", "mseq --p 2 --q 4 --D 64 --n-max 4"),
])
def test_golden_outputs(name, argv):
    code, text = call(*argv.split())
    assert code == 0
    assert text == (GOLDEN / f"{name}.json").read_text()


def test_construct_gives_multiplicative_law():
    code, doc = call_json("construct", "--p", "2", "--q", "2", "--N", "8", "--D", "16")
    assert code == 0 and doc["schema"] == 1
    F = doc["F"]
    nonzero = {(i, j): t for i, row in enumerate(F) for j, t in enumerate(row) if not t.startswith("0 ")}
    assert nonzero == {(1, 0): "1 (mod 2^8)", (0, 1): "1 (mod 2^8)", (1, 1): "1 (mod 2^8)"}


def test_construct_verify_roundtrip(tmp_path):
    for argv in (["--p", "3", "--q", "9", "--D", "12"], ["--p", "2", "--q", "4"], ["--law", "multiplicative", "--p", "3"]):
        path = tmp_path / "m.json"
        assert call("construct", *argv, "--output", str(path))[0] == 0
        code, doc = call_json("verify", "--input", str(path))
        assert code == 0 and doc["valid"] is True


def test_verify_rejects_broken_descriptor(tmp_path):
    code, doc = call_json("construct", "--p", "2", "--q", "2", "--N", "8", "--D", "8")
    doc["F"][2][1] = "1 (mod 2^8)"  # X^2 Y coefficient: breaks commutativity
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    code, out = call_json("verify", "--input", str(path))
    assert code == 1 and out["error"]["type"] == "AxiomError"
    assert out["error"]["monomial"] == [1, 2] or out["error"]["monomial"] == [2, 1]


def test_deterministic_output():
    assert call("torsion", "--p", "2", "--q", "4", "--n", "2") == call("torsion", "--p", "2", "--q", "4", "--n", "2")


def test_torsion_report_values():
    code, doc = call_json("torsion", "--p", "3", "--q", "3", "--n", "2")
    level2 = doc["levels"][1]
    assert level2["valuation"] == "1/6" and level2["new_count"] == 6 and level2["degree"] == 6 and level2["m"] == 1


def test_galois_report():
    code, doc = call_json("galois", "--p", "2", "--h", "2", "--n", "1")
    assert doc["order"] == 3 and doc["abelian"] is True and doc["derived_lengths"] == [3, 1]


def test_height_outputs():
    assert call_json("height", "--p", "3", "--q", "9")[1]["height"] == 2
    doc = call_json("height", "--law", "additive", "--p", "2", "--D", "20")[1]
    assert doc["height"] is None and doc["height_bound"] == "h > 4"


def test_isom_between_descriptors(tmp_path):
    g = tmp_path / "g.json"
    call("construct", "--p", "2", "--q", "2", "--D", "32", "--frob", "2,1,2", "--output", str(g))
    code, doc = call_json("isom", "--p", "2", "--q", "2", "--D", "32", "--other", str(g))
    assert code == 0 and doc["found"] and doc["series"][1] == "1 (mod 2^12)"
    code, doc = call_json("isom", "--law", "additive", "--p", "2", "--D", "32", "--other", str(g))
    assert code == 0 and not doc["found"] and "heights differ" in doc["reason"]


def test_text_table():
    code, text = call("torsion", "--p", "3", "--q", "3", "--n", "2", "--format", "text")
    lines = text.splitlines()
    assert lines[0].split() == ["n", "new_count", "valuation", "degree", "e", "totally_ramified", "m"]
    assert lines[2].split() == ["2", "6", "1/6", "6", "6", "True", "1"]


@pytest.mark.parametrize("argv,code,kind", [
    ("construct --p 4 --q 4", 2, "ConfigError"),
    ("construct --p 2 --q 6", 2, "ConfigError"),
    ("torsion --p 2 --q 4 --n 3", 2, "CapError"),
    ("verify --input /nonexistent.json", 2, "FileNotFoundError"),
    ("galois --p 2 --h 2", 2, "ConfigError"),
    ("construct --p 2 --q 2 --frob 4,1", 1, "LubinTateError"),
    ("frobnicate", 2, "ConfigError"),
])
def test_errors_are_json(argv, code, kind):
    got, doc = call_json(*argv.split())
    assert got == code and doc["schema"] == 1 and doc["error"]["type"] == kind


def test_cap_error_names_required_cap():
    _, doc = call_json("torsion", "--p", "2", "--q", "4", "--n", "3")
    assert "need D >= 64" in doc["error"]["message"]


def test_environment_override(monkeypatch):
    monkeypatch.setenv("FORMALMOD_N", "5")
    _, doc = call_json("construct", "--p", "2", "--q", "2", "--D", "4")
    assert doc["N"] == 5
    monkeypatch.setenv("FORMALMOD_N", "five")
    code, doc = call_json("construct", "--p", "2", "--q", "2", "--D", "4")
    assert code == 2 and "FORMALMOD_N" in doc["error"]["message"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "formalmod.cli", "galois", "--p", "3", "--h", "1", "--n", "1"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["order"] == 2
