import json
import xml.etree.ElementTree as ET

import pytest

from bograph import cli
from bograph.cli import load_example_text, main
from bograph.derive import DeriveError


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_validate(capsys):
    code, out, _ = run(capsys, "validate", "--example", "rlc")
    assert code == 0
    assert "strong bond 112" in out


def test_flipped_stroke_exits_3(tmp_path, capsys):
    bad = tmp_path / "bad.bg"
    bad.write_text(load_example_text("rlc").replace("element=c stroke=junction", "element=c stroke=element"))
    assert run(capsys, "validate", "--input", str(bad))[0] == 3


def test_missing_file_exits_2(tmp_path, capsys):
    code, _, err = run(capsys, "validate", "--input", str(tmp_path / "nope.bg"))
    assert code == 2
    assert "cannot read" in err


def test_parse_error_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.bg"
    bad.write_text(load_example_text("rlc").replace("element=r ", "element=zz "))
    code, _, err = run(capsys, "derive", "--input", str(bad))
    assert code == 2
    assert "rule 7" in err


def test_derive_rlc(capsys):
    code, out, _ = run(capsys, "derive", "--example", "rlc")
    assert code == 0
    assert len(out.splitlines()) == 6
    assert "sum(j=11): e(111) - e(112) - e(113) - e(114) = 0" in out


def test_derive_json(capsys):
    code, out, _ = run(capsys, "derive", "--example", "fig6", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert any(e["equation"] == "n*f(112) - f(131) - f(141) = 0" for e in doc)


def test_derive_failure_exits_4(monkeypatch, capsys):
    def boom(model):
        raise DeriveError("no case")

    monkeypatch.setattr(cli, "derive_system", boom)
    assert run(capsys, "derive", "--example", "rlc")[0] == 4


def test_dae_exits_5(tmp_path, capsys):
    text = load_example_text("rlc")
    text = text.replace("element=i stroke=element", "element=i stroke=junction")
    text = text.replace("element=c stroke=junction", "element=c stroke=element")
    path = tmp_path / "dae.bg"
    path.write_text(text)
    assert run(capsys, "statespace", "--input", str(path))[0] == 5


def test_missing_binding_exits_6(capsys):
    code, _, err = run(capsys, "stability", "--example", "rlc", "--params", "R=1")
    assert code == 6
    assert "L" in err or "C" in err
    assert run(capsys, "stability", "--example", "rlc", "--params", "all=1,C=0")[0] == 6
    assert run(capsys, "stability", "--example", "rlc", "--params", "R")[0] == 6


def test_statespace_json(capsys):
    code, out, _ = run(capsys, "statespace", "--example", "rlc", "--format", "json", "--params", "R=1,L=1,C=1")
    assert code == 0
    doc = json.loads(out)
    assert doc["A"] == [["-R/L", "-1/C"], ["1/L", "0"]]
    assert doc["A_numeric"] == [[-1.0, -1.0], [1.0, 0.0]]


def test_stability_json(capsys):
    code, out, _ = run(capsys, "stability", "--example", "hand-index", "--params", "all=1", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["classification"] == "Stable"
    assert doc["semantics"] == "standard"
    assert len(doc["eigenvalues"]) == 3


def test_stability_matrix_and_literal_flags(capsys):
    code, out, _ = run(capsys, "stability", "--matrix", "[[0,1],[-1,0]]")
    assert code == 0 and "MarginallyStable" in out
    code, out, _ = run(capsys, "stability", "--matrix", "[[1,0],[0,-1]]", "--semantics", "paper-literal", "--format", "json")
    flags = json.loads(out)["flags"]
    assert flags["stable_sys"] and flags["unstable_sys"]
    assert run(capsys, "stability", "--matrix", "[[1,2]]")[0] == 2


def test_sweep(capsys):
    code, out, _ = run(capsys, "stability", "--example", "rlc", "--params", "L=1,C=1", "--sweep", "R=-1:1:3")
    assert code == 0
    assert out.splitlines() == ["-1: Unstable", "0: MarginallyStable", "1: Stable"]


def test_corpus_override(tmp_path, monkeypatch, capsys):
    (tmp_path / "rlc.bg").write_text(load_example_text("rlc").replace('graph "rlc"', 'graph "local"'))
    monkeypatch.setenv("BOGRAPH_CORPUS_DIR", str(tmp_path))
    code, out, _ = run(capsys, "validate", "--example", "rlc")
    assert code == 0 and out.startswith("local:")
    assert run(capsys, "validate", "--example", "fig6")[0] == 2


def test_eigenplot_is_deterministic(tmp_path, capsys):
    outputs = []
    for k in range(2):
        prefix = tmp_path / f"run{k}"
        assert run(capsys, "eigenplot", "--example", "hand-index", "--params", "all=1", "--out", str(prefix))[0] == 0
        outputs.append(((tmp_path / f"run{k}.csv").read_bytes(), (tmp_path / f"run{k}.svg").read_bytes()))
    assert outputs[0] == outputs[1]
    rows = outputs[0][0].decode().splitlines()
    assert rows[0] == "re,im" and len(rows) == 4
    assert all(float(r.split(",")[0]) < 0 for r in rows[1:])
    root = ET.fromstring(outputs[0][1])
    assert root.tag.endswith("svg") and root.get("width") == "800" and root.get("height") == "600"
    ns = "{http://www.w3.org/2000/svg}"
    assert root.find(f".//{ns}line[@id='imaginary-axis']") is not None
    assert {t.text for t in root.iter(f"{ns}text")} >= {"Re", "Im"}


def test_requires_an_input(capsys):
    assert run(capsys, "derive")[0] == 2
    with pytest.raises(SystemExit):
        main(["derive", "--example", "nope"])
