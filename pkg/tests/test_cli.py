import json
import subprocess
import sys
from fractions import Fraction

import pytest

from bellforge import catalog
from bellforge.cli import main
from bellforge.core import FullCorrelationInequality, GeneralInequality, from_document, serialize


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def chsh_file(tmp_path):
    p = tmp_path / "chsh.json"
    p.write_text(serialize(catalog.get("chsh").inequality))
    return str(p)


def test_bound(capsys, chsh_file):
    code, out, _ = run(capsys, "bound", chsh_file)
    assert code == 0
    assert json.loads(out) == {"lr_bound": "1/1", "algebraic_bound": "2/1"}


def test_tight_i44(capsys):
    code, out, _ = run(capsys, "tight", "catalog:i44")
    assert code == 0 and json.loads(out)["is_facet"] is True


def test_facets_22(capsys):
    code, out, _ = run(capsys, "facets", "--scenario", "2,2")
    d = json.loads(out)
    assert code == 0
    assert len(d["facets"]) == 16
    for doc in d["facets"]:
        assert isinstance(from_document(doc), FullCorrelationInequality)


def test_refusal_exit_code(capsys, monkeypatch):
    code, out, err = run(capsys, "facets", "--scenario", "3,3")
    assert code == 2 and out == ""
    assert err.startswith("bellforge: refused:") and err.count("\n") == 1
    monkeypatch.setenv("BELLFORGE_CAP", "5")
    code, _, err = run(capsys, "tight", "catalog:wzg3")
    assert code == 2 and "cap is 5" in err


def test_errors_exit_one(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "full", "settings": [2], "terms": [{"settings": [5], "coeff": "1"}]}')
    code, out, err = run(capsys, "bound", str(bad))
    assert code == 1 and out == ""
    assert "terms[0].settings" in err and err.count("\n") == 1
    code, _, err = run(capsys, "bound", str(tmp_path / "missing.json"))
    assert code == 1 and "cannot read" in err
    code, _, err = run(capsys, "catalog", "get", "nope")
    assert code == 1 and "unknown catalog entry" in err


def test_extend_modes(capsys, tmp_path, chsh_file):
    a1, a2 = catalog.single_party_facets(2)
    f1, f2 = tmp_path / "a1.json", tmp_path / "a2.json"
    f1.write_text(serialize(a1))
    f2.write_text(serialize(a2))
    code, out, _ = run(capsys, "extend", "--mode", "chsh", "--inputs", str(f1), str(f2), "--verify")
    d = json.loads(out)
    assert code == 0 and from_document(d["inequality"]) == catalog.get("chsh").inequality
    assert d["report"]["is_facet"] is True
    code, out, _ = run(capsys, "extend", "--mode", "general", "--inputs", str(f1), str(f2))
    assert json.loads(out)["report"] is None
    code, out, _ = run(capsys, "extend", "--mode", "four-term", "--inputs", chsh_file, "--flip", "1,4", "--verify")
    d = json.loads(out)
    assert code == 0 and d["report"]["is_facet"] is True
    code, _, err = run(capsys, "extend", "--mode", "four-term", "--inputs", chsh_file)
    assert code == 1 and "--flip" in err


def test_decompose_canonical_equivalent(capsys, chsh_file):
    code, out, _ = run(capsys, "decompose", chsh_file, "--party", "2")
    d = json.loads(out)
    assert code == 0 and len(d["components"]) == 2
    code, out, _ = run(capsys, "canonical", chsh_file)
    canon = json.loads(out)
    assert canon["canonical"] is True and from_document(canon).term_count() == 4
    code, out, _ = run(capsys, "equivalent", chsh_file, "catalog:chsh")
    assert json.loads(out) == {"equivalent": True}
    code, out, _ = run(capsys, "equivalent", "catalog:wzg3", "catalog:wzg4")
    assert json.loads(out) == {"equivalent": False}


def test_dehomogenize_homogenize(capsys, tmp_path, chsh_file):
    code, out, _ = run(capsys, "dehomogenize", chsh_file, "--fix", "1=1,2=1")
    g = from_document(json.loads(out))
    assert code == 0 and isinstance(g, GeneralInequality) and g.constant == Fraction(1, 2)
    p = tmp_path / "g.json"
    p.write_text(serialize(g))
    code, out, _ = run(capsys, "homogenize", str(p))
    h = from_document(json.loads(out))
    assert h.scenario.settings_per_party == (2, 2)
    code, _, err = run(capsys, "dehomogenize", chsh_file, "--fix", "x")
    assert code == 1 and "--fix" in err


def test_optimize_and_vcrit(capsys):
    code, out, _ = run(capsys, "optimize", "catalog:wzg8", "--restarts", "4", "--seed", "7")
    d = json.loads(out)
    assert code == 0 and d["seed"] == 7 and d["restarts"] == 4
    assert abs(d["violation_factor"] - 2) < 1e-9
    code, out, _ = run(capsys, "vcrit", "catalog:wzg8", "--quantum-value", "2")
    assert json.loads(out)["v_crit"] == 0.5
    code, _, err = run(capsys, "vcrit", "catalog:wzg8", "--quantum-value", "0")
    assert code == 1 and "noise" in err


def test_catalog_commands(capsys):
    code, out, _ = run(capsys, "catalog", "list")
    assert json.loads(out)["entries"] == catalog.list_names()
    code, out, _ = run(capsys, "catalog", "get", "wzg8")
    assert from_document(json.loads(out)["inequality"]) == catalog.get("wzg8").inequality
    code, out, _ = run(capsys, "catalog", "check", "wzg8")
    d = json.loads(out)
    assert code == 0 and d["all_pass"] is True


def test_output_is_deterministic(capsys):
    outs = []
    for _ in range(2):
        code, out, _ = run(capsys, "optimize", "catalog:i44", "--restarts", "3")
        outs.append(out)
    assert outs[0] == outs[1]
    assert json.loads(outs[0])["seed"] == 0


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "bellforge", "bound", "catalog:chsh"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["lr_bound"] == "1/1"
