import json

import pytest

import main
from main import EXIT_DISAGREE, EXIT_INPUT, EXIT_OK, EXIT_UNAVAILABLE

HZ_DOCUMENT = {
    "label": "hz-file",
    "x": {"rational": {"num": [1, 0, 1], "den": [0, 1]}},
    "y": {"rational": {"num": [0, 1]}},
}


def run(capsys, *argv):
    code = main.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_freeenergy_on_harer_zagier(capsys):
    code, out, err = run(capsys, "freeenergy", "--curve", "harer-zagier", "--gmax", "2")
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["curve_label"] == "harer-zagier"
    assert report["rows"] == [{"g": 2, "tr_value": "-1/240", "duality_value": "-1/240",
                               "closed_form": "-1/240", "agree": True}]
    assert report["timing_ms"] == {}
    assert report["metadata"]["computed_prefactor"] == "B_{2g}/(2g(2g-2))"
    assert "All available paths agree" in err


def test_freeenergy_output_is_deterministic(capsys):
    argv = ("freeenergy", "--curve", "log-points", "--param", "a=0,1", "--gmax", "2", "--method", "duality")
    first = run(capsys, *argv)[1]
    assert run(capsys, *argv)[1] == first
    assert json.loads(first)["rows"][0]["duality_value"] == "1/240"


def test_freeenergy_concurrent_paths(capsys):
    code, out, _ = run(capsys, "freeenergy", "--curve", "log-points", "--gmax", "2", "--method", "both", "--concurrent")
    assert code == EXIT_OK
    row = json.loads(out)["rows"][0]
    assert row["tr_value"] == row["duality_value"] == "1/240"
    assert row["closed_form"] is None


def test_unavailable_tr_path_is_a_marker(capsys):
    code, out, _ = run(capsys, "freeenergy", "--curve", "neg-r-spin", "--param", "r=3", "--param", "eps=2",
                       "--gmax", "2", "--format", "csv")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "g,tr_value,duality_value,closed_form,agree"
    assert lines[1] == "2,PATH_UNAVAILABLE,1/960,1/960,yes"


def test_only_unavailable_paths_exit_with_three(capsys):
    code, out, err = run(capsys, "freeenergy", "--curve", "neg-r-spin", "--param", "r=3", "--param", "eps=2",
                         "--gmax", "2", "--method", "tr")
    assert code == EXIT_UNAVAILABLE
    assert json.loads(out)["rows"][0]["tr_value"] == "PATH_UNAVAILABLE"
    assert "no requested path produced a value" in err


def test_unsupported_dual_is_a_marker(capsys, tmp_path):
    doc = dict(HZ_DOCUMENT, y={"rational": {"num": [0, 0, 1]}})
    path = tmp_path / "ramified-y.json"
    path.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "freeenergy", "--curve", str(path), "--gmax", "2", "--method", "duality")
    assert code == EXIT_UNAVAILABLE
    assert json.loads(out)["rows"][0]["duality_value"] == "UNSUPPORTED_DUAL"


def test_disagreement_exits_with_two(capsys, monkeypatch):
    monkeypatch.setattr(main, "_duality_value", lambda curve, g, settings: "1")
    code, out, err = run(capsys, "freeenergy", "--curve", "harer-zagier", "--gmax", "2", "--method", "both")
    assert code == EXIT_DISAGREE
    assert json.loads(out)["rows"][0]["agree"] is False
    assert "g=2: paths disagree" in err


def test_curve_document_with_overrides(capsys, tmp_path):
    path = tmp_path / "hz.json"
    path.write_text(json.dumps(HZ_DOCUMENT))
    code, out, _ = run(capsys, "freeenergy", "--curve", str(path), "--param", "label=mine",
                       "--gmax", "2", "--method", "both", "--format", "md")
    assert code == EXIT_OK
    assert out.splitlines()[0] == "| g | tr_value | duality_value | closed_form | agree |"
    assert "| 2 | -1/240 | -1/240 |  | yes |" in out


def test_report_to_a_file(capsys, tmp_path):
    target = tmp_path / "report.json"
    code, out, err = run(capsys, "freeenergy", "--gmax", "2", "--method", "duality", "--output", str(target))
    assert code == EXIT_OK
    assert out == ""
    assert json.loads(target.read_text())["rows"][0]["duality_value"] == "-1/240"
    assert "Report written to" in err


@pytest.mark.parametrize("argv", [
    (),
    ("freeenergy", "--gmax", "1"),
    ("freeenergy", "--method", "fast"),
    ("freeenergy", "--format", "xml"),
    ("freeenergy", "--curve", "no-such-curve"),
    ("freeenergy", "--param", "noequals"),
    ("freeenergy", "--curve", "log-points", "--param", "a=1,1"),
    ("verify-identities", "--suite", "everything"),
    ("emit-omega", "--g", "0", "--n", "1"),
    ("catalog", "show"),
])
def test_input_errors_exit_with_one(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_INPUT
    assert err.startswith("Error:")


def test_malformed_curve_document(capsys, tmp_path):
    path = tmp_path / "broken.toml"
    path.write_text("x = [")
    code, _, err = run(capsys, "freeenergy", "--curve", str(path))
    assert code == EXIT_INPUT
    assert "cannot read curve document" in err

    path = tmp_path / "hz.json"
    path.write_text(json.dumps(HZ_DOCUMENT))
    code, _, _ = run(capsys, "freeenergy", "--curve", str(path), "--param", "c=1")
    assert code == EXIT_INPUT


def test_emit_omega(capsys):
    code, out, _ = run(capsys, "emit-omega", "--curve", "harer-zagier", "--g", "0", "--n", "3")
    assert code == EXIT_OK
    dump = json.loads(out)
    assert dump["bergman"] is False
    assert {tuple(term["points"]) for term in dump["terms"]} <= {(a, b, c) for a in ("-1", "1")
                                                                  for b in ("-1", "1") for c in ("-1", "1")}
    assert all(term["orders"] == [2, 2, 2] for term in dump["terms"])


def test_emit_omega_on_airy(capsys):
    code, out, _ = run(capsys, "emit-omega", "--curve", "airy", "--g", "1", "--n", "1", "--format", "csv")
    assert code == EXIT_OK
    assert out.splitlines() == ["points,orders,coeff", '"[""0""]",[4],-1/8']


def test_emit_omega_without_rational_ramification(capsys):
    code, _, err = run(capsys, "emit-omega", "--curve", "neg-r-spin", "--param", "r=3", "--param", "eps=2",
                       "--g", "0", "--n", "3")
    assert code == EXIT_UNAVAILABLE
    assert "PATH_UNAVAILABLE" in err


def test_catalog_list(capsys):
    code, out, _ = run(capsys, "catalog", "list")
    assert code == EXIT_OK
    names = [entry["name"] for entry in json.loads(out)]
    assert "harer-zagier" in names and "gaiotto" in names

    code, out, _ = run(capsys, "catalog", "list", "--format", "csv")
    assert out.splitlines()[0] == "name,description,parameters,closed_form"


def test_verify_appendix_suite(capsys):
    code, out, _ = run(capsys, "verify-identities", "--suite", "appendix", "--gmax", "2")
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["verdicts"] == {"lemma-a1": "minus", "lemma-a3": "stated"}
    assert all(record["passed"] for record in report["records"])


@pytest.mark.slow
def test_verify_loop_equations(capsys):
    code, out, _ = run(capsys, "verify-identities", "--suite", "loop-equations", "--gmax", "2",
                       "--curve", "harer-zagier")
    assert code == EXIT_OK
    identities = {record["identity"] for record in json.loads(out)["records"]}
    assert identities == {"symmetry", "linear-loop", "residue-free", "lemma-3.1"}
