import io
import json
from importlib import resources

import pytest

from tncondense.cli import run


def corpus_path(name):
    return str(resources.files("tncondense").joinpath("corpus", f"{name}.json"))


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_validate_bouquet_example():
    code, out, _ = call("validate", corpus_path("figure6"))
    assert code == 0 and out.strip() == "valid"


def test_validate_reports_violations(tmp_path):
    doc = json.loads(open(corpus_path("figure6")).read())
    doc["pieces"][1]["expansion"] = 0.9
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, out, _ = call("validate", str(bad))
    assert code == 1 and "[expansion]" in out


def test_malformed_json_is_a_usage_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"pieces": [\n  1,\n')
    code, _, err = call("validate", str(bad))
    assert code == 2
    assert "line 3 column 1" in err


def test_missing_file_is_a_usage_error(tmp_path):
    code, _, err = call("validate", str(tmp_path / "nope.json"))
    assert code == 2 and "cannot read" in err


def test_missing_subcommand_is_a_usage_error(capsys):
    assert call()[0] == 2


def test_condense_then_classes(tmp_path):
    out_file = tmp_path / "c.json"
    code, _, _ = call("condense", corpus_path("figure6"), "-o", str(out_file))
    assert code == 0
    code, out, _ = call("classes", str(out_file), "--max-period", "6", "--format", "json")
    assert code == 0
    classes = json.loads(out)["classes"]
    assert classes and all(c["persistent"] is True for c in classes)


def test_classes_text_and_census(tmp_path):
    census = tmp_path / "census.json"
    census.write_text(json.dumps({"0": {"1": 2, "2": 1, "3": 0}, "1": {"3": 0}, "2": {"3": 0}}))
    code, out, _ = call("classes", corpus_path("pa_glue"), "--max-period", "3",
                        "--census", str(census))
    assert code == 0
    assert "persistent" in out and "pon" in out
    last = out.strip().splitlines()[-1].split()
    assert last == ["3", "1", "yes"]


def test_condense_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    call("condense", corpus_path("mixed"), "-o", str(a))
    call("condense", corpus_path("mixed"), "-o", str(b))
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.json"
    call("condense", str(a), "-o", str(c))
    assert a.read_bytes() == c.read_bytes()


@pytest.mark.parametrize("choice", ["left", "right"])
def test_adjust_with_collapse_choice(tmp_path, choice):
    out_file = tmp_path / "a.json"
    code, _, _ = call("adjust", corpus_path("figure6"), "-o", str(out_file), "--collapse", choice)
    assert code == 0
    doc = json.loads(out_file.read_text())
    choices = {r["circle"]: r["choice"] for r in doc["collapse_records"]}
    assert choices == {3: None, 4: choice, 5: choice}


def test_bad_collapse_choice():
    assert call("adjust", corpus_path("figure6"), "-o", "x.json", "--collapse", "up")[0] == 2


@pytest.mark.parametrize("fmt", ["text", "json", "dot"])
def test_report_formats(fmt):
    code, out, _ = call("report", corpus_path("figure6"), "--format", fmt)
    assert code == 0
    if fmt == "json":
        doc = json.loads(out)
        assert doc["graph"]["orbit_inventory"][0]["type"] == "FiniteOrderBranch"
    elif fmt == "dot":
        assert out.startswith("digraph")
    else:
        assert "genus 5" in out


def test_shadow_match_example(tmp_path):
    csv_file = tmp_path / "pairs.csv"
    code, out, _ = call("shadow", "match", "--matrix", "2,1,1,1", "--eps", "0.05",
                        "--max-period", "8", "--csv", str(csv_file))
    assert code == 0
    rep = json.loads(out)
    assert rep["ok"] and rep["max_d_phi"] < rep["C"]
    assert rep["pairs"] == 3554
    assert len(csv_file.read_text().splitlines()) == 3555


def test_shadow_output_is_deterministic():
    args = ("shadow", "match", "--max-period", "4", "--seed", "3")
    assert call(*args)[1] == call(*args)[1]


@pytest.mark.parametrize("experiment", ["twosided", "semiconj"])
def test_shadow_checks(experiment):
    code, out, _ = call("shadow", experiment, "--max-period", "4", "--m-range", "6")
    assert code == 0 and json.loads(out)["ok"]


def test_shadow_expansion_and_constant():
    code, out, _ = call("shadow", "expansion", "--samples", "500")
    assert code == 0 and json.loads(out)["ok"]
    code, out, _ = call("shadow", "constant", "--R", "1", "--matrix", "3,1,2,1")
    assert code == 0
    rep = json.loads(out)
    assert rep["C"] == pytest.approx(4 / (rep["lam"] - 1))


def test_shadow_flip_small():
    code, out, _ = call("shadow", "flip", "--maps", "2", "--iterations", "20000")
    assert code == 0
    rep = json.loads(out)
    assert rep["fixed_point_status"] == "certified" and rep["index_sum"] == 2


@pytest.mark.parametrize("matrix", ["1,1,1", "a,b,c,d"])
def test_bad_matrix_syntax(matrix):
    assert call("shadow", "match", "--matrix", matrix)[0] == 2


def test_non_hyperbolic_matrix():
    code, _, err = call("shadow", "match", "--matrix", "1,1,0,1")
    assert code == 2 and "hyperbolic" in err
