import io
import json
import subprocess
import sys

import pytest

from handlewave import families as fam
from handlewave.cli import Report, emit_report, main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def run_json(*argv):
    code, text = run(*argv, "--json")
    return code, [json.loads(line) for line in text.splitlines()]


def test_word_torsion():
    code, (doc,) = run_json("word", "ABAB")
    assert code == 0
    assert doc["result"]["homology"]["gcd"] == 2 and not doc["result"]["primitive"]
    assert [d["code"] for d in doc["diagnostics"]] == ["torsion"]
    assert doc["status"] == 0 and doc["schema"] == "handlewave.report/1"


def test_word_grammar_and_empty():
    _, (doc,) = run_json("word", "A B^2 a B^2")
    assert doc["result"]["word"] == "ABBaBB"
    code, (doc,) = run_json("word", "A^-1A")
    assert code == 0 and doc["result"]["word"] == "" and doc["diagnostics"][0]["code"] == "empty"


def test_word_from_file(tmp_path):
    f = tmp_path / "w.txt"
    f.write_text("A^2 B^3\n")
    code, (doc,) = run_json("word", "--file", str(f))
    assert code == 0 and doc["result"]["primitive"] is False and doc["result"]["whitehead_minimum"]


def test_syntax_error_exits_1():
    code, (doc,) = run_json("word", "C")
    assert code == 1 and doc["diagnostics"][0]["code"] == "syntax"
    assert "position 0" in doc["diagnostics"][0]["message"]


def test_usage_errors_exit_2(capsys):
    for argv in (["frobnicate"], ["word"], ["verify", "--alpha", "rect P=2 S=2", "--diagram", "x.json"],
                 ["verify", "--alpha", "rect P=two"]):
        with pytest.raises(SystemExit) as err:
            main(argv)
        assert err.value.code == 2
    capsys.readouterr()


def test_verify_pipeline():
    code, (doc,) = run_json("verify", "--alpha", "rect P=2 S=2", "--r", "noPS-a R=-1 U=1 a=1 b=1 c=1")
    assert code == 0
    assert doc["result"]["branch"] == "theorem-holds"
    assert doc["result"]["counts"] == {"unsigned": 1}
    _, (signed,) = run_json("verify", "--signed", "--alpha", "rect P=2 S=2", "--r", "noPS-a R=-1 U=1")
    assert set(signed["result"]["counts"]) == {"unsigned", "signed"}


def test_verify_constraint_violation():
    code, (doc,) = run_json("verify", "--alpha", "rect P=2 S=2 a=2 b=3", "--r", "noPS-a R=1 U=1")
    assert code == 1
    assert "branch" in doc["result"] and doc["result"]["branch"] is None
    assert doc["diagnostics"][0]["code"] == "rectangular-single-band"


def test_diagram_round_trip_through_cli(tmp_path):
    sys_ = fam.build_pair(fam.AlphaParams("rectangular", 2, 2), fam.RFamilyParams("noPS-a", R=-1, U=1))
    path = tmp_path / "d.json"
    path.write_text(sys_.to_json())
    code, (doc,) = run_json("analyze", "--diagram", str(path))
    assert code == 0
    assert doc["result"]["connectivity"] == {"connected": True, "cut_vertices": []}
    assert doc["result"]["positive"] is False and doc["result"]["type"] in ("TypeA", "TypeB")
    code, (doc,) = run_json("meridian", "--diagram", str(path))
    assert code == 0 and doc["result"]["wave"]["kind"] == "vertical"
    assert doc["result"]["alpha_count"] == {"unsigned": 1}
    code, (doc,) = run_json("analyze", "--diagram", str(path), "--curve", "Gamma")
    assert code == 1 and doc["diagnostics"][0]["code"] == "curve"


def test_missing_and_bad_files(tmp_path):
    code, (doc,) = run_json("analyze", "--diagram", str(tmp_path / "nope.json"))
    assert code == 1 and doc["diagnostics"][0]["code"] == "file-not-found"
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema": "other"}')
    code, (doc,) = run_json("analyze", "--diagram", str(bad))
    assert code == 1 and doc["diagnostics"][0]["code"] == "schema"
    code, (doc,) = run_json("sweep", str(tmp_path / "nogrid.json"))
    assert code == 1 and doc["diagnostics"][0]["code"] == "file-not-found"


def test_sweep_json_lines(tmp_path):
    grid = {"alpha": {"form": "rectangular", "P": 2, "S": 2},
            "r": {"figure": "noPS-a", "R": [-1, 1], "U": [1, 2], "a": 1, "b": 1, "c": 1}}
    path = tmp_path / "g.json"
    path.write_text(json.dumps(grid))
    code, docs = run_json("sweep", str(path))
    cases, summary = docs[:-1], docs[-1]
    assert code == 0
    assert all(d["record"] == "case" for d in cases)
    res = summary["result"]
    assert res["record"] == "summary" and res["cases"] == len(cases) and res["points"] == 4
    assert res["skipped_by_reason"] == {"gcd(S,U)=1": 2}


def test_empty_sweep(tmp_path):
    path = tmp_path / "empty.json"
    path.write_text("{}")
    code, docs = run_json("sweep", str(path))
    assert code == 0 and len(docs) == 1 and docs[0]["result"]["cases"] == 0


def test_bad_grid(tmp_path):
    path = tmp_path / "g.json"
    path.write_text(json.dumps({"alpha": {"form": "rectangular"}, "r": {"figure": "nope"}}))
    code, (doc,) = run_json("sweep", str(path))
    assert code == 1 and doc["diagnostics"][0]["code"] == "schema"


def test_output_is_deterministic(tmp_path):
    argv = ("verify", "--alpha", "nonrect P=2 S=2 a=1 b=2", "--r", "noPS-a U=1 a=1 b=1 c=1")
    assert run(*argv, "--json") == run(*argv, "--json")
    assert run(*argv) == run(*argv)


def test_text_mode_and_quiet():
    code, text = run("word", "AABBB")
    assert code == 0 and "homology" in text
    assert run("word", "AABBB", "-q") == (0, "")
    code, text = run("word", "C", "-q")
    assert code == 1 and text


def test_report_round_trip():
    rep = Report("word", {"word": "AB"}, {"x": 1}, [{"level": "error", "code": "c", "message": "m"}])
    back = Report.from_dict(json.loads(emit_report(rep, True)))
    assert back.to_dict() == rep.to_dict() and back.status == 1
    with pytest.raises(ValueError):
        Report.from_dict({"schema": "x/1"})


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "handlewave.cli", "word", "AB", "--json"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["primitive"] is True
