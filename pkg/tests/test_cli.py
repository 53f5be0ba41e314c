import json

import pytest

from orbit_metrics.cli import corpus, main, run
from orbit_metrics.errors import SchemaError
from orbit_metrics.io import dumps, validate

M3 = {
    "model": {"matrix": 3},
    "x": {"atomic": {"atoms": [{"point": [p, 0], "class": {"free": [1]}} for p in (-1, 0, 1)]}},
    "y": {"atomic": {"atoms": [{"point": [0, p], "class": {"free": [1]}} for p in (-1, 0, 1)]}},
}


def corpus_file(tmp_path, name):
    obj = dict(corpus())[name]
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return path


def test_schema_error_has_pointer():
    bad = json.loads(json.dumps(M3))
    bad["x"]["atomic"]["atoms"][1]["point"] = [0]
    with pytest.raises(SchemaError) as exc:
        validate(bad)
    assert exc.value.details["errors"][0]["pointer"].startswith("/x")


def test_metrics_command_on_corpus(tmp_path):
    src, out = corpus_file(tmp_path, "remark-2.22-a.json"), tmp_path / "out.json"
    assert main(["metrics", "--in", str(src), "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["D_T"] == 0.5 and report["D_c"] == 0.5


def test_bounds_command_on_circle(tmp_path):
    src, out = corpus_file(tmp_path, "circle-k1.json"), tmp_path / "out.json"
    assert main(["bounds", "--in", str(src), "--out", str(out)]) == 0
    iv = json.loads(out.read_text())["interval"]
    assert abs(iv["lower"] - 2) <= 0.12 and abs(iv["upper"] - 2) <= 0.12


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["metrics", "--in", str(bad)]) == 2
    assert "schema" in capsys.readouterr().err
    brat = {
        "model": {"group": {"kind": "bratteli", "maps": [[[1, 0], [0, 1]]], "stage_cap": 3},
                  "unit": {"free": [1, 1]}, "pairing": [["1/2", "1/2"]]},
        "x": {"atomic": {"atoms": [{"point": [0, 0], "class": {"free": [1, 0]}},
                                   {"point": [1, 0], "class": {"free": [0, 1]}}]}},
        "y": {"atomic": {"atoms": [{"point": [0, 0], "class": {"free": [0, 1]}},
                                   {"point": [1, 0], "class": {"free": [1, 0]}}]}},
    }
    f = tmp_path / "brat.json"
    f.write_text(json.dumps(brat))
    assert main(["metrics", "--in", str(f)]) == 3
    tors = corpus_file(tmp_path, "torsion.json")
    assert main(["refine", "--in", str(tors)]) == 4


def test_refine_and_unitary(tmp_path, capsys):
    assert main(["refine", "--in", str(corpus_file(tmp_path, "line-discs.json"))]) == 0
    assert json.loads(capsys.readouterr().out)["radius"] == 1.0
    assert main(["unitary", "--in", str(corpus_file(tmp_path, "hermitian.json"))]) == 0
    assert abs(json.loads(capsys.readouterr().out)["achieved"] - 0.5) < 1e-8
    assert main(["unitary", "--in", str(corpus_file(tmp_path, "line-discs.json"))]) == 2


def test_k1_requires_block():
    with pytest.raises(Exception):
        run("k1", M3)


def test_overrides_change_pitch():
    a = run("metrics", M3, {"grid_pitch": 0.1})
    b = run("metrics", M3, {"grid_pitch": 0.02})
    assert a["error_bounds"]["pitch"] == 0.1 and b["error_bounds"]["pitch"] == 0.02


def test_reports_are_deterministic():
    assert dumps(run("bounds", M3)) == dumps(run("bounds", M3))


def test_selftest_passes(tmp_path):
    out = tmp_path / "s.json"
    assert main(["selftest", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["passed"]
    names = {e["instance"] for e in report["instances"]}
    assert {"remark-2.22-a.json", "circle-k1.json", "infinitesimal.json"} <= names
