import json
from importlib import resources

import pytest

from cuspspin import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr()


def test_polytope_verify(capsys):
    code, out = run(capsys, "polytope", "verify")
    assert code == 0 and "0 failed" in out.out


def test_f_vector(capsys):
    code, out = run(capsys, "polytope", "faces", "--f-vector")
    assert out.out.strip() == "46 116 92 22 1"


def test_gram(capsys):
    code, out = run(capsys, "polytope", "gram")
    assert code == 0 and len(out.out.splitlines()) == 231


def test_build_and_check(capsys, tmp_path):
    code, out = run(capsys, "build", "n0")
    assert code == 0 and out.out.startswith("complex N0 polytope P3 cells 8")
    flat = tmp_path / "n0flat.tbl"
    flat.write_text(out.out)
    code, out = run(capsys, "check", str(flat))
    assert code == 0 and "0 failed" in out.out


def test_check_failure(capsys, tmp_path):
    # two cells glued along both facets of one corner close it after two steps
    p = tmp_path / "bad.tbl"
    p.write_text("complex B polytope P3 cells 2\npair 0.H2 1.H2 map identity\npair 0.C13 1.C13 map identity\n")
    code, out = run(capsys, "check", str(p))
    assert code == 1
    assert "interior-cycle(2)" in out.out


def test_input_errors(capsys, tmp_path):
    code, out = run(capsys, "check", str(tmp_path / "missing.tbl"))
    assert code == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("stage nonsense on\n")
    code, out = run(capsys, "pipeline", "--config", str(bad))
    assert code == 2 and "config line 1" in out.err


def test_perturbed_polytope_stops_pipeline(capsys, tmp_path):
    cfg = tmp_path / "perturbed.cfg"
    cfg.write_text("normal E1 2*r2, 2, 0, 0, 2*r3\n")
    code, out = run(capsys, "pipeline", "--config", str(cfg))
    assert code == 1
    assert "FAIL  polytope.right_angled" in out.out
    assert "stopped after stage polytope" in out.out
    assert "sigma" not in out.out


def test_stage_filter(capsys):
    code, out = run(capsys, "pipeline", "--stage", "polytope")
    assert code == 0
    assert all(line.split()[1].startswith("polytope.") for line in out.out.splitlines()[:-1])


def test_json_report(capsys):
    code, out = run(capsys, "pipeline", "--stage", "symmetry", "--format", "json")
    body = json.loads(out.out)
    assert body["passed"] and any(c["name"] == "symmetry.order" for c in body["checks"])


def test_deterministic(capsys, tmp_path):
    cfg = tmp_path / "quick.cfg"
    cfg.write_text("stage homology off\nstage selfintersect off\nstage doubling off\n")
    first = run(capsys, "pipeline", "--config", str(cfg))[1].out
    second = run(capsys, "pipeline", "--config", str(cfg))[1].out
    assert first == second


def test_double(capsys):
    code, out = run(capsys, "double", "sigmathick", "-k", "2", "--format", "json")
    body = json.loads(out.out)
    assert code == 0 and body["m"] == 20 and [s["cells"] for s in body["steps"]] == [8, 16, 32]


def test_homology(capsys):
    code, out = run(capsys, "homology", "n0", "--rel-boundary", "--format", "json")
    body = json.loads(out.out)
    assert body["relative"] and len(body["betti"]) == 4


def test_fixtures(capsys):
    code, out = run(capsys, "selfintersect", "--fixtures")
    assert code == 0 and "0 failed" in out.out


def test_unknown_surface(capsys):
    code, out = run(capsys, "selfintersect", "--surface", "Q", "--complex", "n0")
    assert code == 2


def test_default_config_shipped():
    cfg = resources.files("cuspspin") / "data" / "default.cfg"
    parsed = cli.load_config(str(cfg))
    assert set(parsed.tables) == {"sigma", "n0", "n1", "n2", "n12", "x"}
    assert all(parsed.stages.values())
