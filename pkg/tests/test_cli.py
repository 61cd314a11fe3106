import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from bfvkit.cli import main, selftest
from bfvkit.modelspec import SpecError, load_spec, parse_spec, run

SPECS = Path(__file__).resolve().parent.parent / "demos" / "specs"


def spec_path(name):
    return str(SPECS / f"{name}.spec")


def call(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_spec_fields():
    spec = load_spec(spec_path("so3"))
    assert spec.pairs == 3 and spec.momentum == "p" and spec.N == 4 and spec.D == 3
    assert len(spec.constraints) == 3 and spec.pipeline[0] == "tate"
    assert parse_spec(spec.canonical()).canonical() == spec.canonical()


@pytest.mark.parametrize("text, where", [
    ("[variables]\npairs = 2\n[constraints]\nx1*z3\n", "line 4, column 1"),
    ("[variables]\npairs = two\n", "line 2, column 9"),
    ("[colours]\n", "line 1"),
    ("pairs = 2\n", "line 1, column 1"),
    ("[variables]\npairs = 1\n[bounds]\nN = 1\n", "N must be at least 2"),
    ("[variables]\npairs = 1\n[bounds]\nK = 0\n", "K must be at least 1"),
    ("[variables]\npairs = 1\n[pipeline]\nbake\n", "unknown pipeline stage"),
])
def test_parse_errors_have_positions(text, where):
    with pytest.raises(SpecError, match=where):
        parse_spec(text)


def test_run_plane_report(tmp_path):
    spec = load_spec(spec_path("plane_rotation"))
    report = run(spec, str(tmp_path))
    assert report.ok
    st = report.stages
    assert st["tate"]["koszul_exact"] is True
    assert st["charge"]["steps"] == 0 and st["charge"]["R"] == "x1 y2 e1_1* - x2 y1 e1_1*"
    assert st["check"]["cme_residual_terms"] == 0
    brackets = {tuple(b["pair"]): b for b in st["cohomology"]["brackets"]}
    b = brackets[("x1^2 + x2^2", "y1^2 + y2^2")]
    assert b["bracket_nf"] == "4*x1 y1 + 4*x2 y2" and b["nonzero_mod_J"]
    assert sorted(os.listdir(tmp_path)) == sorted(
        ["charge.txt", "h0.txt", "ideal.txt", "qcharge.txt", "report.json", "resolution.txt", "spec.txt"])
    data = json.loads((tmp_path / "report.json").read_text())
    assert data["ok"] and "timings" not in data
    # every reported artifact exists
    for name in data["artifacts"].values():
        assert (tmp_path / name).exists()


def test_run_empty_and_so3_reports():
    r = run(load_spec(spec_path("empty")))
    assert r.ok and r.stages["groebner"]["zero_ideal"] and r.stages["charge"]["terms"] == 0
    assert r.stages["cohomology"]["h0"].startswith("P")
    r = run(load_spec(spec_path("so3")))
    assert r.ok
    assert r.stages["tate"]["koszul_exact"] is False
    assert r.stages["tate"]["ghosts_by_degree"]["-2"] == 2
    assert r.stages["charge"]["steps"] == 1


def test_warm_cache_matches_cold(tmp_path):
    spec = load_spec(spec_path("so3"))
    cache = tmp_path / "cache"
    cold = run(spec, str(tmp_path / "a"), str(cache))
    warm = run(spec, str(tmp_path / "b"), str(cache))
    assert cold.to_json() == warm.to_json()
    for f in os.listdir(tmp_path / "a"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_corrupted_cache_is_reported(tmp_path, capsys):
    cache = tmp_path / "cache"
    run(load_spec(spec_path("plane_rotation")), None, str(cache))
    for f in cache.iterdir():
        f.write_text(f.read_text().replace("x1", "x9", 1))
    ok, results = selftest(quick=True, cache_dir=str(cache))
    assert not ok
    bad = [r for r in results if not r["ok"]]
    assert [r["check"] for r in bad] == ["cache"]
    code, out, _ = call(capsys, "run", spec_path("plane_rotation"), "--cache", str(cache))
    assert code == 1 and "CacheIntegrityError" in out


def test_cli_charge_check_and_exact(tmp_path, capsys):
    spec = spec_path("plane_rotation")
    charge = tmp_path / "charge.txt"
    assert call(capsys, "brst", "charge", spec, "-o", str(charge))[0] == 0
    code, out, _ = call(capsys, "brst", "check", str(charge), "--json")
    assert code == 0 and json.loads(out)["ok"]
    elem = tmp_path / "e.txt"
    elem.write_text("1/1 * e1_1*\n")
    code, out, _ = call(capsys, "coh", "exact", spec, str(elem), "--json")
    assert code == 0 and json.loads(out)["status"] == "none"
    code, out, _ = call(capsys, "coh", "bracket", spec, "x1^2 + x2^2", "y1^2 + y2^2")
    assert out.strip() == "4*x1 y1 + 4*x2 y2"
    code, out, _ = call(capsys, "coh", "h0", spec, "x1^2 + x2^2", "x1")
    assert code == 1 and "not invariant" in out


def test_cli_broken_charge_fails(tmp_path, capsys):
    spec = spec_path("so3")
    charge = tmp_path / "charge.txt"
    call(capsys, "brst", "charge", spec, "-o", str(charge))
    text = charge.read_text().replace("1/1 * x1 p2 e1_3*", "2/1 * x1 p2 e1_3*")
    charge.write_text(text)
    code, out, _ = call(capsys, "brst", "check", str(charge))
    assert code == 1 and "residual" in out


def test_cli_gauge_round_trip(tmp_path, capsys):
    spec = spec_path("so3")
    R, Rp, eq, Rq = (tmp_path / n for n in ("R.txt", "Rp.txt", "eq.txt", "Rq.txt"))
    c = tmp_path / "c.txt"
    c.write_text("1/1 * x1 e2_1 e1_1* e1_2*\n3/2 * e2_2 e1_2* e1_3*\n")
    assert call(capsys, "brst", "charge", spec, "-o", str(R))[0] == 0
    assert call(capsys, "gauge", "perturb", str(c), str(R), "-o", str(Rp))[0] == 0
    assert call(capsys, "gauge", "match", spec, str(R), str(Rp), "-o", str(eq))[0] == 0
    assert call(capsys, "gauge", "apply", str(eq), str(R), "-o", str(Rq))[0] == 0
    assert Rq.read_text() == Rp.read_text()


def test_cli_quantize(tmp_path, capsys):
    spec = spec_path("plane_rotation")
    qc = tmp_path / "q.txt"
    assert call(capsys, "quantize", "qme", spec, "-o", str(qc))[0] == 0
    code, out, _ = call(capsys, "quantize", "check", str(qc), "--json")
    assert code == 0 and json.loads(out)["ok"]
    code, out, _ = call(capsys, "quantize", "match", spec, str(qc), str(qc))
    assert code == 0 and "generators 0" in out


def test_cli_bounds_override(capsys):
    code, out, _ = call(capsys, "run", spec_path("plane_rotation"), "--bounds", "N=3,K=2", "--json")
    data = json.loads(out)
    assert code == 0 and data["stages"]["charge"]["N"] == 3 and data["stages"]["quantize"]["K"] == 2


def test_cli_usage_errors(tmp_path, capsys):
    bad = tmp_path / "bad.spec"
    bad.write_text("[variables]\npairs = 1\n[constraints]\nx1 +* y1\n")
    code, _, err = call(capsys, "run", str(bad))
    assert code == 2 and "line 4" in err
    code, _, err = call(capsys, "run", str(tmp_path / "missing.spec"))
    assert code == 2


def test_selftest_quick(capsys):
    code, out, _ = call(capsys, "selftest", "--quick", "--seed", "3")
    assert code == 0
    lines = out.strip().splitlines()
    assert all(ln.startswith("PASS") for ln in lines)
    assert {ln.split()[1] for ln in lines} >= {
        "jacobi", "leibniz", "filtration", "homotopy", "confluence", "semiclassical", "cache"}


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "bfvkit", "run", spec_path("empty"), "--json"],
                         capture_output=True, text=True, check=False)
    assert out.returncode == 0 and json.loads(out.stdout)["ok"]
