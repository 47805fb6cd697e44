import json
import subprocess
import sys

import pytest

from cliffrank.cli import bundled_specs, main
from cliffrank.curve import h0
from cliffrank.specfile import SpecError, build_curve, build_tower, parse_text


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_bundled_specs_listed():
    names = bundled_specs()
    for name in ("hyperelliptic_g2.curve", "hyperelliptic_g3.curve", "trigonal_g4.curve",
                 "picard_g3.curve", "tetragonal_g9.curve", "tower_g81.tower"):
        assert name in names


def test_info(capsys):
    code, out, _ = run_cli(capsys, "info", "--spec", "trigonal_g4")
    assert code == 0
    assert "[PASS] info.genus" in out and "genus=4" in out
    assert "[PASS] info.canonical" in out and "deg_K=6 h0_K=4" in out


def test_info_tower(capsys):
    code, out, _ = run_cli(capsys, "info", "--spec", "tower_g81")
    assert code == 0
    assert "info.tower.layer2.genus" in out and "genus=81" in out
    assert "h0_1F=2 h0_2F=5 h1_1F=66 h1_2F=53" in out


def test_prime_override(capsys):
    code, out, _ = run_cli(capsys, "info", "--spec", "trigonal_g4", "--prime", "37")
    assert code == 0
    assert "p=37" in out and "# prime: 37" in out


def test_rr_named_divisors(capsys):
    code, out, _ = run_cli(capsys, "rr", "--spec", "tetragonal_g9")
    assert code == 0
    assert "[PASS] rr.F" in out and "deg=4 h0=2 h1=6" in out
    assert "[PASS] rr.random" in out


def test_cliff_twisted(capsys):
    code, out, _ = run_cli(capsys, "cliff", "--spec", "hyperelliptic_g2", "--twist", "D3", "--prime", "23")
    assert code == 0
    assert "[PASS] cliff.K(D3)" in out and "mode=exhaustive" in out and "value=1" in out


def test_shiffer_polar_divisor(capsys):
    """The polar divisor of x is 3 times one point: bounds are checked and
    the witness constructions, which need reduced divisors, report INFO."""
    code, out, _ = run_cli(capsys, "shiffer", "--spec", "trigonal_g4", "--divisor", "F", "--trials", "30")
    assert code == 0
    assert "[PASS] shiffer.cross_oracle" in out
    assert "[PASS] shiffer.bounds.F" in out
    assert "[INFO] shiffer.witness.F" in out and "needs a reduced divisor" in out


def test_shiffer_split_fibre(capsys, tmp_path):
    spec = tmp_path / "trig.curve"
    spec.write_text("char 32029\nn 3\nf 3 -1 2 0 0 1\ndivisor G = fiber 1 : 1\n")
    code, out, _ = run_cli(capsys, "shiffer", "--spec", str(spec), "--divisor", "G", "--trials", "30")
    assert code == 0
    assert "[PASS] shiffer.bounds.G" in out and "histogram={2: 30}" in out
    assert "[PASS] shiffer.witness.G" in out and "rank=1 lower=1" in out


def test_secant_with_witness(capsys):
    code, out, _ = run_cli(capsys, "secant", "--spec", "hyperelliptic_g2", "--twist", "D3",
                           "--hassett", "D3", "--trials", "20")
    assert code == 0
    assert "[PASS] secant.containment.j1" in out
    assert "[PASS] secant.hassett.D3" in out and "on_plane=0" in out


def test_json_and_out_files(capsys, tmp_path):
    js, txt = tmp_path / "r.json", tmp_path / "r.txt"
    code, out, _ = run_cli(capsys, "info", "--spec", "picard_g3", "--json", str(js), "--out", str(txt))
    assert code == 0
    assert txt.read_text() == out
    data = json.loads(js.read_text())
    assert data["header"]["spec"] == "picard_g3.curve"
    assert {r["id"] for r in data["records"]} >= {"info.genus", "info.canonical"}


def test_deterministic_output(capsys):
    a = run_cli(capsys, "shiffer", "--spec", "hyperelliptic_g3", "--divisor", "D3", "--trials", "20", "--seed", "4")
    b = run_cli(capsys, "shiffer", "--spec", "hyperelliptic_g3", "--divisor", "D3", "--trials", "20", "--seed", "4")
    assert a == b


def test_environment_defaults(capsys, monkeypatch):
    monkeypatch.setenv("CLIFFRANK_SEED", "17")
    monkeypatch.setenv("CLIFFRANK_SPEC", "picard_g3")
    code, out, _ = run_cli(capsys, "info")
    assert code == 0
    assert "# seed: 17" in out and "seed=17" in out


def test_budget_refusal_is_a_failure(capsys):
    code, out, _ = run_cli(capsys, "koszul", "--spec", "trigonal_g4", "--max-entries", "50")
    assert code == 1
    assert "[FAIL] koszul.budget" in out


def test_koszul_table(capsys):
    code, out, _ = run_cli(capsys, "koszul", "--spec", "trigonal_g4", "--pmax", "2", "--qmax", "2")
    assert code == 0
    assert "K00=1" in out and "K11=1" in out and "K12=1" in out and "K02=0" in out


def test_suite_serial_and_parallel_agree(capsys):
    a = run_cli(capsys, "suite", "--spec", "picard_g3", "--trials", "40")
    b = run_cli(capsys, "suite", "--spec", "picard_g3", "--trials", "40", "--parallel", "2")
    assert a[0] == 0
    assert a == b


@pytest.mark.parametrize("text,line,message", [
    ("char 101\nn 2\nf 1 2 x\n", 3, "not a number"),
    ("char 101\nn 1\nf 1 2 3\n", 2, "n must be"),
    ("char 101\nn 2\nf 1 0 0 0 0 1\ndivisor D = branch 0\n", 4, "multiplicity"),
    ("char 101\nn 2\nf 1 0 0 0 0 1\ndivisor D = nowhere 1 : 1\n", 4, "unknown place kind"),
    ("char 101\nn 2\nf 1 0 0 0 0 1\nbogus 3\n", 4, "unknown keyword"),
    ("char 101\nn 2\n", 2, "missing 'f'"),
    ("tower\nlayer 4 | 4*8\n", 2, "expected"),
])
def test_parse_errors_carry_line_numbers(text, line, message):
    with pytest.raises(SpecError) as exc:
        parse_text(text, "bad.curve")
    assert exc.value.lineno == line
    assert str(exc.value).startswith(f"bad.curve:{line}:")
    assert message in str(exc.value)


def test_divisor_errors_point_at_their_line():
    spec = parse_text("char 101\nn 2\nf 1 0 0 0 0 1\n# comment\ndivisor D = branch 5 : 1\n", "x.curve")
    with pytest.raises(SpecError) as exc:
        build_curve(spec)
    assert exc.value.lineno == 5


def test_spec_roundtrip():
    spec = parse_text("char 32029\nn 3\nf 3 -1 2 0 0 1   # y^3 = f\n"
                      "divisor E = fiber 1 : 1, infinity 0 : -1, canonical : 1\n")
    C, divs = build_curve(spec)
    E = divs["E"]
    assert E.degree == 3 - 1 + 2 * C.genus - 2
    assert h0(C, E) == E.degree - C.genus + 1 + h0(C, C.canonical_divisor() - E)
    T = build_tower(parse_text("tower\nlayer 4 | 4*8 | 0 2 4 6\n"))
    assert T.genus() == 9


def test_bad_file_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.curve"
    bad.write_text("char 101\nn 2\nf 1 2 zz\n")
    code, out, err = run_cli(capsys, "info", "--spec", str(bad))
    assert code == 2
    assert "bad.curve:3: not a number" in err


def test_missing_spec_exit_code(capsys):
    assert run_cli(capsys, "info", "--spec", "no_such_spec")[0] == 2
    assert run_cli(capsys, "rr", "--spec", "picard_g3", "--divisor", "NOPE")[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cliffrank", "info", "--spec", "hyperelliptic_g2"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert "[PASS] info.genus" in proc.stdout


def test_rational_spec(tmp_path, capsys):
    """Over the rationals the named divisors are exact; sampling-based checks
    are reported as INFO or refused with a usage error."""
    spec = tmp_path / "q.curve"
    spec.write_text("char 0\nn 2\nf 0 -1 0 0 0 1\ndivisor D = infinity 0 : 1\n")
    code, out, _ = run_cli(capsys, "rr", "--spec", str(spec))
    assert code == 0
    assert "[PASS] rr.D" in out and "deg=1 h0=1 h1=1" in out
    assert "[INFO] rr.random" in out
    code, _, err = run_cli(capsys, "secant", "--spec", str(spec))
    assert code == 2 and "F_p" in err
