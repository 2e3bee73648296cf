import subprocess
import sys

import pytest

from primset import parse, serialize
from primset.cli import main
from primset.families import REPORT_HEADER


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_and_check(tmp_path, capsys):
    f = tmp_path / "s.txt"
    assert run(["gen", "--proc", "1", "--n", "6", "--m", "2", "--seed", "3", "--out", str(f)], capsys)[0] == 0
    s = parse(f.read_text())
    assert (s.n, len(s)) == (6, 2)
    code, out, _ = run(["check", str(f)], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("verdict ") and lines[1] in ("irreducible 0", "irreducible 1")
    assert lines[2] == "nz 1 1"


def test_gen_is_seeded(tmp_path, capsys):
    a = run(["gen", "--proc", "binary", "--n", "5", "--p", "0.4", "--seed", "8"], capsys)[1]
    b = run(["gen", "--proc", "binary", "--n", "5", "--p", "0.4", "--seed", "8"], capsys)[1]
    assert a == b and a.startswith("primset 1")


def test_gen_binary_needs_p(capsys):
    assert run(["gen", "--proc", "binary", "--n", "5", "--seed", "1"], capsys)[0] == 1


def test_exponent_rt_sgd(tmp_path, capsys, golden_pair):
    f = tmp_path / "e1.txt"
    f.write_text(serialize(golden_pair))
    code, out, _ = run(["exponent", str(f)], capsys)
    assert code == 0 and out.splitlines()[0] == "exponent 8"
    code, out, _ = run(["rt", str(f)], capsys)
    assert code == 0 and out.splitlines()[0] == "rt 4"
    code, out, _ = run(["sgd", str(f)], capsys)
    assert code == 0 and out.startswith("sgd ")


def test_exponent_capped_falls_back_to_bounds(tmp_path, capsys):
    f = tmp_path / "s.txt"
    run(["gen", "--proc", "1", "--n", "12", "--seed", "5", "--out", str(f)], capsys)
    code, out, _ = run(["exponent", str(f), "--exact-cap", "10"], capsys)
    assert code == 0 and (out.startswith("exponent bounds") or out.startswith("exponent none"))


def test_rt_size_cap(tmp_path, capsys):
    f = tmp_path / "big.txt"
    run(["family", "--kind", "E", "--n", "40", "--out", str(f)], capsys)
    code, _, err = run(["rt", str(f)], capsys)
    assert code == 2 and "error" in err


def test_family_report(tmp_path, capsys):
    f = tmp_path / "e8.txt"
    code, out, _ = run(["family", "--kind", "E", "--n", "8", "--verify", "--out", str(f)], capsys)
    assert code == 0
    assert out.splitlines() == [REPORT_HEADER, "E,8,19,19,31,31,true"]
    assert len(parse(f.read_text())) == 3


def test_family_without_verify(capsys):
    code, out, _ = run(["family", "--kind", "O", "--n", "9", "--out", "-"], capsys)
    assert code == 0 and out.splitlines()[-1] == "O,9,25,25,,40,true"


def test_family_bad_n(capsys):
    assert run(["family", "--kind", "E", "--n", "9"], capsys)[0] == 1


def test_construct_writes_record(tmp_path, capsys):
    f = tmp_path / "c.txt"
    code, _, err = run(["construct", "--primes", "2,3", "--met", "2", "--seed", "4", "--out", str(f)], capsys)
    assert code == 0 and err.startswith("primitive ")
    assert parse(f.read_text()).n == 6
    assert (tmp_path / "c.txt.record").read_text().startswith("primes 2,3")


def test_construct_bad_primes(capsys):
    assert run(["construct", "--primes", "4,2", "--seed", "1"], capsys)[0] == 1


def test_construct_does_not_converge(monkeypatch, capsys):
    import primset.construction as c

    monkeypatch.setattr(c, "dom_perm", lambda m, *a, **k: (False, m, None))
    assert run(["construct", "--primes", "2,3", "--t1", "3", "--seed", "1"], capsys)[0] == 3


def test_experiment(tmp_path, capsys):
    cfg = tmp_path / "t.cfg"
    cfg.write_text("n = 20\nbeta = 1.0\ntrials = 4\n")
    out = tmp_path / "t.csv"
    code, _, _ = run(["experiment", "--kind", "Threshold", "--config", str(cfg), "--seed", "2",
                      "--jobs", "1", "--out", str(out)], capsys)
    assert code == 0 and out.read_text().startswith("n,m,beta,c,p,trials")


def test_experiment_bad_config(tmp_path, capsys):
    cfg = tmp_path / "t.cfg"
    cfg.write_text("trials = 4\n")
    assert run(["experiment", "--kind", "Threshold", "--config", str(cfg), "--seed", "2"], capsys)[0] == 1


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["gen", "--n", "3"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 1


def test_missing_file(capsys):
    assert run(["check", "/nonexistent/file"], capsys)[0] == 1


def test_parse_error_file(tmp_path, capsys):
    f = tmp_path / "bad.txt"
    f.write_text("primset 1\n2 1\nmatrix 1\n1x\n01\n")
    code, _, err = run(["check", str(f)], capsys)
    assert code == 1 and "line 4" in err


def test_console_script_module():
    res = subprocess.run([sys.executable, "-m", "primset.cli", "family", "--kind", "O", "--n", "5"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.splitlines()[-1].startswith("O,5,8,8,")
