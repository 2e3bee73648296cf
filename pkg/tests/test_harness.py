import csv
import io
import math

import numpy as np
import pytest

from primset import BinaryMatrix, MatrixSet, RngStream, sample_binary_set
from primset.errors import ConfigError
from primset.harness import (AUDIT_HEADER, METHOD_HEADER, THRESHOLD_HEADER, Caps, Reason, VerdictKind,
                             classify_primitivity_at_scale, fmt, conditional_permutation_frequencies, p_hat,
                             parse_config, run_experiment, threshold_bounds)
from primset.matrix import word_product
from primset.primitivity import exponent_exact, is_irreducible

A20 = 0.0183156388887341803  # exp(-4), evaluated with mpmath
U20 = 0.600423599106271951   # 1 - (1 - exp(-1))^2


def rows_of(text):
    return list(csv.reader(io.StringIO(text)))


def test_verdict_nz_primitive(golden_pair):
    assert classify_primitivity_at_scale(golden_pair).kind is VerdictKind.PRIMITIVE_EXACT


def test_verdict_zero_rows():
    m = BinaryMatrix.from_strings(["11", "00"])
    v = classify_primitivity_at_scale(MatrixSet([m, m]))
    assert v.reason is Reason.ALL_ZERO_ROW and v.label == "NotPrimitiveNecessary(AllZeroRow)"
    v = classify_primitivity_at_scale(MatrixSet([m.T, m.T]))
    assert v.reason is Reason.ALL_ZERO_COL


def test_verdict_reducible():
    v = classify_primitivity_at_scale(MatrixSet([BinaryMatrix.from_strings(["11", "01"])]))
    assert v.reason is Reason.REDUCIBLE


def _large_non_nz(n=64):
    # m1 has only a zero row, m2 only a zero column
    cycle = BinaryMatrix.from_permutation([(i + 1) % n for i in range(n)])
    m1 = cycle.with_entry(0, 1, 0).with_entry(5, 1, 1)
    m2 = BinaryMatrix.identity(n).with_entry(3, 3, 0).with_entry(3, 4, 1).with_entry(0, 1, 1)
    return MatrixSet([m1, m2])


def test_verdict_undecided_at_scale():
    s = _large_non_nz()
    assert is_irreducible(s)
    v = classify_primitivity_at_scale(s, Caps(search_products=0))
    assert v.kind is VerdictKind.UNDECIDED


def test_verdict_certified_word_revalidates():
    n = 30
    no_row = BinaryMatrix(n, [0] + [(1 << n) - 1] * (n - 1))
    s = MatrixSet([no_row, no_row.T])
    v = classify_primitivity_at_scale(s, Caps(exact_n=0, search_products=200), RngStream(50).generator())
    assert v.kind is VerdictKind.PRIMITIVE_CERTIFIED
    assert word_product(s, v.word).is_positive()
    assert v.label == f"PrimitiveCertified({len(v.word)})"


def test_verdict_soundness_small_n():
    rng = RngStream(51).generator()
    for _ in range(400):
        n = int(rng.integers(2, 7))
        s = sample_binary_set(n, 2, float(rng.uniform(0.1, 0.5)), rng)
        v = classify_primitivity_at_scale(s, Caps(exact_n=6), rng)
        truth = exponent_exact(s).is_primitive
        if v.kind in (VerdictKind.PRIMITIVE_EXACT, VerdictKind.PRIMITIVE_CERTIFIED):
            assert truth
        elif v.kind is not VerdictKind.UNDECIDED:
            assert not truth
        if v.reason is Reason.ALL_ZERO_ROW:
            assert all(0 in m.rows for m in s)
        if v.reason is Reason.ALL_ZERO_COL:
            assert all(0 in m.columns() for m in s)
        if v.reason is Reason.REDUCIBLE:
            assert not is_irreducible(s)


def test_threshold_bounds_frozen():
    lo, hi = threshold_bounds(2, 0.0)
    assert lo == pytest.approx(A20, abs=1e-12)
    assert hi == pytest.approx(U20, abs=1e-12)


def test_threshold_bounds_limits():
    for m in (2, 3, 5):
        lo, hi = threshold_bounds(m, 40.0)
        assert lo == pytest.approx(1.0) and hi == pytest.approx(1.0)
        lo, hi = threshold_bounds(m, -5.0)
        assert lo == pytest.approx(0.0, abs=1e-12) and hi == pytest.approx(0.0, abs=1e-12)
        for c in np.linspace(-3, 5, 17):
            lo, hi = threshold_bounds(m, float(c))
            assert 0.0 <= lo <= hi <= 1.0
    with pytest.raises(ValueError):
        threshold_bounds(1, 0.0)


def test_p_hat():
    assert p_hat(100, 0.0) == pytest.approx(math.log(100) / 100)


@pytest.mark.parametrize("x,text", [(0.0183156388887, "0.0183156"), (2.5, "2.5"), (7, "7"), (True, "1"),
                                    (None, ""), ("a", "a"), (123456.7, "123457"), (1e-9, "0.000000001")])
def test_fmt(x, text):
    assert fmt(x) == text


def test_fmt_six_significant_digits():
    assert fmt(1 / 3) == "0.333333"
    assert fmt(2 / 3 * 100) == "66.6667"


def test_threshold_zero_trials_header_only():
    res = run_experiment("Threshold", {"n": "50", "trials": "0"}, 1)
    assert rows_of(res.csv()) == [THRESHOLD_HEADER]


def test_threshold_columns():
    res = run_experiment("Threshold", "n = 40\nbeta = 0.7, 1.3\ntrials = 20  # small\n", 2)
    rows = rows_of(res.csv())
    assert rows[0] == THRESHOLD_HEADER and len(rows) == 3
    for row in rows[1:]:
        rec = dict(zip(THRESHOLD_HEADER, row))
        counts = sum(int(rec[k]) for k in ("all_zero_row", "all_zero_col", "reducible", "primitive_exact",
                                           "not_primitive_exact", "primitive_certified", "undecided"))
        assert counts == 20


def test_threshold_monotone():
    res = run_experiment("Threshold", {"n": "60", "beta": "0.6,0.9,1.2,1.5,1.8,2.1", "trials": "200"}, 3)
    col = THRESHOLD_HEADER.index("frac_primitive")
    fracs = [float(r[col]) for r in rows_of(res.csv())[1:]]
    for a, b in zip(fracs, fracs[1:]):
        assert b >= a - 0.05


def test_determinism_across_jobs():
    cfg = "n = 12\niterations = 12\nmethods = 1, 2, 4\n"
    a = run_experiment("MethodComparison", cfg, 9, jobs=1).csv()
    b = run_experiment("MethodComparison", cfg, 9, jobs=2).csv()
    assert a == b and rows_of(a)[0] == METHOD_HEADER
    cfg = {"n": "30", "beta": "1.0", "trials": "16"}
    assert run_experiment("Threshold", cfg, 4, 1).csv() == run_experiment("Threshold", cfg, 4, 2).csv()


def test_seed_changes_output():
    cfg = {"n": "30", "beta": "1.2", "trials": "40"}
    assert run_experiment("Threshold", cfg, 1).csv() != run_experiment("Threshold", cfg, 2).csv()


def test_audit_experiment():
    res = run_experiment("ConstructionAudit", "primes = 2,2 ; 2,3\ntrials = 5\nmet = 2\n", 5)
    rows = rows_of(res.csv())
    assert rows[0] == AUDIT_HEADER and [r[0] for r in rows[1:]] == ["2x2", "2x3"]
    for r in rows[1:]:
        rec = dict(zip(AUDIT_HEADER, r))
        assert int(rec["converged"]) == 5
        assert int(rec["proper_set_ok"]) == int(rec["primitive"]) == int(rec["proper_dfa_ok"])


def test_directability_experiment():
    res = run_experiment("Directability", {"n": "3", "trials": "30"}, 6)
    rec = dict(zip(rows_of(res.csv())[0], rows_of(res.csv())[1]))
    assert rec["violations"] == "0"


def test_scaling_experiment():
    res = run_experiment("ExponentScaling", {"n": "6", "trials": "5"}, 7)
    rec = dict(zip(*rows_of(res.csv())))
    assert float(rec["median_exact"]) <= float(rec["median_greedy_upper"])


@pytest.mark.parametrize("kind,cfg", [
    ("Nope", {}),
    ("Threshold", {}),
    ("Threshold", {"n": "x"}),
    ("MethodComparison", {"n": "12", "primes": "2,5"}),
    ("MethodComparison", {"n": "12", "methods": "7"}),
])
def test_config_errors(kind, cfg):
    with pytest.raises(ConfigError):
        run_experiment(kind, cfg, 0)


def test_parse_config():
    cfg = parse_config("# comment\n[section]\nn = [8, 16]\nname = 'x'\n\n")
    assert cfg == {"n": "[8, 16]", "name": "x"}
    with pytest.raises(ConfigError):
        parse_config("just words")


def test_conditional_frequencies_small_sample():
    freqs, accepted = conditional_permutation_frequencies(samples=6000, seed=3)
    assert len(freqs) == 6 and accepted > 2000
    assert all(abs(f - 1 / 6) < 0.03 for f in freqs.values())
