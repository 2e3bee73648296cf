import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import arr, bool_mul
from primset.errors import DimensionMismatch, InvalidWord, ParseError
from primset.matrix import (BinaryMatrix, MatrixSet, classify, dominates, parse, serialize,
                            transpose_set, word_product)


def matrices(n_max=9):
    return st.integers(1, n_max).flatmap(
        lambda n: st.lists(st.lists(st.booleans(), min_size=n, max_size=n), min_size=n, max_size=n)
    ).map(lambda rows: BinaryMatrix.from_array(np.array(rows, dtype=bool)))


def test_classify_identity():
    c = classify(BinaryMatrix.identity(4))
    assert c.is_permutation and c.is_nz and c.is_row_stochastic
    assert not c.is_perturbed_permutation


def test_classify_perturbed_identity():
    c = classify(BinaryMatrix.from_strings(["11", "01"]))
    assert c.is_perturbed_permutation and c.is_nz
    assert not c.is_row_stochastic and not c.is_permutation


def test_classify_zero():
    c = classify(BinaryMatrix.zeros(3))
    assert c.has_zero_row and c.has_zero_col and not c.is_nz


def test_two_extra_ones_is_not_perturbed():
    m = BinaryMatrix.identity(4).with_entry(0, 1, 1).with_entry(2, 3, 1)
    assert not classify(m).is_perturbed_permutation


def test_dominates():
    m = BinaryMatrix.from_strings(["11", "01"])
    i = BinaryMatrix.identity(2)
    assert dominates(m, m)
    assert dominates(BinaryMatrix.ones(2), m)
    assert dominates(m, i) and not dominates(i, m)


def test_codec_golden_pair(golden_pair):
    text = serialize(golden_pair)
    assert text.splitlines() == ["primset 1", "3 2", "matrix 1", "010", "100", "001",
                                 "matrix 2", "101", "001", "010"]
    assert parse(text) == golden_pair


def test_parse_blank_lines_ignored(golden_pair):
    text = serialize(golden_pair).replace("matrix 2", "\n\nmatrix 2")
    assert parse(text) == golden_pair


def test_parse_short_row_reports_line():
    with pytest.raises(ParseError) as exc:
        parse("primset 1\n3 1\nmatrix 1\n010\n10\n001\n")
    assert exc.value.line == 5


@pytest.mark.parametrize("text", ["", "primset 2\n1 1\nmatrix 1\n1\n",
                                  "primset 1\n2 1\nmatrix 1\n12\n01\n",
                                  "primset 1\n2 2\nmatrix 1\n10\n01\n"])
def test_parse_rejects(text):
    with pytest.raises(ParseError):
        parse(text)


@settings(max_examples=60, deadline=None)
@given(st.lists(matrices(6), min_size=1, max_size=3).filter(lambda ms: len({m.n for m in ms}) == 1))
def test_roundtrip(ms):
    s = MatrixSet(ms)
    assert parse(serialize(s)) == s
    assert serialize(parse(serialize(s))) == serialize(s)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 9).flatmap(lambda n: st.tuples(
    *(st.lists(st.lists(st.booleans(), min_size=n, max_size=n), min_size=n, max_size=n)
      for _ in range(2)))))
def test_product_matches_numpy(pair):
    a, b = (BinaryMatrix.from_array(np.array(x, dtype=bool)) for x in pair)
    assert np.array_equal(arr(a @ b), bool_mul(arr(a), arr(b)))
    assert np.array_equal(arr(a.T), arr(a).T)
    assert np.array_equal(a.to_array(), arr(a))


def test_product_wide_matrix():
    rng = np.random.default_rng(3)
    x, y = rng.random((2, 130, 130)) < 0.05
    a, b = BinaryMatrix.from_array(x), BinaryMatrix.from_array(y)
    assert np.array_equal((a @ b).to_array(), bool_mul(x.astype(int), y.astype(int)))


def test_word_product(golden_pair):
    assert word_product(golden_pair, []) == BinaryMatrix.identity(3)
    assert word_product(golden_pair, [0, 1]) == golden_pair[0] @ golden_pair[1]
    with pytest.raises(InvalidWord):
        word_product(golden_pair, [2])


def test_dimension_checks():
    with pytest.raises(DimensionMismatch):
        MatrixSet([BinaryMatrix.identity(2), BinaryMatrix.identity(3)])
    with pytest.raises(DimensionMismatch):
        BinaryMatrix.identity(2) @ BinaryMatrix.identity(3)


def test_transpose_set(golden_pair):
    t = transpose_set(golden_pair)
    assert t[1].to_strings() == ["100", "001", "110"]
    assert transpose_set(t) == golden_pair


def test_immutable():
    m = BinaryMatrix.identity(2)
    with pytest.raises(AttributeError):
        m.n = 3
