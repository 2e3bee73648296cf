import numpy as np
import pytest

import oracles
from primset import BinaryMatrix, MatrixSet, RngStream, procedure1, sample_binary_set
from primset.errors import NotNZ, SizeLimit
from primset.families import q1_q2
from primset.matrix import classify, transpose_set, word_product
from primset.primitivity import (Outcome, equal_partitions, exponent_bounds, exponent_exact,
                                 find_block_permutation_structure, is_irreducible, is_primitive_nz,
                                 is_proper_primitive, merging_closure, verify_witness)


def test_irreducible_examples(golden_pair):
    assert not is_irreducible(MatrixSet([BinaryMatrix.identity(3)] * 2))
    assert is_irreducible(golden_pair)
    assert is_irreducible(MatrixSet(q1_q2(8, "ChainEven")))


def test_irreducible_against_oracle():
    rng = np.random.default_rng(1)
    for _ in range(300):
        n = int(rng.integers(1, 8))
        s = sample_binary_set(n, 2, 0.25, rng)
        total = sum(oracles.arr(m) for m in s)
        assert is_irreducible(s) == oracles.strongly_connected(total)


def test_primitive_nz_examples(golden_pair):
    assert is_primitive_nz(golden_pair)
    assert is_primitive_nz(MatrixSet([BinaryMatrix.ones(5)]))
    q1, q2 = q1_q2(4, "RingEven")
    ring = MatrixSet([BinaryMatrix.identity(4).with_entry(0, 2, 1), q1, q2])
    assert not is_primitive_nz(ring)
    with pytest.raises(NotNZ):
        is_primitive_nz(MatrixSet([BinaryMatrix.zeros(2)]))


def test_reducible_nz_set_is_not_primitive():
    # pair-graph merging succeeds on the transpose here but not on the set,
    # and the exhaustive search confirms the set is not primitive
    s = MatrixSet([
        BinaryMatrix.from_strings(["00000010", "00000001", "00010000", "10000000",
                                   "00001000", "00001100", "01000000", "00100000"]),
        BinaryMatrix.from_strings(["00010000", "10000000", "01000000", "00100000",
                                   "00000001", "00000100", "00001000", "00000010"]),
    ])
    assert merging_closure(transpose_set(s).mats, 8)[0].all()
    assert not is_primitive_nz(s)
    assert exponent_exact(s).outcome is Outcome.NOT_PRIMITIVE


def test_exponent_examples(golden_pair):
    assert exponent_exact(MatrixSet([BinaryMatrix.ones(4)])).length == 1
    res = exponent_exact(golden_pair)
    assert res.outcome is Outcome.PRIMITIVE and res.length == 8
    assert word_product(golden_pair, res.word).is_positive()
    assert exponent_exact(transpose_set(golden_pair)).length == 8
    assert exponent_exact(MatrixSet([BinaryMatrix.identity(3)])).outcome is Outcome.NOT_PRIMITIVE


def test_exponent_cap():
    s = procedure1(12, 2, RngStream(5).generator())
    assert exponent_exact(s, cap=50).outcome is Outcome.CAP_EXCEEDED


def test_exponent_against_oracle():
    rng = np.random.default_rng(2)
    for _ in range(150):
        n = int(rng.integers(2, 6))
        s = sample_binary_set(n, 2, 0.35, rng)
        res = exponent_exact(s)
        expect = oracles.exponent([oracles.arr(m) for m in s])
        assert (res.length if res.is_primitive else None) == expect
        if res.is_primitive:
            assert len(res.word) == res.length
            assert word_product(s, res.word).is_positive()


def test_exponent_bounds_golden_pair(golden_pair):
    assert exponent_bounds(golden_pair, "exact") == (4, 8)
    lo, hi = exponent_bounds(golden_pair, "greedy")
    assert lo == 1 and hi >= 8


def test_exponent_bounds_all_ones():
    # the one-letter constant maps synchronize in one step
    assert exponent_bounds(MatrixSet([BinaryMatrix.ones(3)]), "exact") == (1, 4)


def test_sandwich_on_random_perturbed_sets():
    count = 0
    for seed in range(120):
        rng = RngStream(99, seed).generator()
        s = procedure1(int(rng.integers(3, 8)), 2, rng)
        if not is_primitive_nz(s):
            continue
        lo, hi = exponent_bounds(s)
        e = exponent_exact(s).length
        assert lo <= e <= hi
        count += 1
    assert count > 80


def test_witness_ring_parity_partition():
    q1, q2 = q1_q2(4, "RingEven")
    ring = MatrixSet([BinaryMatrix.identity(4).with_entry(0, 2, 1), q1, q2])
    w = find_block_permutation_structure(ring, equal_blocks_only=True)
    assert w.partition == ((0, 2), (1, 3))
    assert verify_witness(ring, w)
    w2 = find_block_permutation_structure(ring)
    assert w2 is not None and verify_witness(ring, w2)


def test_witness_examples(golden_pair):
    assert find_block_permutation_structure(golden_pair) is None
    w = find_block_permutation_structure(MatrixSet([BinaryMatrix.identity(2)]))
    assert w.partition == ((0,), (1,)) and w.sigma_per_matrix == ((0, 1),)


def test_witness_size_limits():
    big = MatrixSet([BinaryMatrix.identity(9)])
    with pytest.raises(SizeLimit):
        find_block_permutation_structure(big)
    with pytest.raises(SizeLimit):
        find_block_permutation_structure(MatrixSet([BinaryMatrix.identity(13)]), equal_blocks_only=True)


def test_equal_partitions_count():
    # 12!/(6!^2 2!) and 6!/(2!^3 3!)
    assert sum(1 for _ in equal_partitions(12, 2)) == 462
    assert sum(1 for _ in equal_partitions(6, 3)) == 15


def test_structure_against_oracle():
    rng = np.random.default_rng(4)
    for _ in range(120):
        n = int(rng.integers(2, 6))
        s = sample_binary_set(n, 2, 0.3, rng)
        mats = [oracles.arr(m) for m in s]
        w = find_block_permutation_structure(s)
        assert (w is not None) == (oracles.any_structure(mats, n) is not None)
        if w is not None:
            assert verify_witness(s, w)
            assert oracles.has_structure(mats, [list(b) for b in w.partition])


def test_oracle_triangle():
    """Irreducible NZ sets: pair-graph decision, structure search and
    exhaustive product search agree."""
    checked = 0
    seed = 0
    while checked < 200:
        rng = RngStream(2718, seed).generator()
        seed += 1
        n = int(rng.integers(2, 7))
        s = sample_binary_set(n, 2, float(rng.uniform(0.2, 0.6)), rng)
        if not all(classify(m).is_nz for m in s) or not is_irreducible(s):
            continue
        checked += 1
        a = is_primitive_nz(s)
        b = find_block_permutation_structure(s) is None
        c = exponent_exact(s).is_primitive
        assert a == b == c


def test_proper_primitive(golden_pair):
    assert is_proper_primitive(golden_pair)
    j = BinaryMatrix.ones(3)
    assert not is_proper_primitive(MatrixSet([j, j]))
    assert not is_proper_primitive(MatrixSet([BinaryMatrix.identity(3)] * 2))
