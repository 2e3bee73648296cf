"""Seeded random generators for matrices, matrix sets and partitions."""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .errors import BadDimension, NotDivisible
from .matrix import BinaryMatrix, MatrixSet, dominates

# The single place where the generator algorithm is chosen. Experiment CSVs
# copy this string into their rng column.
RNG_NAME = "numpy-PCG64/SeedSequence(master_seed,spawn_key=(stream_id,))"


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(seq))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    return np.random.default_rng(rng)


def sample_permutation(n: int, rng) -> BinaryMatrix:
    rng = as_generator(rng)
    return BinaryMatrix.from_permutation(rng.permutation(n).tolist())


def procedure1(n: int, m: int, rng) -> MatrixSet:
    """m uniform permutation matrices; one of them, chosen uniformly, gets one
    of its 0-entries (chosen uniformly) flipped to 1."""
    if n < 2 or m < 2:
        raise BadDimension("procedure 1 needs n >= 2 and m >= 2")
    rng = as_generator(rng)
    perms = [rng.permutation(n).tolist() for _ in range(m)]
    k = int(rng.integers(m))
    zeros = [(i, j) for i in range(n) for j in range(n) if j != perms[k][i]]
    i, j = zeros[int(rng.integers(len(zeros)))]
    mats = [BinaryMatrix.from_permutation(p) for p in perms]
    mats[k] = mats[k].with_entry(i, j, 1)
    return MatrixSet(mats)


def procedure1_sbar(n: int, m: int, rng) -> MatrixSet:
    """Same law as :func:`procedure1`, drawn as m-1 uniform permutations plus
    one uniform perturbed permutation (by rejection) at a uniform position."""
    if n < 2 or m < 2:
        raise BadDimension("procedure 1 needs n >= 2 and m >= 2")
    rng = as_generator(rng)
    k = int(rng.integers(m))
    mats = [sample_permutation(n, rng) for _ in range(m - 1)]
    base = sample_permutation(n, rng)
    while True:
        i, j = (int(x) for x in rng.integers(n, size=2))
        if not base[i, j]:
            break
    mats.insert(k, base.with_entry(i, j, 1))
    return MatrixSet(mats)


def sample_binary_matrix(n: int, p: float, rng) -> BinaryMatrix:
    rng = as_generator(rng)
    return BinaryMatrix.from_array(rng.random((n, n)) < p)


def sample_binary_set(n: int, m: int, p: float, rng) -> MatrixSet:
    """m independent matrices with i.i.d. Bernoulli(p) entries."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    rng = as_generator(rng)
    draws = rng.random((m, n, n)) < p
    return MatrixSet(BinaryMatrix.from_array(a) for a in draws)


def procedure2(n: int, rng) -> MatrixSet:
    """Two uniform permutations; the first is rewired into an NZ matrix with
    n+1 ones that dominates no permutation matrix."""
    if n < 4:
        raise BadDimension("procedure 2 needs n >= 4")
    rng = as_generator(rng)
    p1 = rng.permutation(n).tolist()
    p2 = rng.permutation(n).tolist()
    rows = [1 << c for c in p1]
    i = int(rng.integers(n))
    j = p1[i]
    jbar = [c for c in range(n) if c != j][int(rng.integers(n - 1))]
    rows[i] = 1 << jbar
    i_other = p1.index(jbar)
    ibar = [r for r in range(n) if r not in (i, i_other)][int(rng.integers(n - 2))]
    rows[ibar] |= 1 << j
    return MatrixSet([BinaryMatrix(n, rows), BinaryMatrix.from_permutation(p2)])


def sample_q_partition(n: int, q: int, rng) -> tuple[tuple[int, ...], ...]:
    """Uniform partition of range(n) into q unlabeled blocks of size n/q."""
    if q < 2 or n % q:
        raise NotDivisible(f"q={q} does not divide n={n} (or q < 2)")
    rng = as_generator(rng)
    order = rng.permutation(n).tolist()
    size = n // q
    blocks = [tuple(sorted(order[b * size:(b + 1) * size])) for b in range(q)]
    return tuple(sorted(blocks))


def count_q_partitions(n: int, q: int) -> int:
    size = n // q
    return math.factorial(n) // (math.factorial(size) ** q * math.factorial(q))


def sample_dominated_permutation(n: int, p: float, rng) -> tuple[int, ...] | None:
    """Draw B(n, p); return a uniformly chosen permutation it dominates (as a
    tuple ``perm`` with ``P[i, perm[i]] = 1``), or None if there is none.

    Enumerates S_n, so only meant for tiny n.
    """
    from .construction import extract_perm_matching

    rng = as_generator(rng)
    b = sample_binary_matrix(n, p, rng)
    found, _ = extract_perm_matching(b)
    if not found:
        return None
    dominated = [perm for perm in permutations(range(n))
                 if dominates(b, BinaryMatrix.from_permutation(perm))]
    return dominated[int(rng.integers(len(dominated)))]
