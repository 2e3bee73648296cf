"""Randomized construction of proper primitive perturbed permutation sets.

Every (m-1)-subset of the generated set is forced to carry a q_j-permutation
structure, so the set, when primitive, is proper.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import BadParameter, DoesNotConverge, PrimsetError
from .matrix import MAX_N, BinaryMatrix, MatrixSet
from .primitivity import Partition, StructureWitness, is_primitive_nz
from .randgen import as_generator, sample_q_partition


def extract_perm_greedy(m: BinaryMatrix, met: int = 3, rng=None) -> tuple[bool, BinaryMatrix]:
    """Greedy extraction of a permutation matrix dominated by ``m``.

    Each round takes the active row or column with the fewest ones (rows
    before columns, then smallest index) and fixes one of its 1-entries:
    uniformly at random for ``met=2``, the first one for ``met=3``. May miss
    permutations that exist; returns ``(False, m)`` on failure.
    """
    if met not in (2, 3):
        raise BadParameter(f"met must be 2 or 3, got {met}")
    if met == 2:
        rng = as_generator(rng)
    n = m.n
    rows = list(m.rows)
    active_rows = list(range(n))
    active_cols = list(range(n))
    for _ in range(n):
        best = None
        for i in active_rows:
            c = bin(rows[i]).count("1")
            if best is None or c < best[0]:
                best = (c, "row", i)
        for j in active_cols:
            bit = 1 << j
            c = sum(1 for i in active_rows if rows[i] & bit)
            if c < best[0]:
                best = (c, "col", j)
        count, kind, line = best
        if count == 0:
            return False, m
        if kind == "row":
            i = line
            choices = [j for j in active_cols if rows[i] >> j & 1]
            j = choices[int(rng.integers(len(choices)))] if met == 2 else choices[0]
        else:
            j = line
            choices = [i for i in active_rows if rows[i] >> j & 1]
            i = choices[int(rng.integers(len(choices)))] if met == 2 else choices[0]
        rows[i] = 1 << j
        for r in active_rows:
            if r != i:
                rows[r] &= ~(1 << j)
        active_rows.remove(i)
        active_cols.remove(j)
    return True, BinaryMatrix(n, rows)


def extract_perm_matching(m: BinaryMatrix) -> tuple[bool, BinaryMatrix]:
    """Complete test: a dominated permutation exists iff the bipartite graph
    of ``m`` has a perfect matching."""
    graph = csr_matrix(m.to_array())
    match = maximum_bipartite_matching(graph, perm_type="column")
    if (match < 0).any():
        return False, m
    return True, BinaryMatrix.from_permutation(match.tolist())


def submatrix(m: BinaryMatrix, rows: Sequence[int], cols: Sequence[int]) -> BinaryMatrix:
    """``m[rows, cols]`` for equal-length index lists."""
    out = []
    for r in rows:
        x = m.rows[r]
        acc = 0
        for idx, c in enumerate(cols):
            if x >> c & 1:
                acc |= 1 << idx
        out.append(acc)
    return BinaryMatrix(len(rows), out)


def _mask(block: Sequence[int]) -> int:
    acc = 0
    for x in block:
        acc |= 1 << x
    return acc


def dom_perm(m: BinaryMatrix, partition: Partition, met: int = 3, rng=None,
             complete: bool = False) -> tuple[bool, BinaryMatrix, tuple[int, ...] | None]:
    """Find a block permutation sigma compatible with ``m`` and the partition.

    Block ``(i, k)`` is usable when ``m[block_i, block_k]`` dominates a
    permutation; sigma is then extracted from the q x q usability matrix.
    Returns ``(True, A, sigma)`` where ``A`` keeps only the blocks
    ``(i, sigma[i])`` of ``m``, or ``(False, m, None)``.
    """
    extract = (lambda x: extract_perm_matching(x)) if complete \
        else (lambda x: extract_perm_greedy(x, met, rng))
    q = len(partition)
    usable = []
    for bi in partition:
        row = 0
        for k, bk in enumerate(partition):
            if extract(submatrix(m, bi, bk))[0]:
                row |= 1 << k
        usable.append(row)
    found, sel = extract(BinaryMatrix(q, usable))
    if not found:
        return False, m, None
    sigma = sel.as_function()
    rows = list(m.rows)
    for i, block in enumerate(partition):
        keep = _mask(partition[sigma[i]])
        for r in block:
            rows[r] &= keep
    return True, BinaryMatrix(m.n, rows), sigma


@dataclass
class ConstructionRecord:
    """Bookkeeping of one construction run.

    ``sigmas[j][k]`` is the block permutation of matrix ``k`` on
    ``partitions[j]`` (absent for ``k == j``).
    """

    primes: tuple[int, ...]
    n: int
    met: int
    partitions: list[Partition] = field(default_factory=list)
    sigmas: list[dict[int, tuple[int, ...]]] = field(default_factory=list)
    retries: list[int] = field(default_factory=list)
    perturbed: tuple[int, int, int] | None = None
    greedy_fallbacks: int = 0

    def witness(self, j: int) -> StructureWitness:
        """The recorded q_j-permutation structure of the set without matrix j."""
        m = len(self.primes)
        sig = tuple(self.sigmas[j][k] for k in range(m) if k != j)
        return StructureWitness(self.primes[j], self.partitions[j], sig)

    def to_text(self) -> str:
        lines = [f"primes {','.join(map(str, self.primes))}", f"met {self.met}"]
        for j, part in enumerate(self.partitions):
            blocks = "|".join(",".join(str(x) for x in b) for b in part)
            lines.append(f"partition {j} {blocks} retries {self.retries[j]}")
            for k, sigma in sorted(self.sigmas[j].items()):
                lines.append(f"sigma {j} {k} {','.join(map(str, sigma))}")
        if self.perturbed is not None:
            lines.append("perturbed {} {} {}".format(*self.perturbed))
        return "\n".join(lines) + "\n"


def _is_prime(q: int) -> bool:
    return q >= 2 and all(q % d for d in range(2, int(math.isqrt(q)) + 1))


def addone(perms: Sequence[BinaryMatrix], record: ConstructionRecord, rng) -> MatrixSet:
    """Flip one 0-entry of one permutation to 1 so that every recorded block
    structure of that matrix survives.

    Drawing the matrix and the entry uniformly and retrying until compatible
    is the same law as a uniform draw over all compatible (matrix, entry)
    pairs, which is what is sampled here.
    """
    rng = as_generator(rng)
    m = len(perms)
    n = perms[0].n
    block_of = []
    for part in record.partitions:
        where = [0] * n
        for b, block in enumerate(part):
            for x in block:
                where[x] = b
        block_of.append(where)
    masks = [[_mask(b) for b in part] for part in record.partitions]
    candidates = []
    for k, p in enumerate(perms):
        for r in range(n):
            allowed = (1 << n) - 1
            for j in range(m):
                if j != k:
                    allowed &= masks[j][record.sigmas[j][k][block_of[j][r]]]
            allowed &= ~p.rows[r]
            while allowed:
                low = allowed & -allowed
                candidates.append((k, r, low.bit_length() - 1))
                allowed ^= low
    if not candidates:
        raise PrimsetError("no structure-preserving 0-entry exists")
    k, r, c = candidates[int(rng.integers(len(candidates)))]
    record.perturbed = (k, r, c)
    mats = list(perms)
    mats[k] = mats[k].with_entry(r, c, 1)
    return MatrixSet(mats)


def generate_proper_candidate(primes: Sequence[int], t1: int = 1000, met: int = 3, rng=None,
                              complete: bool = False) -> tuple[MatrixSet, bool, ConstructionRecord]:
    """One run of the construction. Returns ``(set, primitive, record)``.

    Raises DoesNotConverge when some q_j exhausts ``t1`` partition draws.
    """
    primes = tuple(int(q) for q in primes)
    if len(primes) < 2 or not all(_is_prime(q) for q in primes):
        raise BadParameter(f"need at least two primes, got {primes}")
    if met not in (2, 3):
        raise BadParameter(f"met must be 2 or 3, got {met}")
    if t1 < 1:
        raise BadParameter("t1 must be positive")
    n = math.prod(primes)
    if n > MAX_N:
        raise BadParameter(f"n={n} exceeds {MAX_N}")
    rng = as_generator(rng)
    m = len(primes)
    mats = [BinaryMatrix.ones(n) for _ in range(m)]
    record = ConstructionRecord(primes, n, met)
    for j, q in enumerate(primes):
        for attempt in range(1, t1 + 1):
            part = sample_q_partition(n, q, rng)
            updated = {}
            for k in range(m):
                if k == j:
                    continue
                ok, a, sigma = dom_perm(mats[k], part, met, rng, complete)
                if not ok:
                    break
                updated[k] = (a, sigma)
            else:
                break
        else:
            raise DoesNotConverge(j, t1)
        record.partitions.append(part)
        record.retries.append(attempt - 1)
        record.sigmas.append({k: sigma for k, (_, sigma) in updated.items()})
        for k, (a, _) in updated.items():
            mats[k] = a
    perms = []
    for mk in mats:
        found, p = extract_perm_greedy(mk, met, rng)
        if not found:
            # mk is a union of blocks each dominating a permutation, so a
            # permutation exists; the greedy just missed it
            record.greedy_fallbacks += 1
            found, p = extract_perm_matching(mk)
        perms.append(p)
    s = addone(perms, record, rng)
    return s, is_primitive_nz(s), record


def record_is_consistent(s: MatrixSet, record: ConstructionRecord) -> bool:
    """Every matrix k lies inside the block pattern (partition j, sigma_j^k)
    for every j != k."""
    from .primitivity import verify_witness

    return all(verify_witness(s.without(j), record.witness(j)) for j in range(len(s)))


def seeds_from(rng, count: int) -> list[int]:
    rng = as_generator(rng)
    return [int(x) for x in rng.integers(0, 2**63 - 1, size=count, dtype=np.int64)]
