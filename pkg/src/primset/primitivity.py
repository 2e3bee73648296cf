"""Primitivity of matrix sets: decision, exponent, block-permutation structures."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Sequence

import numpy as np
from scipy import sparse

from .automata import associated_dfa, greedy_sync_word, reset_threshold_exact
from .errors import NotNZ, SizeLimit
from .matrix import MatrixSet, classify, transpose_set
from .products import astar_positive

Partition = tuple[tuple[int, ...], ...]

MAX_N_EQUAL_BLOCKS = 12
MAX_N_GENERAL = 8


# irreducibility


def _reach(rows: Sequence[int], start: int) -> int:
    seen = 1 << start
    frontier = seen
    while frontier:
        nxt = 0
        x = frontier
        while x:
            low = x & -x
            nxt |= rows[low.bit_length() - 1]
            x ^= low
        frontier = nxt & ~seen
        seen |= nxt
    return seen


def is_irreducible(s: MatrixSet) -> bool:
    """Strong connectivity of the digraph of the boolean sum (forward and
    backward reachability from vertex 0)."""
    total = s.total()
    full = (1 << s.n) - 1
    return _reach(total.rows, 0) == full and _reach(total.columns(), 0) == full


# pair-graph closure


def _as_operator(m, n):
    a = m.to_array().astype(np.float32)
    return sparse.csr_matrix(a) if n > 64 else a


def merging_closure(mats: Sequence, n: int) -> tuple[np.ndarray, int]:
    """Pairs ``{p, q}`` from which a singleton is reachable in the pair graph.

    An edge ``{p,q} -> {p',q'}`` exists when one matrix ``M`` of ``mats`` has
    ``M[p,p'] = M[q,q'] = 1``. Returns the symmetric boolean reachability
    matrix and the number of rounds (the largest finite distance).
    """
    ops = [_as_operator(m, n) for m in mats]
    good = np.eye(n, dtype=bool)
    frontier = good.astype(np.float32)
    rounds = 0
    while True:
        reached = np.zeros((n, n), dtype=bool)
        for op in ops:
            x = op @ frontier
            y = op @ np.asarray(x).T
            reached |= np.asarray(y) > 0
        new = reached & ~good
        if not new.any():
            return good, rounds
        rounds += 1
        good |= new
        frontier = new.astype(np.float32)


def _require_nz(s: MatrixSet) -> None:
    for k, m in enumerate(s):
        if not classify(m).is_nz:
            raise NotNZ(f"matrix {k} has a zero row or column")


def is_primitive_nz(s: MatrixSet) -> bool:
    """Primitivity of a set of NZ matrices.

    An irreducible NZ set is primitive iff its associated DFA synchronizes,
    i.e. iff every pair of states can be merged in the pair graph; the graph
    is explored directly on the matrices so the DFA is never materialised.
    Without irreducibility the DFA of the set and that of its transpose can
    disagree, so irreducibility is checked first.
    """
    _require_nz(s)
    if not is_irreducible(s):
        return False
    good, _ = merging_closure(s.mats, s.n)
    return bool(good.all())


# exact exponent


class Outcome(enum.Enum):
    PRIMITIVE = "primitive"
    NOT_PRIMITIVE = "not_primitive"
    CAP_EXCEEDED = "cap_exceeded"


@dataclass(frozen=True)
class ExponentResult:
    outcome: Outcome
    length: int | None = None
    word: tuple[int, ...] | None = None
    visited: int = 0

    @property
    def is_primitive(self) -> bool:
        return self.outcome is Outcome.PRIMITIVE


def exponent_exact(s: MatrixSet, cap: int = 1_000_000) -> ExponentResult:
    """Length of the shortest positive product.

    A* search over distinct products, guided by how far each row of the
    current product is from the full state set.
    """
    res = astar_positive(s, cap)
    if res.lengths["goal"] is not None:
        return ExponentResult(Outcome.PRIMITIVE, res.lengths["goal"],
                              tuple(res.words["goal"]), res.visited)
    if res.exhausted:
        return ExponentResult(Outcome.NOT_PRIMITIVE, visited=res.visited)
    return ExponentResult(Outcome.CAP_EXCEEDED, visited=res.visited)


def exponent_bounds(s: MatrixSet, rt_mode: str = "exact",
                    cap_letters: int = 100_000) -> tuple[int, int]:
    """Bracket the exponent by reset thresholds of the associated DFAs of the
    set and of its transpose.

    ``rt_mode="exact"`` returns ``(max(rt, rt_T), rt + rt_T + n - 1)``.
    ``rt_mode="greedy"`` uses greedy synchronizing word lengths instead,
    which only yields an upper bound; the lower bound is reported as 1.
    """
    a = associated_dfa(s, cap_letters)
    at = associated_dfa(transpose_set(s), cap_letters)
    if rt_mode == "exact":
        r, rt = reset_threshold_exact(a), reset_threshold_exact(at)
        return max(r, rt), r + rt + s.n - 1
    if rt_mode == "greedy":
        g, gt = len(greedy_sync_word(a)), len(greedy_sync_word(at))
        return 1, g + gt + s.n - 1
    raise ValueError(f"unknown rt_mode {rt_mode!r}")


# block-permutation structures


@dataclass(frozen=True)
class StructureWitness:
    q: int
    partition: Partition
    sigma_per_matrix: tuple[tuple[int, ...], ...]


def _rgs_partitions(n: int) -> Iterator[Partition]:
    """All set partitions of range(n) in canonical form (restricted growth)."""
    labels = [0] * n

    def rec(i, nblocks):
        if i == n:
            blocks = [[] for _ in range(nblocks)]
            for x, b in enumerate(labels):
                blocks[b].append(x)
            yield tuple(tuple(b) for b in blocks)
            return
        for b in range(nblocks + 1):
            labels[i] = b
            yield from rec(i + 1, max(nblocks, b + 1))

    if n:
        yield from rec(1, 1)


def equal_partitions(n: int, q: int) -> Iterator[Partition]:
    """Partitions of range(n) into q blocks of size n/q, each block led by its
    smallest element and blocks ordered by leaders."""
    size = n // q

    def rec(remaining):
        if not remaining:
            yield ()
            return
        lead, rest = remaining[0], remaining[1:]
        for others in combinations(rest, size - 1):
            block = (lead,) + others
            left = tuple(x for x in rest if x not in others)
            for tail in rec(left):
                yield (block,) + tail

    yield from rec(tuple(range(n)))


def block_maps(s: MatrixSet, partition: Partition) -> tuple[tuple[int, ...], ...] | None:
    """Per-matrix block permutation if every matrix respects the partition."""
    n = s.n
    block_of = [0] * n
    masks = []
    for b, block in enumerate(partition):
        mask = 0
        for x in block:
            block_of[x] = b
            mask |= 1 << x
        masks.append(mask)
    q = len(partition)
    sigmas = []
    for m in s:
        target = [None] * q
        used = set()
        for b, block in enumerate(partition):
            img = 0
            for x in block:
                img |= m.rows[x]
            if not img:
                continue
            t = block_of[(img & -img).bit_length() - 1]
            if img & ~masks[t] or t in used:
                return None
            target[b] = t
            used.add(t)
        free = iter(sorted(set(range(q)) - used))
        sigmas.append(tuple(t if t is not None else next(free) for t in target))
    return tuple(sigmas)


def verify_witness(s: MatrixSet, w: StructureWitness) -> bool:
    """Independent check: scan every 1-entry of every matrix."""
    cover = sorted(x for block in w.partition for x in block)
    if cover != list(range(s.n)) or len(w.partition) != w.q or w.q < 2:
        return False
    if any(not block for block in w.partition) or len(w.sigma_per_matrix) != len(s):
        return False
    where = {x: b for b, block in enumerate(w.partition) for x in block}
    for m, sigma in zip(s, w.sigma_per_matrix):
        if sorted(sigma) != list(range(w.q)):
            return False
        for i in range(s.n):
            for j in range(s.n):
                if m[i, j] and where[j] != sigma[where[i]]:
                    return False
    return True


def find_block_permutation_structure(s: MatrixSet, equal_blocks_only: bool = False,
                                     q: int | None = None) -> StructureWitness | None:
    """Brute-force search for a partition on which every matrix of the set has
    a block-permutation structure. ``q`` restricts the number of blocks."""
    n = s.n
    limit = MAX_N_EQUAL_BLOCKS if equal_blocks_only else MAX_N_GENERAL
    if n > limit:
        raise SizeLimit(f"n={n} exceeds brute-force limit {limit}")
    if equal_blocks_only:
        qs = [k for k in range(2, n + 1) if n % k == 0]
        if q is not None:
            qs = [q] if q in qs else []
        candidates = (p for k in qs for p in equal_partitions(n, k))
    else:
        candidates = (p for p in _rgs_partitions(n) if len(p) >= 2 and (q is None or len(p) == q))
    for part in candidates:
        sig = block_maps(s, part)
        if sig is not None:
            return StructureWitness(len(part), part, sig)
    return None


def is_proper_primitive(s: MatrixSet, singleton_cap: int = 1_000_000) -> bool:
    """Primitive, and no longer primitive once any single matrix is removed."""
    _require_nz(s)
    if not is_primitive_nz(s):
        return False
    if len(s) == 1:
        return True
    for k in range(len(s)):
        sub = s.without(k)
        if len(sub) == 1:
            res = exponent_exact(sub, singleton_cap)
            primitive = res.is_primitive if res.outcome is not Outcome.CAP_EXCEEDED \
                else is_primitive_nz(sub)
        else:
            primitive = is_primitive_nz(sub)
        if primitive:
            return False
    return True
