"""Searches over the distinct boolean products of a matrix set.

``search_products`` explores level by level (level = word length), expanding
each distinct product once, so the first level at which a predicate holds is
the length of the shortest word satisfying it. ``astar_positive`` specialises
to positivity with a subset-distance heuristic.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .matrix import MatrixSet


class _SmallEngine:
    """n <= 8: a product is ``bytes`` of row masks; right multiplication by a
    fixed generator is a 256-entry translation table."""

    def __init__(self, s: MatrixSet):
        self.n = s.n
        self.tables = []
        for g in s:
            table = bytearray(256)
            for mask in range(256):
                acc = 0
                x = mask
                while x:
                    low = x & -x
                    k = low.bit_length() - 1
                    if k < self.n:
                        acc |= g.rows[k]
                    x ^= low
                table[mask] = acc
            self.tables.append(bytes(table))
        self.gens = [bytes(g.rows) for g in s]

    def start(self):
        return self.gens

    def mul(self, key: bytes, k: int) -> bytes:
        return key.translate(self.tables[k])

    def rows(self, key: bytes):
        return tuple(key)


class _LargeEngine:
    """General n: a product is a tuple of row ints; row images under each
    generator are memoised since rows repeat heavily across products."""

    def __init__(self, s: MatrixSet):
        self.n = s.n
        self.gen_rows = [g.rows for g in s]
        self.memo = [dict() for _ in s]
        self.gens = [g.rows for g in s]

    def start(self):
        return self.gens

    def mul(self, key: tuple, k: int) -> tuple:
        memo = self.memo[k]
        grows = self.gen_rows[k]
        out = []
        for r in key:
            img = memo.get(r)
            if img is None:
                img = 0
                x = r
                while x:
                    low = x & -x
                    img |= grows[low.bit_length() - 1]
                    x ^= low
                memo[r] = img
            out.append(img)
        return tuple(out)

    def rows(self, key: tuple):
        return key


def _engine(s: MatrixSet):
    return _SmallEngine(s) if s.n <= 8 else _LargeEngine(s)


@dataclass
class SearchOutcome:
    """Per-predicate result of a product search.

    ``lengths[name]`` is the minimal word length or None if never found;
    ``words[name]`` is a witness word. ``exhausted`` is True when every
    distinct product was visited; ``visited`` counts distinct products.
    """

    lengths: dict
    words: dict
    exhausted: bool
    visited: int


def search_products(
    s: MatrixSet,
    predicates: dict[str, Callable[[Sequence[int], int], bool]],
    cap: int,
) -> SearchOutcome:
    """Run the level-wise BFS until every predicate has been satisfied, the
    product semigroup is exhausted, or ``cap`` distinct products were seen.

    Predicates receive ``(rows, full_mask)`` for a product.
    """
    eng = _engine(s)
    full = (1 << s.n) - 1
    parent: dict = {}
    lengths = {name: None for name in predicates}
    found_key = {}
    pending = set(predicates)

    frontier = []
    for k, g in enumerate(eng.start()):
        if g not in parent:
            parent[g] = (None, k)
            frontier.append(g)
    level = 1
    exhausted = False
    while True:
        for key in frontier:
            if not pending:
                break
            rows = eng.rows(key)
            for name in list(pending):
                if predicates[name](rows, full):
                    lengths[name] = level
                    found_key[name] = key
                    pending.discard(name)
        if not pending:
            break
        if not frontier:
            exhausted = True
            break
        if len(parent) >= cap:
            break
        nxt = []
        m = len(s)
        for key in frontier:
            for k in range(m):
                child = eng.mul(key, k)
                if child not in parent:
                    parent[child] = (key, k)
                    nxt.append(child)
            if len(parent) > cap:
                break
        if len(parent) > cap:
            break
        frontier = nxt
        level += 1

    words = {}
    for name, key in found_key.items():
        word = []
        while key is not None:
            key, k = parent[key]
            word.append(k)
        words[name] = word[::-1]
    return SearchOutcome(lengths, words, exhausted, len(parent))


def is_positive_rows(rows, full) -> bool:
    return all(r == full for r in rows)


def has_positive_column(rows, full) -> bool:
    acc = full
    for r in rows:
        acc &= r
    return acc != 0


def columns_constant(rows, full) -> bool:
    # every column all-ones or all-zeros <=> all rows equal
    first = rows[0]
    return all(r == first for r in rows)


HEURISTIC_MAX_N = 16
PAIR_HEURISTIC_MAX_N = 9


def subset_images(s: MatrixSet) -> list[np.ndarray]:
    """``img[k][S]`` is the image of the state subset ``S`` (bitmask) under
    matrix ``k``: the union of the rows indexed by ``S``."""
    out = []
    for g in s:
        img = np.zeros(1 << s.n, dtype=np.int64)
        for b, row in enumerate(g.rows):
            img[1 << b: 1 << (b + 1)] = img[: 1 << b] | row
        out.append(img)
    return out


def _value_iteration(images: list[np.ndarray], goal: int) -> np.ndarray:
    inf = np.iinfo(np.int64).max // 2
    d = np.full(images[0].size, inf, dtype=np.int64)
    d[goal] = 0
    while True:
        best = d.copy()
        for img in images:
            np.minimum(best, d[img] + 1, out=best)
        if np.array_equal(best, d):
            break
        d = best
    d[d >= inf] = -1
    return d


def distance_to_full(s: MatrixSet) -> np.ndarray:
    """Shortest word length sending each subset onto the full set (-1 when
    impossible), by value iteration over all 2^n subsets."""
    return _value_iteration(subset_images(s), (1 << s.n) - 1)


def pair_distance_to_full(s: MatrixSet) -> np.ndarray:
    """Same for ordered pairs of subsets, indexed ``(a << n) | b``: the
    shortest word sending both onto the full set at once."""
    n = s.n
    images = [((img << n)[:, None] | img[None, :]).ravel() for img in subset_images(s)]
    return _value_iteration(images, (1 << 2 * n) - 1)


_UNREACHABLE = 1 << 30


def _sentinel(d: np.ndarray) -> list:
    return np.where(d < 0, _UNREACHABLE, d).tolist()


def astar_positive(s: MatrixSet, cap: int) -> SearchOutcome:
    """Shortest word with an entrywise-positive product.

    Whether ``P V`` is positive depends only on the set of rows of ``P``,
    and a row containing another row becomes full whenever the smaller one
    does. States are therefore the inclusion-minimal rows of a product, which
    merges many distinct products. Every row of a positive product is the
    full set, so the largest distance-to-full over the rows (over pairs of
    rows for n <= ``PAIR_HEURISTIC_MAX_N``) never overestimates the remaining
    length and is consistent; the first positive state popped is optimal.
    A row that can never become full proves that no positive product exists.
    Above ``HEURISTIC_MAX_N`` the heuristic is zero and this is plain BFS.
    """
    eng = _engine(s)
    full = (1 << s.n) - 1
    m = len(s)
    if s.n <= HEURISTIC_MAX_N:
        dist = _sentinel(distance_to_full(s))
        if any(dist[1 << r] >= _UNREACHABLE for r in range(s.n)):
            return SearchOutcome({"goal": None}, {}, True, 0)
    if s.n <= PAIR_HEURISTIC_MAX_N:
        pair = _sentinel(pair_distance_to_full(s))
        n = s.n

        def h(key):
            rows = eng.rows(key)
            if len(rows) == 1:
                return dist[rows[0]]
            return max(pair[(a << n) | b] for i, a in enumerate(rows) for b in rows[i + 1:])
    elif s.n <= HEURISTIC_MAX_N:
        def h(key):
            return max(dist[r] for r in eng.rows(key))
    else:
        def h(key):
            return 0

    pack = bytes if s.n <= 8 else tuple

    def reduce(key):
        rows = sorted(set(eng.rows(key)))
        keep = [r for r in rows if not any(o != r and o & r == o for o in rows)]
        return pack(keep)

    parent: dict = {}
    best: dict = {}
    heap = []
    tick = 0
    for k, g in enumerate(eng.start()):
        g = reduce(g)
        if g not in best:
            best[g] = 1
            parent[g] = (None, k)
            hg = h(g)
            if hg < _UNREACHABLE:
                heapq.heappush(heap, (1 + hg, -1, tick, g))
                tick += 1
    while heap:
        f, neg_g, _, key = heapq.heappop(heap)
        g = -neg_g
        if best[key] < g:
            continue
        if all(r == full for r in eng.rows(key)):
            word = []
            while key is not None:
                key, k = parent[key]
                word.append(k)
            return SearchOutcome({"goal": g}, {"goal": word[::-1]}, False, len(best))
        if len(best) > cap:
            return SearchOutcome({"goal": None}, {}, False, len(best))
        for k in range(m):
            child = reduce(eng.mul(key, k))
            old = best.get(child)
            if old is not None and old <= g + 1:
                continue
            hc = h(child)
            if hc >= _UNREACHABLE:
                continue
            best[child] = g + 1
            parent[child] = (key, k)
            heapq.heappush(heap, (g + 1 + hc, -(g + 1), tick, child))
            tick += 1
    return SearchOutcome({"goal": None}, {}, True, len(best))
