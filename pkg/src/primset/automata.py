"""DFA and NDFA semantics on the matrix encoding.

A DFA letter is a binary row-stochastic matrix; internally each letter is
also kept as a transition map ``state -> state`` (a tuple).
"""
from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NotNZ, NotRowStochastic, NotSynchronizing, OriginMismatch, SizeLimit, TooManyLetters
from .matrix import BinaryMatrix, MatrixSet, classify, iter_bits
from .products import columns_constant, has_positive_column, search_products


class Dfa:
    """Complete DFA over states ``0..n-1``; letter ``k`` is ``letters[k]``."""

    __slots__ = ("n", "letters", "maps")

    def __init__(self, letters: Sequence[BinaryMatrix]):
        letters = tuple(letters)
        if not letters:
            raise ValueError("a DFA needs at least one letter")
        maps = []
        for k, a in enumerate(letters):
            f = a.as_function()
            if f is None:
                raise NotRowStochastic(f"letter {k} is not binary row-stochastic")
            maps.append(f)
        self.n = letters[0].n
        self.letters = letters
        self.maps = tuple(maps)

    @classmethod
    def from_maps(cls, maps: Sequence[Sequence[int]]) -> Dfa:
        return cls([BinaryMatrix.from_function(f) for f in maps])

    def __len__(self) -> int:
        return len(self.letters)

    def __eq__(self, other) -> bool:
        return isinstance(other, Dfa) and self.letters == other.letters

    def __repr__(self) -> str:
        return f"Dfa(n={self.n}, letters={len(self.letters)})"

    def as_set(self) -> MatrixSet:
        return MatrixSet(self.letters)

    def without(self, k: int) -> Dfa:
        return Dfa([a for i, a in enumerate(self.letters) if i != k])

    def apply(self, subset: int, word: Sequence[int]) -> int:
        """Image of a state subset (bitmask) under a word."""
        for k in word:
            f = self.maps[k]
            img = 0
            for s in iter_bits(subset):
                img |= 1 << f[s]
            subset = img
        return subset


def associated_dfa(s: MatrixSet, cap_letters: int = 100_000) -> Dfa:
    """All binary row-stochastic matrices dominated by some member of ``s``,
    without duplicates, in enumeration order (members in order, then row
    choices lexicographically)."""
    for k, m in enumerate(s):
        if not classify(m).is_nz:
            raise NotNZ(f"matrix {k} has a zero row or column")
    total = 0
    for m in s:
        count = 1
        for r in m.rows:
            count *= bin(r).count("1")
        total += count
        if total > cap_letters:
            raise TooManyLetters(f"more than {cap_letters} letters")
    seen = {}
    for m in s:
        options = [list(iter_bits(r)) for r in m.rows]
        for f in itertools.product(*options):
            seen.setdefault(f, None)
    return Dfa.from_maps(list(seen))


# square graph


def pair_index(i: int, j: int) -> int:
    if i > j:
        i, j = j, i
    return j * (j + 1) // 2 + i


@dataclass(frozen=True)
class SquareGraph:
    """Pairs ``(i, j)`` with ``i <= j``; ``succ[v]`` lists ``(w, letter)``."""

    n: int
    vertices: tuple[tuple[int, int], ...]
    succ: tuple[tuple[tuple[int, int], ...], ...]

    @property
    def singletons(self) -> tuple[int, ...]:
        return tuple(pair_index(i, i) for i in range(self.n))


def square_graph(dfa: Dfa) -> SquareGraph:
    n = dfa.n
    vertices = [None] * (n * (n + 1) // 2)
    for j in range(n):
        for i in range(j + 1):
            vertices[pair_index(i, j)] = (i, j)
    succ = []
    for i, j in vertices:
        out = []
        for k, f in enumerate(dfa.maps):
            out.append((pair_index(f[i], f[j]), k))
        succ.append(tuple(out))
    return SquareGraph(n, tuple(vertices), tuple(succ))


def _distances_to_singletons(dfa: Dfa):
    """Backward multi-source BFS from all singletons.

    Returns ``(dist, step)`` indexed by pair index: ``dist`` is -1 when no
    singleton is reachable; ``step[v]`` is a letter starting a shortest path.
    """
    n = dfa.n
    size = n * (n + 1) // 2
    preds = [[] for _ in range(size)]
    for k, f in enumerate(dfa.maps):
        for j in range(n):
            fj = f[j]
            for i in range(j):
                fi = f[i]
                w = fj * (fj + 1) // 2 + fi if fi <= fj else fi * (fi + 1) // 2 + fj
                preds[w].append((j * (j + 1) // 2 + i, k))
    dist = [-1] * size
    step = [-1] * size
    queue = deque()
    for i in range(n):
        v = pair_index(i, i)
        dist[v] = 0
        queue.append(v)
    while queue:
        w = queue.popleft()
        d = dist[w] + 1
        for v, k in preds[w]:
            if dist[v] < 0:
                dist[v] = d
                step[v] = k
                queue.append(v)
    return dist, step


def is_synchronizing(dfa: Dfa) -> bool:
    dist, _ = _distances_to_singletons(dfa)
    return min(dist) >= 0


def is_proper_dfa(dfa: Dfa) -> bool:
    """Synchronizing, and not synchronizing after deleting any one letter."""
    if not is_synchronizing(dfa):
        return False
    if len(dfa) == 1:
        return dfa.n > 1
    return not any(is_synchronizing(dfa.without(k)) for k in range(len(dfa)))


def sg_diameter(dfa: Dfa) -> int | None:
    """Largest distance from a non-singleton pair to the nearest singleton;
    None if some pair cannot be merged."""
    dist, _ = _distances_to_singletons(dfa)
    if min(dist) < 0:
        return None
    return max(dist)


# reset threshold


def _image_tables(dfa: Dfa) -> list[np.ndarray]:
    """Per letter, a (chunks, 256) table of images of 8-state chunks."""
    n = dfa.n
    chunks = (n + 7) // 8
    tables = []
    for f in dfa.maps:
        t = np.zeros((chunks, 256), dtype=np.uint64)
        for c in range(chunks):
            for mask in range(256):
                img = 0
                for b in range(8):
                    s = 8 * c + b
                    if mask >> b & 1 and s < n:
                        img |= 1 << f[s]
                t[c, mask] = img
        tables.append(t)
    return tables


def _images(table: np.ndarray, subsets: np.ndarray) -> np.ndarray:
    out = np.zeros_like(subsets)
    for c in range(table.shape[0]):
        out |= table[c][(subsets >> np.uint64(8 * c)) & np.uint64(255)]
    return out


def shortest_synchronizing_word(dfa: Dfa, cap_states: int = 1 << 24) -> list[int]:
    """Shortest synchronizing word, by BFS in the subset automaton from the
    full state set."""
    n = dfa.n
    if n == 1:
        return []
    if not is_synchronizing(dfa):
        raise NotSynchronizing("the automaton is not synchronizing")
    if n > 63 or (1 << n) > cap_states:
        raise SizeLimit(f"2^{n} subsets exceed cap {cap_states}")
    tables = _image_tables(dfa)
    visited = np.zeros(1 << n, dtype=bool)
    full = np.array([(1 << n) - 1], dtype=np.uint64)
    visited[full] = True
    levels = [full]
    target = None
    while target is None:
        frontier = levels[-1]
        found = []
        for t in tables:
            img = _images(t, frontier)
            found.append(img)
        img = np.unique(np.concatenate(found))
        single = img[(img & (img - np.uint64(1))) == 0]
        if single.size:
            target = int(single[0])
            break
        img = img[~visited[img]]
        visited[img] = True
        levels.append(img)

    # walk back through the stored levels
    word = []
    cur = np.uint64(target)
    for frontier in reversed(levels):
        for k, t in enumerate(tables):
            hit = np.nonzero(_images(t, frontier) == cur)[0]
            if hit.size:
                word.append(k)
                cur = frontier[hit[0]]
                break
    return word[::-1]


def reset_threshold_exact(dfa: Dfa, cap_states: int = 1 << 24) -> int:
    return len(shortest_synchronizing_word(dfa, cap_states))


def greedy_sync_word(dfa: Dfa) -> list[int]:
    """Pair-merging greedy: repeatedly merge the pair of current states with
    the shortest merging word (ties: smallest pair), then re-image."""
    n = dfa.n
    dist, step = _distances_to_singletons(dfa)
    if min(dist) < 0:
        raise NotSynchronizing("the automaton is not synchronizing")
    word: list[int] = []
    current = sorted(range(n))
    while len(current) > 1:
        best = None
        for a in range(len(current)):
            for b in range(a + 1, len(current)):
                i, j = current[a], current[b]
                d = dist[pair_index(i, j)]
                if best is None or d < best[0]:
                    best = (d, i, j)
        _, i, j = best
        piece = []
        while i != j:
            k = step[pair_index(i, j)]
            piece.append(k)
            f = dfa.maps[k]
            i, j = f[i], f[j]
        word.extend(piece)
        for k in piece:
            f = dfa.maps[k]
            current = sorted({f[s] for s in current})
    return word


def cerny_dfa(n: int) -> Dfa:
    """Cerny automaton: letter 0 is the cycle ``i -> i+1 mod n``, letter 1
    sends state 0 to 1 and fixes every other state."""
    if n < 2:
        raise ValueError("Cerny automaton needs n >= 2")
    a = [(i + 1) % n for i in range(n)]
    b = [1] + list(range(1, n))
    return Dfa.from_maps([a, b])


# proper automata from perturbed permutation sets


@dataclass(frozen=True)
class PerturbationInfo:
    """Where a perturbed permutation set carries its extra 1.

    Member ``index`` equals ``base + E(row, added_col)``; ``base`` maps
    ``row`` to ``orig_col``.
    """

    index: int
    row: int
    added_col: int
    orig_col: int
    base: BinaryMatrix


def perturbation_info(s: MatrixSet) -> PerturbationInfo | None:
    """Locate the perturbed member of a perturbed permutation set, or None if
    the set is not one."""
    info = None
    for k, m in enumerate(s):
        c = classify(m)
        if c.is_permutation:
            continue
        if not c.is_perturbed_permutation or info is not None:
            return None
        (row,) = [i for i, r in enumerate(m.rows) if r & (r - 1)]
        others = 0
        for i, r in enumerate(m.rows):
            if i != row:
                others |= r
        a, b = list(iter_bits(m.rows[row]))
        added, orig = (a, b) if others >> a & 1 else (b, a)
        info = PerturbationInfo(k, row, added, orig, m.with_entry(row, added, 0))
    return info


def make_proper(dfa: Dfa, origin: PerturbationInfo | None) -> Dfa:
    """Drop the base permutation letter when the associated DFA of a proper
    primitive perturbed permutation set is not proper."""
    if origin is None:
        raise OriginMismatch("perturbed-set metadata is required")
    if origin.base not in dfa.letters:
        raise OriginMismatch("the base permutation is not a letter of this DFA")
    if is_proper_dfa(dfa):
        return dfa
    reduced = dfa.without(dfa.letters.index(origin.base))
    return reduced


def make_proper_generic(dfa: Dfa) -> Dfa:
    """Delete letters (first deletable first) until the DFA is proper."""
    if not is_synchronizing(dfa):
        raise NotSynchronizing("the automaton is not synchronizing")
    changed = True
    while changed and len(dfa) > 1:
        changed = False
        for k in range(len(dfa)):
            sub = dfa.without(k)
            if is_synchronizing(sub):
                dfa = sub
                changed = True
                break
    return dfa


# directing words


class DirectingStatus(enum.Enum):
    EXACT = "exact"
    NOT_DIRECTABLE = "not_directable"
    CAP_EXCEEDED = "cap_exceeded"


@dataclass(frozen=True)
class DirectingLength:
    status: DirectingStatus
    length: int | None = None
    word: tuple[int, ...] | None = None


@dataclass(frozen=True)
class DirectabilityResult:
    d2: DirectingLength
    d3: DirectingLength


def directing_exact(s: MatrixSet, cap: int = 1_000_000) -> DirectabilityResult:
    """Shortest 2- and 3-directing words of an NDFA given as a matrix set.

    2-directing: every column of the product is all-ones or all-zeros.
    3-directing: the product has an all-ones column.
    """
    res = search_products(s, {"d2": columns_constant, "d3": has_positive_column}, cap)

    def pack(name):
        if res.lengths[name] is not None:
            return DirectingLength(DirectingStatus.EXACT, res.lengths[name], tuple(res.words[name]))
        if res.exhausted:
            return DirectingLength(DirectingStatus.NOT_DIRECTABLE)
        return DirectingLength(DirectingStatus.CAP_EXCEEDED)

    return DirectabilityResult(pack("d2"), pack("d3"))
