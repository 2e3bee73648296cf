"""Three-letter automata built from a perturbed identity and two symmetric
permutations, including four slowly synchronizing families.

State labels in this module's public arguments (``i``, ``j`` of
:func:`build_a_ij`) are 1-based, as in the usual presentation of these
automata; matrices themselves are 0-based like everywhere else.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .automata import Dfa, reset_threshold_exact, sg_diameter
from .errors import BadIndices, BadParameter, NotIrreducible, NotSymmetric, ParityMismatch
from .matrix import BinaryMatrix, MatrixSet


class Variant(enum.Enum):
    CHAIN_EVEN = "ChainEven"
    RING_EVEN = "RingEven"
    CHAIN_ODD = "ChainOdd"


class FamilyKind(enum.Enum):
    E = "E"
    EPRIME = "Eprime"
    O = "O"
    OPRIME = "Oprime"


def _parse_variant(v) -> Variant:
    return v if isinstance(v, Variant) else Variant(v)


def _parse_kind(k) -> FamilyKind:
    return k if isinstance(k, FamilyKind) else FamilyKind(k)


def q1_q2(n: int, variant) -> tuple[BinaryMatrix, BinaryMatrix]:
    """The two symmetric permutations of the requested shape.

    Q2 pairs (1,2), (3,4), ...; Q1 pairs (2,3), (4,5), ... and, for the ring,
    also (1,n).
    """
    variant = _parse_variant(variant)
    if variant is Variant.CHAIN_ODD:
        if n % 2 == 0 or n < 3:
            raise ParityMismatch(f"ChainOdd needs odd n >= 3, got {n}")
    elif n % 2 or n < 4:
        raise ParityMismatch(f"{variant.value} needs even n >= 4, got {n}")
    # 1-based images, index 0 unused
    q1 = [0] * (n + 1)
    q2 = [0] * (n + 1)
    for i in range(1, n + 1):
        if i % 2 == 0:
            q1[i] = i + 1 if i + 1 <= n else i
            q2[i] = i - 1
        else:
            q1[i] = i - 1 if i >= 3 else i
            q2[i] = i + 1 if i + 1 <= n else i
    if variant is Variant.RING_EVEN:
        q1[1], q1[n] = n, 1
    to_perm = lambda q: BinaryMatrix.from_permutation([q[i] - 1 for i in range(1, n + 1)])
    return to_perm(q1), to_perm(q2)


def _default_variant(n: int) -> Variant:
    return Variant.CHAIN_EVEN if n % 2 == 0 else Variant.CHAIN_ODD


def build_a_ij(n: int, i: int, j: int, variant=None) -> tuple[MatrixSet, Dfa]:
    """The set {I + E_ij, Q1, Q2} and the DFA {I + E_ij - E_ii, Q1, Q2}.

    ``i`` and ``j`` are 1-based. The DFA's first letter sends ``i`` to ``j``
    and fixes every other state.
    """
    if not (1 <= i <= n and 1 <= j <= n) or i == j:
        raise BadIndices(f"need 1 <= i != j <= {n}, got i={i}, j={j}")
    variant = _default_variant(n) if variant is None else _parse_variant(variant)
    q1, q2 = q1_q2(n, variant)
    ident = BinaryMatrix.identity(n)
    perturbed = ident.with_entry(i - 1, j - 1, 1)
    letter = perturbed.with_entry(i - 1, i - 1, 0)
    return MatrixSet([perturbed, q1, q2]), Dfa([letter, q1, q2])


_MIN_K = {FamilyKind.E: 2, FamilyKind.EPRIME: 2, FamilyKind.O: 1, FamilyKind.OPRIME: 1}
_RESIDUE = {FamilyKind.E: 0, FamilyKind.EPRIME: 2, FamilyKind.O: 1, FamilyKind.OPRIME: 3}


def family_indices(kind, n: int) -> tuple[int, int]:
    kind = _parse_kind(kind)
    if n % 4 != _RESIDUE[kind] or n // 4 < _MIN_K[kind]:
        raise BadParameter(f"n={n} is not admissible for family {kind.value}")
    if kind is FamilyKind.E:
        return 1, n - 2
    if kind is FamilyKind.EPRIME:
        return 1, n - 4
    return (n - 1) // 2, (n + 1) // 2


def sgd_predicted(kind, n: int) -> int:
    kind = _parse_kind(kind)
    num = {
        FamilyKind.E: n * n + 2 * n - 4,
        FamilyKind.EPRIME: n * n + 2 * n - 12,
        FamilyKind.O: n * n + 3 * n - 8,
        FamilyKind.OPRIME: n * n + 3 * n - 6,
    }[kind]
    return num // 4


def rt_conjectured(kind, n: int) -> int:
    kind = _parse_kind(kind)
    num = {
        FamilyKind.E: n * n - 2,
        FamilyKind.EPRIME: n * n - 10,
        FamilyKind.O: n * n - 1,
        FamilyKind.OPRIME: n * n - 1,
    }[kind]
    return num // 2


def family_build(kind, n: int) -> tuple[Dfa, int, int]:
    """DFA of the family member on ``n`` states with its predicted square
    graph diameter and conjectured reset threshold."""
    i, j = family_indices(kind, n)
    _, dfa = build_a_ij(n, i, j)
    return dfa, sgd_predicted(kind, n), rt_conjectured(kind, n)


@dataclass(frozen=True)
class FamilyReport:
    kind: FamilyKind
    n: int
    sgd_computed: int | None
    sgd_predicted: int
    rt_computed: int | None
    rt_conjectured: int

    @property
    def sgd_match(self) -> bool:
        return self.sgd_computed == self.sgd_predicted

    @property
    def rt_match(self) -> bool | None:
        return None if self.rt_computed is None else self.rt_computed == self.rt_conjectured

    @property
    def sandwich_ok(self) -> bool | None:
        if self.rt_computed is None or self.sgd_computed is None:
            return None
        return self.sgd_computed <= self.rt_computed <= self.n * self.sgd_computed

    @property
    def match(self) -> bool:
        return self.sgd_match and self.rt_match is not False

    def line(self) -> str:
        rt = "" if self.rt_computed is None else str(self.rt_computed)
        return (f"{self.kind.value},{self.n},{self.sgd_computed},{self.sgd_predicted},"
                f"{rt},{self.rt_conjectured},{'true' if self.match else 'false'}")


REPORT_HEADER = "kind,n,sgd_computed,sgd_predicted,rt_computed,rt_conjectured,match"
RT_MAX_N = 24


def verify_family(kind, n: int, compute_rt: bool | None = None) -> FamilyReport:
    """Compare the computed square graph diameter (and, for small n, the exact
    reset threshold) with the closed forms. Never raises on a mismatch."""
    kind = _parse_kind(kind)
    dfa, sgd_pred, rt_conj = family_build(kind, n)
    if compute_rt is None:
        compute_rt = n <= RT_MAX_N
    rt = reset_threshold_exact(dfa) if compute_rt else None
    return FamilyReport(kind, n, sg_diameter(dfa), sgd_pred, rt, rt_conj)


@dataclass(frozen=True)
class Relabeling:
    """``perm[old] = new`` (0-based) carries the pair onto ``variant``;
    ``swapped`` means the roles of Q1 and Q2 had to be exchanged."""

    variant: Variant
    perm: tuple[int, ...]
    swapped: bool

    def apply(self, m: BinaryMatrix) -> BinaryMatrix:
        p = BinaryMatrix.from_permutation(self.perm)
        return p.T @ m @ p


def _involution(q: BinaryMatrix, name: str) -> tuple[int, ...]:
    f = q.as_function()
    if f is None or sorted(f) != list(range(q.n)):
        raise NotSymmetric(f"{name} is not a permutation matrix")
    if q.T != q:
        raise NotSymmetric(f"{name} is not symmetric")
    return f


def canonical_relabel(q1: BinaryMatrix, q2: BinaryMatrix, perturbed_index_i: int = 1) -> Relabeling:
    """Relabel states so that (Q1, Q2) takes one of the three canonical shapes.

    The walk starts at a chain endpoint (or, for a ring, at the 1-based
    ``perturbed_index_i``), steps along Q2 then Q1 alternately, and numbers
    states in visiting order.
    """
    f1, f2 = _involution(q1, "Q1"), _involution(q2, "Q2")
    n = q1.n
    if not 1 <= perturbed_index_i <= n:
        raise BadIndices(f"perturbed index {perturbed_index_i} outside 1..{n}")
    # a fixed point of either letter is a chain endpoint
    ends1 = [v for v in range(n) if f1[v] == v]
    ends2 = [v for v in range(n) if f2[v] == v]
    swapped = False
    if ends1 or ends2:
        if n % 2 == 0 and not ends1:
            f1, f2, swapped = f2, f1, True
        elif n % 2 and ends2 and not ends1:
            f1, f2, swapped = f2, f1, True
        start = min(v for v in range(n) if f1[v] == v)
        variant = Variant.CHAIN_EVEN if n % 2 == 0 else Variant.CHAIN_ODD
    else:
        start = perturbed_index_i - 1
        variant = Variant.RING_EVEN
    order = [start]
    seen = {start}
    v, use_q2 = start, True
    while True:
        w = (f2 if use_q2 else f1)[v]
        if w in seen:
            break
        order.append(w)
        seen.add(w)
        v, use_q2 = w, not use_q2
    if len(order) != n:
        raise NotIrreducible("the digraph of Q1 + Q2 is not connected")
    perm = [0] * n
    for new, old in enumerate(order):
        perm[old] = new
    return Relabeling(variant, tuple(perm), swapped)
