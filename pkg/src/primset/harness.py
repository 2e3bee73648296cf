"""Seeded Monte Carlo experiments and primitivity classification at scale."""
from __future__ import annotations

import csv
import enum
import io
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .automata import (Dfa, associated_dfa, directing_exact, is_proper_dfa, is_synchronizing,
                       make_proper, make_proper_generic, perturbation_info, sg_diameter)
from .construction import generate_proper_candidate
from .errors import ConfigError, DoesNotConverge
from .matrix import BinaryMatrix, MatrixSet, classify, word_product
from .primitivity import (Outcome, exponent_bounds, exponent_exact, is_irreducible,
                          is_primitive_nz, is_proper_primitive)
from .randgen import (RNG_NAME, RngStream, procedure1, procedure2, sample_binary_set,
                      sample_dominated_permutation)

# verdicts


class VerdictKind(enum.Enum):
    PRIMITIVE_EXACT = "PrimitiveExact"
    NOT_PRIMITIVE_EXACT = "NotPrimitiveExact"
    PRIMITIVE_CERTIFIED = "PrimitiveCertified"
    NOT_PRIMITIVE_NECESSARY = "NotPrimitiveNecessary"
    UNDECIDED = "Undecided"


class Reason(enum.Enum):
    ALL_ZERO_ROW = "AllZeroRow"
    ALL_ZERO_COL = "AllZeroCol"
    REDUCIBLE = "Reducible"


@dataclass(frozen=True)
class PrimitivityVerdict:
    kind: VerdictKind
    reason: Reason | None = None
    word: tuple[int, ...] | None = None

    @property
    def label(self) -> str:
        if self.kind is VerdictKind.NOT_PRIMITIVE_NECESSARY:
            return f"{self.kind.value}({self.reason.value})"
        if self.kind is VerdictKind.PRIMITIVE_CERTIFIED:
            return f"{self.kind.value}({len(self.word)})"
        return self.kind.value


@dataclass(frozen=True)
class Caps:
    """Budgets for the expensive fallbacks of :func:`classify_primitivity_at_scale`.

    ``search_products`` bounds the total number of matrix multiplications
    spent on random words; each word has at most ``word_length`` letters
    (default ``4 * ceil(log2 n) + 8``).
    """

    exact_n: int = 8
    exact_cap: int = 200_000
    search_products: int = 400
    word_length: int | None = None


def _all_have_zero_row(s: MatrixSet) -> bool:
    return all(any(r == 0 for r in m.rows) for m in s)


def _all_have_zero_col(s: MatrixSet) -> bool:
    return all(any(c == 0 for c in m.columns()) for m in s)


def _random_positive_word(s: MatrixSet, caps: Caps, rng) -> tuple[int, ...] | None:
    n, m = s.n, len(s)
    length = caps.word_length or 4 * math.ceil(math.log2(max(n, 2))) + 8
    ops = [mat.to_array().astype(np.float32) for mat in s]
    budget = caps.search_products
    while budget > 0:
        word = [int(rng.integers(m))]
        prod = ops[word[0]]
        budget -= 1
        if prod.all():
            return tuple(word)
        for _ in range(length - 1):
            if budget <= 0:
                break
            k = int(rng.integers(m))
            word.append(k)
            prod = np.minimum(prod @ ops[k], 1.0)
            budget -= 1
            if prod.all():
                return tuple(word)
            if not prod.any():
                break
    return None


def classify_primitivity_at_scale(s: MatrixSet, caps: Caps = Caps(), rng=None) -> PrimitivityVerdict:
    """Sound primitivity verdict under resource caps.

    Necessary conditions are checked first, then the polynomial decision for
    NZ sets, exact BFS at small n, the NZ members alone (a primitive subset
    makes the whole set primitive) and finally a random search for a positive
    product. Anything left is Undecided.
    """
    if _all_have_zero_row(s):
        return PrimitivityVerdict(VerdictKind.NOT_PRIMITIVE_NECESSARY, Reason.ALL_ZERO_ROW)
    if _all_have_zero_col(s):
        return PrimitivityVerdict(VerdictKind.NOT_PRIMITIVE_NECESSARY, Reason.ALL_ZERO_COL)
    if not is_irreducible(s):
        return PrimitivityVerdict(VerdictKind.NOT_PRIMITIVE_NECESSARY, Reason.REDUCIBLE)
    nz = [m for m in s if classify(m).is_nz]
    if len(nz) == len(s):
        kind = VerdictKind.PRIMITIVE_EXACT if is_primitive_nz(s) else VerdictKind.NOT_PRIMITIVE_EXACT
        return PrimitivityVerdict(kind)
    if s.n <= caps.exact_n:
        res = exponent_exact(s, caps.exact_cap)
        if res.outcome is Outcome.PRIMITIVE:
            return PrimitivityVerdict(VerdictKind.PRIMITIVE_EXACT)
        if res.outcome is Outcome.NOT_PRIMITIVE:
            return PrimitivityVerdict(VerdictKind.NOT_PRIMITIVE_EXACT)
    if nz and is_primitive_nz(MatrixSet(nz)):
        return PrimitivityVerdict(VerdictKind.PRIMITIVE_EXACT)
    if caps.search_products > 0:
        word = _random_positive_word(s, caps, np.random.default_rng(rng))
        if word is not None and word_product(s, word).is_positive():
            return PrimitivityVerdict(VerdictKind.PRIMITIVE_CERTIFIED, word=word)
    return PrimitivityVerdict(VerdictKind.UNDECIDED)


# closed-form bounds


def threshold_bounds(m: int, c: float) -> tuple[float, float]:
    """Asymptotic lower and upper bounds on the probability that m random
    binary matrices at density (log n + c)/n form a primitive set."""
    if m < 2:
        raise ValueError("m must be at least 2")
    d = math.exp(-2.0 * math.exp(-c))
    lower = 1.0 - (1.0 - d) ** m - m * d * (1.0 - d) ** (m - 1)
    upper = 1.0 - (1.0 - math.exp(-math.exp(-c))) ** m
    return max(0.0, lower), min(1.0, upper)


def p_hat(n: int, c: float) -> float:
    return (math.log(n) + c) / n


# X_{S_n} spot check


def conditional_permutation_frequencies(n: int = 3, p: float = 0.5, samples: int = 100_000,
                       seed: int = 0) -> tuple[dict[tuple[int, ...], float], int]:
    """Empirical law of a uniformly chosen permutation dominated by B(n, p),
    conditioned on one existing. Returns (frequencies, accepted samples)."""
    rng = RngStream(seed, 0).generator()
    counts: dict[tuple[int, ...], int] = {}
    accepted = 0
    for _ in range(samples):
        perm = sample_dominated_permutation(n, p, rng)
        if perm is None:
            continue
        accepted += 1
        counts[perm] = counts.get(perm, 0) + 1
    return {k: v / accepted for k, v in sorted(counts.items())}, accepted


# configuration


def parse_config(text: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment; surrounding quotes are
    stripped."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line or line.startswith("["):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (x.strip() for x in line.split("=", 1))
        out[key] = value.strip("\"'")
    return out


def _ints(v: str) -> list[int]:
    return [int(x) for x in v.replace("[", "").replace("]", "").split(",") if x.strip()]


def _floats(v: str) -> list[float]:
    return [float(x) for x in v.replace("[", "").replace("]", "").split(",") if x.strip()]


def _tuples(v: str) -> list[tuple[int, ...]]:
    return [tuple(_ints(group)) for group in v.split(";") if group.strip()]


def _get(cfg, key, conv, default=None):
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing config key {key!r}")
        return default
    try:
        return conv(cfg[key])
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {cfg[key]!r}") from exc


# CSV helpers


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return np.format_float_positional(float(x), precision=6, unique=False, fractional=False, trim="-")


def to_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) for x in r])
    return buf.getvalue()


def _median(xs):
    return statistics.median(xs) if xs else None


def _mean(xs):
    return statistics.fmean(xs) if xs else None


# trial functions (module level so worker processes can pickle them)


def _threshold_trial(args):
    n, m, p, seed, stream, caps = args
    rng = RngStream(seed, stream).generator()
    s = sample_binary_set(n, m, p, rng)
    all_nz = all(classify(x).is_nz for x in s)
    v = classify_primitivity_at_scale(s, caps, rng)
    label = v.label if v.reason is not None else v.kind.value
    return label, all_nz


def _scaling_trial(args):
    n, m, seed, stream, exact_n = args
    rng = RngStream(seed, stream).generator()
    s = procedure1(n, m, rng)
    if not is_primitive_nz(s):
        return None
    _, upper = exponent_bounds(s, rt_mode="greedy")
    exact = None
    if n <= exact_n:
        res = exponent_exact(s)
        exact = res.length if res.is_primitive else None
    return upper, exact


def _directability_trial(args):
    n, m, p, seed, stream = args
    rng = RngStream(seed, stream).generator()
    s = sample_binary_set(n, m, p, rng)
    res = exponent_exact(s)
    if not res.is_primitive:
        return None
    d = directing_exact(s)
    d2, d3 = d.d2.length, d.d3.length
    return res.length, d2, d3


def _proper_dfa(s: MatrixSet) -> Dfa:
    """Associated DFA of a primitive set, reduced to a proper automaton."""
    dfa = associated_dfa(s)
    info = perturbation_info(s)
    if info is not None and info.base in dfa.letters:
        reduced = make_proper(dfa, info)
        if is_proper_dfa(reduced):
            return reduced
    return make_proper_generic(dfa)


def _method_trial(args):
    method, n, primes, t1, seed, stream = args
    rng = RngStream(seed, stream).generator()
    if method == 1:
        s = procedure1(n, 2, rng)
    elif method == 4:
        s = procedure2(n, rng)
    else:
        try:
            s, _, _ = generate_proper_candidate(primes, t1, method, rng)
        except DoesNotConverge:
            return "nonconverged", None
    if is_primitive_nz(s):
        return "primitive", sg_diameter(_proper_dfa(s))
    return ("imprimitive" if is_irreducible(s) else "reducible"), None


def _audit_trial(args):
    primes, met, t1, seed, stream = args
    rng = RngStream(seed, stream).generator()
    try:
        s, pr, record = generate_proper_candidate(primes, t1, met, rng)
    except DoesNotConverge:
        return dict(converged=False)
    out = dict(converged=True, primitive=pr, retries=sum(record.retries),
               fallbacks=record.greedy_fallbacks)
    if pr:
        dfa = _proper_dfa(s)
        out["proper_set"] = is_proper_primitive(s)
        out["proper_dfa"] = is_proper_dfa(dfa) and is_synchronizing(dfa)
    return out


def _run(fn: Callable, tasks: list, jobs: int) -> list:
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def stream_id(point: int, trial: int) -> int:
    return (point << 32) + trial


# experiments


@dataclass
class ExperimentResult:
    kind: str
    header: list[str]
    rows: list[list]
    seconds: float = 0.0
    extra: dict = field(default_factory=dict)

    def csv(self) -> str:
        return to_csv(self.header, self.rows)


THRESHOLD_HEADER = ["n", "m", "beta", "c", "p", "trials", "all_zero_row", "all_zero_col",
                    "reducible", "primitive_exact", "not_primitive_exact", "primitive_certified",
                    "undecided", "all_nz", "primitive_exact_given_nz", "frac_all_zero_row",
                    "frac_all_nz", "frac_primitive", "lower_bound", "upper_bound", "seed", "rng"]


def _threshold(cfg, seed, jobs):
    ns = _get(cfg, "n", _ints)
    m = _get(cfg, "m", int, 2)
    betas = _get(cfg, "beta", _floats, [1.0])
    c = _get(cfg, "c", float, 0.0)
    trials = _get(cfg, "trials", int, 200)
    caps = Caps(exact_n=_get(cfg, "exact_n", int, 8),
                search_products=_get(cfg, "search_products", int, 400))
    lower, upper = threshold_bounds(m, c)
    rows = []
    point = 0
    for n in ns:
        for beta in betas:
            p = min(1.0, beta * p_hat(n, c))
            tasks = [(n, m, p, seed, stream_id(point, t), caps) for t in range(trials)]
            res = _run(_threshold_trial, tasks, jobs)
            labels = [r[0] for r in res]
            cnt = {k: labels.count(k) for k in set(labels)}
            nz = [r for r in res if r[1]]
            nz_prim = sum(1 for r in nz if r[0] == VerdictKind.PRIMITIVE_EXACT.value)
            primitive = cnt.get("PrimitiveExact", 0) + cnt.get("PrimitiveCertified", 0)
            azr = cnt.get("NotPrimitiveNecessary(AllZeroRow)", 0)
            rows.append([n, m, beta, c, p, trials, azr,
                         cnt.get("NotPrimitiveNecessary(AllZeroCol)", 0),
                         cnt.get("NotPrimitiveNecessary(Reducible)", 0),
                         cnt.get("PrimitiveExact", 0), cnt.get("NotPrimitiveExact", 0),
                         cnt.get("PrimitiveCertified", 0), cnt.get("Undecided", 0),
                         len(nz), nz_prim / len(nz) if nz else None,
                         azr / trials if trials else None, len(nz) / trials if trials else None,
                         primitive / trials if trials else None, lower, upper, seed, RNG_NAME])
            point += 1
    return THRESHOLD_HEADER, rows


SCALING_HEADER = ["n", "m", "trials", "primitive", "median_greedy_upper", "mean_greedy_upper",
                  "median_ratio_nlogn", "median_exact", "seed", "rng"]


def _scaling(cfg, seed, jobs):
    ns = _get(cfg, "n", _ints)
    m = _get(cfg, "m", int, 2)
    trials = _get(cfg, "trials", int, 50)
    exact_n = _get(cfg, "exact_n", int, 8)
    rows = []
    for point, n in enumerate(ns):
        tasks = [(n, m, seed, stream_id(point, t), exact_n) for t in range(trials)]
        res = [r for r in _run(_scaling_trial, tasks, jobs) if r is not None]
        uppers = [r[0] for r in res]
        exacts = [r[1] for r in res if r[1] is not None]
        med = _median(uppers)
        rows.append([n, m, trials, len(res), med, _mean(uppers),
                     None if med is None else med / (n * math.log(n)), _median(exacts), seed, RNG_NAME])
    return SCALING_HEADER, rows


DIRECT_HEADER = ["n", "m", "p", "trials", "primitive", "max_d2", "max_d3", "max_exponent",
                 "violations", "seed", "rng"]


def _directability(cfg, seed, jobs):
    ns = _get(cfg, "n", _ints)
    m = _get(cfg, "m", int, 2)
    p = _get(cfg, "p", float, 0.5)
    trials = _get(cfg, "trials", int, 100)
    rows = []
    for point, n in enumerate(ns):
        tasks = [(n, m, p, seed, stream_id(point, t)) for t in range(trials)]
        res = [r for r in _run(_directability_trial, tasks, jobs) if r is not None]
        violations = sum(1 for e, d2, d3 in res if d2 is None or d3 is None or max(d2, d3) > e)
        rows.append([n, m, p, trials, len(res),
                     max((r[1] for r in res if r[1] is not None), default=None),
                     max((r[2] for r in res if r[2] is not None), default=None),
                     max((r[0] for r in res), default=None), violations, seed, RNG_NAME])
    return DIRECT_HEADER, rows


METHOD_HEADER = ["method", "n", "primes", "iterations", "primitive", "reducible", "imprimitive",
                 "nonconverged", "frac_nonprimitive", "frac_reducible", "frac_imprimitive",
                 "max_sgd", "mean_sgd", "seed", "rng"]


def factorize(n: int) -> tuple[int, ...]:
    out, d = [], 2
    while d * d <= n:
        while n % d == 0:
            out.append(d)
            n //= d
        d += 1
    if n > 1:
        out.append(n)
    return tuple(out)


def _methods(cfg, seed, jobs):
    n = _get(cfg, "n", int)
    iterations = _get(cfg, "iterations", int, 2000)
    primes = _get(cfg, "primes", lambda v: tuple(_ints(v)), factorize(n))
    t1 = _get(cfg, "t1", int, 1000)
    methods = _get(cfg, "methods", _ints, [1, 2, 3, 4])
    if math.prod(primes) != n:
        raise ConfigError(f"primes {primes} do not multiply to n={n}")
    rows = []
    for method in methods:
        if method not in (1, 2, 3, 4):
            raise ConfigError(f"unknown method {method}")
        tasks = [(method, n, primes, t1, seed, stream_id(method, t)) for t in range(iterations)]
        res = _run(_method_trial, tasks, jobs)
        cnt = {k: sum(1 for r in res if r[0] == k)
               for k in ("primitive", "reducible", "imprimitive", "nonconverged")}
        sgds = [r[1] for r in res if r[1] is not None]
        done = iterations - cnt["nonconverged"]
        frac = (lambda x: x / done if done else None)
        rows.append([method, n, "x".join(map(str, primes)) if method in (2, 3) else "", iterations,
                     cnt["primitive"], cnt["reducible"], cnt["imprimitive"], cnt["nonconverged"],
                     frac(cnt["reducible"] + cnt["imprimitive"]), frac(cnt["reducible"]),
                     frac(cnt["imprimitive"]), max(sgds, default=None), _mean(sgds), seed, RNG_NAME])
    return METHOD_HEADER, rows


AUDIT_HEADER = ["primes", "n", "met", "t1", "trials", "converged", "primitive", "proper_set_ok",
                "proper_dfa_ok", "mean_retries", "greedy_fallbacks", "seed", "rng"]


def _audit(cfg, seed, jobs):
    groups = _get(cfg, "primes", _tuples)
    met = _get(cfg, "met", int, 3)
    t1 = _get(cfg, "t1", int, 1000)
    trials = _get(cfg, "trials", int, 100)
    rows = []
    for point, primes in enumerate(groups):
        tasks = [(primes, met, t1, seed, stream_id(point, t)) for t in range(trials)]
        res = _run(_audit_trial, tasks, jobs)
        conv = [r for r in res if r["converged"]]
        prim = [r for r in conv if r["primitive"]]
        rows.append(["x".join(map(str, primes)), math.prod(primes), met, t1, trials, len(conv),
                     len(prim), sum(r["proper_set"] for r in prim), sum(r["proper_dfa"] for r in prim),
                     _mean([r["retries"] for r in conv]), sum(r["fallbacks"] for r in conv),
                     seed, RNG_NAME])
    return AUDIT_HEADER, rows


EXPERIMENTS = {
    "Threshold": _threshold,
    "ExponentScaling": _scaling,
    "Directability": _directability,
    "MethodComparison": _methods,
    "ConstructionAudit": _audit,
}


def run_experiment(kind: str, config: dict | str, master_seed: int, jobs: int = 1) -> ExperimentResult:
    """Run one experiment kind; ``config`` is a key/value dict or its text.

    Output rows depend only on ``(kind, config, master_seed)``.
    """
    if kind not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment kind {kind!r}; choose from {sorted(EXPERIMENTS)}")
    cfg = parse_config(config) if isinstance(config, str) else {k: str(v) for k, v in config.items()}
    start = time.perf_counter()
    header, rows = EXPERIMENTS[kind](cfg, master_seed, jobs)
    if _get(cfg, "trials", int, -1) == 0 or _get(cfg, "iterations", int, -1) == 0:
        rows = []
    return ExperimentResult(kind, list(header), rows, time.perf_counter() - start)
