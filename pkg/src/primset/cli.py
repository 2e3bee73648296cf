"""Command line entry point: ``primset <subcommand> ...``.

Exit codes: 0 success, 1 usage or input error, 2 computation refused by a
size cap, 3 construction did not converge.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import families, harness
from .automata import Dfa, associated_dfa, reset_threshold_exact, sg_diameter, shortest_synchronizing_word
from .construction import generate_proper_candidate
from .errors import DoesNotConverge, PrimsetError, SizeLimit
from .matrix import MatrixSet, classify, parse, serialize
from .primitivity import Outcome, exponent_bounds, exponent_exact, is_irreducible
from .randgen import RngStream, procedure1, procedure2, sample_binary_set

EXIT_OK, EXIT_USAGE, EXIT_CAP, EXIT_NOCONV = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _load(path: str) -> MatrixSet:
    return parse(Path(path).read_text())


def _as_dfa(s: MatrixSet) -> Dfa:
    """The file itself when every matrix is a function, else its associated DFA."""
    if all(m.as_function() is not None for m in s):
        return Dfa(s.mats)
    return associated_dfa(s)


def cmd_gen(a) -> int:
    rng = RngStream(a.seed).generator()
    if a.proc == "1":
        s = procedure1(a.n, a.m, rng)
    elif a.proc == "2":
        s = procedure2(a.n, rng)
    else:
        if a.p is None:
            raise PrimsetError("--p is required for --proc binary")
        s = sample_binary_set(a.n, a.m, a.p, rng)
    _write(serialize(s), a.out)
    return EXIT_OK


def cmd_construct(a) -> int:
    primes = [int(x) for x in a.primes.split(",") if x.strip()]
    s, pr, record = generate_proper_candidate(primes, a.t1, a.met, RngStream(a.seed).generator())
    _write(serialize(s), a.out)
    if a.out and a.out != "-":
        Path(a.out + ".record").write_text(record.to_text())
    print(f"primitive {int(pr)}", file=sys.stderr)
    return EXIT_OK


def cmd_check(a) -> int:
    s = _load(a.file)
    v = harness.classify_primitivity_at_scale(s, rng=RngStream(0).generator())
    print(f"verdict {v.label}")
    print(f"irreducible {int(is_irreducible(s))}")
    print("nz " + " ".join(str(int(classify(m).is_nz)) for m in s))
    return EXIT_OK


def cmd_exponent(a) -> int:
    s = _load(a.file)
    res = exponent_exact(s, a.exact_cap)
    if res.outcome is Outcome.PRIMITIVE:
        print(f"exponent {res.length}")
        print("word " + " ".join(map(str, res.word)))
    elif res.outcome is Outcome.NOT_PRIMITIVE:
        print("exponent none (not primitive)")
    else:
        try:
            lo, hi = exponent_bounds(s, rt_mode="exact" if s.n <= 20 else "greedy")
        except PrimsetError as exc:
            print(f"exponent search exceeded {a.exact_cap} products: {exc}", file=sys.stderr)
            return EXIT_CAP
        print(f"exponent bounds {lo} {hi}")
    return EXIT_OK


def cmd_rt(a) -> int:
    dfa = _as_dfa(_load(a.file))
    word = shortest_synchronizing_word(dfa)
    print(f"rt {len(word)}")
    print("word " + " ".join(map(str, word)))
    return EXIT_OK


def cmd_sgd(a) -> int:
    d = sg_diameter(_as_dfa(_load(a.file)))
    print(f"sgd {'none' if d is None else d}")
    return EXIT_OK


def cmd_family(a) -> int:
    dfa, sgd_pred, rt_conj = families.family_build(a.kind, a.n)
    _write(serialize(dfa.as_set()), a.out)
    if a.verify:
        report = families.verify_family(a.kind, a.n)
    else:
        report = families.FamilyReport(families.FamilyKind(a.kind), a.n, sg_diameter(dfa),
                                       sgd_pred, None, rt_conj)
    print(families.REPORT_HEADER)
    print(report.line())
    return EXIT_OK


def cmd_experiment(a) -> int:
    res = harness.run_experiment(a.kind, Path(a.config).read_text(), a.seed, a.jobs)
    _write(res.csv(), a.out)
    print(f"{a.kind}: {len(res.rows)} rows in {res.seconds:.1f}s", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="primset", description="Primitive matrix sets and synchronizing automata.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="sample a random matrix set")
    g.add_argument("--proc", choices=["1", "2", "binary"], required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, default=2)
    g.add_argument("--p", type=float)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("construct", help="run the proper-primitive-set construction once")
    c.add_argument("--primes", required=True)
    c.add_argument("--met", type=int, choices=[2, 3], default=3)
    c.add_argument("--t1", type=int, default=1000)
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--out")
    c.set_defaults(func=cmd_construct)

    k = sub.add_parser("check", help="primitivity verdict, irreducibility and NZ flags")
    k.add_argument("file")
    k.set_defaults(func=cmd_check)

    e = sub.add_parser("exponent", help="exact exponent, or bounds when the search is capped")
    e.add_argument("file")
    e.add_argument("--exact-cap", type=int, default=1_000_000)
    e.set_defaults(func=cmd_exponent)

    r = sub.add_parser("rt", help="reset threshold")
    r.add_argument("file")
    r.set_defaults(func=cmd_rt)

    d = sub.add_parser("sgd", help="square graph diameter")
    d.add_argument("file")
    d.set_defaults(func=cmd_sgd)

    f = sub.add_parser("family", help="build a slowly synchronizing family member")
    f.add_argument("--kind", choices=[k.value for k in families.FamilyKind], required=True)
    f.add_argument("--n", type=int, required=True)
    f.add_argument("--verify", action="store_true")
    f.add_argument("--out")
    f.set_defaults(func=cmd_family)

    x = sub.add_parser("experiment", help="run a seeded Monte Carlo experiment")
    x.add_argument("--kind", choices=sorted(harness.EXPERIMENTS), required=True)
    x.add_argument("--config", required=True)
    x.add_argument("--seed", type=int, required=True)
    x.add_argument("--jobs", type=int, default=1)
    x.add_argument("--out")
    x.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DoesNotConverge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    except SizeLimit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (PrimsetError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
