"""Command-line interface.

Exit codes: 0 pass, 1 mathematical negative (not lsm, not in C, mismatch
with the expected theorem values), 2 usage/input error, 3 internal
inconsistency between routes that must agree.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from dataclasses import asdict, dataclass
from fractions import Fraction

from . import functable as ft
from .errors import (
    ArityTooLarge,
    FormulaError,
    InternalInconsistency,
    TableError,
)
from .lsm import distinct_inequalities, is_lsm, is_lsm_pairwise
from .obstruction import (
    ApproximateObstruction,
    Membership,
    ObstructionCertificate,
    b_naive,
    b_spectrum,
    in_class_c,
    naive_spectrum,
    perturbation_bound,
    separation_epsilon,
    verify_certificate,
)
from .ppsformula import (
    ENGINES,
    FunctionLibrary,
    SampleParams,
    describe_library,
    load_library,
    parse,
    sample_clone_element,
)

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3

THEOREM_W = (1, 1, 1, 1)
THEOREM_B = Fraction(-2)
TOPKIS_INEQUALITIES = ["1·1 ≥ 1·1", "2·1 ≥ 1·1", "4·1 ≥ 2·2"]


class UsageError(Exception):
    pass


def _fmt(v) -> str:
    return ft.format_value(v)


def _load_input(args) -> ft.FuncTable:
    if args.builtin:
        name = args.builtin.upper()
        if name not in ft.BUILTINS:
            raise UsageError(f"unknown builtin {args.builtin!r}; choose from {', '.join(ft.BUILTINS)}")
        return ft.BUILTINS[name].to_mode(args.mode)
    if not args.path:
        raise UsageError("give a table file or --builtin NAME")
    try:
        return ft.load_table(args.path, args.mode)
    except OSError as exc:
        raise UsageError(f"cannot read {args.path}: {exc.strerror or exc}") from exc


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_check_lsm(args) -> int:
    F = _load_input(args)
    verdict = is_lsm(F)
    if verdict.is_lsm:
        print("lsm")
        return EXIT_OK
    x, y = verdict.witness
    print("not lsm")
    print(f"witness: x={ft.format_bits(x)} y={ft.format_bits(y)}")
    return EXIT_NEGATIVE


def cmd_check_c(args) -> int:
    F = _load_input(args)
    try:
        result = in_class_c(F, pruned=args.pruned, cap=args.max_pin_arity)
    except ArityTooLarge as exc:
        raise UsageError(str(exc)) from exc
    if isinstance(result, Membership):
        print("member of C")
        return EXIT_OK
    if isinstance(result, ApproximateObstruction):
        print("not in C (float mode, no certificate emitted)")
        print(f"approximate: {result.pinning.to_text() or 'no pins'}; "
              f"w={ft.format_bits(result.w)}; value~{result.value!r}")
        return EXIT_NEGATIVE
    print(result.to_text())
    return EXIT_NEGATIVE


def _read_formula(args):
    if args.expr is not None:
        return parse(args.expr)
    if args.formula in (None, "-"):
        return parse(sys.stdin.read())
    try:
        with open(args.formula, encoding="utf-8") as fh:
            return parse(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read {args.formula}: {exc.strerror or exc}") from exc


def cmd_eval(args) -> int:
    formula = _read_formula(args)
    lib = FunctionLibrary()
    if args.lib:
        try:
            lib = load_library(args.lib, args.mode)
        except OSError as exc:
            raise UsageError(f"cannot read library: {exc}") from exc
    table = ENGINES[args.engine](formula, lib)
    if args.cross_check:
        for name, engine in ENGINES.items():
            if name != args.engine and engine(formula, lib) != table:
                raise InternalInconsistency(f"engines {args.engine!r} and {name!r} disagree")
    sys.stdout.write(ft.dumps_table(table))
    return EXIT_OK


def cmd_sample_clone(args) -> int:
    params = SampleParams(max_free=args.max_free, max_bound=args.max_bound, max_atoms=args.max_atoms)
    status = EXIT_OK
    for i in range(args.count):
        seed = args.seed + i
        sample = sample_clone_element(seed, params)
        member = isinstance(in_class_c(sample.table), Membership)
        lsm = is_lsm(sample.table).is_lsm
        print(f"# seed {seed}")
        print(f"# formula: {sample.formula}")
        for line in describe_library(sample.library):
            print(f"# {line}")
        print(f"# in C: {'yes' if member else 'NO'}; lsm: {'yes' if lsm else 'NO'}")
        sys.stdout.write(ft.dumps_table(sample.table))
        if not (member and lsm):
            status = EXIT_INTERNAL
    return status


@dataclass
class ReproReport:
    lsm_verdict: bool
    lsm_pairwise_verdict: bool
    topkis_values: list
    b_value: str
    certificate: str
    epsilon_bound: str
    samples: int
    samples_in_c: int
    seed: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, ensure_ascii=False)


def check_report(report: dict) -> list[str]:
    """Re-verify a serialized report against the builtin S; returns problems found."""
    problems = []
    S = ft.S
    if report.get("lsm_verdict") is not is_lsm(S).is_lsm:
        problems.append("lsm verdict does not match a fresh brute-force check")
    if Fraction(report["b_value"]) != b_naive(S, THEOREM_W):
        problems.append("b_value does not match B(S, 1111)")
    try:
        cert = ObstructionCertificate.from_text(report["certificate"])
    except ValueError as exc:
        problems.append(f"certificate does not parse: {exc}")
    else:
        if not verify_certificate(S, cert):
            problems.append("certificate does not verify against S")
    eps = Fraction(report["epsilon_bound"])
    if not (eps > 0 and perturbation_bound(S, eps) < -b_naive(S, THEOREM_W)):
        problems.append("epsilon bound does not satisfy the perturbation inequality")
    return problems


def reproduce_theorem(samples: int = 100, seed: int = 0, out=print) -> tuple[ReproReport, list[str]]:
    """Run every step of the separation argument for S; returns (report, mismatches)."""
    S = ft.S
    diffs = []

    lsm = is_lsm(S)
    out(f"is_lsm(S): {lsm.is_lsm}")
    if not lsm.is_lsm:
        diffs.append(f"S expected lsm, witness {lsm.witness}")

    pairwise = is_lsm_pairwise(S)
    inequalities = distinct_inequalities(pairwise)
    out(f"is_lsm_pairwise(S): {pairwise.is_lsm}")
    for text in inequalities:
        out(f"  {text}")
    if not pairwise.is_lsm:
        diffs.append("pairwise check rejected S")
    if inequalities != TOPKIS_INEQUALITIES:
        diffs.append(f"binary restrictions {inequalities} != expected {TOPKIS_INEQUALITIES}")

    b = b_naive(S, THEOREM_W)
    out(f"B(S, 1111) = {_fmt(b)}")
    if b != THEOREM_B:
        diffs.append(f"B(S, 1111) = {_fmt(b)}, expected -2")

    cert = in_class_c(S)
    cert_text = cert.to_text() if isinstance(cert, ObstructionCertificate) else "none"
    out(f"in_class_c(S): {cert_text}")
    expected = ObstructionCertificate(ft.PinningSpec(), THEOREM_W, THEOREM_B)
    if cert != expected:
        diffs.append(f"certificate {cert_text!r} != expected {expected.to_text()!r}")
    elif not verify_certificate(S, cert):
        diffs.append("certificate failed independent verification")

    eps = separation_epsilon(S, THEOREM_W)
    out(f"separation epsilon: {_fmt(eps)}")
    if eps < Fraction(1, 25):
        diffs.append(f"epsilon {_fmt(eps)} below 1/25")

    in_c = 0
    for i in range(samples):
        sample = sample_clone_element(seed + i)
        if isinstance(in_class_c(sample.table), Membership):
            in_c += 1
        else:
            diffs.append(f"clone sample seed {seed + i} left C: {sample.formula}")
    if samples:
        out(f"clone samples in C: {in_c}/{samples}")

    report = ReproReport(
        lsm_verdict=lsm.is_lsm,
        lsm_pairwise_verdict=pairwise.is_lsm,
        topkis_values=inequalities,
        b_value=_fmt(b),
        certificate=cert_text,
        epsilon_bound=_fmt(eps),
        samples=samples,
        samples_in_c=in_c,
        seed=seed,
    )
    return report, diffs


def cmd_reproduce_theorem(args) -> int:
    if args.mode != ft.EXACT:
        raise UsageError("reproduce-theorem runs in exact mode only")
    quiet = args.json
    report, diffs = reproduce_theorem(args.samples, args.seed, out=(lambda *a: None) if quiet else print)
    if args.json:
        print(report.to_json())
    if diffs:
        print("MISMATCH:", file=sys.stderr)
        for d in diffs:
            print(f"  - {d}", file=sys.stderr)
        return EXIT_NEGATIVE
    if not quiet:
        print("theorem reproduced")
    return EXIT_OK


def _time_ns(fn, reps: int) -> int:
    best = None
    for _ in range(reps):
        t0 = time.perf_counter_ns()
        fn()
        dt = time.perf_counter_ns() - t0
        best = dt if best is None else min(best, dt)
    return best


def random_table(rng: random.Random, arity: int, mode: str = ft.EXACT, max_num: int = 16, max_den: int = 8):
    vals = [Fraction(rng.randint(0, max_num), rng.randint(1, max_den)) for _ in range(1 << arity)]
    return ft.make_table(arity, vals, mode)


def run_bench(arities, modes=(ft.EXACT,), naive_max: int = 13, reps: int = 1, seed: int = 0):
    """Yield (arity, method, mode, nanos) rows; spectra are cross-checked first."""
    rng = random.Random(seed)
    for k in arities:
        if k > ft.MAX_ARITY:
            raise ArityTooLarge(f"arity {k} exceeds {ft.MAX_ARITY}")
        base = random_table(rng, k)
        for mode in modes:
            F = base.to_mode(mode)
            fast = b_spectrum(F)
            if k <= naive_max:
                slow = naive_spectrum(F)
                if mode == ft.EXACT and list(fast.values) != slow:
                    raise InternalInconsistency(f"spectra disagree at arity {k}")
                yield k, "naive_full", mode, _time_ns(lambda: naive_spectrum(F), reps)
            yield k, "wht", mode, _time_ns(lambda: b_spectrum(F), reps)


def cmd_bench(args) -> int:
    lo, hi = args.min_arity, args.max_arity
    if hi > ft.MAX_ARITY or lo < 0 or lo > hi:
        raise UsageError(f"arity range must lie within 0..{ft.MAX_ARITY}")
    modes = (ft.EXACT, ft.FLOAT) if args.both_modes else (args.mode,)
    print("arity,method,mode,nanos")
    for row in run_bench(range(lo, hi + 1), modes, args.naive_max, args.reps, args.seed):
        print(",".join(str(c) for c in row), flush=True)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=(ft.EXACT, ft.FLOAT), default=ft.EXACT)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--max-pin-arity", type=int, default=ft.DEFAULT_PIN_CAP)
    common.add_argument("--builtin", metavar="NAME", help="use a named builtin table (S, IMP, EQ1, EQ2, EQ3, OR)")

    parser = argparse.ArgumentParser(prog="lsmsep", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-lsm", parents=[common], help="decide log-supermodularity")
    p.add_argument("path", nargs="?")
    p.set_defaults(func=cmd_check_lsm)

    p = sub.add_parser("check-c", parents=[common], help="search for an obstruction certificate")
    p.add_argument("path", nargs="?")
    p.add_argument("--pruned", action="store_true", help="only check even w of weight >= 2")
    p.set_defaults(func=cmd_check_c)

    p = sub.add_parser("eval", parents=[common], help="evaluate a pps-formula to a table")
    p.add_argument("formula", nargs="?", help="formula file, or - for stdin")
    p.add_argument("-e", "--expr", help="formula text given inline")
    p.add_argument("--lib", help="library file of 'name = table-path' lines")
    p.add_argument("--engine", choices=tuple(ENGINES), default="naive")
    p.add_argument("--no-cross-check", dest="cross_check", action="store_false",
                   help="skip comparing against the other two engines")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("reproduce-theorem", parents=[common], help="rerun the separation argument for S")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--json", action="store_true", help="print the report as JSON")
    p.set_defaults(func=cmd_reproduce_theorem)

    p = sub.add_parser("bench", parents=[common], help="time naive vs WHT spectra (CSV)")
    p.add_argument("--min-arity", type=int, default=4)
    p.add_argument("--max-arity", type=int, default=12)
    p.add_argument("--naive-max", type=int, default=13, help="skip the naive spectrum above this arity")
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--both-modes", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sample-clone", parents=[common], help="sample clone elements and check them")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--max-free", type=int, default=4)
    p.add_argument("--max-bound", type=int, default=8)
    p.add_argument("--max-atoms", type=int, default=8)
    p.set_defaults(func=cmd_sample_clone)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InternalInconsistency as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (UsageError, TableError, FormulaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
