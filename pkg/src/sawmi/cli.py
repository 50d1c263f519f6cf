"""Command line: ``sawmi run|gen|fairness|selftest``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import bundled
from .errors import WmiError
from .formula import Assignment, Lit
from .generate import prodite, random_problem
from .integrate import ExactIntegrator, MonteCarloIntegrator
from .sexpr import parse_atoms, parse_problem, print_formula, print_problem
from .wmi import WmiProblem, WmiResult, query_probability, solve

logger = logging.getLogger("sawmi")


def _number(value):
    if isinstance(value, Fraction):
        return str(value)
    return float(value)


def _literal(lit: Lit) -> str:
    text = print_formula(lit.atom)
    return text if lit.positive else f"(not {text})"


def make_integrator(kind: str, samples: int, seed: int, strict: bool = True):
    if kind == "exact":
        return ExactIntegrator()
    if kind == "mc":
        return MonteCarloIntegrator(samples, seed, strict)
    raise ValueError(f"unknown integrator {kind!r}")


def report(result: WmiResult, integrator, timing: bool = True, breakdown: bool = False) -> dict:
    out = {
        "value": _number(result.value),
        "n_integrals": result.n_integrals,
        "algorithm": result.algorithm,
        "integrator": result.integrator,
        "samples": integrator.samples,
        "seed": integrator.seed,
        "wall_ms": round(result.metadata["wall_ms"], 3) if timing else None,
        "metadata": {k: v for k, v in result.metadata.items() if k != "wall_ms"},
    }
    if breakdown and result.breakdown is not None:
        out["breakdown"] = [
            {
                "assignment": [_literal(l) for l in Assignment(e.assignment).literals()],
                "multiplicity": e.multiplicity,
                "integral": _number(e.integral),
            }
            for e in result.breakdown
        ]
    return out


def _load(args) -> tuple[WmiProblem, str | None]:
    if args.example:
        return bundled.load(args.example), args.example
    if args.file is None:
        raise SystemExit("give a problem file or --example NAME")
    text = sys.stdin.read() if args.file == "-" else Path(args.file).read_text()
    return parse_problem(text), None


def cmd_run(args) -> dict:
    problem, name = _load(args)
    integrator = make_integrator(args.integrator, args.samples, args.seed)
    if args.order:
        order = parse_atoms(args.order, problem)
    else:
        order = bundled.pinned_order(name) if name else None
    options = {"breakdown": args.breakdown}
    if args.algorithm != "oracle":
        options.update(order=order, workers=args.workers)
    result = solve(problem, args.algorithm, integrator, **options)
    out = report(result, integrator, timing=not args.no_timing, breakdown=args.breakdown)
    if problem.query is not None:
        fresh = make_integrator(args.integrator, args.samples, args.seed)
        options["breakdown"] = False
        out["query_probability"] = _number(query_probability(problem, problem.query, args.algorithm, fresh, **options))
    return out


def cmd_gen(args) -> str:
    if args.kind == "prodite":
        problem = prodite(args.n)
    else:
        problem = random_problem(args.seed, args.bools, args.reals, args.depth)
    return print_problem(problem)


def cmd_fairness(args) -> dict:
    from .fairness import fairness_ratio

    if args.file:
        problem = parse_problem(Path(args.file).read_text())
    else:
        problem = bundled.load(args.program)
    runs = [fairness_ratio(problem, args.samples, seed, workers=args.workers) for seed in args.seeds]
    ratios = [r["ratio"] for r in runs]
    mean = sum(ratios) / len(ratios)
    return {"program": args.file or args.program, "ratio_mean": mean, "fair": mean > 0.9, "runs": runs}


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    return run_selftest(quick=not args.full, out=sys.stdout)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sawmi", description="Weighted model integration over SMT(LRA).")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve a problem file and print a JSON report")
    run.add_argument("file", nargs="?", help="problem file, or - for stdin")
    run.add_argument("--example", choices=bundled.NAMES, help="use a bundled problem")
    run.add_argument("--algorithm", choices=("pa", "sae", "oracle"), default="sae")
    run.add_argument("--integrator", choices=("exact", "mc"), default="exact")
    run.add_argument("--samples", type=int, default=10_000)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--breakdown", action="store_true", help="list every integral")
    run.add_argument("--order", help='decision order, e.g. "A2 A1 (<= x 3)"')
    run.add_argument("--no-timing", action="store_true", help="omit wall time (byte-stable output)")

    gen = sub.add_parser("gen", help="print a synthetic problem file")
    gen.add_argument("kind", choices=("prodite", "tree"))
    gen.add_argument("--n", type=int, default=8, help="number of factors (prodite)")
    gen.add_argument("--bools", type=int, default=3)
    gen.add_argument("--reals", type=int, default=2)
    gen.add_argument("--depth", type=int, default=3)
    gen.add_argument("--seed", type=int, default=0)

    fair = sub.add_parser("fairness", help="demographic parity ratio of a hiring program")
    fair.add_argument("program", nargs="?", choices=("fair", "unfair"), default="unfair")
    fair.add_argument("--file", help="problem file whose query is the decision")
    fair.add_argument("--samples", type=int, default=100_000)
    fair.add_argument("--seeds", type=int, nargs="+", default=[0])
    fair.add_argument("--workers", type=int, default=1)

    test = sub.add_parser("selftest", help="run the bundled acceptance checks")
    test.add_argument("--full", action="store_true", help="include the slower randomized checks")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(name)s: %(message)s")
    if getattr(args, "samples", 1) < 1:
        print("error: --samples must be at least 1", file=sys.stderr)
        return 2
    try:
        if args.command == "run":
            print(json.dumps(cmd_run(args), indent=2))
        elif args.command == "gen":
            sys.stdout.write(cmd_gen(args))
        elif args.command == "fairness":
            print(json.dumps(cmd_fairness(args), indent=2))
        else:
            return cmd_selftest(args)
    except (WmiError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
