"""Fixture checks behind ``sawmi selftest``: integral counts and values on
the bundled problems, agreement with the brute-force oracle on random
problems, and skeleton size on the product-of-ITE family."""

from __future__ import annotations

import time
from collections.abc import Callable
from typing import TextIO

from . import bundled
from .enumeration import EnumRequest, enumerate_assignments
from .formula import to_cnf
from .generate import prodite, random_problem
from .skeleton import build_skeleton
from .wmi import oracle_wmi, sae4wmi, solve, wmi_pa


def _counts(name: str) -> Callable[[], str | None]:
    expected = {"example5": (24, 6), "example9": (20, 8), "example11": (7, 5)}[name]

    def check() -> str | None:
        problem = bundled.load(name)
        order = bundled.pinned_order(name)
        pa = wmi_pa(problem, order=order)
        sae = sae4wmi(problem, order=order, breakdown=True)
        ref = oracle_wmi(problem).value
        got = (pa.n_integrals, sae.n_integrals)
        if got != expected:
            return f"integrals {got}, expected {expected}"
        if not pa.value == sae.value == ref:
            return f"values pa={pa.value} sae={sae.value} oracle={ref}"
        if name == "example5":
            mults = [e.multiplicity for e in sae.breakdown]
            if mults != [2, 2, 2, 2, 1, 1]:
                return f"multiplicities {mults}"
        return None

    return check


def _random(count: int) -> Callable[[], str | None]:
    def check() -> str | None:
        for seed in range(count):
            problem = random_problem(seed, bools=3, reals=2, depth=3)
            pa, sae, ref = wmi_pa(problem), sae4wmi(problem), oracle_wmi(problem)
            if not pa.value == sae.value == ref.value:
                return f"seed {seed}: pa={pa.value} sae={sae.value} oracle={ref.value}"
            if sae.n_integrals > pa.n_integrals:
                return f"seed {seed}: sae {sae.n_integrals} > pa {pa.n_integrals}"
        return None

    return check


def _prodite() -> str | None:
    for n in range(1, 65):
        got = build_skeleton(prodite(n).w).clause_count
        if got != n:
            return f"N={n}: {got} clauses"
    return None


def _example4() -> str | None:
    problem = bundled.load("example4")
    cnf = to_cnf(problem.phi)
    atoms = [a for a in cnf.atoms() if a not in cnf.labels]
    total = {frozenset(m.literals()) for m in enumerate_assignments(EnumRequest(cnf, atoms, "total"))}
    if len(total) != 2:
        return f"{len(total)} total assignments, expected 2"
    projected = [dict(m) for m in enumerate_assignments(EnumRequest(cnf, problem.bools[:1], "partial"))]
    if sorted(v for m in projected for v in m.values()) != [False, True]:
        return f"projection on A1 gave {projected}"
    return None


def _mc_determinism() -> str | None:
    from .integrate import MonteCarloIntegrator

    problem = bundled.load("example5")
    a = solve(problem, "sae", MonteCarloIntegrator(1000, 1)).value
    b = solve(problem, "sae", MonteCarloIntegrator(1000, 1)).value
    return None if a == b else f"{a} != {b}"


def run_selftest(quick: bool = True, out: TextIO | None = None) -> int:
    checks: list[tuple[str, Callable[[], str | None]]] = [
        ("example5 counts 24/6 and multiplicities", _counts("example5")),
        ("example11 counts 7/5 and value 14", _counts("example11")),
        ("example9 counts 20/8 and oracle value", _counts("example9")),
        ("example4 enumeration sets", _example4),
        ("prodite skeleton has N clauses, N=1..64", _prodite),
        ("mc integrator deterministic per seed", _mc_determinism),
        (f"random problems agree with oracle ({20 if quick else 200})", _random(20 if quick else 200)),
    ]
    failed = 0
    for label, check in checks:
        started = time.perf_counter()
        try:
            problem = check()
        except Exception as exc:  # a crash is a failure, reported like one
            problem = f"{type(exc).__name__}: {exc}"
        ms = (time.perf_counter() - started) * 1000
        status = "PASS" if problem is None else "FAIL"
        failed += problem is not None
        if out is not None:
            suffix = "" if problem is None else f" ({problem})"
            out.write(f"{status} {label} [{ms:.0f} ms]{suffix}\n")
    return 1 if failed else 0
