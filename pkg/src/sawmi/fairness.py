"""Demographic-parity check of a hiring program under a population model.

The ratio ``Pr(hire | minority) / Pr(hire | ~minority)`` is computed from
four WMI runs; a program is fair for epsilon = 0.1 when the ratio exceeds
0.9.
"""

from __future__ import annotations

from dataclasses import replace

from .formula import TRUE, Formula, Not, compare, conjoin
from .integrate import MonteCarloIntegrator
from .wmi import WmiProblem, solve

MINORITY = compare({"eth": 1}, ">", 10)
THRESHOLD = 0.9


def _wmi(problem: WmiProblem, extra: Formula, integrator, algorithm: str, workers: int) -> float:
    phi = conjoin(f for f in (extra, problem.phi) if f != TRUE)
    return float(solve(replace(problem, phi=phi, query=None), algorithm, integrator, workers=workers).value)


def fairness_ratio(
    problem: WmiProblem,
    samples: int = 100_000,
    seed: int = 0,
    *,
    sensitive: Formula = MINORITY,
    algorithm: str = "sae",
    workers: int = 1,
) -> dict:
    """Ratio of hiring probabilities; ``problem.query`` is the decision."""
    if problem.query is None:
        raise ValueError("the problem needs a query formula (the decision)")
    hire = problem.query
    integrator = MonteCarloIntegrator(samples, seed)
    group = _wmi(problem, sensitive, integrator, algorithm, workers)
    hired_group = _wmi(problem, conjoin((hire, sensitive)), integrator, algorithm, workers)
    rest = _wmi(problem, Not(sensitive), integrator, algorithm, workers)
    hired_rest = _wmi(problem, conjoin((hire, Not(sensitive))), integrator, algorithm, workers)
    p_group = hired_group / group
    p_rest = hired_rest / rest
    ratio = p_group / p_rest
    return {
        "ratio": ratio,
        "fair": ratio > THRESHOLD,
        "p_hire_minority": p_group,
        "p_hire_majority": p_rest,
        "wmi": {"minority": group, "hire_minority": hired_group, "majority": rest, "hire_majority": hired_rest},
        "samples": samples,
        "seed": seed,
    }
