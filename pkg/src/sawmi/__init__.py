"""Weighted model integration over SMT(LRA) with tree-shaped weights."""

from .errors import WmiError
from .formula import And, BoolAtom, Iff, Implies, Not, Or, compare
from .generate import prodite, random_problem
from .integrate import ExactIntegrator, MonteCarloIntegrator
from .sexpr import make_problem, parse_problem, print_problem
from .skeleton import build_skeleton
from .weights import Func, Ite, Num, Var
from .wmi import WmiProblem, WmiResult, oracle_wmi, query_probability, sae4wmi, solve, wmi_pa

__all__ = [
    "And", "BoolAtom", "ExactIntegrator", "Func", "Iff", "Implies", "Ite",
    "MonteCarloIntegrator", "Not", "Num", "Or", "Var", "WmiError", "WmiProblem",
    "WmiResult", "build_skeleton", "compare", "make_problem", "oracle_wmi",
    "parse_problem", "print_problem", "prodite", "query_probability",
    "random_problem", "sae4wmi", "solve", "wmi_pa",
]
