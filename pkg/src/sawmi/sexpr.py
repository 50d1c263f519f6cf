"""Problem files in S-expression syntax.

    (problem
      (reals (x1 0 2) (x2 0 3))
      (bools A1 A2)
      (support (or A1 (<= x1 1)))
      (query (>= x2 1))
      (weight (ite A1 (* x1 x2) 1)))

Every section but ``problem`` is optional. Declared bounds become the
conjuncts of chi; ``support`` is phi; a missing or empty ``weight`` means
w = 1. Comments run from ``;`` to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import ParseError, UnknownVariable
from .formula import (
    FALSE,
    TRUE,
    And,
    BoolAtom,
    Const,
    Formula,
    Iff,
    Implies,
    LraAtom,
    Not,
    Or,
    RealVar,
    compare,
    conjoin,
)
from .weights import FUNCS, Add, Func, Ite, Mul, Num, Pow, Sub, Var, WeightTerm
from .wmi import WmiProblem

_TOKEN = re.compile(r"\s+|;[^\n]*|\(|\)|[^\s();]+")
_NUMBER = re.compile(r"[+-]?(\d+(/\d+)?|\d*\.\d+|\d+\.\d*)$")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_.'#$@!?]*$")
_COMPARISONS = ("<=", "<", ">=", ">", "=")
_RESERVED = {"and", "or", "not", "=>", "iff", "ite", "pow", "true", "false", "problem", *FUNCS}


@dataclass(frozen=True)
class Symbol:
    text: str
    line: int
    column: int


@dataclass(frozen=True)
class SList:
    items: tuple
    line: int
    column: int


def read(text: str) -> list:
    """All top-level S-expressions of ``text``."""
    stack: list[list] = [[]]
    opened: list[tuple[int, int]] = []
    line, col = 1, 1
    for m in _TOKEN.finditer(text):
        tok = m.group()
        if tok == "(":
            stack.append([])
            opened.append((line, col))
        elif tok == ")":
            if not opened:
                raise ParseError("unbalanced ')'", line, col)
            items = stack.pop()
            stack[-1].append(SList(tuple(items), *opened.pop()))
        elif not tok[0].isspace() and tok[0] != ";":
            stack[-1].append(Symbol(tok, line, col))
        newlines = tok.count("\n")
        if newlines:
            line += newlines
            col = len(tok) - tok.rfind("\n")
        else:
            col += len(tok)
    if opened:
        raise ParseError("unclosed '('", *opened[-1])
    return stack[0]


def _where(node) -> tuple[int, int]:
    return node.line, node.column


def _number(node) -> Fraction | None:
    if isinstance(node, Symbol) and _NUMBER.match(node.text):
        return Fraction(node.text)
    return None


class _Reader:
    def __init__(self, reals: dict[str, RealVar], bools: dict[str, BoolAtom]):
        self.reals = reals
        self.bools = bools

    def head(self, node: SList) -> str:
        if not node.items or not isinstance(node.items[0], Symbol):
            raise ParseError("expected an operator", *_where(node))
        return node.items[0].text

    def arity(self, node: SList, n: int) -> None:
        if len(node.items) - 1 != n:
            raise ParseError(f"'{self.head(node)}' takes {n} argument(s)", *_where(node))

    def formula(self, node) -> Formula:
        if isinstance(node, Symbol):
            if node.text == "true":
                return TRUE
            if node.text == "false":
                return FALSE
            if node.text in self.bools:
                return self.bools[node.text]
            if node.text in self.reals:
                raise ParseError(f"real variable {node.text} used as a formula", *_where(node))
            raise UnknownVariable(f"undeclared Boolean {node.text}", *_where(node))
        op = self.head(node)
        args = node.items[1:]
        if op in ("and", "or"):
            if not args:
                raise ParseError(f"'{op}' needs an argument", *_where(node))
            parts = tuple(self.formula(a) for a in args)
            return (And if op == "and" else Or)(parts)
        if op == "not":
            self.arity(node, 1)
            return Not(self.formula(args[0]))
        if op in ("=>", "iff"):
            self.arity(node, 2)
            return (Implies if op == "=>" else Iff)(self.formula(args[0]), self.formula(args[1]))
        if op in _COMPARISONS:
            self.arity(node, 2)
            left, right = self.linear(args[0]), self.linear(args[1])
            coeffs = dict(left[0])
            for name, c in right[0].items():
                coeffs[name] = coeffs.get(name, 0) - c
            return compare(coeffs, op, right[1] - left[1])
        if op in ("!=", "distinct"):
            raise ParseError("disequalities are not supported", *_where(node))
        raise ParseError(f"unknown connective '{op}'", *_where(node))

    def linear(self, node) -> tuple[dict[str, Fraction], Fraction]:
        """``(coeffs, constant)`` of a linear term."""
        value = _number(node)
        if value is not None:
            return {}, value
        if isinstance(node, Symbol):
            if node.text in self.reals:
                return {node.text: Fraction(1)}, Fraction(0)
            raise UnknownVariable(f"undeclared real {node.text}", *_where(node))
        op = self.head(node)
        args = [self.linear(a) for a in node.items[1:]]
        if op == "+" and args:
            return _lin_sum(args)
        if op == "-" and len(args) == 1:
            return _lin_scale(args[0], Fraction(-1))
        if op == "-" and len(args) == 2:
            return _lin_sum([args[0], _lin_scale(args[1], Fraction(-1))])
        if op == "*" and args:
            out: tuple[dict[str, Fraction], Fraction] = ({}, Fraction(1))
            for a in args:
                if out[0] and a[0]:
                    raise ParseError("nonlinear product in a constraint", *_where(node))
                out = _lin_scale(a, out[1]) if not out[0] else _lin_scale(out, a[1])
            return out
        raise ParseError(f"bad linear term '{op}'", *_where(node))

    def weight(self, node) -> WeightTerm:
        value = _number(node)
        if value is not None:
            return Num(value)
        if isinstance(node, Symbol):
            if node.text in self.reals:
                return Var(node.text)
            raise UnknownVariable(f"undeclared real {node.text}", *_where(node))
        op = self.head(node)
        args = node.items[1:]
        if op == "ite":
            self.arity(node, 3)
            return Ite(self.formula(args[0]), self.weight(args[1]), self.weight(args[2]))
        if op == "pow":
            self.arity(node, 2)
            k = _number(args[1])
            if k is None or k.denominator != 1 or k < 0:
                raise ParseError("exponent must be a nonnegative integer", *_where(args[1]))
            return Pow(self.weight(args[0]), int(k))
        if op in ("+", "*") and args:
            terms = [self.weight(a) for a in args]
            node_type = Add if op == "+" else Mul
            out = terms[0]
            for t in terms[1:]:
                out = node_type(out, t)
            return out
        if op == "-" and len(args) == 2:
            return Sub(self.weight(args[0]), self.weight(args[1]))
        if op == "-" and len(args) == 1:
            return Mul(Num(-1), self.weight(args[0]))
        if op in FUNCS:
            if len(args) != FUNCS[op][0]:
                raise ParseError(f"'{op}' takes {FUNCS[op][0]} arguments", *_where(node))
            return Func(op, tuple(self.weight(a) for a in args))
        raise ParseError(f"unknown weight operator '{op}'", *_where(node))


def _lin_sum(parts):
    coeffs: dict[str, Fraction] = {}
    const = Fraction(0)
    for c, k in parts:
        for name, v in c.items():
            coeffs[name] = coeffs.get(name, Fraction(0)) + v
        const += k
    return coeffs, const


def _lin_scale(part, factor: Fraction):
    c, k = part
    return {name: v * factor for name, v in c.items()}, k * factor


def _check_name(node, seen: set[str]) -> str:
    if not isinstance(node, Symbol) or not _NAME.match(node.text) or node.text in _RESERVED:
        raise ParseError("expected a variable name", *_where(node))
    if node.text in seen:
        raise ParseError(f"variable {node.text} declared twice", *_where(node))
    seen.add(node.text)
    return node.text


def bounds_formula(reals: tuple[RealVar, ...], bounds: dict[str, tuple[Fraction, Fraction]]) -> Formula:
    parts = []
    for v in reals:
        if v.name in bounds:
            lo, hi = bounds[v.name]
            parts += [compare({v.name: 1}, ">=", lo), compare({v.name: 1}, "<=", hi)]
    return conjoin(parts)


def make_problem(
    reals: dict[str, tuple] | list[str],
    bools: list[str] = (),  # type: ignore[assignment]
    support: Formula = TRUE,
    weight: WeightTerm | None = None,
    query: Formula | None = None,
) -> WmiProblem:
    """Problem whose chi is the box of the declared bounds."""
    items = reals.items() if isinstance(reals, dict) else ((name, None) for name in reals)
    variables, bounds = [], {}
    for i, (name, box) in enumerate(items):
        variables.append(RealVar(name, i))
        if box is not None:
            bounds[name] = (Fraction(box[0]), Fraction(box[1]))
    reals_t = tuple(variables)
    return WmiProblem(
        phi=support,
        chi=bounds_formula(reals_t, bounds),
        w=weight if weight is not None else Num(1),
        reals=reals_t,
        bools=tuple(BoolAtom(b) for b in bools),
        bounds=bounds,
        query=query,
    )


_SECTIONS = ("reals", "bools", "support", "query", "weight")


def parse_problem(text: str, check: bool = True) -> WmiProblem:
    """Parse a problem file; ``check`` also runs the boundedness test."""
    top = read(text)
    if len(top) != 1 or not isinstance(top[0], SList) or not top[0].items:
        raise ParseError("expected a single (problem ...) form", *(_where(top[-1]) if top else (1, 1)))
    first = top[0].items[0]
    if not isinstance(first, Symbol) or first.text != "problem":
        raise ParseError("expected a single (problem ...) form", *_where(top[0]))
    sections: dict[str, SList] = {}
    for node in top[0].items[1:]:
        if not isinstance(node, SList) or not node.items or not isinstance(node.items[0], Symbol):
            raise ParseError("expected a section", *_where(node))
        name = node.items[0].text
        if name not in _SECTIONS:
            raise ParseError(f"unknown section '{name}'", *_where(node))
        if name in sections:
            raise ParseError(f"section '{name}' given twice", *_where(node))
        sections[name] = node

    seen: set[str] = set()
    reals: dict[str, tuple | None] = {}
    for decl in sections["reals"].items[1:] if "reals" in sections else ():
        if isinstance(decl, Symbol):
            reals[_check_name(decl, seen)] = None
            continue
        if len(decl.items) not in (1, 3):
            raise ParseError("expected (name lo hi)", *_where(decl))
        name = _check_name(decl.items[0], seen)
        if len(decl.items) == 3:
            lo, hi = _number(decl.items[1]), _number(decl.items[2])
            if lo is None or hi is None:
                raise ParseError("bounds must be rationals", *_where(decl))
            if lo > hi:
                raise ParseError(f"empty range for {name}", *_where(decl))
            reals[name] = (lo, hi)
        else:
            reals[name] = None
    bools = [_check_name(b, seen) for b in (sections["bools"].items[1:] if "bools" in sections else ())]

    reader = _Reader({n: RealVar(n, i) for i, n in enumerate(reals)}, {b: BoolAtom(b) for b in bools})

    def single(name: str):
        node = sections.get(name)
        if node is None or len(node.items) == 1:
            return None
        if len(node.items) != 2:
            raise ParseError(f"section '{name}' takes one expression", *_where(node))
        return node.items[1]

    support = single("support")
    query = single("query")
    weight = single("weight")
    problem = make_problem(
        {n: b for n, b in reals.items()},
        bools,
        reader.formula(support) if support is not None else TRUE,
        reader.weight(weight) if weight is not None else None,
        reader.formula(query) if query is not None else None,
    )
    if check:
        problem.check()
    return problem


def parse_atoms(text: str, problem: WmiProblem) -> list:
    """Atoms written in problem syntax against the problem's declarations,
    e.g. ``"A2 A1 (<= x 3)"``."""
    reader = _Reader({v.name: v for v in problem.reals}, {b.name: b for b in problem.bools})
    atoms = []
    for node in read(text):
        f = reader.formula(node)
        if not isinstance(f, (BoolAtom, LraAtom)):
            raise ParseError(f"{print_formula(f)} is not an atom", *_where(node))
        atoms.append(f)
    return atoms


def _rat(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def print_formula(f: Formula) -> str:
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, BoolAtom):
        return f.name
    if isinstance(f, LraAtom):
        terms = [name if c == 1 else f"(* {_rat(c)} {name})" for name, c in f.coeffs]
        lhs = terms[0] if len(terms) == 1 else f"(+ {' '.join(terms)})"
        return f"({f.op} {lhs} {_rat(f.rhs)})"
    if isinstance(f, Not):
        return f"(not {print_formula(f.arg)})"
    if isinstance(f, (And, Or)):
        op = "and" if isinstance(f, And) else "or"
        return f"({op} {' '.join(print_formula(a) for a in f.args)})"
    if isinstance(f, Implies):
        return f"(=> {print_formula(f.lhs)} {print_formula(f.rhs)})"
    if isinstance(f, Iff):
        return f"(iff {print_formula(f.lhs)} {print_formula(f.rhs)})"
    raise TypeError(f"not a formula: {f!r}")


def print_weight(w: WeightTerm) -> str:
    if isinstance(w, Num):
        return _rat(w.value)
    if isinstance(w, Var):
        return w.name
    if isinstance(w, Add):
        return f"(+ {print_weight(w.left)} {print_weight(w.right)})"
    if isinstance(w, Sub):
        return f"(- {print_weight(w.left)} {print_weight(w.right)})"
    if isinstance(w, Mul):
        return f"(* {print_weight(w.left)} {print_weight(w.right)})"
    if isinstance(w, Pow):
        return f"(pow {print_weight(w.base)} {w.exponent})"
    if isinstance(w, Func):
        return f"({w.name} {' '.join(print_weight(a) for a in w.args)})"
    if isinstance(w, Ite):
        return f"(ite {print_formula(w.cond)} {print_weight(w.then)} {print_weight(w.orelse)})"
    raise TypeError(f"not a weight: {w!r}")


def print_problem(problem: WmiProblem) -> str:
    """Problem file text. A chi other than the bounds box is folded into
    the support, so only problems built from bounds round-trip exactly."""
    decls = []
    for v in problem.reals:
        if v.name in problem.bounds:
            lo, hi = problem.bounds[v.name]
            decls.append(f"({v.name} {_rat(lo)} {_rat(hi)})")
        else:
            decls.append(f"({v.name})")
    support = problem.phi
    if problem.chi != bounds_formula(problem.reals, problem.bounds):
        support = conjoin(f for f in (problem.phi, problem.chi) if f != TRUE)
    lines = ["(problem", f"  (reals {' '.join(decls)})".replace("(reals )", "(reals)")]
    lines.append(f"  (bools {' '.join(b.name for b in problem.bools)})".replace("(bools )", "(bools)"))
    lines.append(f"  (support {print_formula(support)})")
    if problem.query is not None:
        lines.append(f"  (query {print_formula(problem.query)})")
    lines.append(f"  (weight {print_weight(problem.w)}))")
    return "\n".join(lines) + "\n"
