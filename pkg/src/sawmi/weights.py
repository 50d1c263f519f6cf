"""Weight functions: arithmetic trees with if-then-else nodes over formulas.

A weight is feasibly integrable (FI) once no ``Ite`` node remains. Conditions
are arbitrary formulas; ``restrict`` resolves the ones an assignment decides.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterator, Mapping
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import NegativeWeight, NotPolynomial, UnknownFunc
from .formula import (
    TRUE,
    FALSE,
    And,
    Atom,
    BoolAtom,
    Const,
    Formula,
    Iff,
    Implies,
    LraAtom,
    Not,
    Or,
    evaluate_formula,
    residual,
)
from .polynomial import Polynomial


class WeightTerm:
    __slots__ = ()

    def __add__(self, other) -> WeightTerm:
        return Add(self, _lift(other))

    def __radd__(self, other) -> WeightTerm:
        return Add(_lift(other), self)

    def __sub__(self, other) -> WeightTerm:
        return Sub(self, _lift(other))

    def __mul__(self, other) -> WeightTerm:
        return Mul(self, _lift(other))

    def __rmul__(self, other) -> WeightTerm:
        return Mul(_lift(other), self)

    def __pow__(self, k: int) -> WeightTerm:
        return Pow(self, k)


def _lift(value) -> WeightTerm:
    return value if isinstance(value, WeightTerm) else Num(Fraction(value))


@dataclass(frozen=True)
class Num(WeightTerm):
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True)
class Var(WeightTerm):
    name: str


@dataclass(frozen=True)
class Add(WeightTerm):
    left: WeightTerm
    right: WeightTerm


@dataclass(frozen=True)
class Sub(WeightTerm):
    left: WeightTerm
    right: WeightTerm


@dataclass(frozen=True)
class Mul(WeightTerm):
    left: WeightTerm
    right: WeightTerm


@dataclass(frozen=True)
class Pow(WeightTerm):
    base: WeightTerm
    exponent: int

    def __post_init__(self):
        if self.exponent < 0:
            raise ValueError("negative exponent")


@dataclass(frozen=True)
class Func(WeightTerm):
    name: str
    args: tuple[WeightTerm, ...]


@dataclass(frozen=True)
class Ite(WeightTerm):
    cond: Formula
    then: WeightTerm
    orelse: WeightTerm


def gauss_pdf(mean, std, x):
    z = (x - mean) / std
    return np.exp(-0.5 * z * z) / (std * math.sqrt(2 * math.pi))


# name -> (arity, implementation working on floats and numpy arrays)
FUNCS: dict[str, tuple[int, Callable]] = {"gauss": (3, gauss_pdf)}


def subterms(w: WeightTerm) -> tuple[WeightTerm, ...]:
    if isinstance(w, (Add, Sub, Mul)):
        return (w.left, w.right)
    if isinstance(w, Pow):
        return (w.base,)
    if isinstance(w, Func):
        return w.args
    if isinstance(w, Ite):
        return (w.then, w.orelse)
    return ()


def iter_nodes(w: WeightTerm) -> Iterator[WeightTerm]:
    """Preorder traversal (then-branch before else-branch)."""
    stack = [w]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(subterms(node)))


def size(w: WeightTerm) -> int:
    return sum(1 for _ in iter_nodes(w))


def conditions(w: WeightTerm) -> list[Formula]:
    seen: dict[Formula, None] = {}
    for node in iter_nodes(w):
        if isinstance(node, Ite):
            seen.setdefault(node.cond)
    return list(seen)


def variables(w: WeightTerm) -> set[str]:
    return {node.name for node in iter_nodes(w) if isinstance(node, Var)}


def restrict(w: WeightTerm, mu: Mapping[Atom, bool]) -> WeightTerm:
    if isinstance(w, Ite):
        r = residual(w.cond, mu)
        if r == TRUE:
            return restrict(w.then, mu)
        if r == FALSE:
            return restrict(w.orelse, mu)
        return Ite(w.cond, restrict(w.then, mu), restrict(w.orelse, mu))
    if isinstance(w, (Add, Sub, Mul)):
        return type(w)(restrict(w.left, mu), restrict(w.right, mu))
    if isinstance(w, Pow):
        return Pow(restrict(w.base, mu), w.exponent)
    if isinstance(w, Func):
        return Func(w.name, tuple(restrict(a, mu) for a in w.args))
    return w


def relabel(w: WeightTerm, mapping: Mapping[Formula, Formula]) -> WeightTerm:
    """Replace Ite conditions found in ``mapping``."""
    if isinstance(w, Ite):
        return Ite(mapping.get(w.cond, w.cond), relabel(w.then, mapping), relabel(w.orelse, mapping))
    if isinstance(w, (Add, Sub, Mul)):
        return type(w)(relabel(w.left, mapping), relabel(w.right, mapping))
    if isinstance(w, Pow):
        return Pow(relabel(w.base, mapping), w.exponent)
    if isinstance(w, Func):
        return Func(w.name, tuple(relabel(a, mapping) for a in w.args))
    return w


def is_fi(w: WeightTerm) -> bool:
    return not any(isinstance(node, Ite) for node in iter_nodes(w))


def has_funcs(w: WeightTerm) -> bool:
    return any(isinstance(node, Func) for node in iter_nodes(w))


def _eval(w: WeightTerm, point, bools):
    if isinstance(w, Num):
        return w.value
    if isinstance(w, Var):
        return point[w.name]
    if isinstance(w, Add):
        return _eval(w.left, point, bools) + _eval(w.right, point, bools)
    if isinstance(w, Sub):
        return _eval(w.left, point, bools) - _eval(w.right, point, bools)
    if isinstance(w, Mul):
        return _eval(w.left, point, bools) * _eval(w.right, point, bools)
    if isinstance(w, Pow):
        return _eval(w.base, point, bools) ** w.exponent
    if isinstance(w, Ite):
        branch = w.then if evaluate_formula(w.cond, point, bools) else w.orelse
        return _eval(branch, point, bools)
    if isinstance(w, Func):
        if w.name not in FUNCS:
            raise UnknownFunc(w.name)
        arity, fn = FUNCS[w.name]
        if len(w.args) != arity:
            raise UnknownFunc(f"{w.name} takes {arity} arguments")
        return float(fn(*(float(_eval(a, point, bools)) for a in w.args)))
    raise TypeError(f"not a weight: {w!r}")


def evaluate(w: WeightTerm, point: Mapping[str, object], bools: Mapping[Atom, bool] | None = None):
    """Value of ``w`` at ``point``; exact when the point and ``w`` are rational."""
    value = _eval(w, point, bools or {})
    if value < 0:
        raise NegativeWeight(f"weight {value} < 0 at {dict(point)}")
    return value


def _truth_batch(f: Formula, cols: Mapping[str, np.ndarray], bools, n: int) -> np.ndarray:
    if isinstance(f, Const):
        return np.full(n, f.value)
    if isinstance(f, BoolAtom):
        return np.broadcast_to(np.asarray(bools[f], dtype=bool), (n,))
    if isinstance(f, LraAtom):
        lhs = sum(float(c) * cols[name] for name, c in f.coeffs)
        rhs = float(f.rhs)
        return {
            "<=": np.less_equal,
            "<": np.less,
            ">=": np.greater_equal,
            ">": np.greater,
            "=": np.equal,
        }[f.op](lhs, rhs)
    if isinstance(f, Not):
        return ~_truth_batch(f.arg, cols, bools, n)
    if isinstance(f, And):
        return np.logical_and.reduce([_truth_batch(a, cols, bools, n) for a in f.args])
    if isinstance(f, Or):
        return np.logical_or.reduce([_truth_batch(a, cols, bools, n) for a in f.args])
    if isinstance(f, Implies):
        return ~_truth_batch(f.lhs, cols, bools, n) | _truth_batch(f.rhs, cols, bools, n)
    if isinstance(f, Iff):
        return _truth_batch(f.lhs, cols, bools, n) == _truth_batch(f.rhs, cols, bools, n)
    raise TypeError(f"not a formula: {f!r}")


def _eval_batch(w: WeightTerm, cols, bools, n: int) -> np.ndarray:
    if isinstance(w, Num):
        return np.full(n, float(w.value))
    if isinstance(w, Var):
        return cols[w.name]
    if isinstance(w, Add):
        return _eval_batch(w.left, cols, bools, n) + _eval_batch(w.right, cols, bools, n)
    if isinstance(w, Sub):
        return _eval_batch(w.left, cols, bools, n) - _eval_batch(w.right, cols, bools, n)
    if isinstance(w, Mul):
        return _eval_batch(w.left, cols, bools, n) * _eval_batch(w.right, cols, bools, n)
    if isinstance(w, Pow):
        return _eval_batch(w.base, cols, bools, n) ** w.exponent
    if isinstance(w, Ite):
        mask = _truth_batch(w.cond, cols, bools, n)
        return np.where(mask, _eval_batch(w.then, cols, bools, n), _eval_batch(w.orelse, cols, bools, n))
    if isinstance(w, Func):
        if w.name not in FUNCS:
            raise UnknownFunc(w.name)
        arity, fn = FUNCS[w.name]
        if len(w.args) != arity:
            raise UnknownFunc(f"{w.name} takes {arity} arguments")
        return fn(*(_eval_batch(a, cols, bools, n) for a in w.args))
    raise TypeError(f"not a weight: {w!r}")


def evaluate_batch(
    w: WeightTerm, cols: Mapping[str, np.ndarray], bools: Mapping[Atom, object] | None = None, n: int | None = None
) -> np.ndarray:
    """Vectorized float evaluation over columns of sample coordinates."""
    if n is None:
        n = len(next(iter(cols.values()))) if cols else 1
    values = np.asarray(_eval_batch(w, cols, bools or {}, n), dtype=float)
    values = np.broadcast_to(values, (n,))
    if n and values.min() < 0:
        raise NegativeWeight(f"weight {values.min()} < 0 at a sampled point")
    return values


def truth_batch(f: Formula, cols: Mapping[str, np.ndarray], bools: Mapping[Atom, bool], n: int) -> np.ndarray:
    return np.asarray(_truth_batch(f, cols, bools, n), dtype=bool)


def as_polynomial(w: WeightTerm) -> Polynomial:
    if isinstance(w, Num):
        return Polynomial.const(w.value)
    if isinstance(w, Var):
        return Polynomial.var(w.name)
    if isinstance(w, Add):
        return as_polynomial(w.left) + as_polynomial(w.right)
    if isinstance(w, Sub):
        return as_polynomial(w.left) - as_polynomial(w.right)
    if isinstance(w, Mul):
        return as_polynomial(w.left) * as_polynomial(w.right)
    if isinstance(w, Pow):
        return as_polynomial(w.base) ** w.exponent
    if isinstance(w, Func):
        raise NotPolynomial(f"function {w.name} is not a polynomial")
    if isinstance(w, Ite):
        raise NotPolynomial("weight still has a condition")
    raise TypeError(f"not a weight: {w!r}")


def product(factors) -> WeightTerm:
    factors = list(factors)
    if not factors:
        return Num(1)
    out = factors[0]
    for f in factors[1:]:
        out = Mul(out, f)
    return out


def total(terms) -> WeightTerm:
    terms = list(terms)
    if not terms:
        return Num(0)
    out = terms[0]
    for t in terms[1:]:
        out = Add(out, t)
    return out


def show(w: WeightTerm) -> str:
    if isinstance(w, Num):
        v = w.value
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(w, Var):
        return w.name
    if isinstance(w, Add):
        return f"({show(w.left)} + {show(w.right)})"
    if isinstance(w, Sub):
        return f"({show(w.left)} - {show(w.right)})"
    if isinstance(w, Mul):
        return f"{show(w.left)}*{show(w.right)}"
    if isinstance(w, Pow):
        return f"{show(w.base)}^{w.exponent}"
    if isinstance(w, Func):
        return f"{w.name}({', '.join(map(show, w.args))})"
    if isinstance(w, Ite):
        return f"ite({w.cond}, {show(w.then)}, {show(w.orelse)})"
    raise TypeError(f"not a weight: {w!r}")
