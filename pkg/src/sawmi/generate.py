"""Synthetic problems: the product-of-ITE family and random tree weights."""

from __future__ import annotations

import random
from fractions import Fraction

from .formula import TRUE, And, BoolAtom, Formula, Not, Or, compare, conjoin
from .sexpr import make_problem
from .weights import Ite, Num, Var, WeightTerm, product, total
from .wmi import WmiProblem


def prodite(n: int) -> WmiProblem:
    """``prod_i ite(psi_i, x + i, y + i)`` over the unit square.

    The conditions alternate between cuts on x and on y, all distinct, so
    the skeleton has exactly ``n`` clauses.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    x, y = Var("x"), Var("y")
    factors = []
    for i in range(1, n + 1):
        cut = Fraction(i, n + 1)
        psi = compare({"x" if i % 2 else "y": 1}, "<=", cut)
        factors.append(Ite(psi, x + i, y + i))
    return make_problem({"x": (0, 1), "y": (0, 1)}, [], TRUE, product(factors) if factors else Num(1))


class _TreeGen:
    def __init__(self, rng: random.Random, bools: list[str], reals: list[str], bound: dict[str, int]):
        self.rng = rng
        self.bools = [BoolAtom(b) for b in bools]
        self.reals = reals
        self.bound = bound
        self.pool = self._atom_pool()

    def _atom_pool(self) -> list[Formula]:
        rng = self.rng
        pool: list[Formula] = list(self.bools)
        for _ in range(2 + len(self.reals)):
            names = rng.sample(self.reals, k=rng.randint(1, min(2, len(self.reals))))
            coeffs = {n: rng.choice([1, 1, 2, -1]) for n in names}
            # a cut through the box so both sides have volume
            mid = sum(c * Fraction(self.bound[n], 2) for n, c in coeffs.items())
            rhs = mid + Fraction(rng.randint(-2, 2), 2)
            atom = compare(coeffs, rng.choice(["<=", "<", ">=", ">"]), rhs)
            if atom not in pool:
                pool.append(atom)
        return pool

    def literal(self) -> Formula:
        atom = self.rng.choice(self.pool)
        return Not(atom) if self.rng.random() < 0.3 else atom

    def condition(self) -> Formula:
        r = self.rng.random()
        if r < 0.7:
            return self.literal()
        parts = (self.literal(), self.literal())
        return And(parts) if r < 0.85 else Or(parts)

    def leaf(self) -> WeightTerm:
        rng = self.rng
        terms: list[WeightTerm] = [Num(rng.randint(0, 3))]
        for _ in range(rng.randint(0, 2)):
            monomial = [Var(rng.choice(self.reals)) for _ in range(rng.randint(1, 2))]
            terms.append(Num(rng.randint(1, 3)) * product(monomial))
        return total(terms)

    def weight(self, depth: int) -> WeightTerm:
        if depth <= 0:
            return self.leaf()
        r = self.rng.random()
        if r < 0.65:
            return Ite(self.condition(), self.weight(depth - 1), self.weight(depth - 1))
        if r < 0.8:
            return self.weight(depth - 1) * self.weight(depth - 1)
        if r < 0.9:
            return self.weight(depth - 1) + self.weight(depth - 1)
        return self.leaf()

    def support(self) -> Formula:
        clauses = []
        for _ in range(self.rng.randint(0, 2)):
            clauses.append(Or(tuple(self.literal() for _ in range(self.rng.randint(1, 3)))))
        return conjoin(clauses)


def random_problem(seed: int, bools: int = 3, reals: int = 2, depth: int = 3) -> WmiProblem:
    """A small random problem with a tree-shaped polynomial weight.

    Reals live in boxes [0, k] with k in 1..3, so polynomial leaves with
    nonnegative coefficients keep the weight nonnegative.
    """
    if not (0 <= bools <= 4 and 1 <= reals <= 3 and 0 <= depth <= 4):
        raise ValueError("need bools <= 4, 1 <= reals <= 3, depth <= 4")
    rng = random.Random(seed)
    bool_names = [f"A{i + 1}" for i in range(bools)]
    real_names = [f"x{i + 1}" for i in range(reals)]
    bound = {n: rng.randint(1, 3) for n in real_names}
    gen = _TreeGen(rng, bool_names, real_names, bound)
    w = gen.weight(depth)
    return make_problem({n: (0, bound[n]) for n in real_names}, bool_names, gen.support(), w)


def random_weight(seed: int, bools: int = 3, reals: int = 2, depth: int = 4) -> WeightTerm:
    return random_problem(seed, bools, reals, depth).w
