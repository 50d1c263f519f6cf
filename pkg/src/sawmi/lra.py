"""Exact consistency check for conjunctions of linear constraints.

General simplex in the style of Dutertre & de Moura: one slack variable per
distinct multi-variable left-hand side, bounds on variables, Bland's rule.
Strict bounds use delta-rationals ``c + k*delta`` for an infinitesimal delta.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from .formula import NEGATED_OP, Lit, LraAtom


class Delta(NamedTuple):
    """``c + k*delta``; tuple order is the order for infinitesimal delta > 0."""

    c: Fraction
    k: Fraction = Fraction(0)

    def __add__(self, other: Delta) -> Delta:  # type: ignore[override]
        return Delta(self.c + other.c, self.k + other.k)

    def __sub__(self, other: Delta) -> Delta:
        return Delta(self.c - other.c, self.k - other.k)

    def scale(self, f: Fraction) -> Delta:
        return Delta(self.c * f, self.k * f)


ZERO = Delta(Fraction(0))


def literal_constraint(lit: Lit) -> tuple[tuple[tuple[str, Fraction], ...], str, Fraction]:
    """``(coeffs, op, rhs)`` the literal asserts, with ``op`` possibly ``!=``."""
    atom = lit.atom
    assert isinstance(atom, LraAtom)
    op = atom.op if lit.positive else NEGATED_OP[atom.op]
    return atom.coeffs, op, atom.rhs


@dataclass
class LraResult:
    sat: bool
    witness: dict[str, Delta] = field(default_factory=dict)
    conflict: frozenset[Lit] = frozenset()

    def __bool__(self) -> bool:
        return self.sat

    def point(self) -> dict[str, Fraction]:
        """A rational model obtained by fixing delta small enough."""
        return {name: v.c + v.k * self._delta for name, v in self.witness.items()}

    _delta: Fraction = Fraction(1)


class _Simplex:
    def __init__(self):
        self.index: dict[object, int] = {}  # variable key -> column
        self.lower: dict[int, tuple[Delta, Lit]] = {}
        self.upper: dict[int, tuple[Delta, Lit]] = {}
        self.rows: dict[int, dict[int, Fraction]] = {}  # basic -> {nonbasic: coeff}
        self.value: dict[int, Delta] = {}

    def var(self, key) -> int:
        i = self.index.get(key)
        if i is None:
            i = self.index[key] = len(self.index)
            self.value[i] = ZERO
        return i

    def term(self, coeffs: tuple[tuple[str, Fraction], ...]) -> tuple[int, Fraction]:
        """Column and scale such that ``sum coeffs = scale * column``."""
        if len(coeffs) == 1:
            name, c = coeffs[0]
            return self.var(name), c
        key = coeffs
        if key not in self.index:
            s = self.var(key)
            self.rows[s] = {self.var(name): c for name, c in coeffs}
        return self.index[key], Fraction(1)

    def assert_bound(self, col: int, kind: str, bound: Delta, lit: Lit) -> frozenset[Lit] | None:
        if kind in ("lower", "both"):
            cur = self.lower.get(col)
            if cur is None or bound > cur[0]:
                self.lower[col] = (bound, lit)
            up = self.upper.get(col)
            if up is not None and self.lower[col][0] > up[0]:
                return frozenset((self.lower[col][1], up[1]))
        if kind in ("upper", "both"):
            cur = self.upper.get(col)
            if cur is None or bound < cur[0]:
                self.upper[col] = (bound, lit)
            low = self.lower.get(col)
            if low is not None and low[0] > self.upper[col][0]:
                return frozenset((low[1], self.upper[col][1]))
        return None

    def _row_value(self, row: dict[int, Fraction]) -> Delta:
        total = ZERO
        for j, a in row.items():
            total = total + self.value[j].scale(a)
        return total

    def _pivot(self, b: int, j: int) -> None:
        row = self.rows.pop(b)
        a = row.pop(j)
        # j = (b - sum_{k != j} row[k] * k) / a
        new_row = {k: -c / a for k, c in row.items()}
        new_row[b] = 1 / a
        for other, orow in self.rows.items():
            c = orow.pop(j, None)
            if c:
                for k, ck in new_row.items():
                    v = orow.get(k, 0) + c * ck
                    if v:
                        orow[k] = v
                    else:
                        orow.pop(k, None)
        self.rows[j] = new_row

    def _pivot_and_update(self, b: int, j: int, v: Delta) -> None:
        a = self.rows[b][j]
        theta = (v - self.value[b]).scale(1 / a)
        self.value[b] = v
        self.value[j] = self.value[j] + theta
        for other, row in self.rows.items():
            if other != b:
                c = row.get(j)
                if c:
                    self.value[other] = self.value[other] + theta.scale(c)
        self._pivot(b, j)

    def initialize(self) -> None:
        for j in range(len(self.index)):
            if j in self.rows:
                continue
            low, up = self.lower.get(j), self.upper.get(j)
            if low is not None and self.value[j] < low[0]:
                self.value[j] = low[0]
            elif up is not None and self.value[j] > up[0]:
                self.value[j] = up[0]
        for b, row in self.rows.items():
            self.value[b] = self._row_value(row)

    def check(self) -> frozenset[Lit] | None:
        while True:
            broken = None
            for b in sorted(self.rows):
                v = self.value[b]
                low, up = self.lower.get(b), self.upper.get(b)
                if low is not None and v < low[0]:
                    broken = (b, True)
                    break
                if up is not None and v > up[0]:
                    broken = (b, False)
                    break
            if broken is None:
                return None
            b, raise_it = broken
            row = self.rows[b]
            chosen = None
            for j in sorted(row):
                a = row[j]
                low, up = self.lower.get(j), self.upper.get(j)
                can_inc = up is None or self.value[j] < up[0]
                can_dec = low is None or self.value[j] > low[0]
                if (raise_it and ((a > 0 and can_inc) or (a < 0 and can_dec))) or (
                    not raise_it and ((a < 0 and can_inc) or (a > 0 and can_dec))
                ):
                    chosen = j
                    break
            if chosen is None:
                return self._explain(b, raise_it)
            target = self.lower[b][0] if raise_it else self.upper[b][0]
            self._pivot_and_update(b, chosen, target)

    def _explain(self, b: int, raise_it: bool) -> frozenset[Lit]:
        lits = {(self.lower if raise_it else self.upper)[b][1]}
        for j, a in self.rows[b].items():
            if (a > 0) == raise_it:
                lits.add(self.upper[j][1])
            else:
                lits.add(self.lower[j][1])
        return frozenset(lits)


def lra_check(lits: Iterable[Lit]) -> LraResult:
    """Decide a conjunction of LRA literals exactly.

    Negated equalities are skipped: they remove a measure-zero set and never
    matter for integration.
    """
    sx = _Simplex()
    names: list[str] = []
    for lit in lits:
        coeffs, op, rhs = literal_constraint(lit)
        if op == "!=":
            continue
        for name, _ in coeffs:
            if name not in names:
                names.append(name)
        col, scale = sx.term(coeffs)
        bound = rhs / scale  # scale > 0 after canonicalization
        if op == "<=":
            conflict = sx.assert_bound(col, "upper", Delta(bound), lit)
        elif op == "<":
            conflict = sx.assert_bound(col, "upper", Delta(bound, Fraction(-1)), lit)
        elif op == ">=":
            conflict = sx.assert_bound(col, "lower", Delta(bound), lit)
        elif op == ">":
            conflict = sx.assert_bound(col, "lower", Delta(bound, Fraction(1)), lit)
        else:
            conflict = sx.assert_bound(col, "both", Delta(bound), lit)
        if conflict is not None:
            return LraResult(False, conflict=conflict)
    sx.initialize()
    conflict = sx.check()
    if conflict is not None:
        return LraResult(False, conflict=conflict)
    witness = {name: sx.value[sx.index[name]] for name in sorted(names)}
    result = LraResult(True, witness=witness)
    result._delta = _safe_delta(sx)
    return result


def holds_at(atom: LraAtom, witness: dict[str, Delta]) -> bool:
    """Truth of ``atom`` at a delta-rational point (missing variables are 0)."""
    lhs = ZERO
    for name, c in atom.coeffs:
        lhs = lhs + witness.get(name, ZERO).scale(c)
    rhs = Delta(atom.rhs)
    return {"<=": lhs <= rhs, "<": lhs < rhs, ">=": lhs >= rhs, ">": lhs > rhs, "=": lhs == rhs}[atom.op]


def _safe_delta(sx: _Simplex) -> Fraction:
    """Largest delta (capped at 1) keeping every bound satisfied."""
    delta = Fraction(1)
    for col, v in sx.value.items():
        for bound, is_lower in ((sx.lower.get(col), True), (sx.upper.get(col), False)):
            if bound is None:
                continue
            lo, hi = (bound[0], v) if is_lower else (v, bound[0])
            # need lo.c + lo.k*d <= hi.c + hi.k*d
            if lo.k > hi.k and hi.c > lo.c:
                delta = min(delta, (hi.c - lo.c) / (lo.k - hi.k) / 2)
    return delta
