"""Integration of weights over convex polytopes.

Exact backend: enumerate vertices, pull a triangulation from the
lexicographically smallest vertex over recursively triangulated facets, and
integrate each monomial on each simplex with the Dirichlet formula
``int_{simplex} lambda^a = prod(a_i!) / (d + sum(a))!`` (times ``|det|``).

Monte-Carlo backend: rejection sampling from the axis-aligned bounding box.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

import numpy as np
from scipy.optimize import linprog

from .errors import Unbounded, Unsat, ZeroAcceptance
from .formula import Atom, Lit, LraAtom
from .lra import literal_constraint, lra_check
from .polynomial import Polynomial
from .weights import WeightTerm, as_polynomial, evaluate_batch

Point = tuple[Fraction, ...]
Constraint = tuple[tuple[Fraction, ...], str, Fraction]  # a . x (<= | <) b


@dataclass(frozen=True)
class Polytope:
    dims: tuple[str, ...]
    constraints: tuple[Constraint, ...]
    degenerate: bool = False

    def contains(self, point: Sequence[Fraction]) -> bool:
        """Membership in the closure."""
        return all(sum(a * x for a, x in zip(row, point)) <= b for row, _, b in self.constraints)

    def box(self, bounds: dict[str, tuple[Fraction, Fraction]]) -> Polytope:
        rows = list(self.constraints)
        for i, name in enumerate(self.dims):
            lo, hi = bounds[name]
            unit = tuple(Fraction(int(j == i)) for j in range(len(self.dims)))
            rows.append((unit, "<=", Fraction(hi)))
            rows.append((tuple(-u for u in unit), "<=", -Fraction(lo)))
        return Polytope(self.dims, tuple(rows), self.degenerate)


def polytope_from(lits: Iterable[Lit], dims: Sequence[str] | None = None, check: bool = True) -> Polytope:
    """H-representation of a consistent set of LRA literals.

    ``>=``/``>`` rows are negated into ``<=``/``<``; an equality adds both
    directions and marks the polytope degenerate; negated equalities are
    dropped (measure zero).
    """
    lits = [l for l in lits if isinstance(l.atom, LraAtom)]
    if check and not lra_check(lits).sat:
        raise Unsat("literal set is LRA-inconsistent")
    if dims is None:
        dims = sorted({name for l in lits for name in l.atom.variables})
    dims = tuple(dims)
    pos = {name: i for i, name in enumerate(dims)}
    rows: dict[tuple, str] = {}
    degenerate = False

    def add(coeffs, op, rhs):
        row = [Fraction(0)] * len(dims)
        for name, c in coeffs:
            row[pos[name]] = c
        key = (tuple(row), rhs)
        if rows.get(key) != "<":
            rows[key] = op

    for lit in lits:
        coeffs, op, rhs = literal_constraint(lit)
        if op in ("<=", "<"):
            add(coeffs, op, rhs)
        elif op in (">=", ">"):
            add(tuple((n, -c) for n, c in coeffs), "<=" if op == ">=" else "<", -rhs)
        elif op == "=":
            degenerate = True
            add(coeffs, "<=", rhs)
            add(tuple((n, -c) for n, c in coeffs), "<=", -rhs)
    constraints = tuple((row, op, rhs) for (row, rhs), op in rows.items())
    return Polytope(dims, constraints, degenerate)


def _solve(rows: list[list[Fraction]], rhs: list[Fraction]) -> Point | None:
    """Unique solution of a square system, or None if singular."""
    n = len(rows)
    m = [list(r) + [b] for r, b in zip(rows, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col]
        m[col] = [v * inv for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    return tuple(m[r][n] for r in range(n))


def _rank(vectors: list[Sequence[Fraction]]) -> int:
    m = [list(v) for v in vectors]
    rank = 0
    cols = len(m[0]) if m else 0
    for col in range(cols):
        piv = next((r for r in range(rank, len(m)) if m[r][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][col] != 0:
                f = m[r][col] / m[rank][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank


def affine_dim(points: Sequence[Point]) -> int:
    if not points:
        return -1
    base = points[0]
    return _rank([[a - b for a, b in zip(p, base)] for p in points[1:]])


def check_bounded(P: Polytope) -> None:
    """Raise Unbounded if some coordinate is unbounded over P."""
    d = len(P.dims)
    if d == 0:
        return
    if not P.constraints:
        raise Unbounded("no constraints")
    A = np.array([[float(a) for a in row] for row, _, _ in P.constraints])
    b = np.array([float(rhs) for _, _, rhs in P.constraints])
    for i in range(d):
        for sign in (1.0, -1.0):
            c = np.zeros(d)
            c[i] = sign
            res = linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * d, method="highs")
            if res.status == 3:
                raise Unbounded(f"{P.dims[i]} is unbounded")


def vertices(P: Polytope) -> list[Point]:
    check_bounded(P)
    d = len(P.dims)
    if d == 0:
        return [()]
    found: dict[Point, None] = {}
    rows = [row for row, _, _ in P.constraints]
    rhs = [b for _, _, b in P.constraints]
    for combo in itertools.combinations(range(len(rows)), d):
        point = _solve([rows[i] for i in combo], [rhs[i] for i in combo])
        if point is not None and point not in found and P.contains(point):
            found[point] = None
    return sorted(found)


Simplex = list[Point]


def triangulate(P: Polytope, root: Callable[[list[Point]], Point] = min) -> list[Simplex]:
    """Pulling triangulation; [] when P is not full-dimensional."""
    verts = vertices(P)
    d = len(P.dims)
    if d == 0:
        return [[()]] if verts else []
    if affine_dim(verts) < d:
        return []
    tight = []
    for row, _, b in P.constraints:
        face = frozenset(i for i, v in enumerate(verts) if sum(a * x for a, x in zip(row, v)) == b)
        if face:
            tight.append(face)

    dims_memo: dict[frozenset[int], int] = {}

    def dim(face: frozenset[int]) -> int:
        if face not in dims_memo:
            dims_memo[face] = affine_dim([verts[i] for i in sorted(face)])
        return dims_memo[face]

    def facets(face: frozenset[int], k: int) -> list[frozenset[int]]:
        out = {face & t for t in tight if (face & t) != face}
        return sorted((f for f in out if f and dim(f) == k - 1), key=sorted)

    def pull(face: frozenset[int], k: int) -> list[list[int]]:
        if k == 0:
            return [[next(iter(face))]]
        apex = verts.index(root([verts[i] for i in face]))
        out = []
        for facet in facets(face, k):
            if apex in facet:
                continue
            for simplex in pull(facet, k - 1):
                out.append([apex] + simplex)
        return out

    return [[verts[i] for i in s] for s in pull(frozenset(range(len(verts))), d)]


def simplex_volume_factor(S: Simplex) -> Fraction:
    """``|det(v_1 - v_0, ..., v_d - v_0)|`` = d! * volume."""
    d = len(S) - 1
    if d == 0:
        return Fraction(1)
    m = [[a - b for a, b in zip(v, S[0])] for v in S[1:]]
    det = Fraction(1)
    for col in range(d):
        piv = next((r for r in range(col, d) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        for r in range(col + 1, d):
            if m[r][col] != 0:
                f = m[r][col] / m[col][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    return abs(det)


@lru_cache(maxsize=None)
def _fact(n: int) -> int:
    return factorial(n)


def _dirichlet(exps: tuple[int, ...], d: int) -> Fraction:
    num = 1
    for a in exps:
        num *= _fact(a)
    return Fraction(num, _fact(d + sum(exps)))


def _mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, 0) + c1 * c2
    return out


def integrate_polynomial_simplex(S: Simplex, poly: Polynomial, dims: Sequence[str]) -> Fraction:
    """Exact integral of ``poly`` over the simplex with vertices ``S``."""
    d = len(S) - 1
    jac = simplex_volume_factor(S)
    if jac == 0 or poly.is_zero():
        return Fraction(0)
    pos = {name: j for j, name in enumerate(dims)}
    one = (0,) * (d + 1)
    # x_j as a linear form in barycentric coordinates lambda_0..lambda_d
    forms = []
    for j in range(len(dims)):
        form = {}
        for i, v in enumerate(S):
            if v[j] != 0:
                e = [0] * (d + 1)
                e[i] = 1
                form[tuple(e)] = v[j]
        forms.append(form)
    powers: dict[tuple[int, int], dict] = {}

    def power(j: int, k: int) -> dict:
        key = (j, k)
        if key not in powers:
            powers[key] = {one: Fraction(1)} if k == 0 else _mul(power(j, k - 1), forms[j])
        return powers[key]

    total = Fraction(0)
    for mono, c in poly.terms.items():
        expanded = {one: Fraction(1)}
        for name, e in mono:
            expanded = _mul(expanded, power(pos[name], e))
        total += c * sum(coef * _dirichlet(exps, d) for exps, coef in expanded.items())
    return jac * total


def integrate_monomial_simplex(S: Simplex, m: Sequence[int]) -> Fraction:
    dims = tuple(f"x{i}" for i in range(len(m)))
    mono = tuple((name, e) for name, e in zip(dims, m) if e)
    return integrate_polynomial_simplex(S, Polynomial({mono: Fraction(1)}), dims)


def integrate_exact(P: Polytope, poly: Polynomial | WeightTerm) -> Fraction:
    if isinstance(poly, WeightTerm):
        poly = as_polynomial(poly)
    if P.degenerate:
        check_bounded(P)
        return Fraction(0)
    if poly.is_zero():
        check_bounded(P)
        return Fraction(0)
    return sum((integrate_polynomial_simplex(S, poly, P.dims) for S in triangulate(P)), Fraction(0))


def bounding_box(P: Polytope) -> tuple[np.ndarray, np.ndarray]:
    """Per-dimension LP bounds of P."""
    d = len(P.dims)
    A = np.array([[float(a) for a in row] for row, _, _ in P.constraints]).reshape(-1, d)
    b = np.array([float(rhs) for _, _, rhs in P.constraints])
    lo, hi = np.zeros(d), np.zeros(d)
    for i in range(d):
        for sign, out in ((1.0, lo), (-1.0, hi)):
            c = np.zeros(d)
            c[i] = sign
            res = linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * d, method="highs")
            if res.status == 3:
                raise Unbounded(f"{P.dims[i]} is unbounded")
            if res.status != 0:
                raise Unsat(f"bounding LP failed: {res.message}")
            out[i] = sign * res.fun
    return lo, hi


def mc_integrate(
    P: Polytope,
    w: WeightTerm,
    bools=None,
    samples: int = 1000,
    seed=0,
    strict: bool = True,
) -> float:
    """Unbiased estimate ``BoxVol * sum(w(x) for accepted x) / N``.

    Raises ZeroAcceptance when no sample lands in P and ``strict`` is set;
    otherwise that (unbiased) zero estimate is returned.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    d = len(P.dims)
    if P.degenerate:
        return 0.0
    if d == 0:
        return float(evaluate_batch(w, {}, bools)[0])
    lo, hi = bounding_box(P)
    width = hi - lo
    if np.any(width <= 0):
        return 0.0
    rng = np.random.default_rng(seed)
    pts = lo + rng.random((samples, d)) * width
    inside = np.ones(samples, dtype=bool)
    for row, _, b in P.constraints:
        inside &= pts @ np.array([float(a) for a in row]) <= float(b)
    accepted = pts[inside]
    if len(accepted) == 0:
        if strict:
            raise ZeroAcceptance(f"0 of {samples} samples inside the polytope")
        return 0.0
    cols = {name: accepted[:, i] for i, name in enumerate(P.dims)}
    values = evaluate_batch(w, cols, bools)
    return float(np.prod(width) * values.sum() / samples)


class ExactIntegrator:
    kind = "exact"

    def __init__(self, memo: bool = False):
        self.samples = None
        self.seed = None
        self._memo: dict | None = {} if memo else None

    def integrate(self, P: Polytope, w: WeightTerm, bools=None, index: int = 0) -> Fraction:
        poly = as_polynomial(w)
        if self._memo is None:
            return integrate_exact(P, poly)
        key = (P, poly)
        if key not in self._memo:
            self._memo[key] = integrate_exact(P, poly)
        return self._memo[key]

    def zero(self):
        return Fraction(0)


class MonteCarloIntegrator:
    kind = "mc"

    def __init__(self, samples: int = 1000, seed: int = 0, strict: bool = True):
        if samples < 1:
            raise ValueError("need at least one sample")
        self.samples = samples
        self.seed = seed
        self.strict = strict
        self.zero_acceptance = 0

    def integrate(self, P: Polytope, w: WeightTerm, bools=None, index: int = 0) -> float:
        seq = np.random.SeedSequence([self.seed, index])
        try:
            return mc_integrate(P, w, bools, self.samples, seq, strict=True)
        except ZeroAcceptance:
            self.zero_acceptance += 1
            if self.strict:
                raise
            return 0.0

    def zero(self):
        return 0.0


def bool_part(mu) -> dict[Atom, bool]:
    return {a: v for a, v in mu.items() if not isinstance(a, LraAtom)}
