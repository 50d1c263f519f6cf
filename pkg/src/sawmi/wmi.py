"""Weighted model integration: WMI-PA, SAE4WMI and brute-force references.

Both algorithms enumerate Boolean assignments first (projecting the reals
away), simplify the residual, and either integrate it directly when it is a
conjunction of LRA literals or enumerate its LRA assignments. WMI-PA labels
every non-Boolean condition and enumerates total assignments; SAE4WMI adds
the conditional skeleton of the weight and enumerates partial assignments,
weighting each by 2^k for the k Boolean atoms it leaves open.
"""

from __future__ import annotations

import logging
import time
from collections.abc import Iterable, Sequence
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .enumeration import EnumRequest, default_order, enumerate_assignments
from .errors import SkeletonFiViolation, TooLarge, ZeroPartition
from .formula import (
    FALSE,
    TRUE,
    And,
    Assignment,
    Atom,
    BoolAtom,
    Const,
    Formula,
    Iff,
    LabelSupply,
    Lit,
    LraAtom,
    Not,
    Or,
    RealVar,
    as_literal,
    conjoin,
    iter_atoms,
    residual,
    to_cnf,
)
from .integrate import ExactIntegrator, check_bounded, polytope_from
from .lra import lra_check
from .skeleton import build_skeleton
from .weights import Num, WeightTerm, conditions, evaluate_batch, is_fi, relabel, restrict, truth_batch

logger = logging.getLogger(__name__)


@dataclass
class WmiProblem:
    phi: Formula = TRUE
    chi: Formula = TRUE
    w: WeightTerm = field(default_factory=lambda: Num(1))
    reals: tuple[RealVar, ...] = ()
    bools: tuple[BoolAtom, ...] = ()
    bounds: dict[str, tuple[Fraction, Fraction]] = field(default_factory=dict)
    query: Formula | None = None

    @property
    def real_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.reals)

    def support(self) -> Formula:
        return conjoin(f for f in (self.phi, self.chi) if f != TRUE)

    def check(self) -> None:
        """Undeclared atoms raise ValueError; unbounded reals raise Unbounded."""
        names = set(self.real_names)
        bools = set(self.bools)
        formulas = [self.phi, self.chi, *conditions(self.w)]
        if self.query is not None:
            formulas.append(self.query)
        for f in formulas:
            for atom in iter_atoms(f):
                if isinstance(atom, BoolAtom) and atom not in bools:
                    raise ValueError(f"undeclared Boolean {atom}")
                if isinstance(atom, LraAtom) and not set(atom.variables) <= names:
                    raise ValueError(f"undeclared real in {atom}")
        if self.reals:
            lits = [l for f in (self.phi, self.chi) for l in top_literals(f) if isinstance(l.atom, LraAtom)]
            check_bounded(polytope_from(lits, self.real_names, check=False))


def top_literals(f: Formula) -> list[Lit]:
    """Literals that are top-level conjuncts of ``f``."""
    if isinstance(f, And):
        return [l for a in f.args for l in top_literals(a)]
    lit = as_literal(f)
    return [lit] if lit is not None else []


@dataclass
class BreakdownEntry:
    assignment: Assignment
    multiplicity: int
    integral: Fraction | float


@dataclass
class WmiResult:
    value: Fraction | float
    n_integrals: int
    algorithm: str
    integrator: str
    breakdown: list[BreakdownEntry] | None = None
    metadata: dict = field(default_factory=dict)


def simplify(f: Formula) -> Formula:
    """Constant propagation, flattening, duplicate-literal removal and
    detection of complementary literals inside conjunctions.

    Complementary literals inside a disjunction are left alone: skeleton
    clauses ``psi | ~psi`` must reach the enumerator.
    """
    f = residual(f, {})
    return _simplify(f)


def _simplify(f: Formula) -> Formula:
    if isinstance(f, (And, Or)):
        node = type(f)
        absorbing, neutral = (FALSE, TRUE) if node is And else (TRUE, FALSE)
        out: dict[Formula, None] = {}
        for arg in f.args:
            g = _simplify(arg)
            if g == absorbing:
                return absorbing
            if g == neutral:
                continue
            for part in g.args if isinstance(g, node) else (g,):
                out.setdefault(part)
        parts = list(out)
        if node is And:
            lits = {as_literal(p) for p in parts} - {None}
            if any(-l in lits for l in lits):  # type: ignore[operator]
                return FALSE
        if not parts:
            return neutral
        return parts[0] if len(parts) == 1 else node(tuple(parts))
    if isinstance(f, Not):
        inner = _simplify(f.arg)
        if isinstance(inner, Const):
            return FALSE if inner.value else TRUE
        return inner.arg if isinstance(inner, Not) else Not(inner)
    return f


def literal_conjunction(f: Formula) -> list[Lit] | None:
    """The LRA literals of ``f`` if it is a conjunction of them."""
    parts = f.args if isinstance(f, And) else (f,)
    lits = []
    for p in parts:
        lit = as_literal(p)
        if lit is None or not isinstance(lit.atom, LraAtom):
            return None
        lits.append(lit)
    return lits


class _Accumulator:
    """Integrates emitted regions one at a time (or on a thread pool)."""

    def __init__(self, problem: WmiProblem, integrator, workers: int, keep: bool):
        self.dims = problem.real_names
        self.integrator = integrator
        self.keep = keep
        self.value = integrator.zero()
        self.count = 0
        self.degenerate = 0
        self.breakdown: list[BreakdownEntry] | None = [] if keep else None
        self.pool = ThreadPoolExecutor(workers) if workers > 1 else None
        self.pending: list[tuple[Future, Assignment, int]] = []

    def add(self, mu: Assignment, lits: Sequence[Lit], w: WeightTerm, multiplicity: int) -> None:
        polytope = polytope_from(lits, self.dims, check=False)
        if polytope.degenerate:
            self.degenerate += 1
        bools = {a: v for a, v in mu.items() if isinstance(a, BoolAtom)}
        index = self.count
        self.count += 1
        if self.pool is None:
            self._consume(mu, multiplicity, self.integrator.integrate(polytope, w, bools, index))
        else:
            future = self.pool.submit(self.integrator.integrate, polytope, w, bools, index)
            self.pending.append((future, mu, multiplicity))

    def _consume(self, mu: Assignment, multiplicity: int, integral) -> None:
        self.value += multiplicity * integral
        if self.breakdown is not None:
            self.breakdown.append(BreakdownEntry(mu, multiplicity, integral))

    def finish(self):
        if self.pool is not None:
            for future, mu, multiplicity in self.pending:
                self._consume(mu, multiplicity, future.result())
            self.pool.shutdown()
        return self.value


def _result(acc: _Accumulator, algorithm: str, started: float, **extra) -> WmiResult:
    value = acc.finish()
    meta = {"degenerate": acc.degenerate, "wall_ms": (time.perf_counter() - started) * 1000, **extra}
    if getattr(acc.integrator, "zero_acceptance", 0):
        meta["zero_acceptance"] = acc.integrator.zero_acceptance
    return WmiResult(value, acc.count, algorithm, acc.integrator.kind, acc.breakdown, meta)


def label_conditions(problem: WmiProblem, fresh: LabelSupply | None = None):
    """Replace non-Boolean-literal conditions by fresh labels.

    Returns ``(phi_star, w_star, a_star, labels)`` with
    ``phi_star = phi & chi & AND(B_k <-> psi_k)``.
    """
    fresh = fresh or LabelSupply()
    bools = set(problem.bools)
    labels: dict[BoolAtom, Formula] = {}
    mapping: dict[Formula, Formula] = {}
    for psi in conditions(problem.w):
        lit = as_literal(psi)
        if lit is not None and lit.atom in bools:
            continue
        label = fresh.fresh()
        labels[label] = psi
        mapping[psi] = label
    parts = [f for f in (problem.phi, problem.chi) if f != TRUE]
    parts += [Iff(b, psi) for b, psi in labels.items()]
    phi_star = conjoin(parts)
    return phi_star, relabel(problem.w, mapping), [*problem.bools, *labels], labels


def _order(relevant: Iterable[Atom], cnf_atoms: Iterable[Atom], override: Sequence[Atom] | None) -> list[Atom]:
    base = list(dict.fromkeys(relevant))
    return list(override or ()) + base + default_order(a for a in cnf_atoms if a not in set(base))


def wmi_pa(
    problem: WmiProblem,
    integrator=None,
    *,
    order: Sequence[Atom] | None = None,
    polarity: str = "positive",
    workers: int = 1,
    breakdown: bool = False,
    inner: str = "total",
) -> WmiResult:
    """WMI-PA. ``inner`` picks the enumeration of residuals that are not
    literal conjunctions: ``total`` (the default) splits on every residual
    atom, ``partial`` enumerates minimized assignments."""
    started = time.perf_counter()
    integrator = integrator or ExactIntegrator()
    fresh = LabelSupply()
    phi_star, w_star, a_star, _ = label_conditions(problem, fresh)
    cnf = to_cnf(phi_star, fresh)
    hidden = set(cnf.labels)
    formula = cnf.to_formula()
    acc = _Accumulator(problem, integrator, workers, breakdown)
    req = EnumRequest(cnf, a_star, "total", _order(a_star, cnf.atoms(), order), polarity)
    for mu in enumerate_assignments(req):
        res = simplify(residual(formula, mu))
        if res == FALSE:
            continue
        w_mu = restrict(w_star, mu)
        lits = literal_conjunction(res)
        if lits is not None:
            acc.add(mu, lits, w_mu, 1)
            continue
        sub = to_cnf(res, fresh)
        relevant = [a for a in sub.atoms() if a not in hidden and a not in sub.labels]
        req2 = EnumRequest(sub, relevant, inner, _order((), sub.atoms(), order), polarity)
        for nu in enumerate_assignments(req2):
            acc.add(mu.extend(nu), [l for l in nu.literals() if isinstance(l.atom, LraAtom)], w_mu, 1)
    return _result(acc, "pa", started)


def sae4wmi(
    problem: WmiProblem,
    integrator=None,
    *,
    order: Sequence[Atom] | None = None,
    polarity: str = "positive",
    workers: int = 1,
    breakdown: bool = False,
    tseitin_labels: bool = False,
) -> WmiResult:
    started = time.perf_counter()
    integrator = integrator or ExactIntegrator()
    fresh = LabelSupply()
    sk = build_skeleton(problem.w, fresh, tseitin_labels)
    cnf = to_cnf(problem.support(), fresh) + sk.cnf
    hidden = set(cnf.labels)
    formula = cnf.to_formula()
    bools = list(problem.bools)
    acc = _Accumulator(problem, integrator, workers, breakdown)

    def add(mu: Assignment, lits: list[Lit], multiplicity: int) -> None:
        w_mu = restrict(problem.w, mu)
        if not is_fi(w_mu):
            raise SkeletonFiViolation(f"weight still conditional under {mu}")
        acc.add(mu, lits, w_mu, multiplicity)

    req = EnumRequest(cnf, bools, "partial", _order(bools, cnf.atoms(), order), polarity)
    for mu_a in enumerate_assignments(req):
        k = len(bools) - len(mu_a)
        res = simplify(residual(formula, mu_a))
        if res == FALSE:
            continue
        lits = literal_conjunction(res)
        if lits is not None:
            add(mu_a, lits, 2**k)
            continue
        sub = to_cnf(res, fresh)
        relevant = [a for a in sub.atoms() if a not in hidden and a not in sub.labels]
        req2 = EnumRequest(sub, relevant, "partial", _order((), sub.atoms(), order), polarity)
        for mu in enumerate_assignments(req2):
            k2 = k - sum(1 for a in mu if isinstance(a, BoolAtom))
            add(mu_a.extend(mu), [l for l in mu.literals() if isinstance(l.atom, LraAtom)], 2**k2)
    return _result(acc, "sae", started, skeleton_clauses=sk.clause_count)


def oracle_wmi(problem: WmiProblem, integrator=None, *, limit: int = 16, breakdown: bool = False) -> WmiResult:
    """Sum over every total assignment to the Booleans and to all atoms of
    the support and of the conditions; each consistent region is integrated.
    """
    started = time.perf_counter()
    integrator = integrator or ExactIntegrator(memo=True)
    conds = conditions(problem.w)
    support = problem.support()
    atoms = list(dict.fromkeys([*problem.bools, *iter_atoms(support), *(a for c in conds for a in iter_atoms(c))]))
    if len(atoms) > limit:
        raise TooLarge(f"{len(atoms)} distinct atoms exceed {limit}")
    acc = _Accumulator(problem, integrator, 1, breakdown)

    def visit(i: int, values: dict[Atom, bool]) -> None:
        if residual(support, values) == FALSE:
            return
        lra = [Lit(a, v) for a, v in values.items() if isinstance(a, LraAtom)]
        if lra and i and isinstance(atoms[i - 1], LraAtom) and not lra_check(lra).sat:
            return
        if i == len(atoms):
            mu = Assignment(values)
            w_mu = restrict(problem.w, mu)
            acc.add(mu, lra, w_mu, 1)
            return
        for value in (True, False):
            values[atoms[i]] = value
            visit(i + 1, values)
            del values[atoms[i]]

    visit(0, {})
    return _result(acc, "oracle", started)


def problem_box(problem: WmiProblem) -> tuple[np.ndarray, np.ndarray]:
    """Box of declared bounds, falling back to LP bounds of top-level literals."""
    names = problem.real_names
    if all(n in problem.bounds for n in names):
        lo = np.array([float(problem.bounds[n][0]) for n in names])
        hi = np.array([float(problem.bounds[n][1]) for n in names])
        return lo, hi
    from .integrate import bounding_box

    lits = [l for f in (problem.phi, problem.chi) for l in top_literals(f) if isinstance(l.atom, LraAtom)]
    return bounding_box(polytope_from(lits, names, check=False))


def mc_oracle(problem: WmiProblem, samples: int = 100_000, seed: int = 0) -> float:
    """Rejection estimate over the box and uniformly random Booleans."""
    rng = np.random.default_rng(seed)
    names = problem.real_names
    if names:
        lo, hi = problem_box(problem)
        pts = lo + rng.random((samples, len(names))) * (hi - lo)
        volume = float(np.prod(hi - lo))
    else:
        pts = np.zeros((samples, 0))
        volume = 1.0
    cols = {n: pts[:, i] for i, n in enumerate(names)}
    bools = {b: rng.random(samples) < 0.5 for b in problem.bools}
    inside = truth_batch(problem.support(), cols, bools, samples)
    if not inside.any():
        return 0.0
    sub_cols = {n: c[inside] for n, c in cols.items()}
    sub_bools = {b: v[inside] for b, v in bools.items()}
    values = evaluate_batch(problem.w, sub_cols, sub_bools, int(inside.sum()))
    return volume * 2 ** len(problem.bools) * float(values.sum()) / samples


ALGORITHMS = {"pa": wmi_pa, "sae": sae4wmi, "oracle": oracle_wmi}


def solve(problem: WmiProblem, algorithm: str = "sae", integrator=None, **options) -> WmiResult:
    if algorithm == "oracle":
        options = {k: v for k, v in options.items() if k == "breakdown"}
    return ALGORITHMS[algorithm](problem, integrator, **options)


def query_probability(
    problem: WmiProblem, delta: Formula, algorithm: str = "sae", integrator=None, **options
) -> Fraction | float:
    """``WMI(delta & phi & chi) / WMI(phi & chi)`` with one shared configuration."""
    denominator = solve(problem, algorithm, integrator, **options).value
    if denominator == 0:
        raise ZeroPartition("the support has zero weighted volume")
    numerator = solve(replace(problem, phi=conjoin(f for f in (delta, problem.phi) if f != TRUE)),
                      algorithm, integrator, **options).value
    return numerator / denominator
