"""Projected AllSMT enumeration over a CNF with LRA atoms.

A small lazy DPLL(T): unit propagation, a fixed decision order, chronological
backtracking, an exact LRA check on every propagated state and conflict
clauses learned from the simplex explanations. After each model the search
restarts with a blocking clause over the relevant atoms.

``total`` mode yields every theory-consistent total assignment over the
relevant atoms that extends to a model. ``partial`` mode first shrinks each
model greedily (reverse trail order, hidden atoms fixed) and yields pairwise
disjoint partial assignments that together cover the same set.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field

from .formula import Assignment, Atom, BoolAtom, Cnf, Lit, LraAtom
from .lra import lra_check

logger = logging.getLogger(__name__)


def default_order(atoms: Iterable[Atom]) -> list[Atom]:
    """Boolean atoms first, each group in input order."""
    atoms = list(dict.fromkeys(atoms))
    return [a for a in atoms if isinstance(a, BoolAtom)] + [a for a in atoms if isinstance(a, LraAtom)]


@dataclass
class EnumRequest:
    cnf: Cnf
    relevant: Sequence[Atom]
    mode: str = "partial"
    decision_order: Sequence[Atom] | None = None
    polarity: str = "positive"
    trace: list[str] | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.mode not in ("total", "partial"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.polarity not in ("positive", "negative"):
            raise ValueError(f"unknown polarity {self.polarity!r}")


class _Search:
    def __init__(self, req: EnumRequest):
        atoms = list(dict.fromkeys([*req.cnf.atoms(), *req.relevant]))
        order = list(dict.fromkeys(req.decision_order or ()))
        known = set(atoms)
        order = [a for a in order if a in known]
        order += default_order(a for a in atoms if a not in set(order))
        self.atoms: list[Atom] = order
        self.index = {a: i for i, a in enumerate(order)}
        self.relevant = [self.index[a] for a in dict.fromkeys(req.relevant)]
        self.relevant_set = set(self.relevant)
        self.theory = [i for i, a in enumerate(order) if isinstance(a, LraAtom)]
        self.first_value = req.polarity == "positive"
        self.clauses: list[list[int]] = [[self._lit(l) for l in c] for c in req.cnf.clauses]
        self.blocking: list[list[int]] = []
        self.learned: list[list[int]] = []
        self._theory_memo: dict[frozenset[int], bool] = {}
        self.theory_calls = 0

    def _lit(self, lit: Lit) -> int:
        v = self.index[lit.atom] + 1
        return v if lit.positive else -v

    def _propagate(self, assign: list, trail: list) -> bool:
        """Unit propagation to fixpoint; False on a conflict."""
        changed = True
        while changed:
            changed = False
            for group in (self.clauses, self.blocking, self.learned):
                for clause in group:
                    unassigned = None
                    n_free = 0
                    for l in clause:
                        v = assign[abs(l) - 1]
                        if v is None:
                            n_free += 1
                            unassigned = l
                        elif v == (l > 0):
                            break
                    else:
                        if n_free == 0:
                            return False
                        if n_free == 1:
                            var = abs(unassigned) - 1
                            assign[var] = unassigned > 0
                            trail.append((var, "implied"))
                            changed = True
        return True

    def _theory_ok(self, assign: list) -> bool:
        key = frozenset(i + 1 if assign[i] else -(i + 1) for i in self.theory if assign[i] is not None)
        cached = self._theory_memo.get(key)
        if cached is not None:
            return cached
        self.theory_calls += 1
        result = lra_check(Lit(self.atoms[abs(l) - 1], l > 0) for l in key)
        if not result.sat:
            self.learned.append([-self._lit(l) for l in result.conflict])
        self._theory_memo[key] = result.sat
        return result.sat

    def solve(self) -> tuple[list, list] | None:
        n = len(self.atoms)
        assign: list = [None] * n
        trail: list = []
        while True:
            ok = self._propagate(assign, trail) and self._theory_ok(assign)
            if not ok:
                while trail:
                    var, kind = trail.pop()
                    value = assign[var]
                    assign[var] = None
                    if kind == "decision":
                        assign[var] = not value
                        trail.append((var, "flipped"))
                        break
                else:
                    return None
                continue
            var = next((i for i in range(n) if assign[i] is None), None)
            if var is None:
                return assign, [v for v, _ in trail]
            assign[var] = self.first_value
            trail.append((var, "decision"))

    def satisfied(self, values: dict[int, bool], clauses: Iterable[list[int]]) -> bool:
        for clause in clauses:
            if not any(values.get(abs(l) - 1) == (l > 0) for l in clause):
                return False
        return True

    def minimize(self, assign: list, trail_order: list[int]) -> dict[int, bool]:
        values = {i: v for i, v in enumerate(assign)}
        constraints = self.clauses + self.blocking
        for var in reversed(trail_order):
            if var not in self.relevant_set:
                continue
            value = values.pop(var)
            if not self.satisfied(values, constraints):
                values[var] = value
        return values


def enumerate_assignments(req: EnumRequest) -> Iterator[Assignment]:
    """Stream of assignments restricted to ``req.relevant``."""
    search = _Search(req)
    if any(not c for c in search.clauses):
        return
    count = 0
    while True:
        found = search.solve()
        if found is None:
            break
        assign, trail_order = found
        if req.mode == "partial":
            values = search.minimize(assign, trail_order)
        else:
            values = dict(enumerate(assign))
        picked = sorted(i for i in search.relevant if i in values)
        mu = Assignment((search.atoms[i], values[i]) for i in picked)
        block = [-(i + 1) if values[i] else i + 1 for i in picked]
        search.blocking.append(block)
        count += 1
        if req.trace is not None:
            req.trace.append(f"{count}: {mu}")
        logger.debug("emit %s", mu)
        yield mu
        if not block:
            break


def minimize(total: Assignment, cnf: Cnf, relevant: Iterable[Atom], order: Sequence[Atom] | None = None) -> Assignment:
    """Greedy subset-minimal restriction of ``total`` that still satisfies ``cnf``.

    Relevant literals are dropped in reverse ``order`` (default: the order of
    ``total``); other atoms stay fixed.
    """
    relevant = set(relevant)
    values = dict(total)
    order = list(order) if order is not None else list(total)
    for atom in reversed(order):
        if atom not in relevant or atom not in values:
            continue
        value = values.pop(atom)
        if not all(any(values.get(l.atom) == l.positive for l in c) for c in cnf.clauses):
            values[atom] = value
    return Assignment((a, values[a]) for a in total if a in values and a in relevant)
