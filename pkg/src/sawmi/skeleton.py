"""Conditional skeleton of a weight function.

The skeleton is a valid CNF over the atoms of the weight's conditions. Any
partial assignment satisfying it decides every condition on the path the
weight actually takes, so the restricted weight has no ``Ite`` left. Each
if-then-else contributes a branch clause ``~guards | psi | ~psi`` that forces
the enumerator to decide ``psi`` only where it matters.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

from .formula import (
    BoolAtom,
    Cnf,
    Const,
    Formula,
    LabelSupply,
    Lit,
    Not,
    as_literal,
    encode_guarded,
)
from .weights import Add, Func, Ite, Mul, Pow, Sub, WeightTerm


@dataclass
class Skeleton:
    cnf: Cnf
    labels: dict[BoolAtom, Formula]

    @property
    def clause_count(self) -> int:
        return len(self.cnf.clauses)


def convert_sk(
    term: WeightTerm, conds: Sequence[Lit] = (), fresh: LabelSupply | None = None, tseitin: bool = False
) -> Cnf:
    """CNF equivalent to ``AND(conds) -> sk(term)``."""
    fresh = fresh or LabelSupply()
    out = Cnf()
    _convert(term, tuple(conds), fresh, tseitin, out)
    return out


def _convert(term: WeightTerm, conds: tuple[Lit, ...], fresh: LabelSupply, tseitin: bool, out: Cnf) -> None:
    if isinstance(term, (Add, Sub, Mul)):
        _convert(term.left, conds, fresh, tseitin, out)
        _convert(term.right, conds, fresh, tseitin, out)
    elif isinstance(term, Pow):
        _convert(term.base, conds, fresh, tseitin, out)
    elif isinstance(term, Func):
        for arg in term.args:
            _convert(arg, conds, fresh, tseitin, out)
    elif isinstance(term, Ite):
        cond = term.cond
        if isinstance(cond, Const):
            _convert(term.then if cond.value else term.orelse, conds, fresh, tseitin, out)
            return
        lit = as_literal(cond)
        if lit is None:
            branch, lit = convert_sk_nonliteral(cond, conds, fresh, tseitin)
            out.extend(branch)
        else:
            out.add(tuple(-c for c in conds) + (lit, -lit), protected=True)
        _convert(term.then, conds + (lit,), fresh, tseitin, out)
        _convert(term.orelse, conds + (-lit,), fresh, tseitin, out)


def convert_sk_nonliteral(
    psi: Formula, conds: Sequence[Lit], fresh: LabelSupply, tseitin: bool = False
) -> tuple[Cnf, Lit]:
    """Branch clause on a fresh label B plus guarded definitions of ``B <-> psi``."""
    label = fresh.fresh()
    guard = tuple(-c for c in conds)
    out = Cnf(labels={label: psi})
    out.add(guard + (Lit(label), Lit(label, False)), protected=True)
    out.extend(encode_guarded(psi, guard + (Lit(label, False),), fresh, tseitin))
    out.extend(encode_guarded(Not(psi), guard + (Lit(label),), fresh, tseitin))
    return out, Lit(label)


def build_skeleton(w: WeightTerm, fresh: LabelSupply | None = None, tseitin: bool = False) -> Skeleton:
    cnf = convert_sk(w, (), fresh, tseitin)
    return Skeleton(cnf, dict(cnf.labels))


def dimacs(cnf: Cnf) -> str:
    """DIMACS text with ``c <index> <atom>`` lines mapping variables to atoms."""
    index = {atom: i for i, atom in enumerate(cnf.atoms(), 1)}
    lines = [f"c {i} {atom}" + (" label" if atom in cnf.labels else "") for atom, i in index.items()]
    lines.append(f"p cnf {len(index)} {len(cnf.clauses)}")
    for clause in cnf.clauses:
        lits = [str(index[l.atom] if l.positive else -index[l.atom]) for l in clause]
        lines.append(" ".join(lits + ["0"]))
    return "\n".join(lines) + "\n"
