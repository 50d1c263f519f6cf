"""SMT(LRA) formulas over Boolean atoms and linear rational constraints.

Atoms are interned: building the same (canonicalized) atom twice returns the
same object, so atoms compare and hash by identity. Connectives are plain
frozen dataclasses with structural equality.
"""

from __future__ import annotations

import itertools
import threading
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import NamedTuple, Union

from .errors import MalformedAssignment

Number = Union[int, Fraction]

# op -> op of the negated atom; "!=" never appears in an atom
NEGATED_OP = {"<=": ">", "<": ">=", ">=": "<", ">": "<=", "=": "!="}
FLIPPED_OP = {"<=": ">=", "<": ">", ">=": "<=", ">": "<", "=": "="}


@dataclass(frozen=True)
class RealVar:
    name: str
    index: int = 0


class Formula:
    """Base class of formula nodes."""

    __slots__ = ()

    def __and__(self, other: Formula) -> Formula:
        return And((self, other))

    def __or__(self, other: Formula) -> Formula:
        return Or((self, other))

    def __invert__(self) -> Formula:
        return Not(self)


@dataclass(frozen=True)
class Const(Formula):
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


TRUE = Const(True)
FALSE = Const(False)


_intern_lock = threading.Lock()
_interned: dict[tuple, Formula] = {}


class BoolAtom(Formula):
    __slots__ = ("name", "__weakref__")

    def __new__(cls, name: str) -> BoolAtom:
        key = ("bool", name)
        with _intern_lock:
            atom = _interned.get(key)
            if atom is None:
                atom = object.__new__(cls)
                object.__setattr__(atom, "name", name)
                _interned[key] = atom
        return atom

    def __setattr__(self, key, value):
        raise AttributeError("atoms are immutable")

    def __reduce__(self):
        return (BoolAtom, (self.name,))

    def __repr__(self) -> str:
        return f"BoolAtom({self.name!r})"

    def __str__(self) -> str:
        return self.name


class LraAtom(Formula):
    """Canonical linear constraint ``sum(c_i * x_i) op rhs``.

    Build through :func:`compare`, which canonicalizes and may fold the
    comparison to a constant.
    """

    __slots__ = ("coeffs", "op", "rhs", "__weakref__")

    def __new__(cls, coeffs: tuple[tuple[str, Fraction], ...], op: str, rhs: Fraction) -> LraAtom:
        key = ("lra", coeffs, op, rhs)
        with _intern_lock:
            atom = _interned.get(key)
            if atom is None:
                atom = object.__new__(cls)
                object.__setattr__(atom, "coeffs", coeffs)
                object.__setattr__(atom, "op", op)
                object.__setattr__(atom, "rhs", rhs)
                _interned[key] = atom
        return atom

    def __setattr__(self, key, value):
        raise AttributeError("atoms are immutable")

    def __reduce__(self):
        return (LraAtom, (self.coeffs, self.op, self.rhs))

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.coeffs)

    def lhs(self, point: Mapping[str, Number]):
        return sum(c * point[name] for name, c in self.coeffs)

    def holds(self, point: Mapping[str, Number]) -> bool:
        return _OPS[self.op](self.lhs(point), self.rhs)

    def __repr__(self) -> str:
        return f"LraAtom({self})"

    def __str__(self) -> str:
        parts = []
        for i, (name, c) in enumerate(self.coeffs):
            sign = "-" if c < 0 else ("+" if i else "")
            mag = abs(c)
            term = name if mag == 1 else f"{_fmt(mag)}*{name}"
            parts.append(f"{sign} {term}".strip() if i else f"{sign}{term}")
        return f"({' '.join(parts)} {self.op} {_fmt(self.rhs)})"


_OPS = {
    "<=": lambda a, b: a <= b,
    "<": lambda a, b: a < b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def compare(coeffs: Mapping[str, Number] | Iterable[tuple[str, Number]], op: str, rhs: Number) -> Formula:
    """Canonical ``sum(coeffs) op rhs``; folds to TRUE/FALSE without variables."""
    if op not in FLIPPED_OP:
        raise ValueError(f"unsupported comparison operator {op!r}")
    items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
    merged: dict[str, Fraction] = {}
    for name, c in items:
        merged[name] = merged.get(name, Fraction(0)) + Fraction(c)
    terms = sorted((n, c) for n, c in merged.items() if c != 0)
    rhs = Fraction(rhs)
    if not terms:
        return TRUE if _OPS[op](Fraction(0), rhs) else FALSE
    scale = Fraction(lcm(*(c.denominator for _, c in terms)))
    ints = [int(c * scale) for _, c in terms]
    scale /= gcd(*ints)
    if terms[0][1] < 0:
        scale = -scale
        op = FLIPPED_OP[op]
    return LraAtom(tuple((n, c * scale) for n, c in terms), op, rhs * scale)


def canonical(atom: LraAtom) -> LraAtom:
    return compare(atom.coeffs, atom.op, atom.rhs)  # type: ignore[return-value]


Atom = Union[BoolAtom, LraAtom]


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def __str__(self) -> str:
        return f"~{self.arg}"


@dataclass(frozen=True)
class And(Formula):
    args: tuple[Formula, ...]

    def __post_init__(self):
        if not self.args:
            raise ValueError("And needs at least one child")
        object.__setattr__(self, "args", tuple(self.args))

    def __str__(self) -> str:
        return "(" + " & ".join(map(str, self.args)) + ")"


@dataclass(frozen=True)
class Or(Formula):
    args: tuple[Formula, ...]

    def __post_init__(self):
        if not self.args:
            raise ValueError("Or needs at least one child")
        object.__setattr__(self, "args", tuple(self.args))

    def __str__(self) -> str:
        return "(" + " | ".join(map(str, self.args)) + ")"


@dataclass(frozen=True)
class Implies(Formula):
    lhs: Formula
    rhs: Formula

    def __str__(self) -> str:
        return f"({self.lhs} -> {self.rhs})"


@dataclass(frozen=True)
class Iff(Formula):
    lhs: Formula
    rhs: Formula

    def __str__(self) -> str:
        return f"({self.lhs} <-> {self.rhs})"


def conjoin(parts: Iterable[Formula]) -> Formula:
    parts = tuple(parts)
    if not parts:
        return TRUE
    return parts[0] if len(parts) == 1 else And(parts)


def disjoin(parts: Iterable[Formula]) -> Formula:
    parts = tuple(parts)
    if not parts:
        return FALSE
    return parts[0] if len(parts) == 1 else Or(parts)


def is_atom(f: Formula) -> bool:
    return isinstance(f, (BoolAtom, LraAtom))


class Lit(NamedTuple):
    atom: Atom
    positive: bool = True

    def __neg__(self) -> Lit:
        return Lit(self.atom, not self.positive)

    def formula(self) -> Formula:
        return self.atom if self.positive else Not(self.atom)

    def __str__(self) -> str:
        return str(self.atom) if self.positive else f"~{self.atom}"


def as_literal(f: Formula) -> Lit | None:
    """The literal ``f`` denotes, or None if it is not a literal."""
    polarity = True
    while isinstance(f, Not):
        f, polarity = f.arg, not polarity
    if is_atom(f):
        return Lit(f, polarity)  # type: ignore[arg-type]
    return None


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, Not):
        return (f.arg,)
    if isinstance(f, (And, Or)):
        return f.args
    if isinstance(f, (Implies, Iff)):
        return (f.lhs, f.rhs)
    return ()


def iter_atoms(f: Formula) -> Iterator[Atom]:
    """Atoms of ``f`` in first-occurrence order, without repeats."""
    seen: set[Atom] = set()
    stack = [f]
    while stack:
        node = stack.pop()
        if is_atom(node):
            if node not in seen:
                seen.add(node)  # type: ignore[arg-type]
                yield node  # type: ignore[misc]
        else:
            stack.extend(reversed(children(node)))


def atoms(f: Formula) -> set[Atom]:
    return set(iter_atoms(f))


class Assignment(Mapping):
    """Partial or total truth assignment, kept in insertion order."""

    __slots__ = ("_values",)

    def __init__(self, values: Mapping[Atom, bool] | Iterable[tuple[Atom, bool]] = ()):
        items = values.items() if isinstance(values, Mapping) else values
        self._values: dict[Atom, bool] = {}
        for atom, value in items:
            if self._values.get(atom, value) != value:
                raise MalformedAssignment(f"atom {atom} assigned both values")
            self._values[atom] = bool(value)

    @classmethod
    def from_literals(cls, lits: Iterable[Lit | Formula]) -> Assignment:
        pairs = []
        for lit in lits:
            if not isinstance(lit, Lit):
                lit = as_literal(lit)
                if lit is None:
                    raise MalformedAssignment("not a literal")
            pairs.append((lit.atom, lit.positive))
        return cls(pairs)

    def __getitem__(self, atom: Atom) -> bool:
        return self._values[atom]

    def __iter__(self):
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def __hash__(self) -> int:
        return hash(frozenset(self._values.items()))

    def __eq__(self, other) -> bool:
        if isinstance(other, Mapping):
            return dict(self._values) == dict(other)
        return NotImplemented

    def literals(self) -> list[Lit]:
        return [Lit(a, v) for a, v in self._values.items()]

    def as_formula(self) -> Formula:
        return conjoin(lit.formula() for lit in self.literals())

    def restrict(self, keep) -> Assignment:
        return Assignment((a, v) for a, v in self._values.items() if a in keep)

    def extend(self, other: Mapping[Atom, bool]) -> Assignment:
        return Assignment(itertools.chain(self._values.items(), other.items()))

    def __repr__(self) -> str:
        return "{" + ", ".join(map(str, self.literals())) + "}"


def _neg(f: Formula) -> Formula:
    if isinstance(f, Const):
        return FALSE if f.value else TRUE
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def residual(f: Formula, mu: Mapping[Atom, bool]) -> Formula:
    """Substitute assigned atoms and propagate truth constants."""
    if isinstance(f, Const):
        return f
    if is_atom(f):
        value = mu.get(f)  # type: ignore[call-overload]
        if value is None:
            return f
        return TRUE if value else FALSE
    if isinstance(f, Not):
        return _neg(residual(f.arg, mu))
    if isinstance(f, (And, Or)):
        absorbing, neutral = (FALSE, TRUE) if isinstance(f, And) else (TRUE, FALSE)
        kept = []
        for arg in f.args:
            r = residual(arg, mu)
            if r == absorbing:
                return absorbing
            if r != neutral:
                kept.append(r)
        if not kept:
            return neutral
        return kept[0] if len(kept) == 1 else type(f)(tuple(kept))
    if isinstance(f, Implies):
        lhs, rhs = residual(f.lhs, mu), residual(f.rhs, mu)
        if lhs == FALSE or rhs == TRUE:
            return TRUE
        if lhs == TRUE:
            return rhs
        if rhs == FALSE:
            return _neg(lhs)
        return Implies(lhs, rhs)
    if isinstance(f, Iff):
        lhs, rhs = residual(f.lhs, mu), residual(f.rhs, mu)
        if isinstance(lhs, Const):
            lhs, rhs = rhs, lhs
        if isinstance(rhs, Const):
            return lhs if rhs.value else _neg(lhs)
        return Iff(lhs, rhs)
    raise TypeError(f"not a formula: {f!r}")


def prop_satisfies(mu: Mapping[Atom, bool] | Iterable[Lit], f: Formula) -> bool:
    if not isinstance(mu, Mapping):
        mu = Assignment.from_literals(mu)
    return residual(f, mu) == TRUE


def evaluate_formula(f: Formula, point: Mapping[str, Number], bools: Mapping[Atom, bool]) -> bool:
    """Truth value of ``f`` at a concrete point with all Boolean atoms assigned."""
    if isinstance(f, Const):
        return f.value
    if isinstance(f, BoolAtom):
        return bools[f]
    if isinstance(f, LraAtom):
        return f.holds(point)
    if isinstance(f, Not):
        return not evaluate_formula(f.arg, point, bools)
    if isinstance(f, And):
        return all(evaluate_formula(a, point, bools) for a in f.args)
    if isinstance(f, Or):
        return any(evaluate_formula(a, point, bools) for a in f.args)
    if isinstance(f, Implies):
        return not evaluate_formula(f.lhs, point, bools) or evaluate_formula(f.rhs, point, bools)
    if isinstance(f, Iff):
        return evaluate_formula(f.lhs, point, bools) == evaluate_formula(f.rhs, point, bools)
    raise TypeError(f"not a formula: {f!r}")


# --- negation normal form -------------------------------------------------


def to_nnf(f: Formula, positive: bool = True) -> Formula:
    """Negation normal form with implications and bi-implications expanded.

    And/Or nodes are flattened; constants are propagated away unless the
    whole formula is constant.
    """
    if isinstance(f, Const):
        return f if positive else _neg(f)
    if is_atom(f):
        return f if positive else Not(f)
    if isinstance(f, Not):
        return to_nnf(f.arg, not positive)
    if isinstance(f, Implies):
        return to_nnf(Or((Not(f.lhs), f.rhs)), positive)
    if isinstance(f, Iff):
        a, b = f.lhs, f.rhs
        if positive:
            return to_nnf(And((Or((Not(a), b)), Or((a, Not(b))))))
        return to_nnf(And((Or((a, b)), Or((Not(a), Not(b))))))
    if isinstance(f, (And, Or)):
        is_and = isinstance(f, And) == positive
        node = And if is_and else Or
        absorbing, neutral = (FALSE, TRUE) if is_and else (TRUE, FALSE)
        out: list[Formula] = []
        for arg in f.args:
            g = to_nnf(arg, positive)
            if g == absorbing:
                return absorbing
            if g == neutral:
                continue
            out.extend(g.args if isinstance(g, node) else (g,))
        if not out:
            return neutral
        return out[0] if len(out) == 1 else node(tuple(out))
    raise TypeError(f"not a formula: {f!r}")


# --- CNF ------------------------------------------------------------------

Clause = tuple[Lit, ...]


class LabelSupply:
    """Fresh Boolean atoms ``B#1``, ``B#2``, ... (``#`` keeps them out of user names)."""

    def __init__(self, prefix: str = "B#", start: int = 1):
        self.prefix = prefix
        self._next = start

    def fresh(self) -> BoolAtom:
        atom = BoolAtom(f"{self.prefix}{self._next}")
        self._next += 1
        return atom


@dataclass
class Cnf:
    """Clause list plus the fresh labels it introduced.

    ``protected`` holds indices of intentional validity clauses
    ``(... | psi | ~psi)`` which tautology deletion must keep.
    """

    clauses: list[Clause]
    labels: dict[BoolAtom, Formula]
    protected: set[int]

    def __init__(self, clauses=(), labels=None, protected=()):
        self.clauses = [tuple(c) for c in clauses]
        self.labels = dict(labels or {})
        self.protected = set(protected)

    @classmethod
    def true(cls) -> Cnf:
        return cls()

    def add(self, clause: Iterable[Lit], protected: bool = False) -> None:
        if protected:
            self.protected.add(len(self.clauses))
        self.clauses.append(_dedup(clause))

    def extend(self, other: Cnf) -> None:
        base = len(self.clauses)
        self.clauses.extend(other.clauses)
        self.protected.update(base + i for i in other.protected)
        self.labels.update(other.labels)

    def __add__(self, other: Cnf) -> Cnf:
        out = Cnf(self.clauses, self.labels, self.protected)
        out.extend(other)
        return out

    def __len__(self) -> int:
        return len(self.clauses)

    def atoms(self) -> list[Atom]:
        seen: dict[Atom, None] = {}
        for clause in self.clauses:
            for lit in clause:
                seen.setdefault(lit.atom)
        return list(seen)

    def literal_count(self) -> int:
        return sum(len(c) for c in self.clauses)

    def without_tautologies(self) -> Cnf:
        kept, prot = [], set()
        for i, clause in enumerate(self.clauses):
            if i in self.protected:
                prot.add(len(kept))
                kept.append(clause)
            elif not _tautological(clause):
                kept.append(clause)
        return Cnf(kept, self.labels, prot)

    def to_formula(self) -> Formula:
        return conjoin(disjoin(l.formula() for l in c) for c in self.clauses)

    def __str__(self) -> str:
        return " & ".join("(" + " | ".join(map(str, c)) + ")" for c in self.clauses) or "true"


def _dedup(clause: Iterable[Lit]) -> Clause:
    return tuple(dict.fromkeys(clause))


def _tautological(clause: Clause) -> bool:
    lits = set(clause)
    return any(-l in lits for l in lits)


def _nnf_clause(f: Formula) -> Clause | None:
    """Literals of ``f`` if it is a clause (literal or Or of literals)."""
    lit = as_literal(f)
    if lit is not None:
        return (lit,)
    if isinstance(f, Or):
        lits = [as_literal(a) for a in f.args]
        if all(l is not None for l in lits):
            return tuple(lits)  # type: ignore[arg-type]
    return None


def cnf_classic(f: Formula) -> Cnf:
    """Distribute Or over And; exponential in the worst case."""
    g = to_nnf(f)
    if g == TRUE:
        return Cnf()
    if g == FALSE:
        return Cnf([()])

    def dist(node: Formula) -> list[frozenset[Lit]]:
        lit = as_literal(node)
        if lit is not None:
            return [frozenset((lit,))]
        if isinstance(node, And):
            return [c for a in node.args for c in dist(a)]
        acc = [frozenset()]
        for a in node.args:
            acc = [x | y for x in acc for y in dist(a)]
            acc = [c for c in acc if not any(-l in c for l in c)]
        return acc

    order = {a: i for i, a in enumerate(iter_atoms(f))}
    clauses = list(dict.fromkeys(dist(g)))
    clauses = [c for c in clauses if not any(o < c for o in clauses)]
    return Cnf(tuple(sorted(c, key=lambda l: (order[l.atom], not l.positive))) for c in clauses)


def _encode(
    node: Formula, prefix: Clause, base: Clause, out: Cnf, fresh: LabelSupply, both: bool
) -> None:
    """Clauses for ``prefix | node`` with ``node`` in NNF.

    Non-literal disjuncts get a fresh label B defined by ``B -> sub``
    (Plaisted) or ``B <-> sub`` (Tseitin when ``both``); definitions carry the
    outer guard ``base`` so they only bite where the guard holds.
    """
    lit = as_literal(node)
    if lit is not None:
        out.add(prefix + (lit,))
        return
    if isinstance(node, And):
        for arg in node.args:
            _encode(arg, prefix, base, out, fresh, both)
        return
    if isinstance(node, Or):
        clause = list(prefix)
        deferred = []
        for arg in node.args:
            sub = as_literal(arg)
            if sub is None:
                label = fresh.fresh()
                out.labels[label] = arg
                sub = Lit(label)
                deferred.append((label, arg))
            clause.append(sub)
        out.add(clause)
        for label, arg in deferred:
            _define(label, arg, base, out, fresh, both)
        return
    raise TypeError(f"expected NNF, got {node!r}")


def _define(label: BoolAtom, sub: Formula, base: Clause, out: Cnf, fresh: LabelSupply, both: bool) -> None:
    _encode(sub, base + (Lit(label, False),), base, out, fresh, both)
    if both:
        _encode(to_nnf(sub, False), base + (Lit(label),), base, out, fresh, both)


def _label_iff_operands(f: Formula, base: Clause, out: Cnf, fresh: LabelSupply) -> Formula:
    """Replace non-literal operands of Iff nodes by labels so NNF stays linear."""
    if isinstance(f, (Const, BoolAtom, LraAtom)):
        return f
    if isinstance(f, Not):
        return Not(_label_iff_operands(f.arg, base, out, fresh))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(_label_iff_operands(a, base, out, fresh) for a in f.args))
    if isinstance(f, Implies):
        return Implies(_label_iff_operands(f.lhs, base, out, fresh), _label_iff_operands(f.rhs, base, out, fresh))
    if isinstance(f, Iff):
        sides = []
        for side in (f.lhs, f.rhs):
            side = _label_iff_operands(side, base, out, fresh)
            if as_literal(side) is None and not isinstance(side, Const):
                label = fresh.fresh()
                out.labels[label] = side
                _define(label, to_nnf(side), base, out, fresh, True)
                side = label
            sides.append(side)
        return Iff(*sides)
    raise TypeError(f"not a formula: {f!r}")


def encode_guarded(f: Formula, guard: Iterable[Lit], fresh: LabelSupply, tseitin: bool = False) -> Cnf:
    """CNF of ``(OR guard) | f`` with labelled non-clausal subformulas."""
    out = Cnf()
    guard = tuple(guard)
    f = residual(f, {})  # constants only survive at the root
    g = to_nnf(_label_iff_operands(f, guard, out, fresh))
    if g == TRUE:
        return out
    if g == FALSE:
        out.add(guard)
        return out
    _encode(g, guard, guard, out, fresh, tseitin)
    return out


def cnf_plaisted(f: Formula, fresh: LabelSupply | None = None) -> Cnf:
    return encode_guarded(f, (), fresh or LabelSupply())


def cnf_tseitin(f: Formula, fresh: LabelSupply | None = None) -> Cnf:
    return encode_guarded(f, (), fresh or LabelSupply(), tseitin=True)


def to_cnf(f: Formula, fresh: LabelSupply | None = None, tseitin: bool = True) -> Cnf:
    """CNF used by the solvers: clausal conjuncts kept verbatim, others labelled."""
    return encode_guarded(f, (), fresh or LabelSupply(), tseitin=tseitin)
