import itertools
import pickle
import threading
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import collect_atoms, models, projected_models, truth
from sawmi.errors import MalformedAssignment
from sawmi.formula import (
    FALSE,
    TRUE,
    And,
    Assignment,
    BoolAtom,
    Cnf,
    Iff,
    Implies,
    LabelSupply,
    Lit,
    LraAtom,
    Not,
    Or,
    as_literal,
    canonical,
    cnf_classic,
    cnf_plaisted,
    cnf_tseitin,
    compare,
    encode_guarded,
    prop_satisfies,
    residual,
    to_cnf,
    to_nnf,
)
from strategies import BOOLS, LRAS, formulas, lra_atoms

A, B, C = BOOLS
SMALL_POOL = [A, B, C, LRAS[0], LRAS[1]]


# --- atoms ----------------------------------------------------------------


def test_compare_scales_to_coprime_integers():
    atom = compare({"x": 2, "y": 4}, "<=", 6)
    assert atom.coeffs == (("x", 1), ("y", 2)) and atom.rhs == 3


def test_compare_makes_leading_coefficient_positive():
    atom = compare({"x": -1}, "<=", 3)
    assert (atom.coeffs, atom.op, atom.rhs) == ((("x", 1),), ">=", -3)


def test_compare_clears_rational_coefficients():
    atom = compare({"x": Fraction(1, 2), "y": Fraction(1, 3)}, "<", 1)
    assert atom.coeffs == (("x", 3), ("y", 2)) and atom.rhs == 6


def test_compare_folds_variable_free_comparisons():
    assert compare({}, "<=", 1) is TRUE
    assert compare({"x": 1, "y": 0}, "<=", 1) is compare({"x": 1}, "<=", 1)
    assert compare([("x", 1), ("x", -1)], ">", 0) is FALSE


def test_compare_rejects_not_equal():
    with pytest.raises(ValueError):
        compare({"x": 1}, "!=", 0)


def test_atoms_are_interned():
    assert compare({"x": 3}, ">=", 3) is compare({"x": 1}, ">=", 1)
    assert BoolAtom("A") is A
    assert pickle.loads(pickle.dumps(LRAS[1])) is LRAS[1]


def test_interning_is_thread_safe():
    found = []

    def build():
        found.append(compare({"q": 7, "r": 1}, "<", 11))

    threads = [threading.Thread(target=build) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(a is found[0] for a in found)


def test_atoms_are_immutable():
    with pytest.raises(AttributeError):
        A.name = "Z"


@given(lra_atoms())
def test_canonicalization_is_idempotent(atom):
    if isinstance(atom, LraAtom):
        assert canonical(canonical(atom)) is canonical(atom) is atom


@given(lra_atoms(), st.fixed_dictionaries({n: st.fractions(-5, 5, max_denominator=5) for n in "xyz"}))
def test_canonical_atom_keeps_its_meaning(atom, point):
    if not isinstance(atom, LraAtom):
        return
    scaled = compare({n: 3 * c for n, c in atom.coeffs}, atom.op, 3 * atom.rhs)
    assert scaled is atom
    flipped = compare({n: -c for n, c in atom.coeffs}, {"<=": ">=", "<": ">", ">=": "<=", ">": "<", "=": "="}[atom.op], -atom.rhs)
    assert flipped is atom and atom.holds(point) == flipped.holds(point)


# --- literals and assignments -----------------------------------------------


def test_literal_negation_and_parsing():
    lit = Lit(A)
    assert -lit == Lit(A, False) and -(-lit) == lit
    assert as_literal(Not(Not(A))) == Lit(A)
    assert as_literal(Not(A)) == Lit(A, False)
    assert as_literal(And((A, B))) is None


def test_assignment_rejects_contradictions():
    with pytest.raises(MalformedAssignment):
        Assignment([(A, True), (A, False)])
    with pytest.raises(MalformedAssignment):
        Assignment.from_literals([A, Or((A, B))])


def test_assignment_order_and_equality():
    mu = Assignment.from_literals([Lit(B), Not(A)])
    assert list(mu) == [B, A]
    assert mu == {A: False, B: True}
    assert hash(mu) == hash(Assignment({A: False, B: True}))
    assert mu.restrict({A}) == {A: False}
    assert mu.extend({C: True})[C] is True


# --- residuals ---------------------------------------------------------------


def test_residual_constant_rules():
    x = LRAS[0]
    assert residual(Iff(A, x), {A: True}) == x
    assert residual(Iff(A, x), {A: False}) == Not(x)
    assert residual(Implies(A, x), {A: False}) is TRUE
    assert residual(Implies(x, A), {A: False}) == Not(x)
    assert residual(And((A, x)), {A: True}) == x
    assert residual(Or((A, x)), {A: True}) is TRUE
    assert residual(Not(Not(A)), {}) == A


def test_prop_satisfies_needs_residual_true():
    f = Or((A, And((B, LRAS[0]))))
    assert prop_satisfies({A: True}, f)
    assert not prop_satisfies({B: True}, f)
    assert prop_satisfies([Lit(B), Lit(LRAS[0])], f)


@given(formulas(), st.data())
def test_total_assignments_agree_with_truth_tables(f, data):
    pool = collect_atoms(f)
    values = {a: data.draw(st.booleans()) for a in pool}
    assert prop_satisfies(values, f) == truth(f, values)


@given(formulas(), st.data())
def test_residual_monotonicity(f, data):
    """A partial assignment satisfying f is satisfied by every total extension."""
    pool = collect_atoms(f)
    partial = {a: data.draw(st.booleans()) for a in pool if data.draw(st.booleans())}
    if not prop_satisfies(partial, f):
        return
    free = [a for a in pool if a not in partial]
    for bits in itertools.product((True, False), repeat=len(free)):
        assert prop_satisfies({**partial, **dict(zip(free, bits))}, f)


# --- normal forms ------------------------------------------------------------


def _is_nnf(f) -> bool:
    if isinstance(f, Not):
        return as_literal(f) is not None
    if isinstance(f, (Implies, Iff)):
        return False
    if isinstance(f, (And, Or)):
        return all(_is_nnf(a) for a in f.args)
    return True


@given(formulas())
def test_nnf_is_equivalent_and_well_formed(f):
    g = to_nnf(f)
    assert _is_nnf(g)
    pool = collect_atoms(f)
    assert models(f, pool) == models(g, pool)


ENCODERS = {
    "classic": cnf_classic,
    "plaisted": cnf_plaisted,
    "tseitin": cnf_tseitin,
    "solver": to_cnf,
}


@pytest.mark.parametrize("name", ENCODERS)
@given(f=formulas(SMALL_POOL, max_leaves=8))
def test_cnf_projects_to_the_formula(name, f):
    cnf = ENCODERS[name](f)
    pool = collect_atoms(f)
    hidden = [a for a in cnf.atoms() if a not in pool]
    assert set(hidden) <= set(cnf.labels)
    assert models(f, pool) == projected_models(cnf.clauses, pool, hidden)


@given(formulas(SMALL_POOL, max_leaves=6), st.lists(st.sampled_from([Lit(A), Lit(B, False), Lit(C)]), max_size=2, unique=True))
def test_guarded_encoding_is_guard_or_formula(f, guard):
    cnf = encode_guarded(f, guard, LabelSupply())
    pool = list(dict.fromkeys([*collect_atoms(f), *(l.atom for l in guard)]))
    hidden = [a for a in cnf.atoms() if a not in pool]
    target = Or(tuple(l.formula() for l in guard) + (f,)) if guard else f
    assert models(target, pool) == projected_models(cnf.clauses, pool, hidden)
    for clause in cnf.clauses:
        assert set(guard) <= set(clause)


def test_classic_cnf_distributes():
    cnf = cnf_classic(Or((A, And((B, C)))))
    assert set(map(frozenset, cnf.clauses)) == {frozenset((Lit(A), Lit(B))), frozenset((Lit(A), Lit(C)))}


def test_plaisted_labels_are_fresh_and_in_order():
    cnf = cnf_plaisted(Or((And((A, B)), And((B, C)))))
    assert [l.name for l in cnf.labels] == ["B#1", "B#2"]
    assert cnf.clauses[0] == (Lit(BoolAtom("B#1")), Lit(BoolAtom("B#2")))


def test_tautology_deletion_keeps_protected_clauses():
    cnf = Cnf()
    cnf.add([Lit(A), Lit(A, False)], protected=True)
    cnf.add([Lit(B), Lit(B, False)])
    cnf.add([Lit(C)])
    kept = cnf.without_tautologies()
    assert kept.clauses == [(Lit(A), Lit(A, False)), (Lit(C),)]
    assert kept.protected == {0}


def test_constant_formulas_encode_to_trivial_cnfs():
    assert to_cnf(TRUE).clauses == []
    assert to_cnf(FALSE).clauses == [()]
    assert cnf_classic(Or((A, Not(A)))).clauses == []
