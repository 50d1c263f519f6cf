from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sawmi import bundled
from sawmi.errors import ParseError, UnknownVariable
from sawmi.formula import TRUE, And, BoolAtom, Iff, Implies, Not, Or, compare
from sawmi.generate import prodite, random_problem
from sawmi.sexpr import SList, Symbol, make_problem, parse_atoms, parse_problem, print_formula, print_problem, read
from sawmi.weights import Func, Ite, Mul, Num, Pow, Sub, Var
from strategies import BOOLS, formulas, weights

A, B, C = BOOLS


PREFIX = "(problem (reals (x 0 1) (y 0 2)) (bools A B C) "


def parse(body: str):
    return parse_problem(f"{PREFIX}{body})")


def test_reader_tracks_positions():
    (node,) = read("; comment\n  (a (b 1/2))")
    assert isinstance(node, SList) and (node.line, node.column) == (2, 3)
    inner = node.items[1]
    assert inner.items[1] == Symbol("1/2", 2, 9)


@pytest.mark.parametrize("text,where", [("(a (b)", (1, 1)), ("(a))", (1, 4)), ("(a\n  (b)\n (c", (3, 2))])
def test_unbalanced_parentheses(text, where):
    with pytest.raises(ParseError) as err:
        read(text)
    assert (err.value.line, err.value.column) == where


def test_formula_syntax():
    p = parse("(support (and A (or (not B) (=> C A)) (iff A (<= (+ x (* 2 y)) 3)) (> (- x y) -1/2)))")
    assert p.phi == And((
        A,
        Or((Not(B), Implies(C, A))),
        Iff(A, compare({"x": 1, "y": 2}, "<=", 3)),
        compare({"x": 1, "y": -1}, ">", Fraction(-1, 2)),
    ))


def test_linear_terms_are_normalized():
    p = parse("(support (<= (+ (* 2 x) (* 1/2 (- y x)) 1) 4))")
    assert p.phi is compare({"x": Fraction(3, 2), "y": Fraction(1, 2)}, "<=", 3)
    assert parse("(support (<= (- x) 0))").phi is compare({"x": 1}, ">=", 0)
    assert parse("(support (>= (* x 3) 0.5))").phi is compare({"x": 6}, ">=", 1)


def test_constant_comparisons_fold():
    assert parse("(support (<= 1 2))").phi is TRUE


def test_weight_syntax():
    p = parse("(weight (ite A (pow (- x y) 2) (* x y 3)))")
    assert p.w == Ite(A, Pow(Sub(Var("x"), Var("y")), 2), Mul(Mul(Var("x"), Var("y")), Num(3)))
    g = parse("(weight (gauss 0 1 x))").w
    assert g == Func("gauss", (Num(0), Num(1), Var("x")))


def test_sections_are_optional():
    p = parse_problem("(problem (bools A))")
    assert p.phi is TRUE and p.w == Num(1) and p.reals == () and p.query is None


@pytest.mark.parametrize(
    "body,message,culprit",
    [
        ("(support (!= x 1))", "disequalities", "(!="),
        ("(support (distinct x 1))", "disequalities", "(distinct"),
        ("(support (<= (* x y) 1))", "nonlinear", "(* x"),
        ("(support x)", "used as a formula", "x"),
        ("(weight (pow x -1))", "nonnegative integer", None),
        ("(weight (gauss x))", "gauss", None),
        ("(weight (ite x 1 2))", None, None),
        ("(support A) (support B)", "twice", None),
        ("(extras 1)", "unknown section", None),
        ("(weight 1 2)", "one expression", None),
    ],
)
def test_parse_errors(body, message, culprit):
    with pytest.raises(ParseError) as err:
        parse(body)
    if message:
        assert message in str(err.value)
    if culprit:
        column = len(PREFIX) + body.index(culprit, 1) + 1
        assert (err.value.line, err.value.column) == (1, column)


def test_undeclared_names():
    with pytest.raises(UnknownVariable) as err:
        parse("(support (<= z 1))")
    assert "z" in str(err.value)
    with pytest.raises(UnknownVariable):
        parse("(support D)")


def test_declaration_errors():
    with pytest.raises(ParseError):
        parse_problem("(problem (reals (x 1 0)))")
    with pytest.raises(ParseError):
        parse_problem("(problem (reals (x 0 1)) (bools x))")
    with pytest.raises(ParseError):
        parse_problem("(problem (reals (and 0 1)))")
    with pytest.raises(ParseError):
        parse_problem("(reals (x 0 1))")


def test_unbounded_reals_are_rejected_unless_unchecked():
    from sawmi.errors import Unbounded

    text = "(problem (reals x) (support (>= x 0)))"
    with pytest.raises(Unbounded):
        parse_problem(text)
    assert parse_problem(text, check=False).real_names == ("x",)
    assert parse_problem("(problem (reals x) (support (and (>= x 0) (<= x 1))))").bounds == {}


def test_parse_atoms():
    p = bundled.load("example11")
    atoms = parse_atoms("A2 A1 (<= x 3)", p)
    assert atoms == [BoolAtom("A2"), BoolAtom("A1"), compare({"x": 1}, "<=", 3)]
    with pytest.raises(ParseError):
        parse_atoms("(or A1 A2)", p)


def test_printing():
    assert print_formula(compare({"x": 2, "y": -1}, "<", Fraction(1, 3))) == "(< (+ (* 2 x) (* -1 y)) 1/3)"
    assert print_formula(Implies(A, Not(B))) == "(=> A (not B))"


# --- round trips ----------------------------------------------------------------


def _roundtrip(problem):
    text = print_problem(problem)
    again = parse_problem(text, check=False)
    assert again == problem, text
    assert print_problem(again) == text


@pytest.mark.parametrize("name", bundled.NAMES)
def test_bundled_problems_round_trip(name):
    _roundtrip(bundled.load(name))


@pytest.mark.parametrize("seed", range(30))
def test_random_problems_round_trip(seed):
    _roundtrip(random_problem(seed, bools=seed % 5, reals=1 + seed % 3, depth=seed % 5))


def test_generated_families_round_trip():
    for n in (0, 1, 7):
        _roundtrip(prodite(n))


@given(formulas(), weights(), st.one_of(st.none(), formulas()))
def test_round_trip_property(phi, w, query):
    _roundtrip(make_problem({"x": (0, 1), "y": (Fraction(-1, 3), 2)}, ["A", "B", "C"], phi, w, query))


def test_non_box_chi_folds_into_the_support():
    p = make_problem({"x": (0, 1)}, ["A"], A)
    from dataclasses import replace

    odd = replace(p, chi=And((p.chi, compare({"x": 1}, "<=", Fraction(1, 2)))))
    again = parse_problem(print_problem(odd))
    assert again.phi == And((A, odd.chi)) and again.chi == p.chi
