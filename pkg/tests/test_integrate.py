import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import box_integral, mc_volume, polygon_integral, polygon_vertices
from sawmi.errors import Unbounded, Unsat, ZeroAcceptance
from sawmi.formula import Lit, compare
from sawmi.integrate import (
    ExactIntegrator,
    MonteCarloIntegrator,
    integrate_exact,
    integrate_monomial_simplex,
    mc_integrate,
    polytope_from,
    simplex_volume_factor,
    triangulate,
    vertices,
)
from sawmi.polynomial import Polynomial
from sawmi.weights import Num, Var

F = Fraction


def box_lits(**bounds):
    out = []
    for name, (lo, hi) in bounds.items():
        out.append(Lit(compare({name: 1}, ">=", lo)))
        out.append(Lit(compare({name: 1}, "<=", hi)))
    return out


def poly_of(terms: dict) -> Polynomial:
    """``{((x, i), (y, j)): c}`` with zero exponents dropped."""
    return Polynomial({tuple((n, e) for n, e in m if e): c for m, c in terms.items()})


def test_unit_square_and_triangle():
    square = polytope_from(box_lits(x=(0, 1), y=(0, 1)))
    assert integrate_exact(square, Num(1)) == 1
    triangle = polytope_from([Lit(compare({"x": 1}, ">=", 0)), Lit(compare({"y": 1}, ">=", 0)), Lit(compare({"x": 1, "y": 1}, "<=", 1))])
    assert integrate_exact(triangle, Var("x") * Var("y")) == F(1, 24)
    assert polygon_integral([(0, 0), (1, 0), (0, 1)], {(1, 1): 1}) == F(1, 24)


@pytest.mark.parametrize("a,b", [(0, 0), (1, 0), (2, 1), (3, 3), (0, 5)])
def test_dirichlet_formula_on_the_standard_triangle(a, b):
    S = [(F(0), F(0)), (F(1), F(0)), (F(0), F(1))]
    expected = F(math.factorial(a) * math.factorial(b), math.factorial(2 + a + b))
    assert integrate_monomial_simplex(S, (a, b)) == expected
    assert polygon_integral(S, {(a, b): 1}) == expected


def test_simplex_volume_factor():
    S = [(F(0), F(0), F(0)), (F(2), F(0), F(0)), (F(0), F(3), F(0)), (F(0), F(0), F(1))]
    assert simplex_volume_factor(S) == 6
    assert simplex_volume_factor([(F(0), F(0)), (F(1), F(1)), (F(2), F(2))]) == 0


halfplane = st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.integers(-2, 8))
monomials = st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)), st.integers(1, 5), min_size=1, max_size=4)


@settings(max_examples=80)
@given(st.lists(halfplane, max_size=4), monomials)
def test_polygons_match_slab_integration(extra, terms):
    cuts = [hp for hp in extra if hp[0] or hp[1]]
    rows = [(1, 0, 4), (-1, 0, 0), (0, 1, 4), (0, -1, 0)] + cuts
    lits = [Lit(compare({"x": a, "y": b}, "<=", c)) for a, b, c in rows]
    verts = polygon_vertices(rows)
    P = polytope_from(lits, ("x", "y"), check=False)
    poly = poly_of({(("x", i), ("y", j)): c for (i, j), c in terms.items()})
    expected = polygon_integral(verts, terms) if len(verts) >= 3 else F(0)
    assert integrate_exact(P, poly) == expected


@given(
    st.fixed_dictionaries({n: st.tuples(st.integers(-3, 2), st.integers(1, 3)) for n in "xyz"}),
    st.dictionaries(st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2)), st.integers(1, 4), min_size=1, max_size=3),
)
def test_boxes_match_antiderivatives(spans, terms):
    bounds = {n: (lo, lo + width) for n, (lo, width) in spans.items()}
    P = polytope_from(box_lits(**bounds))
    poly = poly_of({(("x", i), ("y", j), ("z", k)): c for (i, j, k), c in terms.items()})
    expected = box_integral(bounds, {(("x", i), ("y", j), ("z", k)): c for (i, j, k), c in terms.items()})
    assert integrate_exact(P, poly) == expected


@settings(max_examples=40)
@given(st.lists(st.tuples(st.integers(-2, 2), st.integers(-2, 2), st.integers(-2, 2), st.integers(0, 6)), min_size=1, max_size=3))
def test_triangulation_root_does_not_change_the_value(cuts):
    lits = box_lits(x=(0, 2), y=(0, 2), z=(0, 2))
    lits += [Lit(compare({"x": a, "y": b, "z": c}, "<=", d)) for a, b, c, d in cuts if a or b or c]
    P = polytope_from(lits, ("x", "y", "z"), check=False)
    poly = poly_of({(("x", 1), ("y", 2)): 1, (("z", 1),): 3, (): 1})

    def total(root):
        from sawmi.integrate import integrate_polynomial_simplex

        return sum((integrate_polynomial_simplex(S, poly, P.dims) for S in triangulate(P, root)), F(0))

    assert total(min) == total(max) == integrate_exact(P, poly)


def test_volume_of_a_cut_cube_against_sampling():
    lits = box_lits(x=(0, 1), y=(0, 1), z=(0, 1)) + [Lit(compare({"x": 1, "y": 1, "z": 1}, "<=", F(3, 2)))]
    exact = integrate_exact(polytope_from(lits), Num(1))
    assert exact == F(1, 2)
    est, se = mc_volume([((1, 1, 1), F(3, 2))], [0, 0, 0], [1, 1, 1])
    assert abs(est - float(exact)) < 5 * se


def test_strictness_does_not_matter():
    closed = polytope_from([Lit(compare({"x": 1}, ">=", 0)), Lit(compare({"x": 1}, "<=", 2))])
    opened = polytope_from([Lit(compare({"x": 1}, ">", 0)), Lit(compare({"x": 1}, "<", 2))])
    assert integrate_exact(closed, Var("x")) == integrate_exact(opened, Var("x")) == 2


def test_degenerate_polytopes_integrate_to_zero():
    flat = polytope_from(box_lits(x=(0, 1), y=(0, 1)) + [Lit(compare({"x": 1, "y": -1}, "=", 0))])
    assert flat.degenerate
    assert integrate_exact(flat, Num(1)) == 0
    assert mc_integrate(flat, Num(1), samples=100) == 0.0
    # lower-dimensional without an equality atom
    thin = polytope_from(box_lits(x=(0, 1), y=(2, 2)))
    assert not thin.degenerate and triangulate(thin) == []
    assert integrate_exact(thin, Num(1)) == 0
    assert mc_integrate(thin, Num(1), samples=100) == 0.0


def test_unbounded_and_unsat_polytopes_raise():
    with pytest.raises(Unbounded):
        integrate_exact(polytope_from([Lit(compare({"x": 1}, ">=", 0))]), Num(1))
    with pytest.raises(Unbounded):
        mc_integrate(polytope_from([Lit(compare({"x": 1}, ">=", 0))]), Num(1))
    with pytest.raises(Unsat):
        polytope_from([Lit(compare({"x": 1}, ">=", 1)), Lit(compare({"x": 1}, "<=", 0))])


def test_vertices_of_a_square():
    P = polytope_from(box_lits(x=(0, 1), y=(0, 1)))
    assert vertices(P) == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_zero_dimensional_case():
    P = polytope_from([], ())
    assert integrate_exact(P, Num(3)) == 3
    assert mc_integrate(P, Num(3)) == 3.0


# --- Monte Carlo -----------------------------------------------------------------


def triangle():
    return polytope_from([Lit(compare({"x": 1}, ">=", 0)), Lit(compare({"y": 1}, ">=", 0)), Lit(compare({"x": 1, "y": 1}, "<=", 2))])


def test_mc_is_deterministic_per_seed_and_index():
    mc = MonteCarloIntegrator(2000, seed=7)
    a = mc.integrate(triangle(), Var("x"), index=3)
    assert a == MonteCarloIntegrator(2000, seed=7).integrate(triangle(), Var("x"), index=3)
    assert a != mc.integrate(triangle(), Var("x"), index=4)
    assert a != MonteCarloIntegrator(2000, seed=8).integrate(triangle(), Var("x"), index=3)


def test_mc_estimates_are_unbiased():
    exact = float(integrate_exact(triangle(), Var("x") + 1))
    estimates = [mc_integrate(triangle(), Var("x") + 1, samples=500, seed=s) for s in range(200)]
    mean, se = np.mean(estimates), np.std(estimates) / np.sqrt(len(estimates))
    assert abs(mean - exact) < 4 * se


def test_mc_error_shrinks_with_samples():
    exact = float(integrate_exact(triangle(), Var("x") * Var("y")))
    errors = []
    for n in (100, 1000, 10000):
        rel = [abs(mc_integrate(triangle(), Var("x") * Var("y"), samples=n, seed=s) - exact) / exact for s in range(10)]
        errors.append(np.median(rel))
    assert errors[0] >= errors[1] >= errors[2]
    assert errors[2] < 0.05


def test_thin_polytopes_surface_zero_acceptance():
    sliver = polytope_from(box_lits(x=(0, 1), y=(0, 1)) + [Lit(compare({"x": 1, "y": -1}, ">=", F(-1, 10**6))), Lit(compare({"x": 1, "y": -1}, "<=", F(1, 10**6)))])
    with pytest.raises(ZeroAcceptance):
        mc_integrate(sliver, Num(1), samples=50, seed=0)
    lenient = MonteCarloIntegrator(50, 0, strict=False)
    assert lenient.integrate(sliver, Num(1)) == 0.0
    assert lenient.zero_acceptance == 1
    with pytest.raises(ZeroAcceptance):
        MonteCarloIntegrator(50, 0).integrate(sliver, Num(1))


def test_integrator_contract():
    exact = ExactIntegrator()
    assert (exact.kind, exact.samples, exact.seed, exact.zero()) == ("exact", None, None, 0)
    mc = MonteCarloIntegrator(10, 3)
    assert (mc.kind, mc.samples, mc.seed, mc.zero()) == ("mc", 10, 3, 0.0)
    with pytest.raises(ValueError):
        MonteCarloIntegrator(0)
    memo = ExactIntegrator(memo=True)
    P = triangle()
    assert memo.integrate(P, Var("x")) == memo.integrate(P, Var("x")) == F(4, 3)
