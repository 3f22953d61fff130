import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import X2, poly
from trophom.errors import NonBinomialInitial, SingularExponentMatrix, TargetMismatch
from trophom.exact import IntMatrix
from trophom.io import load_fixture
from trophom.pipeline import build_system, tropicalize
from trophom.puiseux import LaurentPoly, PuiseuxScalar
from trophom.start import (
    START_RESIDUAL_TOL,
    BinomialSystem,
    binomial_residual,
    build_homotopy,
    handoff_for,
    initial_residual,
    initial_system,
    solve_binomial,
    tropical_groebner_linear,
)
from trophom.systems import substitute_back
from trophom.tropical import puiseux_rank

F = Fraction


def _normalized(f: LaurentPoly) -> LaurentPoly:
    """``f`` divided by one of its coefficients so that comparisons ignore scaling."""
    a = min(f.terms)
    return f * LaurentPoly.constant(f.variables, PuiseuxScalar.constant(1) / f.terms[a])


def _t_normalized(f: LaurentPoly) -> LaurentPoly:
    """``f`` times the power of ``t`` that makes its lowest exponent zero."""
    low = min(c.valuation() for c in f.terms.values())
    return f.t_shift(-low)


def _bundle_at(name, w):
    spec = load_fixture(name)
    data, bundles = tropicalize(spec, with_bundles=True)
    (b,) = [b for b in bundles if b.point.w == tuple(F(x) for x in w)]
    return data.system, b


# -- Gröbner bases of linear blocks -----------------------------------------


def test_groebner_basis_vertical_ellipses():
    cs, bundle = _bundle_at("two_ellipses_vertical_pinned", (0, 0))
    g1, g2 = bundle.generators
    assert _normalized(g1) == _normalized(poly(X2, {(1, 0): 1, (0, 1): (2, 1), (0, 0): 4}))
    assert _normalized(g2) == _normalized(poly(X2, {(2, 0): (4, 1), (0, 2): 4, (1, 0): 3, (0, 1): (2, 1)}))
    H = build_homotopy(cs, bundle.point.w, early=bundle.generators)
    assert all(len(f) == 2 for f in H.at_start())


def test_groebner_basis_horizontal_ellipses():
    cs, bundle = _bundle_at("two_ellipses_horizontal_ex58", (-1, -1, 0))
    V = cs.variables
    g1 = bundle.generators[0]
    expected_g1 = poly(V, {(1, 0, 0): (-2, 1), (0, 1, 0): (-4, 2), (0, 0, 0): -8})
    assert _normalized(g1) == _normalized(expected_g1)
    # The second element generates the same linear ideal as the original second row.
    f2 = poly(V, {(0, 0, 1): 3, (1, 0, 0): (5, 1), (0, 1, 0): (7, 2), (0, 0, 0): 11})
    monos = sorted({a for f in (g1, bundle.generators[1], f2) for a in f.terms})
    M = [[f.coefficient_of(a) for a in monos] for f in (g1, bundle.generators[1], f2)]
    assert puiseux_rank(M) == 2


def test_groebner_rejects_nonbinomial_weight():
    spec = load_fixture("two_ellipses_vertical_pinned")
    cs = build_system(spec, "vertical", spec.valuation)
    with pytest.raises(NonBinomialInitial):
        tropical_groebner_linear(cs.blocks[0], (5, 7), cs.variables)


# -- binomial systems -------------------------------------------------------


def test_initial_system_polyhedral():
    spec = load_fixture("polyhedral_ex32")
    cs = build_system(spec, "bkk", spec.valuation)
    B = initial_system(list(cs.polynomials), (0, F(-3, 2)))
    assert dict(zip(B.exponents, B.constants)) == {(2, 0): 3, (1, 2): F(1, 5)}
    sols, count = solve_binomial(B)
    assert count == 4 == len(sols)
    for x in sols:
        assert binomial_residual(B, x) < 1e-12
        assert initial_residual(list(cs.polynomials), (0, F(-3, 2)), x) <= START_RESIDUAL_TOL


def test_solve_binomial_small():
    B = BinomialSystem(((2, 0), (0, 1)), (F(1), F(-1)))
    sols, count = solve_binomial(B)
    assert count == 2
    got = sorted((round(x[0].real, 12), round(x[1].real, 12)) for x in sols)
    assert got == [(-1.0, -1.0), (1.0, -1.0)]
    with pytest.raises(SingularExponentMatrix):
        solve_binomial(BinomialSystem(((1, 1), (2, 2)), (F(1), F(1))))
    with pytest.raises(NonBinomialInitial):
        initial_system([poly(X2, {(1, 0): 1, (0, 1): 1, (0, 0): 1})], (0, 0))


nonsingular = st.lists(st.lists(st.integers(-3, 3), min_size=3, max_size=3), min_size=3, max_size=3).filter(
    lambda rows: IntMatrix.from_rows(rows).det() != 0)


@settings(max_examples=60, deadline=None)
@given(nonsingular, st.lists(st.integers(-9, 9).filter(bool), min_size=3, max_size=3))
def test_binomial_count_is_abs_det(rows, consts):
    B = BinomialSystem(tuple(map(tuple, rows)), tuple(F(c) for c in consts))
    sols, count = solve_binomial(B)
    assert count == abs(IntMatrix.from_rows(rows).det()) == len(sols)
    for x in sols:
        assert binomial_residual(B, x) < 1e-12
    pts = np.array(sols)
    for i in range(len(pts)):
        for j in range(i):
            assert np.linalg.norm(pts[i] - pts[j]) > 1e-8


# -- homotopies -------------------------------------------------------------


def test_homotopy_polyhedral_printed_form():
    spec = load_fixture("polyhedral_ex32")
    cs = build_system(spec, "bkk", spec.valuation)
    H = build_homotopy(cs, (0, F(-3, 2)))
    assert H.D == 2
    h = F(1, 2)
    expected = [
        poly(X2, {(0, 0): (5, 3), (2, 0): (-3, 3), (0, 2): -3, (2, 2): 1}),
        poly(X2, {(0, 0): 1, (1, 1): (2, h), (1, 2): -5, (2, 1): (-3, 3 * h)}),
    ]
    assert H.in_t() == expected


def test_homotopy_horizontal_ellipses_printed_form():
    cs, bundle = _bundle_at("two_ellipses_horizontal_ex55", (2, 0, 0))
    H = build_homotopy(cs, bundle.point.w)
    back = substitute_back(H.in_t(), cs)
    expected = [
        poly(X2, {(2, 0): (1, 5), (0, 2): (1, 1), (1, 0): 1, (0, 1): 1, (0, 0): (1, 1)}),
        poly(X2, {(2, 0): (3, 4), (0, 2): 3, (1, 0): (5, 2), (0, 1): (7, 1), (0, 0): 11}),
    ]
    assert [_t_normalized(f) for f in back] == expected


def test_homotopy_laman_printed_form():
    _, bundle = _bundle_at("laman", (0, 1, 0, 1, 0))
    spec = load_fixture("laman")
    data = tropicalize(spec)
    H = build_homotopy(data.system, bundle.point.w)
    V = data.system.variables
    e = lambda *a: tuple(a)  # noqa: E731
    expected = [
        poly(V, {e(1, 0, 0, 0, 0): 1, e(0, 0, 1, 0, 0): 1, e(0, 1, 0, 0, 0): (-1, 1)}),
        poly(V, {e(0, 0, 1, 0, 0): 1, e(0, 0, 0, 0, 1): 1, e(0, 0, 0, 1, 0): (-1, 1)}),
        poly(V, {e(0, 0, -1, 0, 0): (1, 2), e(-1, 0, 0, 0, 0): 1, e(0, -1, 0, 0, 0): -1}),
        poly(V, {e(0, 0, 0, 0, -1): (1, 2), e(0, 0, -1, 0, 0): 1, e(0, 0, 0, -1, 0): -1}),
        poly(V, {e(0, 0, 0, 0, 0): -1, e(0, 0, 1, 0, 0): 1}),
    ]
    assert [_normalized(f) for f in H.in_t()] == [_normalized(f) for f in expected]
    assert H.D == 1
    assert bundle.count == 1


def test_back_substituted_two_stage_homotopy():
    w = (1, -1, -1, 1, -3, -2, 1, 0)
    cs, bundle = _bundle_at("horizontal_ex54_pinned", w)
    assert bundle.count == 2
    H = build_homotopy(cs, bundle.point.w)
    back = substitute_back(H.in_t(), cs)
    one = LaurentPoly.constant(X2, 1)
    tt = lambda c, k: LaurentPoly.constant(X2, PuiseuxScalar.monomial(c, k))  # noqa: E731
    x1 = LaurentPoly.variable(X2, "x1")
    x2 = LaurentPoly.variable(X2, "x2")
    b = tt(1, 1) + tt(1, 2) * x1 + x2
    h1 = tt(1, 1) * b ** 3 + b ** 2 + tt(1, 1) * x1 + one
    h2 = tt(2, 7) * b ** 3 + tt(3, 4) * b ** 2 + tt(5, 0) * x1 + tt(7, 0)
    assert [_t_normalized(f) for f in back] == [h1, h2]


def test_homotopy_target_check():
    spec = load_fixture("polyhedral_ex32")
    cs = build_system(spec, "bkk", spec.valuation)
    wrong = [f * LaurentPoly.constant(X2, 2) for f in cs.target()]
    with pytest.raises(TargetMismatch):
        build_homotopy(cs, (0, F(-3, 2)), target=wrong)


SMALL = ["two_ellipses_vertical", "two_ellipses_vertical_pinned", "two_ellipses_horizontal",
         "two_ellipses_horizontal_ex55", "two_ellipses_horizontal_ex58", "polyhedral_ex32", "laman",
         "horizontal_ex54_pinned", "horizontal_ex54", "kuramoto_triangle"]


@pytest.mark.parametrize("name", SMALL)
def test_homotopy_at_one_and_start_residuals(name):
    spec = load_fixture(name)
    data, bundles = tropicalize(spec, with_bundles=True)
    cs = data.system
    assert sum(b.count for b in bundles) == data.root_count
    for b in bundles:
        H = build_homotopy(cs, b.point.w, early=b.generators, handoff=handoff_for(b))
        assert H.at_end() == cs.target()
        for x in b.solutions:
            assert initial_residual(list(b.generators), b.point.w, x) <= START_RESIDUAL_TOL
            assert initial_residual(list(cs.polynomials), b.point.w, x) <= START_RESIDUAL_TOL
            for g in H.at_start():
                val = sum(complex(c.at_one()) * np.prod([complex(xi) ** k for xi, k in zip(x, a)])
                          for a, c in g.terms.items())
                assert abs(val) <= 1e-9 * (1 + sum(abs(complex(c.at_one())) for c in g.terms.values()))


def test_redrawn_valuations_keep_start_counts():
    spec = load_fixture("two_ellipses_horizontal")
    rng = random.Random(5)
    for _ in range(2):
        data, bundles = tropicalize(spec, seed=rng.randint(0, 10 ** 6), with_bundles=True)
        assert [b.count for b in bundles] == [p.multiplicity for p in data.points]
        assert data.root_count == 2
