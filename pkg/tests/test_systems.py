from fractions import Fraction

import pytest

from conftest import X2, poly
from trophom.errors import BaseMismatch, DimensionError, InconsistentSolution, ZeroParameter
from trophom.io import load_fixture
from trophom.puiseux import LaurentPoly
from trophom.systems import (
    HorizontalSystem,
    TransverseBase,
    horizontal_modification,
    identity_base,
    relaxed_modification,
    specialize,
    substitute_back,
    two_stage_modification,
    vertical_blocks,
)

ELLIPSE_V = (1, 0, 0, 1, 0)


def test_specialize_vertical_ellipses():
    spec = load_fixture("two_ellipses_vertical_pinned")
    cs = specialize(spec.system, spec.target, ELLIPSE_V)
    assert cs.polynomials[0] == poly(X2, {(2, 0): (1, 1), (0, 2): 1, (1, 0): 1, (0, 1): (1, 1), (0, 0): 1})
    assert cs.polynomials[1] == poly(X2, {(2, 0): (3, 1), (0, 2): 3, (1, 0): 5, (0, 1): (7, 1), (0, 0): 11})
    assert cs.target()[0] == poly(X2, {(2, 0): 1, (0, 2): 1, (1, 0): 1, (0, 1): 1, (0, 0): 1})


def test_vertical_blocks_shape():
    spec = load_fixture("two_ellipses_vertical_pinned")
    (block,) = vertical_blocks(spec.system, spec.target, ELLIPSE_V)
    assert (block.rows, block.cols) == (2, 5)
    col = block.monomials.index((0, 1))
    assert [c.valuation() for c in (block.matrix[0][col], block.matrix[1][col])] == [1, 1]
    assert block.matrix[1][col].leading_coefficient() == 7


def test_parameter_checks():
    spec = load_fixture("two_ellipses_vertical_pinned")
    with pytest.raises(ZeroParameter):
        specialize(spec.system, [1, 0, 1, 1, 1], ELLIPSE_V)
    with pytest.raises(DimensionError):
        specialize(spec.system, [1, 1, 1], ELLIPSE_V)


def _ex54():
    spec = load_fixture("horizontal_ex54_pinned")
    return spec.system, spec.base, spec.target, spec.valuation


def test_horizontal_modification_elides_monomial_supports():
    H, _, P, v = _ex54()
    cs = horizontal_modification(H, P, v)
    assert cs.variables == ("x1", "x2", "y1", "y2")
    assert len(cs.polynomials) == 4
    assert cs.provenance.elided == ("y3", "y4")
    full = horizontal_modification(H, P, v, elide=False)
    assert len(full.variables) == 6 and len(full.polynomials) == 6


def test_two_stage_modification_structure():
    H, base, P, v = _ex54()
    cs = two_stage_modification(H, base, P, v, elide=False)
    assert cs.variables == ("x1", "x2", "y1", "y2", "z1", "z2", "z3", "z4")
    assert len(cs.polynomials) == 8
    V = cs.variables
    y1 = LaurentPoly.variable(V, "y1")
    z1 = LaurentPoly.variable(V, "z1")
    assert cs.polynomials[2] == z1 - y1 ** 3
    b1 = LaurentPoly.variable(V, "x1") + LaurentPoly.variable(V, "x2") + LaurentPoly.constant(V, 1)
    assert cs.polynomials[6] == y1 - b1
    first = cs.polynomials[0]
    assert first.coefficient_of((0, 0, 0, 0, 1, 0, 0, 0)).valuation() == 4
    assert len(cs.blocks) == 7 and cs.blocks[0].rows == 2


def test_two_stage_elision_keeps_only_nonmonomial_base():
    H, base, P, v = _ex54()
    cs = two_stage_modification(H, base, P, v)
    assert cs.variables == ("x1", "x2", "y1", "z1", "z2")
    assert len(cs.polynomials) == 5


def test_base_mismatch():
    H, base, P, v = _ex54()
    bad = TransverseBase(base.base, ((2, 0), (2, 0), (0, 1), (0, 0)))
    with pytest.raises(BaseMismatch):
        two_stage_modification(H, bad, P, v)
    with pytest.raises(DimensionError):
        TransverseBase(base.base, ((1,),))


def test_relaxed_modification_fresh_terms():
    H, _, P, v = _ex54()
    cs = relaxed_modification(H, P, v, seed=3)
    g1 = cs.polynomials[H.n_polys]
    xpart = [a for a in g1.terms if not any(a[2:])]
    assert len(xpart) == 10
    assert all(g1.terms[a].is_monomial() for a in xpart)
    again = relaxed_modification(H, P, v, seed=3)
    assert again.polynomials == cs.polynomials
    with pytest.raises(ZeroParameter):
        relaxed_modification(H, P, v, fresh_values=[0] * 18, fresh_valuations=[1] * 18)


def test_kuramoto_relaxation():
    spec = load_fixture("kuramoto_triangle")
    H = spec.system
    cs = relaxed_modification(H, spec.target, [0] * H.parameter_count, seed=1)
    # Support 1 is the constant 1 (elided); the three edge supports get a y each.
    assert cs.variables == ("x1", "x2", "y1", "y2", "y3")
    assert all(len(g) == 3 for g in cs.polynomials[2:])


CONSTRUCTIONS = [
    ("horizontal", lambda H, b, P, v, e: horizontal_modification(H, P, v, elide=e)),
    ("two-stage", lambda H, b, P, v, e: two_stage_modification(H, b, P, v, elide=e)),
    ("identity-base", lambda H, b, P, v, e: two_stage_modification(H, identity_base(H), P, v, elide=e)),
]


@pytest.mark.parametrize("name,build", CONSTRUCTIONS)
@pytest.mark.parametrize("elide", [True, False])
def test_substitute_back_recovers_original(name, build, elide):
    H, base, P, v = _ex54()
    cs = build(H, base, P, v, elide)
    original = specialize(H, P, v).polynomials
    back = substitute_back(list(cs.polynomials), cs)
    assert back == list(original)
    assert substitute_back(cs.polynomials[0], cs) == original[0]


def test_substitute_back_relaxed_matches_relaxed_family():
    H, _, P, v = _ex54()
    cs = relaxed_modification(H, P, v, fresh_values=[1] * 18, fresh_valuations=[0] * 18)
    back = substitute_back(list(cs.polynomials), cs)
    assert [f.at_t_one() for f in back] == specialize(H, P, [0] * 8).target()


def test_substitute_back_solution_consistency():
    H, base, P, v = _ex54()
    cs = horizontal_modification(H, P, v)
    x = (0.5 + 0.25j, -1.5)
    q = [complex(sum(float(c.at_one()) * x[0] ** a[0] * x[1] ** a[1] for a, c in s.terms.items()))
         for s in H.support[:2]]
    assert substitute_back([*x, *q], cs) == list(x)
    with pytest.raises(InconsistentSolution):
        substitute_back([*x, q[0] + 1, q[1]], cs)


def test_horizontal_descriptor_validation():
    q = poly(X2, {(1, 0): 1})
    with pytest.raises(DimensionError):
        HorizontalSystem(X2, [[0, 0]], [q, q])
    with pytest.raises(DimensionError):
        HorizontalSystem(X2, [[1]], [poly(X2, {(1, 0): (1, Fraction(1, 2))})])
