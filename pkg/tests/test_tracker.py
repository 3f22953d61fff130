import cmath
from fractions import Fraction

import numpy as np
import pytest

from oracles import match_sets, resultant_solutions
from trophom.io import load_fixture
from trophom.pipeline import original_target, solve
from trophom.puiseux import LaurentPoly, PuiseuxScalar
from trophom.start import Homotopy
from trophom.tracker import PathStatus, TrackOptions, cluster_endpoints, residual, track_path

X = ("x",)


def _coords(result):
    return [tuple(complex(z) for z in s["coords"]) for s in result.solutions]


def test_constant_homotopy_is_stationary():
    H = Homotopy(X, (LaurentPoly(X, {(2,): 1, (0,): -4}),), 1, (Fraction(0),))
    r = track_path(H, [2.0])
    assert r.status is PathStatus.SUCCESS
    assert r.steps <= 2
    assert r.endpoint == (2 + 0j,)


def test_paths_leaving_the_torus_diverge():
    # (1 − s)·x² + x − (1 − s): at s = 1 one root reaches 0 and the other escapes to infinity.
    c = PuiseuxScalar([(0, 1), (1, -1)])
    H = Homotopy(X, (LaurentPoly(X, {(2,): c, (1,): 1, (0,): -c}),), 1, (Fraction(0),))
    for x0 in ((-1 + 5 ** 0.5) / 2, (-1 - 5 ** 0.5) / 2):
        r = track_path(H, [x0])
        assert r.status is PathStatus.DIVERGED
        assert r.endpoint is None


def test_simple_root_moves_with_parameter():
    # x² − (1 + 3s): from x = 1 to x = 2.
    H = Homotopy(X, (LaurentPoly(X, {(2,): 1, (0,): PuiseuxScalar([(0, -1), (1, -3)])}),), 1, (Fraction(0),))
    r = track_path(H, [1.0])
    assert r.status is PathStatus.SUCCESS
    assert abs(r.endpoint[0] - 2) < 1e-12


def test_residual_examples():
    f = [LaurentPoly(X, {(2,): 1, (0,): -4})]
    assert residual(f, [2.0]) == 0.0
    r = residual(f, [2 + 1e-9])
    assert r < 1e-8
    assert abs(r - 4e-9 / 9) < 1e-15
    z = 0.3 + 0.7j
    assert residual(f, [z]) == pytest.approx(abs(z * z - 4) / (1 + abs(z * z) + 4))


def test_track_options_validation():
    with pytest.raises(ValueError):
        TrackOptions(min_step=1.0)
    with pytest.raises(ValueError):
        TrackOptions(newton_tol=0)
    with pytest.raises(ValueError):
        TrackOptions(start_parameter=1.0)


def test_cluster_endpoints_merges_close_points():
    pts = [(1 + 0j,), (1 + 1e-12,), (2 + 0j,)]
    assert cluster_endpoints(pts) == [((1 + 0j,), 2), ((2 + 0j,), 1)]


def test_polyhedral_solutions_match_resultant_oracle():
    spec = load_fixture("polyhedral_ex32")
    result = solve(spec)
    assert result.diagnostics["paths"] == 8
    assert sum(s["cluster"] for s in result.solutions) == 8
    assert all(s["residual"] <= 1e-8 for s in result.solutions)
    f1, f2 = original_target(spec)
    assert match_sets(_coords(result), resultant_solutions(f1, f2), 1e-6)


def _ellipse_oracle():
    # 3·f1 − f2 = −2(x1 + 2·x2 + 4); substituting into f1 leaves 5·x2² + 15·x2 + 13.
    out = []
    for x2 in np.roots([5, 15, 13]):
        out.append((-4 - 2 * x2, x2))
    return out


@pytest.mark.parametrize("name", ["two_ellipses_vertical", "two_ellipses_horizontal"])
def test_ellipse_routes_agree(name):
    result = solve(load_fixture(name))
    assert result.all_succeeded and result.diagnostics["paths"] == 2
    assert match_sets(_coords(result), _ellipse_oracle(), 1e-6)


def test_laman_solutions():
    result = solve(load_fixture("laman"))
    assert result.diagnostics["paths"] == 4 and result.all_succeeded
    w = cmath.exp(2j * cmath.pi / 3)
    roots = [w, w.conjugate()]
    expected = [(a, a + 1, 1, 1 + b, b) for a in roots for b in roots]
    assert match_sets(_coords(result), expected, 1e-6)
    assert all(s["residual"] <= 1e-8 for s in result.solutions)


def test_solve_is_deterministic():
    spec = load_fixture("polyhedral_ex32")
    a = solve(spec, threads=1)
    b = solve(spec, threads=3)
    c = solve(spec, threads=1)
    assert a.solutions == c.solutions
    # Paths share no state, so the thread count does not change the result either.
    assert a.solutions == b.solutions
