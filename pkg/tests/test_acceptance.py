"""Acceptance criteria 1-11, one test each.

Every test prints a single ``criterion N PASS|FAIL`` line with its runtime and
limit; the lines are repeated in the terminal summary.
"""

import cmath
import random
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, X2, poly
from oracles import coset_count, match_sets, mixed_volume_2d, resultant_solutions
from trophom.errors import IncompleteEnumeration
from trophom.exact import INFINITE, lattice_index
from trophom.io import fixture_names, load_fixture
from trophom.pipeline import (
    compute_mixed_volume,
    original_target,
    solve,
    tropicalize,
)
from trophom.puiseux import TropicalForm
from trophom.start import START_RESIDUAL_TOL, build_homotopy, handoff_for, initial_residual
from trophom.tropical import mixed_volume

F = Fraction


@contextmanager
def criterion(number: int, title: str, limit: float | None):
    t0 = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        dt = time.perf_counter() - t0
        in_time = limit is None or dt < limit
        status = "PASS" if ok and in_time else "FAIL"
        bound = f"limit {limit:g} s" if limit is not None else "no limit"
        line = f"criterion {number:>2} {status}  {title}  [{dt:.2f} s, {bound}]"
        ACCEPTANCE_LINES.append(line)
        print(line)
    if not in_time:
        pytest.fail(f"criterion {number} took {dt:.2f} s, limit {limit} s")


def _points(points):
    return {tuple(p.w): p.multiplicity for p in points}


def _coords(result):
    return [tuple(complex(z) for z in s["coords"]) for s in result.solutions]


def test_criterion_01_two_ellipses():
    with criterion(1, "two-ellipse root counts 2/2 and BKK mixed volume 4", 1.0):
        assert tropicalize(load_fixture("two_ellipses_vertical")).root_count == 2
        assert tropicalize(load_fixture("two_ellipses_horizontal")).root_count == 2
        assert compute_mixed_volume(load_fixture("two_ellipses_bkk")) == 4


def test_criterion_02_stable_intersection():
    with criterion(2, "stable intersection: four points of multiplicity 1", 1.0):
        data = tropicalize(load_fixture("stable_intersection_ex29"))
        assert len(data.system.blocks) == 2
        assert sorted(_points(data.points).values()) == [1, 1, 1, 1]


def test_criterion_03_polyhedral_reconstruction():
    with criterion(3, "polyhedral example: points 4+4, printed homotopy with D = 2, 8 endpoints", 5.0):
        spec = load_fixture("polyhedral_ex32")
        data = tropicalize(spec)
        assert _points(data.points) == {(F(0), F(-3, 2)): 4, (F(-3, 2), F(0)): 4}
        H = build_homotopy(data.system, (0, F(-3, 2)))
        h = F(1, 2)
        assert H.D == 2
        assert H.in_t() == [
            poly(X2, {(0, 0): (5, 3), (2, 0): (-3, 3), (0, 2): -3, (2, 2): 1}),
            poly(X2, {(0, 0): 1, (1, 1): (2, h), (1, 2): -5, (2, 1): (-3, 3 * h)}),
        ]
        result = solve(spec, threads=1)
        assert result.diagnostics["paths"] == 8
        assert sum(s["cluster"] for s in result.solutions) == 8
        assert all(s["residual"] <= 1e-8 for s in result.solutions)
        assert match_sets(_coords(result), resultant_solutions(*original_target(spec)), 1e-6)


def test_criterion_04_vertical_pipeline():
    with criterion(4, "vertical pipeline: one point of multiplicity 2, binomial start, elimination oracle", 1.0):
        spec = load_fixture("two_ellipses_vertical_pinned")
        data, bundles = tropicalize(spec, with_bundles=True)
        assert _points(data.points) == {(F(0), F(0)): 2}
        (b,) = bundles
        H = build_homotopy(data.system, b.point.w, early=b.generators, handoff=handoff_for(b))
        assert all(len(g) == 2 for g in H.at_start())
        result = solve(spec, threads=1)
        expected = [(-4 - 2 * x2, x2) for x2 in np.roots([5, 15, 13])]
        assert result.all_succeeded
        assert match_sets(_coords(result), expected, 1e-6)


def test_criterion_05_transverse_base():
    with criterion(5, "two-stage modification: two points, start counts 2 and 1, total 3", 5.0):
        spec = load_fixture("horizontal_ex54_pinned")
        data, bundles = tropicalize(spec, with_bundles=True)
        w1 = tuple(F(x) for x in (1, -1, -1, 1, -3, -2, 1, 0))
        w2 = tuple(F(x) for x in (1, -2, -2, 1, -6, -4, 1, 0))
        assert {b.point.w: b.count for b in bundles} == {w1: 2, w2: 1}
        assert data.root_count == 3
        assert tropicalize(load_fixture("horizontal_ex54")).root_count == 3


def test_criterion_06_relaxation_chain():
    with criterion(6, "relaxation chain 3 <= 6 <= 9", 10.0):
        relaxed = compute_mixed_volume(load_fixture("horizontal_ex54_relaxed"))
        original = compute_mixed_volume(load_fixture("horizontal_ex54"), "bkk")
        generic = tropicalize(load_fixture("horizontal_ex54")).root_count
        assert (generic, relaxed, original) == (3, 6, 9)
        assert generic <= relaxed <= original


def test_criterion_07_duffing():
    with criterion(7, "Duffing modification mixed volume 25, torus-only 16", 60.0):
        spec = load_fixture("duffing")
        assert compute_mixed_volume(spec) == 25
        assert compute_mixed_volume(spec, torus_only=True) == 16


def test_criterion_08_laman():
    with criterion(8, "Laman: four printed points, printed homotopy, 4 solutions", 5.0):
        spec = load_fixture("laman")
        data = tropicalize(spec)
        expected = {(0, 1, 0, 1, 0), (0, 1, 0, 0, 2), (-2, -2, 0, 1, 0), (-2, -2, 0, 0, 2)}
        assert _points(data.points) == {tuple(F(x) for x in w): 1 for w in expected}
        H = build_homotopy(data.system, (0, 1, 0, 1, 0))
        V = data.system.variables
        printed = [
            poly(V, {(1, 0, 0, 0, 0): 1, (0, 0, 1, 0, 0): 1, (0, 1, 0, 0, 0): (-1, 1)}),
            poly(V, {(0, 0, 1, 0, 0): 1, (0, 0, 0, 0, 1): 1, (0, 0, 0, 1, 0): (-1, 1)}),
            poly(V, {(0, 0, -1, 0, 0): (1, 2), (-1, 0, 0, 0, 0): 1, (0, -1, 0, 0, 0): -1}),
            poly(V, {(0, 0, 0, 0, -1): (1, 2), (0, 0, -1, 0, 0): 1, (0, 0, 0, -1, 0): -1}),
            poly(V, {(0, 0, 0, 0, 0): -1, (0, 0, 1, 0, 0): 1}),
        ]
        assert H.in_t() == printed
        result = solve(spec, threads=1)
        assert result.all_succeeded and len(result.solutions) == 4
        assert all(s["residual"] <= 1e-8 for s in result.solutions)
        w = cmath.exp(2j * cmath.pi / 3)
        oracle = [(a, a + 1, 1, 1 + b, b) for a in (w, w.conjugate()) for b in (w, w.conjugate())]
        assert match_sets(_coords(result), oracle, 1e-6)


def test_criterion_09_kuramoto():
    with criterion(9, "Kuramoto triangle and 4-cycle: root count = relaxed mixed volume", 30.0):
        for name in ("kuramoto_triangle", "kuramoto_4cycle"):
            spec = load_fixture(name)
            count = tropicalize(spec, "relaxed").root_count
            assert count == compute_mixed_volume(spec, "relaxed")
            assert count == {"kuramoto_triangle": 6, "kuramoto_4cycle": 12}[name]


def test_criterion_10_wnt():
    with criterion(10, "WNT: full model 9 or explicit incompleteness; reduced model counts agree", 30 * 60.0):
        spec = load_fixture("wnt")
        assert spec.options.get("time_budget")
        try:
            full = tropicalize(spec)
        except IncompleteEnumeration as exc:
            print(f"full WNT: incomplete within {spec.options['time_budget']} s: {exc}")
        else:
            assert full.root_count == 9
        data, bundles = tropicalize(load_fixture("wnt_reduced"), with_bundles=True)
        assert [b.count for b in bundles] == [p.multiplicity for p in data.points]
        assert data.root_count == sum(b.count for b in bundles) == 3


REDRAW_FIXTURES = [n for n in fixture_names() if n != "wnt"]


def test_criterion_11_properties():
    with criterion(11, "property suites: redraw invariance, mixed volume oracle, lattice index, homotopies", None):
        # Valuation-redraw invariance of the total multiplicity (the full WNT model is
        # excluded: its tropical stage does not finish, see criterion 10).
        for name in REDRAW_FIXTURES:
            spec = load_fixture(name)
            spec.valuation = None
            totals = []
            for seed in (11, 29):
                data, bundles = tropicalize(spec, seed=seed, with_bundles=True)
                totals.append(data.root_count)
                cs = data.system
                for b in bundles:
                    H = build_homotopy(cs, b.point.w, early=b.generators, handoff=handoff_for(b))
                    assert H.at_end() == cs.target(), name
                    for x in b.solutions:
                        assert initial_residual(list(b.generators), b.point.w, x) <= START_RESIDUAL_TOL, name
            assert totals[0] == totals[1], name

        rng = random.Random(7)
        for _ in range(25):
            P = sorted({(rng.randint(0, 4), rng.randint(0, 4)) for _ in range(rng.randint(2, 6))})
            Q = sorted({(rng.randint(0, 4), rng.randint(0, 4)) for _ in range(rng.randint(2, 6))})
            if len(P) < 2 or len(Q) < 2:
                continue
            forms = [TropicalForm([(a, 0) for a in P]), TropicalForm([(a, 0) for a in Q])]
            assert mixed_volume(forms) == mixed_volume_2d(P, Q)

        for n in (1, 2, 3):
            for _ in range(40):
                gens = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(rng.randint(1, 4))]
                rows = [[g[i] for g in gens] for i in range(n)]
                expected = coset_count(gens, n)
                assert lattice_index(rows) == (INFINITE if expected is None else expected)
