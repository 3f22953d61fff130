"""End-to-end orchestration: route selection, tropical data, start systems, tracking."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import (
    GenericityError,
    MultiplicityMismatch,
    NonGenericValuation,
    RouteUnsupported,
    SingularExponentMatrix,
)
from .puiseux import LaurentPoly, PuiseuxScalar
from .systems import (
    ConcreteSystem,
    HorizontalSystem,
    PlainSystem,
    TransverseBase,
    VerticalSystem,
    bkk_system,
    relaxation_slots,
    relaxed_modification,
    specialize,
    substitute_back,
    term_count,
    term_order,
    two_stage_modification,
)
from .start import build_homotopy, handoff_for, start_bundle
from .tracker import TrackOptions, residual, solve_all
from .tropical import (
    MAX_REDRAWS,
    TropicalPoint,
    hypersurface_forms,
    mixed_cells,
    mixed_volume,
    stable_intersection_points,
)

ROUTES = ("auto", "vertical", "transverse", "relaxed", "bkk", "blocks")
VALUATION_RANGE = (1, 10 ** 4)


@dataclass
class ProblemSpec:
    system: VerticalSystem | HorizontalSystem | PlainSystem
    target: list
    base: TransverseBase | None = None
    route: str = "auto"
    seed: int = 0
    valuation: list[Fraction] | None = None
    options: dict = field(default_factory=dict)
    name: str = ""

    @property
    def kind(self) -> str:
        return self.system.kind


@dataclass
class TropicalData:
    route: str
    system: ConcreteSystem
    points: list[TropicalPoint]
    valuation: list[Fraction]
    warnings: list[str] = field(default_factory=list)

    @property
    def root_count(self) -> int:
        return sum(p.multiplicity for p in self.points)


def resolve_route(spec: ProblemSpec, route: str | None = None) -> str:
    """Apply the ``auto`` rules and check that the route fits the system kind."""
    route = route or spec.route or "auto"
    if route not in ROUTES:
        raise RouteUnsupported(f"unknown route {route!r}; expected one of {', '.join(ROUTES)}")
    kind = spec.kind
    if route == "auto":
        if kind == "vertical":
            return "vertical"
        if kind == "horizontal":
            return "transverse" if spec.base is not None else "relaxed"
        return "blocks" if isinstance(spec.system, PlainSystem) and spec.system.blocks else "bkk"
    if route == "vertical" and kind != "vertical":
        raise RouteUnsupported("the vertical route needs a vertically parametrized system")
    if route == "transverse" and (kind != "horizontal" or spec.base is None):
        raise RouteUnsupported("the transverse route needs a horizontal system with a transverse base")
    if route == "relaxed" and kind != "horizontal":
        raise RouteUnsupported("the relaxed route needs a horizontally parametrized system")
    if route == "blocks" and kind != "plain":
        raise RouteUnsupported("the blocks route needs an explicit polynomial system")
    return route


def original_target(spec: ProblemSpec) -> list[LaurentPoly]:
    """The system to be solved, with the target parameters inserted."""
    system = spec.system
    return specialize(system, spec.target, [0] * system.parameter_count).target()


def _bkk_order(spec: ProblemSpec, target: Sequence[LaurentPoly]):
    if isinstance(spec.system, PlainSystem) and not spec.system.has_parameters():
        order = term_order(spec.system)
        if all(len(o) == len(f) for o, f in zip(order, target)):
            return order
    return None


def valuation_length(spec: ProblemSpec, route: str) -> int:
    if route == "bkk":
        return term_count(original_target(spec))
    return spec.system.parameter_count


def build_system(spec: ProblemSpec, route: str, v: Sequence, seed: int = 0) -> ConcreteSystem:
    """The concrete (possibly modified) system over Puiseux series for valuation ``v``."""
    system = spec.system
    elide = bool(spec.options.get("elide", True))
    if route == "bkk":
        target = original_target(spec)
        return bkk_system(system.variables, target, v, _bkk_order(spec, target))
    if route in ("vertical", "blocks"):
        return specialize(system, spec.target, v)
    if route == "transverse":
        return two_stage_modification(system, spec.base, spec.target, v, elide=elide)
    if route == "relaxed":
        slots = relaxation_slots(system)
        k = system.parameter_count
        fresh_v = None
        if len(v) == k + len(slots):
            v, fresh_v = list(v[:k]), list(v[k:])
        return relaxed_modification(system, spec.target, v, fresh_values=[1] * len(slots),
                                    fresh_valuations=fresh_v, elide=elide, seed=seed)
    raise RouteUnsupported(f"unknown route {route!r}")


def _draw(rng: random.Random, count: int) -> list[Fraction]:
    return [Fraction(rng.randint(*VALUATION_RANGE)) for _ in range(count)]


def _attempts(spec: ProblemSpec, route: str, valuation, seed: int):
    """Yield ``(v, pinned)`` candidates: the pinned vector once, else up to ``MAX_REDRAWS`` draws."""
    if valuation is not None:
        yield [Fraction(x) for x in valuation], True
        return
    rng = random.Random(seed)
    count = valuation_length(spec, route)
    for _ in range(MAX_REDRAWS):
        yield _draw(rng, count), False


def tropicalize(spec: ProblemSpec, route: str | None = None, seed: int | None = None,
                valuation: Sequence | None = None, with_bundles: bool = False):
    """Tropical points of the system for a generic (or pinned) valuation.

    Genericity failures trigger a fresh draw, at most ``MAX_REDRAWS`` times.
    With ``with_bundles`` the start bundles are computed inside the same retry
    loop and returned alongside.
    """
    route = resolve_route(spec, route)
    seed = spec.seed if seed is None else seed
    valuation = spec.valuation if valuation is None else valuation
    warnings: list[str] = []
    last: Exception | None = None
    for v, pinned in _attempts(spec, route, valuation, seed):
        try:
            cs = build_system(spec, route, v, seed)
            if cs.blocks is None:
                raise RouteUnsupported("this system has no block structure for the tropical engine")
            # A pinned valuation is taken as given: non-transverse points keep
            # their stable multiplicity but cannot seed a homotopy.
            points = stable_intersection_points(cs.blocks, cs.n, strict=not pinned, seed=seed,
                                              time_budget=spec.options.get("time_budget"))
            loose = [p for p in points if not p.transverse]
            if loose:
                warnings.append(f"{len(loose)} tropical point(s) are not transverse intersections")
            data = TropicalData(route, cs, points, list(v), warnings)
            if not with_bundles:
                return data
            if loose:
                raise NonGenericValuation("the pinned valuation gives non-transverse tropical points")
            bundles = [start_bundle(cs, p) for p in points]
            return data, bundles
        except (GenericityError, SingularExponentMatrix) as exc:
            last = exc
            if pinned:
                raise
            warnings.append(f"valuation redrawn after: {exc}")
    raise type(last)(f"no generic valuation after {MAX_REDRAWS} draws; last failure: {last}")


def root_count(spec: ProblemSpec, **kw) -> int:
    return tropicalize(spec, **kw).root_count


def _drop_constants(polys: Sequence[LaurentPoly]) -> list[LaurentPoly]:
    out = []
    for f in polys:
        zero = tuple([0] * f.nvars)
        out.append(LaurentPoly(f.variables, {a: c for a, c in f.terms.items() if a != zero}))
    return out


def mixed_volume_polys(spec: ProblemSpec, route: str | None = None, torus_only: bool = False) -> list[LaurentPoly]:
    """Polynomials whose Newton polytopes enter the mixed volume for ``route``."""
    route = resolve_route(spec, route)
    if route in ("transverse", "relaxed"):
        zeros = [0] * spec.system.parameter_count
        polys = build_system(spec, route, zeros).target()
    else:
        polys = original_target(spec)
    return _drop_constants(polys) if torus_only else polys


def compute_mixed_volume(spec: ProblemSpec, route: str | None = None, torus_only: bool = False,
                         seed: int | None = None) -> int:
    seed = spec.seed if seed is None else seed
    return mixed_volume(hypersurface_forms(mixed_volume_polys(spec, route, torus_only)), seed)


def compute_mixed_cells(spec: ProblemSpec, route: str | None = None, torus_only: bool = False,
                        seed: int | None = None):
    """Mixed cells for a seeded generic lift of the chosen polynomials."""
    seed = spec.seed if seed is None else seed
    polys = mixed_volume_polys(spec, route, torus_only)
    rng = random.Random(seed)
    last = None
    for _ in range(MAX_REDRAWS):
        lifted = []
        for f in polys:
            lifted.append(LaurentPoly(f.variables, {
                a: PuiseuxScalar.monomial(c.at_one(), rng.randint(*VALUATION_RANGE)) for a, c in sorted(f.terms.items())
            }))
        try:
            return lifted, mixed_cells(hypersurface_forms(lifted))
        except GenericityError as exc:
            last = exc
    raise type(last)(f"no generic lift after {MAX_REDRAWS} draws; last failure: {last}")


@dataclass
class SolveResult:
    data: TropicalData
    start_counts: list[int]
    solutions: list[dict]
    diagnostics: dict
    all_succeeded: bool


def solve(spec: ProblemSpec, route: str | None = None, seed: int | None = None, valuation=None,
          opts: TrackOptions | None = None, threads: int = 1) -> SolveResult:
    """Tropical data, start systems, homotopies and path tracking."""
    opts = opts or TrackOptions()
    data, bundles = tropicalize(spec, route, seed, valuation, with_bundles=True)
    cs = data.system
    homotopies = [build_homotopy(cs, b.point.w, early=b.generators, handoff=handoff_for(b)) for b in bundles]
    sols = solve_all(bundles, homotopies, cs.target(), opts, threads)
    target = original_target(spec)
    out = []
    for x, size in sols.solutions:
        coords = substitute_back(list(x), cs)
        out.append({"coords": coords, "residual": residual(target, coords, 1.0), "cluster": size})
    paths = sols.diagnostics["paths"]
    ok = sols.diagnostics["successes"]
    if paths != data.root_count:
        raise MultiplicityMismatch("path count differs from the root count")
    return SolveResult(data, [b.count for b in bundles], out, sols.diagnostics, ok == paths and paths > 0)
