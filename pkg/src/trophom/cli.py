"""Command-line front end.

Exit codes: 0 success, 2 some paths failed or the tropical stage was
incomplete, 3 input error, 4 genericity failure after all redraws (or an
internal consistency check).
"""

from __future__ import annotations

import os
import sys
import time
from fractions import Fraction

import click

from . import __version__
from .errors import (
    BaseMismatch,
    GenericityError,
    IncompleteEnumeration,
    MultiplicityMismatch,
    RankDeficient,
    RouteUnsupported,
    SchemaError,
    TargetMismatch,
    TrophomError,
    ZeroParameter,
)
from .io import complex_json, emit_output, load_problem, track_options
from .pipeline import (
    ROUTES,
    compute_mixed_cells,
    compute_mixed_volume,
    resolve_route,
    solve,
    tropicalize,
)

EXIT_OK, EXIT_PARTIAL, EXIT_INPUT, EXIT_GENERICITY = 0, 2, 3, 4
INPUT_ERRORS = (SchemaError, RouteUnsupported, ZeroParameter, BaseMismatch)
ENGINE_ERRORS = (GenericityError, MultiplicityMismatch, TargetMismatch, RankDeficient)


def _parse_valuation(text: str | None):
    if text is None:
        return None
    try:
        return [Fraction(x.strip()) for x in text.split(",") if x.strip()]
    except (ValueError, ZeroDivisionError):
        raise SchemaError(f"cannot parse valuation {text!r}", "--valuation") from None


def _common(f):
    f = click.argument("problem")(f)
    f = click.option("--route", type=click.Choice(ROUTES), default=None, help="Override the route in the file.")(f)
    f = click.option("--seed", type=int, default=None, help="Seed for valuations and perturbations.")(f)
    f = click.option("--valuation", default=None, help="Pinned valuation v1,v2,... (rationals).")(f)
    f = click.option("--threads", type=int, default=None, help="Worker threads for path tracking.")(f)
    f = click.option("--epsilon", type=float, default=None, help="Start parameter for offset starts.")(f)
    f = click.option("--tol", type=float, default=None, help="Endpoint residual tolerance.")(f)
    f = click.option("--format", "fmt", type=click.Choice(["json", "text"]), default="json")(f)
    f = click.option("--torus-only", is_flag=True, help="Drop constant terms (mixed volume commands).")(f)
    f = click.option("--timings", is_flag=True, help="Include wall-clock timings in the report.")(f)
    f = click.option("--time-budget", type=float, default=None,
                     help="Seconds allowed for the tropical stage before reporting incompleteness.")(f)
    return f


def _points_json(points):
    return [{"w": [str(x) for x in p.w], "multiplicity": p.multiplicity} for p in points]


def _header(cmd: str, spec, route: str) -> dict:
    return {"command": cmd, "problem": spec.name, "route": route}


def _emit(report: dict, fmt: str, timings: dict | None) -> None:
    if timings is not None:
        report["timings"] = timings
    sys.stdout.buffer.write(emit_output(report, fmt))
    sys.stdout.flush()


def _run(cmd: str, problem, route, seed, valuation, threads, epsilon, tol, fmt, torus_only, timings,
         time_budget) -> int:
    clock = {} if timings else None
    t0 = time.perf_counter()
    spec = load_problem(problem)
    route = resolve_route(spec, route)
    pinned = _parse_valuation(valuation)
    seed = spec.seed if seed is None else seed
    if time_budget is not None:
        spec.options["time_budget"] = time_budget
    report = _header(cmd, spec, route)
    try:
        return _dispatch(cmd, spec, route, seed, pinned, threads, epsilon, tol, fmt, torus_only, report, clock, t0)
    except IncompleteEnumeration as exc:
        report["root_count"] = None
        report["tropical_points"] = []
        report["warnings"] = [f"incomplete circuit enumeration: {exc}"]
        if clock is not None:
            clock["total"] = time.perf_counter() - t0
        _emit(report, fmt, clock)
        click.echo(f"incomplete enumeration: {exc}\nhint: raise --time-budget or use a reduced model", err=True)
        return EXIT_PARTIAL


def _dispatch(cmd, spec, route, seed, pinned, threads, epsilon, tol, fmt, torus_only, report, clock, t0) -> int:

    if cmd in ("mixed-volume", "mixed-cells"):
        if cmd == "mixed-volume":
            report["mixed_volume"] = compute_mixed_volume(spec, route, torus_only, seed)
        else:
            lifted, cells = compute_mixed_cells(spec, route, torus_only, seed)
            report["lift"] = [[str(c.valuation()) for _, c in sorted(f.terms.items())] for f in lifted]
            report["mixed_cells"] = [
                {"pairs": [list(p) for p in c.pairs], "w": [str(x) for x in c.w], "volume": c.volume} for c in cells
            ]
            report["mixed_volume"] = sum(c.volume for c in cells)
        report["torus_only"] = torus_only
        if clock is not None:
            clock["total"] = time.perf_counter() - t0
        _emit(report, fmt, clock)
        return EXIT_OK

    if cmd in ("tropicalize", "root-count"):
        data = tropicalize(spec, route, seed, pinned)
        report["valuation"] = [str(x) for x in data.valuation]
        report["variables"] = list(data.system.variables)
        report["tropical_points"] = _points_json(data.points)
        if cmd == "root-count":
            report["root_count"] = data.root_count
        report["warnings"] = list(data.warnings)
        if clock is not None:
            clock["total"] = time.perf_counter() - t0
        _emit(report, fmt, clock)
        return EXIT_OK

    opts = track_options(spec, epsilon=epsilon, endpoint_residual_tol=tol)
    workers = threads if threads is not None else (os.cpu_count() or 1)
    result = solve(spec, route, seed, pinned, opts, workers)
    data = result.data
    report["valuation"] = [str(x) for x in data.valuation]
    report["variables"] = list(data.system.variables)
    report["tropical_points"] = _points_json(data.points)
    report["root_count"] = data.root_count
    report["start_counts"] = result.start_counts
    report["solutions"] = [
        {"coords": [complex_json(z) for z in s["coords"]], "residual": s["residual"], "cluster": s["cluster"]}
        for s in result.solutions
    ]
    report["diagnostics"] = result.diagnostics
    report["warnings"] = list(data.warnings)
    if clock is not None:
        clock["total"] = time.perf_counter() - t0
    _emit(report, fmt, clock)
    return EXIT_OK if result.all_succeeded else EXIT_PARTIAL


def _guarded(cmd: str, **kw) -> None:
    try:
        code = _run(cmd, **kw)
    except INPUT_ERRORS as exc:
        click.echo(f"input error: {exc}", err=True)
        code = EXIT_INPUT
    except ENGINE_ERRORS as exc:
        click.echo(f"genericity failure: {exc}\nhint: redraw the valuation with another --seed", err=True)
        code = EXIT_GENERICITY
    except TrophomError as exc:
        click.echo(f"error: {exc}", err=True)
        code = EXIT_INPUT
    sys.exit(code)


@click.group()
@click.version_option(__version__, prog_name="trophom")
def main() -> None:
    """Homotopies from tropical data for parametrized polynomial systems."""


@main.command("solve")
@_common
def solve_cmd(**kw):
    """Track one path per start solution and report the solutions."""
    _guarded("solve", **kw)


@main.command("root-count")
@_common
def root_count_cmd(**kw):
    """Generic root count as the total multiplicity of the tropical points."""
    _guarded("root-count", **kw)


@main.command("tropicalize")
@_common
def tropicalize_cmd(**kw):
    """Tropical intersection points with multiplicities."""
    _guarded("tropicalize", **kw)


@main.command("mixed-volume")
@_common
def mixed_volume_cmd(**kw):
    """Mixed volume of the Newton polytopes of the (modified) system."""
    _guarded("mixed-volume", **kw)


@main.command("mixed-cells")
@_common
def mixed_cells_cmd(**kw):
    """Mixed cells of a seeded generic lift."""
    _guarded("mixed-cells", **kw)


if __name__ == "__main__":
    main()
