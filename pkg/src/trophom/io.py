"""Problem files and reports.

Numbers in problem files are strings parsed exactly (``"3"``, ``"-1/2"``,
``"0.25"``); complex values are ``["re", "im"]`` pairs. Reports are plain
dictionaries rendered as JSON or as text tables.
"""

from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

from .errors import DimensionError, SchemaError
from .exact import GaussianRational
from .pipeline import ROUTES, ProblemSpec
from .puiseux import LaurentPoly, exact_scalar
from .systems import HorizontalSystem, PlainSystem, Term, TransverseBase, VerticalSystem
from .tracker import TrackOptions

KINDS = ("vertical", "horizontal", "plain")
TRACK_KEYS = {
    "initial_step", "min_step", "newton_tol", "max_newton_iters", "max_steps",
    "start_parameter", "epsilon", "endpoint_residual_tol",
}
OPTION_KEYS = TRACK_KEYS | {"elide", "time_budget"}


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def _rational(value: Any, pointer: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise SchemaError("expected a rational number written as a string or integer", pointer)
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError):
        raise SchemaError(f"cannot parse {value!r} as a rational number", pointer) from None


def _complex(value: Any, pointer: str):
    if isinstance(value, list):
        if len(value) != 2:
            raise SchemaError("complex values are [re, im] pairs", pointer)
        re = _rational(value[0], pointer + "/0")
        im = _rational(value[1], pointer + "/1")
        return exact_scalar(GaussianRational(re, im)) if im else re
    return _rational(value, pointer)


def _require(obj: dict, key: str, kind: type, pointer: str):
    if key not in obj:
        raise SchemaError(f"missing key {key!r}", pointer)
    value = obj[key]
    if not isinstance(value, kind):
        raise SchemaError(f"{key!r} must be a {kind.__name__}", f"{pointer}/{key}")
    return value


def _int_list(value: Any, pointer: str) -> list[int]:
    if not isinstance(value, list) or any(isinstance(x, bool) or not isinstance(x, int) for x in value):
        raise SchemaError("expected a list of integers", pointer)
    return list(value)


def _poly(value: Any, variables: tuple[str, ...], pointer: str) -> LaurentPoly:
    if not isinstance(value, list) or not value:
        raise SchemaError("a polynomial is a nonempty list of terms", pointer)
    terms: dict[tuple, Any] = {}
    for k, term in enumerate(value):
        p = f"{pointer}/{k}"
        if not isinstance(term, dict):
            raise SchemaError("a term is an object with coeff and exponents", p)
        a = tuple(_int_list(_require(term, "exponents", list, p), p + "/exponents"))
        if len(a) != len(variables):
            raise DimensionError(f"exponent of length {len(a)} where {len(variables)} expected", p + "/exponents")
        c = _complex(term.get("coeff", "1"), p + "/coeff")
        terms[a] = terms.get(a, 0) + c
    return LaurentPoly(variables, {a: c for a, c in terms.items() if c != 0})


def _param_ref(value: Any, names: tuple[str, ...], pointer: str) -> int | None:
    if value is None:
        return None
    if isinstance(value, int) and not isinstance(value, bool):
        if not 0 <= value < len(names):
            raise SchemaError("parameter index out of range", pointer)
        return value
    if isinstance(value, str) and value in names:
        return names.index(value)
    raise SchemaError(f"unknown parameter {value!r}", pointer)


def parse_problem(doc: Any, name: str = "") -> ProblemSpec:
    """Validate a decoded problem document."""
    if not isinstance(doc, dict):
        raise SchemaError("the problem must be a JSON object", "")
    ring = _require(doc, "ring", dict, "")
    variables = tuple(_require(ring, "variables", list, "/ring"))
    if not variables or any(not isinstance(v, str) for v in variables):
        raise SchemaError("variables must be a nonempty list of names", "/ring/variables")
    if len(set(variables)) != len(variables):
        raise SchemaError("variable names must be distinct", "/ring/variables")
    params = ring.get("parameters", [])
    if not isinstance(params, list) or any(not isinstance(p, str) for p in params):
        raise SchemaError("parameters must be a list of names", "/ring/parameters")
    params = tuple(params)
    kind = _require(doc, "kind", str, "")
    if kind not in KINDS:
        raise SchemaError(f"kind must be one of {', '.join(KINDS)}", "/kind")

    if kind == "vertical":
        coeffs = _require(doc, "coefficients", list, "")
        rows = [[_complex(c, f"/coefficients/{i}/{j}") for j, c in enumerate(_row(r, f"/coefficients/{i}"))]
                for i, r in enumerate(coeffs)]
        exps = [_int_list(a, f"/exponents/{j}") for j, a in enumerate(_require(doc, "exponents", list, ""))]
        system = VerticalSystem(variables, rows, exps, params or None)
        n_polys = system.n_polys
    elif kind == "horizontal":
        coeffs = _require(doc, "coefficients", list, "")
        rows = [[_complex(c, f"/coefficients/{i}/{j}") for j, c in enumerate(_row(r, f"/coefficients/{i}"))]
                for i, r in enumerate(coeffs)]
        support = [_poly(q, variables, f"/support/{j}") for j, q in enumerate(_require(doc, "support", list, ""))]
        if not support:
            raise SchemaError("support must not be empty", "/support")
        system = HorizontalSystem(variables, rows, support, params or None)
        n_polys = system.n_polys
    else:
        polys_doc = _require(doc, "polynomials", list, "")
        polys = []
        for i, f in enumerate(polys_doc):
            p = f"/polynomials/{i}"
            if not isinstance(f, list) or not f:
                raise SchemaError("a polynomial is a nonempty list of terms", p)
            terms = []
            for k, term in enumerate(f):
                q = f"{p}/{k}"
                if not isinstance(term, dict):
                    raise SchemaError("a term is an object with coeff and exponents", q)
                a = _int_list(_require(term, "exponents", list, q), q + "/exponents")
                c = _complex(term.get("coeff", "1"), q + "/coeff")
                terms.append(Term(c, tuple(a), _param_ref(term.get("param"), params, q + "/param")))
            polys.append(terms)
        blocks = doc.get("blocks")
        if blocks is not None:
            blocks = [_int_list(g, f"/blocks/{i}") for i, g in enumerate(blocks)]
        system = PlainSystem(variables, polys, params, blocks)
        n_polys = system.n_polys

    if n_polys == 0:
        raise SchemaError("the system has no polynomials", "/polynomials" if kind == "plain" else "/coefficients")
    if n_polys != len(variables):
        raise DimensionError(f"{n_polys} polynomials in {len(variables)} variables; the system must be square", "")

    target_doc = doc.get("target", [])
    if not isinstance(target_doc, list):
        raise SchemaError("target must be a list", "/target")
    target = [_complex(c, f"/target/{k}") for k, c in enumerate(target_doc)]
    if len(target) != system.parameter_count:
        raise DimensionError(f"expected {system.parameter_count} target parameters, got {len(target)}", "/target")
    if any(c == 0 for c in target):
        raise SchemaError("target parameters must be nonzero", "/target")

    base = None
    if doc.get("base") is not None:
        if kind != "horizontal":
            raise SchemaError("a transverse base only applies to horizontal systems", "/base")
        bdoc = doc["base"]
        if not isinstance(bdoc, dict):
            raise SchemaError("base must be an object", "/base")
        bpolys = [_poly(b, variables, f"/base/polynomials/{k}")
                  for k, b in enumerate(_require(bdoc, "polynomials", list, "/base"))]
        powers = [tuple(_int_list(r, f"/base/powers/{j}")) for j, r in enumerate(_require(bdoc, "powers", list, "/base"))]
        base = TransverseBase(tuple(bpolys), tuple(powers))
        base.verify(system.support)

    route = doc.get("route", "auto")
    if route not in ROUTES:
        raise SchemaError(f"route must be one of {', '.join(ROUTES)}", "/route")
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise SchemaError("seed must be an integer", "/seed")
    valuation = doc.get("valuation")
    if valuation is not None:
        if not isinstance(valuation, list):
            raise SchemaError("valuation must be a list", "/valuation")
        valuation = [_rational(x, f"/valuation/{k}") for k, x in enumerate(valuation)]
    options = doc.get("options", {})
    if not isinstance(options, dict):
        raise SchemaError("options must be an object", "/options")
    unknown = set(options) - OPTION_KEYS
    if unknown:
        raise SchemaError(f"unknown options: {', '.join(sorted(unknown))}", "/options")
    budget = options.get("time_budget")
    if budget is not None and (isinstance(budget, bool) or not isinstance(budget, (int, float)) or budget <= 0):
        raise SchemaError("time_budget must be a positive number of seconds", "/options/time_budget")
    return ProblemSpec(system, target, base, route, seed, valuation, dict(options), doc.get("name", name))


def _row(value: Any, pointer: str) -> list:
    if not isinstance(value, list):
        raise SchemaError("expected a list", pointer)
    return value


def parse_input(data: bytes | str, name: str = "") -> ProblemSpec:
    """Decode and validate a UTF-8 JSON problem."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SchemaError(f"input is not UTF-8: {exc}", "") from None
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}", "") from None
    return parse_problem(doc, name)


def track_options(spec: ProblemSpec, **overrides) -> TrackOptions:
    values = {k: v for k, v in spec.options.items() if k in TRACK_KEYS}
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return TrackOptions(**values)
    except (TypeError, ValueError) as exc:
        raise SchemaError(str(exc), "/options") from None


# ---------------------------------------------------------------------------
# Fixtures
# ---------------------------------------------------------------------------


def fixture_names() -> list[str]:
    root = resources.files("trophom") / "fixtures"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def fixture_text(name: str) -> str:
    return (resources.files("trophom") / "fixtures" / f"{name}.json").read_text(encoding="utf-8")


def load_fixture(name: str) -> ProblemSpec:
    return parse_input(fixture_text(name), name)


def load_problem(path: str) -> ProblemSpec:
    """Read a problem file; a bare name of a shipped fixture is accepted too."""
    p = Path(path)
    if p.exists():
        return parse_input(p.read_bytes(), p.stem)
    if path in fixture_names():
        return load_fixture(path)
    raise SchemaError(f"no such file or fixture: {path}", "")


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def complex_json(z: complex) -> list[float]:
    return [float(z.real) + 0.0, float(z.imag) + 0.0]


def emit_output(report: dict, fmt: str = "json") -> bytes:
    """Render a report; JSON keeps insertion order and shortest round-trip floats."""
    if fmt == "json":
        return (json.dumps(report, indent=2, allow_nan=True) + "\n").encode("utf-8")
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    return render_text(report).encode("utf-8")


def render_text(report: dict) -> str:
    lines = []
    for key in ("command", "problem", "route"):
        if key in report:
            lines.append(f"{key}: {report[key]}")
    if "root_count" in report:
        lines.append(f"root count: {report['root_count']}")
    if "mixed_volume" in report:
        lines.append(f"mixed volume: {report['mixed_volume']}")
    if "valuation" in report:
        lines.append("valuation: " + " ".join(report["valuation"]))
    pts = report.get("tropical_points")
    if pts:
        lines.append("")
        lines.append(f"{'#':>3}  {'mult':>4}  w")
        for k, p in enumerate(pts):
            lines.append(f"{k:>3}  {p['multiplicity']:>4}  ({', '.join(p['w'])})")
    cells = report.get("mixed_cells")
    if cells:
        lines.append("")
        lines.append(f"{'#':>3}  {'vol':>4}  pairs")
        for k, c in enumerate(cells):
            lines.append(f"{k:>3}  {c['volume']:>4}  {c['pairs']}")
    sols = report.get("solutions")
    if sols is not None:
        lines.append("")
        lines.append(f"{len(sols)} solution(s)")
        for k, s in enumerate(sols):
            coords = ", ".join(f"{re:.12g}{im:+.12g}i" for re, im in s["coords"])
            lines.append(f"{k:>3}  residual {s['residual']:.2e}  cluster {s['cluster']}  ({coords})")
    for w in report.get("warnings", []):
        lines.append(f"warning: {w}")
    if "timings" in report:
        lines.append("timings: " + ", ".join(f"{k} {v:.3f}s" for k, v in report["timings"].items()))
    return "\n".join(lines) + "\n"
