"""Shared helpers for the test suite."""

from __future__ import annotations

import sys
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from trophom.puiseux import LaurentPoly, PuiseuxScalar  # noqa: E402


def scalar(spec) -> PuiseuxScalar:
    """``c`` or ``(c, e)`` for ``c·t^e``, or a list of such pairs."""
    if isinstance(spec, PuiseuxScalar):
        return spec
    if isinstance(spec, tuple):
        return PuiseuxScalar.monomial(Fraction(spec[0]), Fraction(spec[1]))
    if isinstance(spec, list):
        return PuiseuxScalar([(Fraction(e), Fraction(c)) for c, e in spec])
    return PuiseuxScalar.constant(Fraction(spec))


def poly(variables, terms: dict) -> LaurentPoly:
    """Polynomial from ``{exponent: coefficient spec}``."""
    return LaurentPoly(variables, {tuple(a): scalar(c) for a, c in terms.items()})


X2 = ("x1", "x2")


# One line per acceptance criterion, printed again after the test run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
