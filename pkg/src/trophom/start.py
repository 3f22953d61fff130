"""Start systems and homotopies at a tropical point.

For a point ``w`` of the stable intersection every block contributes
generators whose initial forms at ``w`` are binomials. For a linear block these
are the fundamental circuits with respect to a basis of minimal weight, which
form a tropical Gröbner basis of the linear ideal. The binomial start system
is solved exactly through a Smith normal form and the homotopy
``t^{-trop(f)(w)}·f(t^w·x)`` is written in ``s`` with ``t = s^D``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    MultiplicityMismatch,
    NonBinomialInitial,
    RankDeficient,
    SingularExponentMatrix,
    TargetMismatch,
)
from .exact import IntMatrix, rref, smith_normal_form, to_fraction
from .puiseux import (
    LaurentPoly,
    PuiseuxScalar,
    initial_form,
    lcm_of,
    scalar_to_complex,
    trop_value,
)
from .systems import Block, ConcreteSystem
from .tropical import TropicalPoint, puiseux_det, puiseux_rank

BINOMIAL_RESIDUAL_TOL = 1e-12
START_RESIDUAL_TOL = 1e-10


# ---------------------------------------------------------------------------
# Tropical Gröbner bases of linear blocks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroebnerBasisW:
    w: tuple[Fraction, ...]
    elements: tuple[LaurentPoly, ...]
    source: int
    basis: tuple[int, ...] = ()
    regular_at_one: bool = True


def _column_weights(block: Block, w: Sequence[Fraction]) -> list[Fraction]:
    return [sum((Fraction(a) * x for a, x in zip(alpha, w)), Fraction(0)) for alpha in block.monomials]


def _submatrix(block: Block, cols: Sequence[int]) -> list[list[PuiseuxScalar]]:
    return [[row[j] for j in cols] for row in block.matrix]


def _initial_basis(block: Block) -> list[int]:
    """First independent columns, scanning left to right."""
    chosen: list[int] = []
    for j in range(block.cols):
        trial = chosen + [j]
        if puiseux_rank(_submatrix(block, trial)) == len(trial):
            chosen = trial
            if len(chosen) == block.rows:
                break
    if len(chosen) < block.rows:
        raise RankDeficient(f"block {block.label or '?'} has rank {len(chosen)} < {block.rows} rows")
    return chosen


def _cramer_rows(block: Block, basis: Sequence[int]) -> tuple[PuiseuxScalar, list[list[PuiseuxScalar]]]:
    """``det(M_B)`` and ``G[i][j] = det(M_B with column i replaced by column j)``."""
    base = _submatrix(block, basis)
    det = puiseux_det(base)
    G: list[list[PuiseuxScalar]] = []
    for i, bi in enumerate(basis):
        row = []
        for j in range(block.cols):
            if j == bi:
                row.append(det)
            elif j in basis:
                row.append(PuiseuxScalar())
            else:
                cols = list(basis)
                cols[i] = j
                row.append(puiseux_det(_submatrix(block, cols)))
        G.append(row)
    return det, G


def minimal_basis(block: Block, w: Sequence) -> list[int]:
    """A column basis minimizing ``val det(M_B) + Σ_{j∈B} α_j·w``.

    Improving single exchanges are applied until none exists; for a valuated
    matroid such a local optimum is global.
    """
    w = [to_fraction(x) for x in w]
    s = _column_weights(block, w)
    basis = _initial_basis(block)
    while True:
        det, G = _cramer_rows(block, basis)
        best = None
        for i, bi in enumerate(basis):
            here = det.valuation() + s[bi]
            for j in range(block.cols):
                if j in basis or not G[i][j]:
                    continue
                gain = G[i][j].valuation() + s[j] - here
                if gain < 0 and (best is None or gain < best[0]):
                    best = (gain, i, j)
        if best is None:
            return basis
        basis = list(basis)
        basis[best[1]] = best[2]
        basis.sort()


def _reduced_matrix(block: Block, basis: Sequence[int], w) -> list[list]:
    """Residue matrix spanned by the initial forms of the row space."""
    s = _column_weights(block, w)
    det, G = _cramer_rows(block, basis)
    R = []
    for i, bi in enumerate(basis):
        level = det.valuation() + s[bi]
        lead = det.leading_coefficient()
        row = []
        for j in range(block.cols):
            g = G[i][j]
            if g and g.valuation() + s[j] == level:
                row.append(g.leading_coefficient() / lead)
            else:
                row.append(Fraction(0))
        R.append(row)
    return R


def tropical_groebner_linear(block: Block, w: Sequence, variables: Sequence[str], source: int = 0) -> GroebnerBasisW:
    """Fundamental circuits of ``block`` whose initial forms at ``w`` are binomials.

    The pivot columns are those of the reduced row echelon form (lowest column
    first) of the residue matrix of the row space, which is a minimal-weight
    basis. Each element is scaled so that its pivot coefficient has leading
    coefficient 1 and valuation 0.
    """
    w = tuple(to_fraction(x) for x in w)
    if block.rows == 0:
        return GroebnerBasisW(w, (), source, ())
    start = minimal_basis(block, w)
    R = _reduced_matrix(block, start, w)
    E, pivots = rref(R)
    if len(pivots) != block.rows:
        raise RankDeficient("residue matrix lost rank")
    for i, row in enumerate(E):
        nz = sum(1 for x in row if x != 0)
        if nz != 2:
            raise NonBinomialInitial(
                f"linear block {block.label or source} has an initial generator with {nz} terms at w", i
            )
    det, G = _cramer_rows(block, pivots)
    scale = PuiseuxScalar.monomial(Fraction(1) / det.leading_coefficient(), -det.valuation())
    elements = []
    for i in range(block.rows):
        terms = {block.monomials[j]: G[i][j] * scale for j in range(block.cols) if G[i][j]}
        elements.append(LaurentPoly(variables, terms))
    return GroebnerBasisW(w, tuple(elements), source, tuple(pivots), det.at_one() != 0)


# ---------------------------------------------------------------------------
# Binomial systems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BinomialSystem:
    """Equations ``x^{u_k} = c_k``."""

    exponents: tuple[tuple[int, ...], ...]
    constants: tuple

    @property
    def n(self) -> int:
        return len(self.exponents)

    def matrix(self) -> IntMatrix:
        return IntMatrix.from_rows(self.exponents, cols=len(self.exponents[0]) if self.exponents else 0)


def binomial_of(g: LaurentPoly, index: int = 0) -> tuple[tuple[int, ...], object]:
    """``c·x^a + d·x^b`` (``a`` the larger exponent) as ``x^{a−b} = −d/c``."""
    items = sorted(g.terms.items())
    if len(items) != 2:
        raise NonBinomialInitial(f"initial form {index} has {len(items)} terms", index)
    (b, d), (a, c) = items
    c0, d0 = c.leading_coefficient(), d.leading_coefficient()
    return tuple(x - y for x, y in zip(a, b)), -d0 / c0


def initial_system(polys: Sequence[LaurentPoly], w: Sequence) -> BinomialSystem:
    """Binomial system formed by the initial forms of ``polys`` at ``w``."""
    w = [to_fraction(x) for x in w]
    exps, consts = [], []
    for i, f in enumerate(polys):
        u, c = binomial_of(initial_form(f, w), i)
        exps.append(u)
        consts.append(c)
    if polys and len(polys) != polys[0].nvars:
        raise NonBinomialInitial(f"{len(polys)} binomials in {polys[0].nvars} variables", len(polys))
    return BinomialSystem(tuple(exps), tuple(consts))


def _wrap(z: complex) -> complex:
    """Shift the imaginary part of a logarithm into ``(−π, π]``."""
    im = math.remainder(z.imag, 2 * math.pi)
    return complex(z.real, im)


def _exact_log(c) -> complex:
    if hasattr(c, "log"):
        return c.log()
    c = Fraction(c)
    mag = math.log(abs(c.numerator)) - math.log(c.denominator)
    return complex(mag, 0.0 if c > 0 else math.pi)


def solve_binomial(B: BinomialSystem) -> tuple[list[list[complex]], int]:
    """All torus solutions of ``x^{u_k} = c_k``, via ``A·U·V = D``.

    With ``log x = V·log y`` the system becomes ``y_i^{d_i} = Π_k c_k^{A_{ik}}``;
    every ``d_i``-th root is taken and mapped back. Each solution is then polished
    by Newton steps in logarithmic coordinates.
    """
    n = B.n
    if n == 0:
        return [[]], 1
    U = B.matrix()
    if U.rows != U.cols:
        raise SingularExponentMatrix("exponent matrix is not square")
    A, D, V = smith_normal_form(U)
    d = [D[i, i] for i in range(n)]
    if any(x == 0 for x in d):
        raise SingularExponentMatrix("exponent matrix is singular: the binomial variety is positive dimensional")
    logc = [_exact_log(c) for c in B.constants]
    loggamma = [sum((A[i, k] * logc[k] for k in range(n)), 0j) for i in range(n)]
    Uf = np.array(U.to_rows(), dtype=float)
    Vf = np.array(V.to_rows(), dtype=float)
    count = 1
    for x in d:
        count *= x
    sols = []
    for ks in np.ndindex(*d):
        logy = np.array([(loggamma[i] + 2j * math.pi * ks[i]) / d[i] for i in range(n)])
        logx = Vf @ logy
        for _ in range(4):
            r = np.array([_wrap(v) for v in (Uf @ logx - np.array(logc))])
            if np.max(np.abs(r)) < 1e-15:
                break
            logx = logx - np.linalg.solve(Uf, r)
        sols.append([cmath.exp(z) for z in logx])
    for x in sols:
        if binomial_residual(B, x) > BINOMIAL_RESIDUAL_TOL:
            raise SingularExponentMatrix("binomial root extraction lost accuracy")
    return sols, count


def binomial_residual(B: BinomialSystem, x: Sequence[complex]) -> float:
    """Largest ``|x^u/c − 1|`` over the equations, evaluated in logarithms."""
    out = 0.0
    for u, c in zip(B.exponents, B.constants):
        z = sum((k * cmath.log(xi) for k, xi in zip(u, x) if k), 0j) - _exact_log(c)
        out = max(out, abs(cmath.exp(_wrap(z)) - 1))
    return out


# ---------------------------------------------------------------------------
# Homotopies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Homotopy:
    """``polynomials`` are in ``x`` with coefficients in ``s``; ``t = s^D``.

    ``early`` optionally holds generators whose value at ``s = 0`` is the binomial
    start system; they are tracked up to ``handoff`` (a path parameter in
    ``(0, 1]``) and the main polynomials from there on. With ``handoff = 1`` the
    endpoint is only polished on the main polynomials.
    """

    variables: tuple[str, ...]
    polynomials: tuple[LaurentPoly, ...]
    D: int
    w: tuple[Fraction, ...]
    early: tuple[LaurentPoly, ...] | None = None
    handoff: float = 1.0

    def in_t(self, polys: Sequence[LaurentPoly] | None = None) -> list[LaurentPoly]:
        """Polynomials rewritten in ``t`` (fractional exponents restored)."""
        polys = self.polynomials if polys is None else polys
        return [f.scale_t(Fraction(1, self.D)) for f in polys]

    def at_start(self) -> list[LaurentPoly]:
        gens = self.early if self.early is not None else self.polynomials
        return [_at_zero(f) for f in gens]

    def at_end(self) -> list[LaurentPoly]:
        return [f.at_t_one() for f in self.polynomials]


def _at_zero(f: LaurentPoly) -> LaurentPoly:
    terms = {}
    for a, c in f.terms.items():
        v = sum((x for e, x in c.terms if e == 0), Fraction(0))
        if v != 0:
            terms[a] = PuiseuxScalar.constant(v)
    return LaurentPoly(f.variables, terms)


def rescale(f: LaurentPoly, w: Sequence[Fraction]) -> LaurentPoly:
    """``t^{-trop(f)(w)}·f(t^w·x)``; all ``t`` exponents become nonnegative."""
    m = trop_value(f, w)
    terms = {}
    for a, c in f.terms.items():
        shift = sum((Fraction(k) * x for k, x in zip(a, w)), Fraction(0)) - m
        terms[a] = c.shift(shift)
    return LaurentPoly(f.variables, terms)


def _denominator(polys: Sequence[LaurentPoly]) -> int:
    dens = set()
    for f in polys:
        dens |= f.exponent_denominators()
    return lcm_of(dens) if dens else 1


def build_homotopy(
    system: ConcreteSystem | Sequence[LaurentPoly],
    w: Sequence,
    target: Sequence[LaurentPoly] | None = None,
    early: Sequence[LaurentPoly] | None = None,
    handoff: float = 1.0,
) -> Homotopy:
    """Rescale every polynomial at ``w`` and clear exponent denominators.

    ``target`` (default: the system at ``t = 1``) is compared exactly with the
    homotopy at ``s = 1``.
    """
    w = tuple(to_fraction(x) for x in w)
    if isinstance(system, ConcreteSystem):
        polys = list(system.polynomials)
        variables = system.variables
        if target is None:
            target = system.target()
    else:
        polys = list(system)
        variables = polys[0].variables if polys else ()
        if target is None:
            target = [f.at_t_one() for f in polys]
    main = [rescale(f, w) for f in polys]
    pre = [rescale(f, w) for f in early] if early is not None else None
    D = _denominator(main + (pre or []))
    main = [f.scale_t(D) for f in main]
    if pre is not None:
        pre = [f.scale_t(D) for f in pre]
    H = Homotopy(tuple(variables), tuple(main), D, w, tuple(pre) if pre is not None else None, handoff)
    ends = H.at_end()
    if len(ends) != len(target) or any(a != b for a, b in zip(ends, target)):
        raise TargetMismatch("homotopy at s = 1 differs from the target system")
    return H


# ---------------------------------------------------------------------------
# Start bundles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StartBundle:
    point: TropicalPoint
    solutions: tuple[tuple[complex, ...], ...]
    count: int
    generators: tuple[LaurentPoly, ...]
    binomials: BinomialSystem
    groebner: tuple[GroebnerBasisW, ...] = field(default=())


def point_generators(system: ConcreteSystem, w: Sequence) -> tuple[list[LaurentPoly], list[GroebnerBasisW]]:
    """Generators with binomial initial forms: Gröbner elements of linear blocks, other polynomials as is."""
    gens: list[LaurentPoly] = []
    bases: list[GroebnerBasisW] = []
    if system.blocks is None:
        return list(system.polynomials), bases
    for b, block in enumerate(system.blocks):
        if block.rows == 1:
            gens.append(system.polynomials[block.polys[0]])
            continue
        gb = tropical_groebner_linear(block, w, system.variables, b)
        bases.append(gb)
        gens.extend(gb.elements)
    return gens, bases


def initial_residual(polys: Sequence[LaurentPoly], w: Sequence, x: Sequence[complex]) -> float:
    """Relative residual of ``x`` in the initial forms of ``polys`` at ``w``."""
    out = 0.0
    for f in polys:
        g = initial_form(f, w)
        val = 0j
        mag = 0.0
        for a, c in g.terms.items():
            term = scalar_to_complex(c.constant_value())
            for xi, k in zip(x, a):
                if k:
                    term *= complex(xi) ** k
            val += term
            mag += abs(term)
        out = max(out, abs(val) / (1.0 + mag))
    return out


def start_bundle(system: ConcreteSystem, point: TropicalPoint) -> StartBundle:
    """Binomial start solutions at ``point``; their count must equal its multiplicity."""
    gens, bases = point_generators(system, point.w)
    B = initial_system(gens, point.w)
    sols, count = solve_binomial(B)
    if count != point.multiplicity:
        raise MultiplicityMismatch(
            f"binomial start system at w = {[str(x) for x in point.w]} has {count} solutions, "
            f"intersection multiplicity is {point.multiplicity}"
        )
    for x in sols:
        r = max(initial_residual(gens, point.w, x), initial_residual(system.polynomials, point.w, x))
        if r > START_RESIDUAL_TOL:
            raise MultiplicityMismatch(f"start solution violates the initial system (residual {r:.3e})")
    return StartBundle(point, tuple(tuple(x) for x in sols), count, tuple(gens), B, tuple(bases))


def handoff_for(bundle: StartBundle) -> float:
    """Track the Gröbner generators to the end unless one of them degenerates at ``t = 1``."""
    return 1.0 if all(gb.regular_at_one for gb in bundle.groebner) else 0.5
