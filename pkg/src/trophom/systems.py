"""Parametrized system descriptors, specialization and modifications.

A specialization replaces each parameter ``a_k`` by ``P_k·t^{v_k}`` and yields a
:class:`ConcreteSystem` over :class:`PuiseuxScalar`. Modifications introduce
auxiliary variables (``y`` for support or base polynomials, ``z`` for support
products) so that the system splits into a linear block plus hypersurfaces.
Every auxiliary variable is recorded in :class:`Provenance` together with its
defining polynomial, which is what :func:`substitute_back` undoes.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .errors import BaseMismatch, DimensionError, InconsistentSolution, ZeroParameter
from .exact import GaussianRational, to_fraction
from .puiseux import (
    Exponent,
    LaurentPoly,
    PuiseuxScalar,
    evaluate_numeric,
    exact_scalar,
    term_magnitudes,
)

# ---------------------------------------------------------------------------
# Building blocks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Block:
    """Rows of a linear-in-monomials subsystem.

    ``matrix[i][j]`` multiplies ``x^{monomials[j]}`` in polynomial
    ``polys[i]`` of the owning system.
    """

    matrix: tuple[tuple[PuiseuxScalar, ...], ...]
    monomials: tuple[Exponent, ...]
    polys: tuple[int, ...] = ()
    label: str = ""

    def __post_init__(self):
        if any(len(r) != len(self.monomials) for r in self.matrix):
            raise DimensionError("block row length differs from monomial count")
        if len(set(self.monomials)) != len(self.monomials):
            raise DimensionError("block monomials must be distinct")

    @property
    def rows(self) -> int:
        return len(self.matrix)

    @property
    def cols(self) -> int:
        return len(self.monomials)

    @property
    def nvars(self) -> int:
        return len(self.monomials[0]) if self.monomials else 0

    def row_polynomial(self, i: int, variables: Sequence[str]) -> LaurentPoly:
        return LaurentPoly(variables, {a: c for a, c in zip(self.monomials, self.matrix[i]) if c})

    def polynomials(self, variables: Sequence[str]) -> list[LaurentPoly]:
        return [self.row_polynomial(i, variables) for i in range(self.rows)]


def block_from_polynomials(polys: Sequence[LaurentPoly], indices: Sequence[int] = (), label: str = "") -> Block:
    """Linear block over the union of the supports; equal monomials share a column."""
    monos = sorted({a for f in polys for a in f.terms})
    matrix = tuple(tuple(f.terms.get(a, PuiseuxScalar()) for a in monos) for f in polys)
    return Block(matrix, tuple(monos), tuple(indices), label)


@dataclass(frozen=True)
class AuxDefinition:
    """Auxiliary variable ``var`` is defined by polynomial ``poly`` of the system."""

    var: int
    poly: int
    kind: str


@dataclass(frozen=True)
class Provenance:
    construction: str
    n_original: int
    aux: tuple[AuxDefinition, ...] = ()
    elided: tuple[str, ...] = ()
    notes: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class ConcreteSystem:
    variables: tuple[str, ...]
    polynomials: tuple[LaurentPoly, ...]
    blocks: tuple[Block, ...] | None
    provenance: Provenance

    @property
    def n(self) -> int:
        return len(self.variables)

    def target(self) -> list[LaurentPoly]:
        """The system at ``t = 1``."""
        return [f.at_t_one() for f in self.polynomials]

    def original_variables(self) -> tuple[str, ...]:
        return self.variables[: self.provenance.n_original]


# ---------------------------------------------------------------------------
# Parametrized descriptors
# ---------------------------------------------------------------------------

Scalar = Union[Fraction, GaussianRational]


@dataclass(frozen=True)
class Term:
    coeff: Scalar
    exponent: Exponent
    param: int | None = None


def _check_exponent(a, n: int, where: str) -> Exponent:
    a = tuple(int(x) for x in a)
    if len(a) != n:
        raise DimensionError(f"exponent of length {len(a)} where {n} expected", where)
    return a


class VerticalSystem:
    """``f_i = Σ_j c_{i,j} a_j x^{α_j}``."""

    kind = "vertical"

    def __init__(self, variables: Sequence[str], coeffs, exponents, parameters: Sequence[str] | None = None):
        self.variables = tuple(variables)
        n = len(self.variables)
        self.exponents = tuple(_check_exponent(a, n, f"/exponents/{j}") for j, a in enumerate(exponents))
        m = len(self.exponents)
        self.coeffs = tuple(tuple(exact_scalar(c) for c in row) for row in coeffs)
        for i, row in enumerate(self.coeffs):
            if len(row) != m:
                raise DimensionError(f"coefficient row has {len(row)} entries, expected {m}", f"/coefficients/{i}")
            if all(c == 0 for c in row):
                raise DimensionError("coefficient row is identically zero", f"/coefficients/{i}")
        self.parameters = tuple(parameters) if parameters else tuple(f"a{j + 1}" for j in range(m))
        if len(self.parameters) != m:
            raise DimensionError("parameter count must equal the number of exponents", "/ring/parameters")

    @property
    def n_polys(self) -> int:
        return len(self.coeffs)

    @property
    def parameter_count(self) -> int:
        return len(self.exponents)

    def terms(self) -> list[list[Term]]:
        return [[Term(c, self.exponents[j], j) for j, c in enumerate(row) if c != 0] for row in self.coeffs]


class HorizontalSystem:
    """``f_i = Σ_j c_{i,j} a_{i,j} q_j(x)``; one parameter per nonzero ``c_{i,j}`` in row-major order."""

    kind = "horizontal"

    def __init__(self, variables: Sequence[str], coeffs, support: Sequence[LaurentPoly], parameters: Sequence[str] | None = None):
        self.variables = tuple(variables)
        self.support = tuple(support)
        m = len(self.support)
        for j, q in enumerate(self.support):
            if q.variables != self.variables:
                raise DimensionError("support polynomial ring mismatch", f"/support/{j}")
            if q.is_zero():
                raise DimensionError("support polynomial is zero", f"/support/{j}")
            if any(not c.is_constant() for c in q.terms.values()):
                raise DimensionError("support coefficients must be constants", f"/support/{j}")
        self.coeffs = tuple(tuple(exact_scalar(c) for c in row) for row in coeffs)
        self.param_index: list[list[int | None]] = []
        k = 0
        for i, row in enumerate(self.coeffs):
            if len(row) != m:
                raise DimensionError(f"coefficient row has {len(row)} entries, expected {m}", f"/coefficients/{i}")
            if all(c == 0 for c in row):
                raise DimensionError("coefficient row is identically zero", f"/coefficients/{i}")
            idx = []
            for c in row:
                if c != 0:
                    idx.append(k)
                    k += 1
                else:
                    idx.append(None)
            self.param_index.append(idx)
        self.parameters = tuple(parameters) if parameters else tuple(f"a{p + 1}" for p in range(k))
        if len(self.parameters) != k:
            raise DimensionError(f"expected {k} parameters (one per nonzero coefficient)", "/ring/parameters")

    @property
    def n_polys(self) -> int:
        return len(self.coeffs)

    @property
    def parameter_count(self) -> int:
        return len(self.parameters)

    def terms(self) -> list[list[Term]]:
        out = []
        for i, row in enumerate(self.coeffs):
            acc: list[Term] = []
            for j, c in enumerate(row):
                if c == 0:
                    continue
                for a, qc in self.support[j].terms.items():
                    acc.append(Term(exact_scalar(c * qc.constant_value()), a, self.param_index[i][j]))
            out.append(acc)
        return out


@dataclass(frozen=True)
class TransverseBase:
    base: tuple[LaurentPoly, ...]
    powers: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        l = len(self.base)
        for j, row in enumerate(self.powers):
            if len(row) != l:
                raise DimensionError(f"power row has {len(row)} entries, expected {l}", f"/base/powers/{j}")

    def verify(self, support: Sequence[LaurentPoly]) -> None:
        if len(self.powers) != len(support):
            raise BaseMismatch("one power vector per support polynomial is required")
        for j, q in enumerate(support):
            prod = LaurentPoly.constant(q.variables, 1)
            for b, k in zip(self.base, self.powers[j]):
                if k:
                    prod = prod * (b ** k)
            if prod != q:
                raise BaseMismatch(f"support polynomial {j} is not the stated product of base polynomials")


class PlainSystem:
    """Explicit polynomials whose terms may reference parameters."""

    kind = "plain"

    def __init__(self, variables: Sequence[str], polys: Sequence[Sequence[Term]], parameters: Sequence[str] = (),
                 blocks: Sequence[Sequence[int]] | None = None):
        self.variables = tuple(variables)
        n = len(self.variables)
        self.parameters = tuple(parameters)
        self.polys = []
        for i, terms in enumerate(polys):
            if not terms:
                raise DimensionError("polynomial has no terms", f"/polynomials/{i}")
            clean = []
            for t in terms:
                a = _check_exponent(t.exponent, n, f"/polynomials/{i}")
                if t.param is not None and not 0 <= t.param < len(self.parameters):
                    raise DimensionError("unknown parameter reference", f"/polynomials/{i}")
                clean.append(Term(exact_scalar(t.coeff), a, t.param))
            self.polys.append(tuple(clean))
        self.polys = tuple(self.polys)
        if blocks is not None:
            flat = sorted(i for g in blocks for i in g)
            if flat != list(range(len(self.polys))):
                raise DimensionError("blocks must partition the polynomial indices", "/blocks")
            self.blocks = tuple(tuple(g) for g in blocks)
        else:
            self.blocks = None

    @property
    def n_polys(self) -> int:
        return len(self.polys)

    @property
    def parameter_count(self) -> int:
        return len(self.parameters)

    def has_parameters(self) -> bool:
        return any(t.param is not None for f in self.polys for t in f)

    def terms(self) -> list[list[Term]]:
        return [list(f) for f in self.polys]


ParamSystem = Union[VerticalSystem, HorizontalSystem, PlainSystem]


# ---------------------------------------------------------------------------
# Specialization
# ---------------------------------------------------------------------------


def _check_params(P: Sequence, v: Sequence, count: int) -> tuple[list, list[Fraction]]:
    if len(P) != count or len(v) != count:
        raise DimensionError(f"expected {count} parameter values and valuations, got {len(P)} and {len(v)}")
    P = [exact_scalar(p) for p in P]
    for k, p in enumerate(P):
        if p == 0:
            raise ZeroParameter(f"parameter {k} is zero")
    return P, [to_fraction(x) for x in v]


def _param_scalar(c, k: int | None, P, v) -> PuiseuxScalar:
    if k is None:
        return PuiseuxScalar.constant(c)
    return PuiseuxScalar.monomial(exact_scalar(c * P[k]), v[k])


def _polys_from_terms(variables, terms: list[list[Term]], P, v) -> list[LaurentPoly]:
    return [LaurentPoly(variables, [(t.exponent, _param_scalar(t.coeff, t.param, P, v)) for t in row]) for row in terms]


def vertical_blocks(V: VerticalSystem, P, v) -> list[Block]:
    P, v = _check_params(P, v, V.parameter_count)
    cols: dict[Exponent, list[PuiseuxScalar]] = {}
    for j, a in enumerate(V.exponents):
        col = [PuiseuxScalar.monomial(exact_scalar(row[j] * P[j]), v[j]) if row[j] != 0 else PuiseuxScalar()
               for row in V.coeffs]
        if a in cols:
            cols[a] = [x + y for x, y in zip(cols[a], col)]
        else:
            cols[a] = col
    monos = sorted(cols)
    matrix = tuple(tuple(cols[a][i] for a in monos) for i in range(V.n_polys))
    return [Block(matrix, tuple(monos), tuple(range(V.n_polys)), "linear")]


def specialize(system: ParamSystem, P, v) -> ConcreteSystem:
    P, v = _check_params(P, v, system.parameter_count)
    polys = _polys_from_terms(system.variables, system.terms(), P, v)
    n = len(system.variables)
    if isinstance(system, VerticalSystem):
        blocks = tuple(vertical_blocks(system, P, v))
    elif isinstance(system, PlainSystem):
        groups = system.blocks or [(i,) for i in range(len(polys))]
        blocks = tuple(block_from_polynomials([polys[i] for i in g], g) for g in groups)
    else:
        blocks = None
    return ConcreteSystem(system.variables, tuple(polys), blocks, Provenance("specialize", n))


def term_order(system: PlainSystem) -> list[list[Exponent]]:
    """Exponents of each polynomial in order of first appearance."""
    out = []
    for poly in system.polys:
        seen: list[Exponent] = []
        for term in poly:
            a = tuple(term.exponent)
            if a not in seen:
                seen.append(a)
        out.append(seen)
    return out


def bkk_system(
    variables: Sequence[str],
    target: Sequence[LaurentPoly],
    v: Sequence,
    order: Sequence[Sequence[Exponent]] | None = None,
) -> ConcreteSystem:
    """Every term of the target system gets its own parameter, pinned to its coefficient.

    Valuations are read in ``order`` (per polynomial), defaulting to sorted exponents.
    """
    count = sum(len(f) for f in target)
    if len(v) != count:
        raise DimensionError(f"expected {count} valuations, one per term")
    polys = []
    k = 0
    for i, f in enumerate(target):
        coeffs = dict(f.items())
        exps = [tuple(a) for a in order[i]] if order is not None else sorted(coeffs)
        if sorted(exps) != sorted(coeffs):
            raise DimensionError(f"term order for polynomial {i} does not match its support")
        terms = {}
        for a in exps:
            terms[a] = PuiseuxScalar.monomial(coeffs[a].at_one(), to_fraction(v[k]))
            k += 1
        polys.append(LaurentPoly(variables, terms))
    blocks = tuple(block_from_polynomials([f], (i,)) for i, f in enumerate(polys))
    return ConcreteSystem(tuple(variables), tuple(polys), blocks, Provenance("bkk", len(variables)))


def term_count(polys: Sequence[LaurentPoly]) -> int:
    return sum(len(f) for f in polys)


# ---------------------------------------------------------------------------
# Modifications
# ---------------------------------------------------------------------------


def _fresh_names(prefix: str, count: int, taken: set[str]) -> list[str]:
    out = []
    for k in range(count):
        name = f"{prefix}{k + 1}"
        while name in taken:
            name += "_"
        taken.add(name)
        out.append(name)
    return out


def _embed(f: LaurentPoly, variables: Sequence[str]) -> LaurentPoly:
    return f.with_variables(variables, list(range(f.nvars)))


def _unit(N: int, i: int) -> Exponent:
    e = [0] * N
    e[i] = 1
    return tuple(e)


def _monomial_of(q: LaurentPoly) -> tuple[Exponent, Scalar] | None:
    if len(q) != 1:
        return None
    (a, c), = q.terms.items()
    if not c.is_constant():
        return None
    return a, c.constant_value()


def _assemble(variables, linear_rows, defs, construction, n_x, aux, elided, notes=()) -> ConcreteSystem:
    """Linear rows first, then one hypersurface per definition polynomial."""
    polys = list(linear_rows) + list(defs)
    blocks = [block_from_polynomials(linear_rows, tuple(range(len(linear_rows))), "linear")]
    for k, g in enumerate(defs):
        idx = len(linear_rows) + k
        blocks.append(block_from_polynomials([g], (idx,), f"hyper{idx}"))
    return ConcreteSystem(tuple(variables), tuple(polys), tuple(blocks),
                          Provenance(construction, n_x, tuple(aux), tuple(elided), tuple(notes)))


def horizontal_modification(H: HorizontalSystem, P, v, elide: bool = True) -> ConcreteSystem:
    """Linear rows in ``y`` plus ``y_j − q_j(x)``; monomial supports are substituted directly."""
    P, v = _check_params(P, v, H.parameter_count)
    n = len(H.variables)
    keep = [j for j, q in enumerate(H.support) if not (elide and _monomial_of(q) is not None)]
    ynames = _fresh_names("y", len(keep), set(H.variables))
    variables = H.variables + tuple(ynames)
    N = len(variables)
    slot: dict[int, LaurentPoly] = {}
    for k, j in enumerate(keep):
        slot[j] = LaurentPoly.monomial(variables, _unit(N, n + k))
    for j, q in enumerate(H.support):
        if j not in slot:
            slot[j] = _embed(q, variables)
    rows = []
    for i, row in enumerate(H.coeffs):
        f = LaurentPoly(variables)
        for j, c in enumerate(row):
            if c != 0:
                f = f + slot[j] * _param_scalar(c, H.param_index[i][j], P, v)
        rows.append(f)
    defs, aux = [], []
    for k, j in enumerate(keep):
        defs.append(slot[j] - _embed(H.support[j], variables))
        aux.append(AuxDefinition(n + k, H.n_polys + k, "y"))
    elided = [f"y{j + 1}" for j in range(len(H.support)) if j not in keep]
    return _assemble(variables, rows, defs, "horizontal", n, aux, elided)


def two_stage_modification(H: HorizontalSystem, base: TransverseBase, P, v, elide: bool = True) -> ConcreteSystem:
    """Linear rows in ``z``, ``z_j − Π y_k^{β_{j,k}}`` and ``y_k − b_k``.

    With ``elide`` a base polynomial that is a monomial is substituted for its
    ``y_k``; a ``z_j`` whose product is then a pure ``x`` monomial, or equals a
    single kept ``y_k``, is substituted as well.
    """
    base.verify(H.support)
    P, v = _check_params(P, v, H.parameter_count)
    n = len(H.variables)
    l = len(base.base)
    keep_y = [k for k, b in enumerate(base.base) if not (elide and _monomial_of(b) is not None)]
    taken = set(H.variables)
    ynames = _fresh_names("y", len(keep_y), taken)

    def unit_power(j):
        nz = [k for k in range(l) if base.powers[j][k] != 0]
        return nz[0] if len(nz) == 1 and base.powers[j][nz[0]] == 1 else None

    # Decide which z survive before fixing the ring.
    keep_z = []
    for j in range(len(H.support)):
        involved_y = [k for k in range(l) if base.powers[j][k] != 0 and k in keep_y]
        if elide and (not involved_y or (unit_power(j) is not None and unit_power(j) in keep_y)):
            continue
        keep_z.append(j)
    znames = _fresh_names("z", len(keep_z), taken)
    variables = H.variables + tuple(ynames) + tuple(znames)
    N = len(variables)

    yval: dict[int, LaurentPoly] = {}
    for pos, k in enumerate(keep_y):
        yval[k] = LaurentPoly.monomial(variables, _unit(N, n + pos))
    for k, b in enumerate(base.base):
        if k not in yval:
            yval[k] = _embed(b, variables)
    prod: dict[int, LaurentPoly] = {}
    for j in range(len(H.support)):
        p = LaurentPoly.constant(variables, 1)
        for k in range(l):
            if base.powers[j][k]:
                p = p * yval[k] ** base.powers[j][k]
        prod[j] = p
    slot: dict[int, LaurentPoly] = {}
    for pos, j in enumerate(keep_z):
        slot[j] = LaurentPoly.monomial(variables, _unit(N, n + len(keep_y) + pos))
    for j in range(len(H.support)):
        if j not in slot:
            slot[j] = prod[j]

    rows = []
    for i, row in enumerate(H.coeffs):
        f = LaurentPoly(variables)
        for j, c in enumerate(row):
            if c != 0:
                f = f + slot[j] * _param_scalar(c, H.param_index[i][j], P, v)
        rows.append(f)
    defs, aux = [], []
    for pos, j in enumerate(keep_z):
        defs.append(slot[j] - prod[j])
    for pos, k in enumerate(keep_y):
        defs.append(yval[k] - _embed(base.base[k], variables))
    # Creation order: y first (defined by the trailing polynomials), then z.
    for pos, k in enumerate(keep_y):
        aux.append(AuxDefinition(n + pos, H.n_polys + len(keep_z) + pos, "y"))
    for pos, j in enumerate(keep_z):
        aux.append(AuxDefinition(n + len(keep_y) + pos, H.n_polys + pos, "z"))
    elided = [f"y{k + 1}" for k in range(l) if k not in keep_y]
    elided += [f"z{j + 1}" for j in range(len(H.support)) if j not in keep_z]
    return _assemble(variables, rows, defs, "two-stage", n, aux, elided)


def relaxation_slots(H: HorizontalSystem) -> list[tuple[int, Exponent]]:
    """Fresh parameter slots ``(j, α_k)`` in order: support-major, exponents sorted."""
    return [(j, a) for j, q in enumerate(H.support) for a in sorted(q.terms)]


def relaxed_modification(H: HorizontalSystem, P, v, fresh_values: Sequence | None = None,
                         fresh_valuations: Sequence | None = None, elide: bool = True,
                         seed: int = 0) -> ConcreteSystem:
    """``y_j − Σ_k q_{j,k} b_{j,k} t^{v_{j,k}} x^{α_k}`` with fresh ``b``.

    Fresh values default to integers drawn from ``[2, 97]``; fresh valuations
    default to integers drawn from ``[1, 10^4]``, both from ``seed``.
    """
    P, v = _check_params(P, v, H.parameter_count)
    slots = relaxation_slots(H)
    rng = random.Random(seed)
    if fresh_values is None:
        fresh_values = [rng.randint(2, 97) for _ in slots]
    if fresh_valuations is None:
        fresh_valuations = [rng.randint(1, 10 ** 4) for _ in slots]
    bP, bv = _check_params(fresh_values, fresh_valuations, len(slots))
    n = len(H.variables)
    relaxed: list[LaurentPoly] = []
    k = 0
    for j, q in enumerate(H.support):
        terms = {}
        for a in sorted(q.terms):
            terms[a] = PuiseuxScalar.monomial(exact_scalar(q.terms[a].constant_value() * bP[k]), bv[k])
            k += 1
        relaxed.append(LaurentPoly(H.variables, terms))
    keep = [j for j, q in enumerate(relaxed) if not (elide and len(q) == 1)]
    ynames = _fresh_names("y", len(keep), set(H.variables))
    variables = H.variables + tuple(ynames)
    N = len(variables)
    slot: dict[int, LaurentPoly] = {}
    for pos, j in enumerate(keep):
        slot[j] = LaurentPoly.monomial(variables, _unit(N, n + pos))
    for j, q in enumerate(relaxed):
        if j not in slot:
            slot[j] = _embed(q, variables)
    rows = []
    for i, row in enumerate(H.coeffs):
        f = LaurentPoly(variables)
        for j, c in enumerate(row):
            if c != 0:
                f = f + slot[j] * _param_scalar(c, H.param_index[i][j], P, v)
        rows.append(f)
    defs, aux = [], []
    for pos, j in enumerate(keep):
        defs.append(slot[j] - _embed(relaxed[j], variables))
        aux.append(AuxDefinition(n + pos, H.n_polys + pos, "y"))
    elided = [f"y{j + 1}" for j in range(len(H.support)) if j not in keep]
    return _assemble(variables, rows, defs, "relaxed", n, aux, elided)


def identity_base(H: HorizontalSystem) -> TransverseBase:
    m = len(H.support)
    return TransverseBase(tuple(H.support), tuple(tuple(int(i == j) for j in range(m)) for i in range(m)))


# ---------------------------------------------------------------------------
# Back-substitution
# ---------------------------------------------------------------------------


def _solve_for(defining: LaurentPoly, var: int) -> LaurentPoly:
    """Return ``u`` from a definition ``c·u + rest`` with a monomial ``c``."""
    lead = [(a, c) for a, c in defining.terms.items() if a[var] != 0]
    if len(lead) != 1 or lead[0][0][var] != 1 or any(x for i, x in enumerate(lead[0][0]) if i != var):
        raise InconsistentSolution("auxiliary variable is not isolated in its definition")
    a, c = lead[0]
    if not c.is_monomial():
        raise InconsistentSolution("auxiliary coefficient is not a monomial")
    rest = LaurentPoly(defining.variables, {b: d for b, d in defining.terms.items() if b != a})
    return -rest * (PuiseuxScalar.constant(1) / c)


def substitute_back(obj, system: ConcreteSystem, tol: float = 1e-8):
    """Undo a modification.

    ``obj`` may be a list aligned with ``system.polynomials`` (for instance a
    homotopy; its own definition rows are used), a single polynomial (the
    system's definitions are used) or a numeric solution vector (projected to
    the original variables after a consistency check).
    """
    prov = system.provenance
    n_x = prov.n_original
    xvars = system.variables[:n_x]
    if isinstance(obj, LaurentPoly):
        defs = list(system.polynomials)
        work = {-1: obj}
    elif obj and isinstance(obj[0], LaurentPoly):
        if len(obj) != len(system.polynomials):
            raise DimensionError("polynomial list is not aligned with the system")
        defs = list(obj)
        work = {i: f for i, f in enumerate(obj)}
    else:
        return _project_solution(obj, system, tol)
    def_polys = {d.poly for d in prov.aux}
    for d in reversed(prov.aux):
        value = _solve_for(defs[d.poly], d.var)
        for key in list(work):
            if key == d.poly:
                continue
            if any(a[d.var] for a in work[key].terms):
                work[key] = work[key].substitute(d.var, value)
        for key in range(len(defs)):
            if key in def_polys and key != d.poly and any(a[d.var] for a in defs[key].terms):
                defs[key] = defs[key].substitute(d.var, value)
        work.pop(d.poly, None)
    out = []
    for key in sorted(work):
        f = work[key]
        if any(any(a[n_x:]) for a in f.terms):
            raise InconsistentSolution("auxiliary variables survive back-substitution")
        out.append(LaurentPoly(xvars, {a[:n_x]: c for a, c in f.terms.items()}))
    return out[0] if isinstance(obj, LaurentPoly) else out


def _project_solution(point: Sequence[complex], system: ConcreteSystem, tol: float) -> list[complex]:
    if len(point) != system.n:
        raise DimensionError("solution has the wrong dimension")
    for d in system.provenance.aux:
        g = system.polynomials[d.poly]
        r = abs(evaluate_numeric(g, 1.0, point)) / (1.0 + term_magnitudes(g, 1.0, point))
        if not r <= tol:
            raise InconsistentSolution(
                f"auxiliary variable {system.variables[d.var]} disagrees with its definition (residual {r:.3e})"
            )
    return list(point[: system.provenance.n_original])
