"""Zero-dimensional stable intersections of tropicalized blocks.

A block with coefficient matrix ``M`` (rows = polynomials, columns = monomials
``x^{α_k}``) generates a linear ideal whose tropical variety, pulled back to
``x``-space, is the locus where every *circuit* of that ideal attains its
minimum at least twice. Circuits here are the linear forms of minimal support
in the row space of ``M``; for a one-row block the row itself is the only one.

Points are enumerated exhaustively: for each block choose ``rank`` tie pairs
from its circuits, solve the square linear system and verify membership.
Each block ``b > 0`` is shifted by ``ε·u_b`` for a random integer ``u_b`` and
all arithmetic is done in ``Q[ε]/(ε²)`` ordered lexicographically, which
yields the stable intersection together with its multiplicities even when the
unperturbed configuration is not transverse.
"""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateColumn,
    DimensionMismatch,
    IncompleteEnumeration,
    NonGenericValuation,
    PerturbationFailure,
    RankDeficient,
)
from .exact import INFINITE, IntMatrix, integer_kernel, invariant_factors, lattice_index, rank as exact_rank, rref
from .puiseux import ONE, ZERO, PuiseuxScalar, TropicalForm
from .systems import Block

Exponent = tuple[int, ...]
MAX_CIRCUIT_SUBSETS = 200_000
MAX_REDRAWS = 5

# ---------------------------------------------------------------------------
# Linear algebra over Puiseux polynomials
# ---------------------------------------------------------------------------


def _check_deadline(deadline: float | None, what: str) -> None:
    if deadline is not None and time.perf_counter() > deadline:
        raise IncompleteEnumeration(f"time budget exhausted during {what}")


def puiseux_det(matrix: Sequence[Sequence[PuiseuxScalar]], deadline: float | None = None) -> PuiseuxScalar:
    """Fraction-free (Bareiss) determinant with exact Puiseux division."""
    A = [list(r) for r in matrix]
    n = len(A)
    if n == 0:
        return ONE
    if n == 1:
        return A[0][0]
    if n == 2:
        return A[0][0] * A[1][1] - A[0][1] * A[1][0]
    sign = 1
    prev = ONE
    for k in range(n - 1):
        _check_deadline(deadline, "a Puiseux determinant")
        if not A[k][k]:
            for i in range(k + 1, n):
                if A[i][k]:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return ZERO
        akk = A[k][k]
        for i in range(k + 1, n):
            aik = A[i][k]
            for j in range(k + 1, n):
                num = A[i][j] * akk - aik * A[k][j]
                A[i][j] = num.divexact(prev) if prev != ONE else num
        prev = akk
    return A[n - 1][n - 1] if sign > 0 else -A[n - 1][n - 1]


_PRIME = (1 << 61) - 1


def specialized_rank(matrix: Sequence[Sequence[PuiseuxScalar]], seed: int = 0) -> int | None:
    """Rank after substituting a random value for ``t`` modulo a large prime.

    Specialization can only lower the rank, so a full result certifies full
    rank over the Puiseux field. Returns None for non-rational coefficients.
    """
    A = [list(r) for r in matrix]
    if not A:
        return 0
    denoms = {e.denominator for row in A for x in row for e, _ in x.terms}
    D = math.lcm(*denoms) if denoms else 1
    s0 = random.Random(seed).randrange(2, _PRIME - 1)
    rows = []
    for row in A:
        out = []
        for x in row:
            acc = 0
            for e, c in x.terms:
                if not isinstance(c, (int, Fraction)):
                    return None
                c = Fraction(c)
                if c.denominator % _PRIME == 0:
                    return None
                term = c.numerator * pow(c.denominator, -1, _PRIME) * pow(s0, int(e * D), _PRIME)
                acc = (acc + term) % _PRIME
            out.append(acc)
        rows.append(out)
    r = 0
    cols = len(rows[0])
    for c in range(cols):
        p = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = pow(rows[r][c], -1, _PRIME)
        for i in range(r + 1, len(rows)):
            f = rows[i][c] * inv % _PRIME
            if f:
                rows[i] = [(a - f * b) % _PRIME for a, b in zip(rows[i], rows[r])]
        r += 1
        if r == len(rows):
            break
    return r


def puiseux_rank(matrix: Sequence[Sequence[PuiseuxScalar]], deadline: float | None = None) -> int:
    A = [list(r) for r in matrix]
    if not A:
        return 0
    rows, cols = len(A), len(A[0])
    r = 0
    prev = ONE
    for c in range(cols):
        if r == rows:
            break
        _check_deadline(deadline, "a Puiseux rank computation")
        p = next((i for i in range(r, rows) if A[i][c]), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        arc = A[r][c]
        for i in range(r + 1, rows):
            aic = A[i][c]
            for j in range(c + 1, cols):
                num = A[i][j] * arc - aic * A[r][j]
                A[i][j] = num.divexact(prev) if prev != ONE else num
            A[i][c] = ZERO
        prev = arc
        r += 1
    return r


# ---------------------------------------------------------------------------
# Circuits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CircuitForm:
    block: int
    support: tuple[int, ...]
    form: TropicalForm
    coefficients: tuple[PuiseuxScalar, ...] = field(default=(), compare=False)


def _column_shifts(M) -> list[Fraction] | None:
    """Per-column exponents when every column is a constant vector times one power of t."""
    shifts = []
    for k in range(len(M[0])):
        exps = {M[i][k].valuation() for i in range(len(M)) if M[i][k]}
        if len(exps) != 1 or not all(M[i][k].is_monomial() for i in range(len(M)) if M[i][k]):
            return None
        shifts.append(exps.pop())
    return shifts


def circuits(block: Block, block_id: int = 0, cap: int = MAX_CIRCUIT_SUBSETS,
             deadline: float | None = None) -> list[CircuitForm]:
    """All minimal-support linear forms in the row space of the block matrix.

    Each circuit vanishes on an ``(r-1)``-subset of columns of rank ``r-1``
    and is found from that subset. When every column is a constant vector
    times a single power of ``t`` the work is done over the constants and the
    powers are restored afterwards.
    """
    M = block.matrix
    r, s = block.rows, block.cols
    for k in range(s):
        if all(not M[i][k] for i in range(r)):
            raise DegenerateColumn(f"block {block_id}: column {k} is zero")
    if r == 0:
        return []
    shifts = _column_shifts(M)
    if shifts is not None:
        Q = [[M[i][k].leading_coefficient() if M[i][k] else 0 for k in range(s)] for i in range(r)]
        if exact_rank(Q) < r:
            raise RankDeficient(f"block {block_id} does not have full row rank")
    elif specialized_rank(M) != r and puiseux_rank(M, deadline) < r:
        raise RankDeficient(f"block {block_id} does not have full row rank")
    found: dict[tuple[int, ...], CircuitForm] = {}
    hyperplanes: list[frozenset[int]] = []
    examined = 0
    for T in itertools.combinations(range(s), r - 1):
        Tset = set(T)
        if any(Tset <= h for h in hyperplanes):
            continue
        examined += 1
        if examined > cap:
            raise IncompleteEnumeration(
                f"block {block_id}: circuit enumeration exceeded {cap} candidate subsets "
                f"({len(found)} circuits found so far)"
            )
        _check_deadline(deadline, f"circuit enumeration of block {block_id} ({len(found)} circuits found)")
        if shifts is not None:
            coeffs = _rational_circuit(Q, T, shifts)
            if coeffs is None:
                continue
        else:
            coeffs = _puiseux_circuit(M, T, deadline)
            if coeffs is None:
                continue
        support = tuple(k for k in range(s) if coeffs[k])
        hyperplanes.append(frozenset(range(s)) - frozenset(support))
        if support in found:
            continue
        if len(support) == 1:
            raise DegenerateColumn(
                f"block {block_id}: monomial {block.monomials[support[0]]} is forced to vanish"
            )
        form = TropicalForm([(block.monomials[k], coeffs[k].valuation()) for k in support])
        found[support] = CircuitForm(block_id, support, form, tuple(coeffs[k] for k in support))
    return [found[k] for k in sorted(found)]


def _puiseux_circuit(M, T, deadline=None):
    """Row-space vector vanishing on columns ``T`` via Cramer minors; None if ``T`` is dependent."""
    r, s = len(M), len(M[0])
    sub = [[M[i][j] for j in T] for i in range(r)]
    lam = []
    for i in range(r):
        minor = puiseux_det([row for k, row in enumerate(sub) if k != i], deadline)
        lam.append(minor if i % 2 == 0 else -minor)
    if all(not x for x in lam):
        return None
    coeffs = []
    for k in range(s):
        c = ZERO
        for i in range(r):
            if lam[i] and M[i][k]:
                c = c + lam[i] * M[i][k]
        coeffs.append(c)
    return coeffs


def _rational_circuit(Q, T, shifts):
    """Same as :func:`_puiseux_circuit` for ``M = Q · diag(t^shifts)``, via a left kernel of ``Q[:, T]``."""
    r, s = len(Q), len(Q[0])
    # Left kernel of Q[:, T]: rref of [Q[:, T]^T] gives the relations among rows.
    R, piv = rref([[Q[i][j] for i in range(r)] for j in T])
    if len(piv) != r - 1:
        return None
    free = next(c for c in range(r) if c not in piv)
    lam = [0] * r
    lam[free] = 1
    for row, p in zip(R, piv):
        lam[p] = -row[free]
    coeffs = []
    for k in range(s):
        c = sum((lam[i] * Q[i][k] for i in range(r) if lam[i] and Q[i][k]), 0)
        coeffs.append(PuiseuxScalar.monomial(c, shifts[k]) if c else ZERO)
    return coeffs


# ---------------------------------------------------------------------------
# Stable intersection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TropicalPoint:
    w: tuple[Fraction, ...]
    tie_witness: tuple[tuple[frozenset[int], ...], ...]
    cell_lattices: tuple[IntMatrix, ...]
    multiplicity: int
    transverse: bool = True

    def as_json(self) -> dict:
        return {"w": [str(x) for x in self.w], "multiplicity": self.multiplicity, "transverse": self.transverse}


@dataclass
class _Circ:
    block: int
    support: tuple[int, ...]
    exps: tuple[Exponent, ...]
    vals: tuple[Fraction, ...]


def _dot(a: Sequence, b: Sequence):
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def _prepare(blocks: Sequence[Block], circs_by_block):
    out = []
    for b, cl in enumerate(circs_by_block):
        for c in cl:
            exps = tuple(blocks[b].monomials[k] for k in c.support)
            out.append(_Circ(b, c.support, exps, tuple(c.form.valuations())))
    return out


class _Echelon:
    """Row echelon form with rhs in ``Q[ε]/(ε²)``.

    Rows are kept forward-reduced only; ``reduced()`` performs the back
    substitution on demand.
    """

    __slots__ = ("n", "rows", "_reduced")

    def __init__(self, n: int, rows=None):
        self.n = n
        self.rows = rows or []  # (pivot, coeffs, rhs0, rhs1), pivot entry 1
        self._reduced = None

    def add(self, row: Sequence[int], rhs0: Fraction, rhs1: Fraction):
        vec = list(row)
        r0, r1 = rhs0, rhs1
        for p, coeffs, c0, c1 in self.rows:
            f = vec[p]
            if f:
                vec = [x - f * y if y else x for x, y in zip(vec, coeffs)]
                r0 -= f * c0
                r1 -= f * c1
        piv = next((i for i, x in enumerate(vec) if x), None)
        if piv is None:
            return None
        inv = Fraction(1) / vec[piv]
        vec = [x * inv if x else 0 for x in vec]
        return _Echelon(self.n, self.rows + [(piv, vec, r0 * inv, r1 * inv)])

    def reduced(self):
        """Rows in reduced echelon form."""
        if self._reduced is None:
            rows = [list(r) for r in self.rows]
            for k in range(len(rows) - 1, -1, -1):
                p, vec, r0, r1 = rows[k]
                for i in range(k):
                    f = rows[i][1][p]
                    if f:
                        rows[i][1] = [x - f * y if y else x for x, y in zip(rows[i][1], vec)]
                        rows[i][2] -= f * r0
                        rows[i][3] -= f * r1
            self._reduced = [tuple(r) for r in rows]
        return self._reduced

    def solution(self):
        w0 = [Fraction(0)] * self.n
        w1 = [Fraction(0)] * self.n
        for p, _, c0, c1 in self.reduced():
            w0[p] = Fraction(c0)
            w1[p] = Fraction(c1)
        return tuple(w0), tuple(w1)


class _FloatEchelon:
    """Floating-point row echelon form used for pruning during enumeration.

    Only the ``ε⁰`` part of the right-hand side is tracked; exact solutions
    are recomputed with :class:`_Echelon` at the leaves.
    """

    __slots__ = ("n", "rows", "_reduced")
    TOL = 1e-9

    def __init__(self, n: int, rows=None):
        self.n = n
        self.rows = rows or []  # (pivot, coeffs, rhs0), pivot entry 1
        self._reduced = None

    def add(self, row, rhs0: float):
        vec = np.array(row, dtype=float)
        r0 = float(rhs0)
        scale = max(1.0, float(np.abs(vec).max()))
        for p, coeffs, c0 in self.rows:
            f = vec[p]
            if f:
                vec = vec - f * coeffs
                r0 -= f * c0
        big = np.abs(vec) > self.TOL * scale
        if not big.any():
            return None
        piv = int(np.argmax(big))
        vec[~big] = 0.0
        inv = 1.0 / vec[piv]
        return _FloatEchelon(self.n, self.rows + [(piv, vec * inv, r0 * inv)])

    def reduced(self):
        if self._reduced is None:
            rows = [[p, c.copy(), r] for p, c, r in self.rows]
            for k in range(len(rows) - 1, -1, -1):
                p, vec, r0 = rows[k]
                for i in range(k):
                    f = rows[i][1][p]
                    if f:
                        rows[i][1] = rows[i][1] - f * vec
                        rows[i][2] -= f * r0
            self._reduced = [tuple(r) for r in rows]
        return self._reduced


PROJECT_MAX_FREE = 2


def _projected_feasible(ech: _FloatEchelon, A, h) -> bool | None:
    """Feasibility of ``A w ≤ h`` on the solution set of ``ech``.

    When at most ``PROJECT_MAX_FREE`` coordinates are free the constraints
    are projected onto them and decided by Fourier–Motzkin in floating point
    with a relative slack, so a branch is only cut when clearly infeasible.
    Returns None for higher-dimensional solution sets.
    """
    n = ech.n
    k = len(ech.rows)
    if n - k > PROJECT_MAX_FREE:
        return None
    if not len(A):
        return True
    piv = [p for p, _, _ in ech.rows]
    free = [c for c in range(n) if c not in set(piv)]
    if k:
        U = np.array([coeffs for _, coeffs, _ in ech.rows])
        r0 = np.array([c0 for _, _, c0 in ech.rows])
        M = U[:, piv]
        c0 = np.linalg.solve(M, r0)
        Cf = np.linalg.solve(M, U[:, free]) if free else np.zeros((k, 0))
        G = A[:, free] - A[:, piv] @ Cf
        b = h - A[:, piv] @ c0
    else:
        G, b = A, h
    tol = 1e-9 * max(1.0, float(np.abs(b).max()))
    if G.shape[1] == 2:
        g0 = G[:, 0]
        pos, neg, zero = g0 > tol, g0 < -tol, np.abs(g0) <= tol
        Gp, bp = G[pos] / g0[pos, None], b[pos] / g0[pos]
        Gn, bn = G[neg] / -g0[neg, None], b[neg] / -g0[neg]
        comb_g = (Gp[:, None, 1] + Gn[None, :, 1]).ravel()
        comb_b = (bp[:, None] + bn[None, :]).ravel()
        G = np.concatenate([G[zero, 1], comb_g])[:, None]
        b = np.concatenate([b[zero], comb_b])
        tol *= 4
    if G.shape[1] == 1:
        g = G[:, 0]
        if not len(g):
            return True
        scale = max(1.0, float(np.abs(g).max()))
        big = np.abs(g) > 1e-12 * scale
        if np.any(b[~big] < -tol):
            return False
        up = g > 0
        hi = (b[big & up] / g[big & up]).min() if np.any(big & up) else np.inf
        lo = (b[big & ~up] / g[big & ~up]).max() if np.any(big & ~up) else -np.inf
        return bool(lo <= hi + tol / min(1.0, float(np.abs(g[big]).min()) if np.any(big) else 1.0))
    return bool(np.all(b >= -tol))


def _line_of(ech: _FloatEchelon):
    """``(base, direction)`` of the solution set when at most one coordinate is free."""
    rows = ech.reduced()
    pivots = {p for p, _, _ in rows}
    free = [k for k in range(ech.n) if k not in pivots]
    if len(free) > 1:
        return None
    base = np.zeros(ech.n)
    direction = np.zeros(ech.n)
    for p, coeffs, r0 in rows:
        base[p] = r0
        if free:
            direction[p] = -coeffs[free[0]]
    if free:
        direction[free[0]] = 1.0
    return base, direction


def _double_min_at(g, h, z, tol) -> bool:
    vals = g * z + h
    return int(np.count_nonzero(vals <= vals.min() + tol)) >= 2


def _tropical_feasible(ech: _FloatEchelon, circ_arrays) -> bool:
    """Necessary condition on a line or point: every circuit attains its minimum twice.

    On a line each circuit's term values are affine in the free parameter; a
    circuit without repeated lines can only tie at crossings of its lines, so
    those crossings are the only candidates. Ties are tested with a slack so
    that rounding never discards a genuine branch.
    """
    line = _line_of(ech)
    if line is None:
        return True
    base, direction = line
    moving = bool(np.any(direction))
    cand = None  # None: no finite candidate set yet
    deferred = []
    for E, vals in circ_arrays:
        h = vals + E @ base
        tol = 1e-7 * max(1.0, float(np.abs(h).max()))
        g = E @ direction if moving else np.zeros(len(h))
        if not moving:
            if not _double_min_at(g, h, 0.0, tol):
                return False
            continue
        if cand is None:
            dg = g[:, None] - g[None, :]
            dh = h[:, None] - h[None, :]
            iu = np.triu_indices(len(g), 1)
            if np.any((np.abs(dg[iu]) <= tol) & (np.abs(dh[iu]) <= tol)):
                deferred.append((g, h, tol))
                continue
            ok = np.abs(dg[iu]) > tol
            zs = -dh[iu][ok] / dg[iu][ok]
            cand = [z for z in zs if _double_min_at(g, h, z, tol)
                    and all(_double_min_at(g2, h2, z, t2) for g2, h2, t2 in deferred)]
            deferred = []
        else:
            cand = [z for z in cand if _double_min_at(g, h, z, tol * (1 + abs(z)))]
        if cand is not None and not cand:
            return False
    return True


def _lp_feasible(eq_A, eq_b, A, h, n: int) -> bool:
    """Feasibility of ``eq_A w = eq_b``, ``A w ≤ h`` by linear programming."""
    if not len(A):
        return True
    from scipy.optimize import linprog

    scale = max(1.0, float(np.abs(h).max()))
    res = linprog(
        c=np.zeros(n), A_ub=A, b_ub=h + 1e-9 * scale,
        A_eq=np.array(eq_A) if eq_A else None, b_eq=np.array(eq_b) if eq_b else None,
        bounds=[(None, None)] * n, method="highs",
    )
    return res.status != 2


def _check_lineality(blocks: Sequence[Block], n: int) -> None:
    rows = []
    for b in blocks:
        base = b.monomials[0]
        for a in b.monomials[1:]:
            rows.append([Fraction(x - y) for x, y in zip(a, base)])
    spanned = exact_rank(rows) if rows else 0
    if spanned < n:
        raise NonGenericValuation(
            "monomial differences do not span the ambient space; the intersection is positive-dimensional"
        )


def _enumerate(blocks, circ_list, ranks, n, u, deadline=None):
    """Depth-first enumeration of tie systems; returns the set of solutions ``(w0, w1)``.

    At a transverse point the initial space of each block splits its columns
    into classes in which every pair is the exact argmin set of some circuit.
    Columns are therefore visited in order: each is either the smallest
    member of a new class or is tied directly to such a smallest member.
    """
    nb = len(blocks)
    pairs: list[dict] = [{} for _ in range(nb)]
    for c in circ_list:
        for a, b in itertools.combinations(range(len(c.support)), 2):
            key = (c.support[a], c.support[b])
            rhs = c.vals[a] - c.vals[b]
            ineqs = []
            for k in range(len(c.support)):
                if k not in (a, b):
                    ineqs.append((tuple(x - y for x, y in zip(c.exps[a], c.exps[k])), c.vals[k] - c.vals[a]))
            group = pairs[c.block].setdefault(key, {})
            if rhs in group:
                group[rhs] = group[rhs] & frozenset(ineqs)
            else:
                group[rhs] = frozenset(ineqs)
    def as_arrays(ineqs):
        ineqs = sorted(ineqs)
        A = np.array([[float(x) for x in a] for a, _ in ineqs]).reshape(len(ineqs), n)
        return A, np.array([float(v) for _, v in ineqs])

    options = [
        {key: [(rhs, *as_arrays(ineqs)) for rhs, ineqs in sorted(group.items())] for key, group in pb.items()}
        for pb in pairs
    ]
    order = sorted(range(nb), key=lambda b: (sum(len(g) for g in options[b].values()) / max(ranks[b], 1), b))
    circ_arrays = [
        (np.array(c.exps, dtype=float).reshape(len(c.exps), n), np.array([float(v) for v in c.vals]))
        for c in circ_list
    ]
    results: set = set()

    def leaf(eqs):
        ech = _Echelon(n)
        for row, rhs0, rhs1 in eqs:
            ech = ech.add(row, rhs0, rhs1)
            if ech is None:
                return
        if len(ech.rows) == n:
            results.add(ech.solution())

    visited = [0]

    def rec(bi: int, j: int, roots: tuple, ties: int, ech: _FloatEchelon, eqs, eq_A, eq_b, A, h):
        visited[0] += 1
        if visited[0] % 256 == 0:
            _check_deadline(deadline, f"tie enumeration ({len(results)} candidate points so far)")
        if bi == nb:
            leaf(eqs)
            return
        b = order[bi]
        m_b, r_b = blocks[b].cols, ranks[b]
        if j == m_b:
            if ties == r_b:
                rec(bi + 1, 0, (), 0, ech, eqs, eq_A, eq_b, A, h)
            return
        left = m_b - j
        if len(roots) < m_b - r_b:
            rec(bi, j + 1, roots + (j,), ties, ech, eqs, eq_A, eq_b, A, h)
        if ties >= r_b or r_b - ties > left:
            return
        for a in roots:
            row = tuple(x - y for x, y in zip(blocks[b].monomials[j], blocks[b].monomials[a]))
            for rhs, A_extra, h_extra in options[b].get((a, j), ()):
                new = ech.add(row, rhs)
                if new is None:
                    continue
                new_eq_A = eq_A + [[float(x) for x in row]]
                new_eq_b = eq_b + [float(rhs)]
                new_A = np.vstack([A, A_extra])
                new_h = np.concatenate([h, h_extra])
                ok = _projected_feasible(new, new_A, new_h)
                if ok is None:
                    ok = _lp_feasible(new_eq_A, new_eq_b, new_A, new_h, n)
                if not ok:
                    continue
                if not _tropical_feasible(new, circ_arrays):
                    continue
                new_eqs = eqs + [(row, rhs, Fraction(_dot(row, u[b])))]
                rec(bi, j + 1, roots, ties + 1, new, new_eqs, new_eq_A, new_eq_b, new_A, new_h)

    rec(0, 0, (), 0, _FloatEchelon(n), [], [], [], np.zeros((0, n)), np.zeros(0))
    return results


def _values(c: _Circ, w0, w1, u_b):
    """Perturbed term values ``val_k + α_k·(w − ε u_b)`` as pairs."""
    return [
        (v + _dot(a, w0), _dot(a, w1) - _dot(a, u_b))
        for a, v in zip(c.exps, c.vals)
    ]


def _argmins(c: _Circ, w0, w1, u_b, perturbed: bool):
    vals = _values(c, w0, w1, u_b)
    if not perturbed:
        vals = [(x, 0) for x, _ in vals]
    m = min(vals)
    return frozenset(i for i, x in enumerate(vals) if x == m)


def _leaf_ties(circ_list, w0, w1, u):
    """Perturbed argmin sets of every circuit, or None as soon as one is a singleton.

    Values are scaled by a common denominator so the inner products stay in
    integer arithmetic.
    """
    D = math.lcm(*(x.denominator for x in w0 + w1))
    W0 = [int(x * D) for x in w0]
    W1 = [int(x * D) for x in w1]
    ties = []
    for c in circ_list:
        ub = u[c.block]
        vals = []
        for a, v in zip(c.exps, c.vals):
            first = v * D + sum(x * y for x, y in zip(a, W0))
            second = sum(x * (y - D * z) for x, y, z in zip(a, W1, ub))
            vals.append((first, second))
        m = min(vals)
        t = frozenset(i for i, x in enumerate(vals) if x == m)
        if len(t) < 2:
            return None
        ties.append(t)
    return ties


def _forest_rows(circ_list, block: int, ties, ncols_hint=None):
    """Spanning-forest difference rows of the tie graph of one block.

    Returns ``(rows, edges)`` where ``edges`` counts forest edges in column space.
    """
    parent: dict[int, int] = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    rows = []
    exps: dict[int, Exponent] = {}
    for c, t in zip(circ_list, ties):
        if c.block != block:
            continue
        idx = sorted(t)
        for k in idx:
            exps[c.support[k]] = c.exps[k]
        for k in idx[1:]:
            a, b = c.support[idx[0]], c.support[k]
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
                rows.append(tuple(x - y for x, y in zip(exps[a], exps[b])))
    return rows


def _collinear_cell_row(circ_list, block: int, ties):
    """One row spanning a collinear hypersurface cell, scaled to its lattice length.

    A tie among three or more collinear exponents is a segment with interior
    lattice points; its forest rows are parallel and the lattice they span
    misses the segment's length. Returns None when the cell is not collinear.
    """
    exps = sorted({c.exps[k] for c, t in zip(circ_list, ties) if c.block == block for k in t})
    e0 = exps[0]
    diffs = [tuple(x - y for x, y in zip(e, e0)) for e in exps[1:]]
    g = math.gcd(*diffs[0])
    p = tuple(x // g for x in diffs[0])
    k = next(i for i, x in enumerate(p) if x)
    pos = [0]
    for d in diffs:
        if any(x * p[k] != y * d[k] for x, y in zip(d, p)):
            return None
        pos.append(d[k] // p[k])
    length = max(pos) - min(pos)
    return [tuple(length * x for x in p)]


def _lattice_multiplicity(per_block_rows: Sequence[Sequence[tuple[int, ...]]], n: int) -> int | None:
    """Index ``[Z^n : Σ Λ_b]``, or None when the tie lattices are not transverse."""
    all_rows = [r for rows in per_block_rows for r in rows]
    if not all_rows:
        return None
    G = IntMatrix.from_columns(all_rows, n)
    idx = lattice_index(G)
    return None if idx is INFINITE else idx


def _saturated_rows(rows: Sequence[tuple[int, ...]], n: int) -> IntMatrix:
    """Basis (as columns) of the saturation of the row lattice."""
    K = integer_kernel(IntMatrix.from_rows(rows, cols=n))
    return integer_kernel(K.transpose()) if K.cols else IntMatrix.identity(n)


def _definitional_multiplicity(per_block_rows, n: int) -> int:
    """Product of cell multiplicities times the index of the sum of normal lattices."""
    factor = 1
    sat_cols = []
    for rows in per_block_rows:
        factor *= math.prod(invariant_factors(IntMatrix.from_rows(rows, cols=n)))
        S = _saturated_rows(rows, n)
        sat_cols.extend(S.columns())
    idx = lattice_index(IntMatrix.from_columns(sat_cols, n))
    if idx is INFINITE:
        return 0
    if len(per_block_rows) == 2:
        # Literal two-factor formula: index of the sum of the cell-span lattices.
        K = [integer_kernel(IntMatrix.from_rows(rows, cols=n)) for rows in per_block_rows]
        alt = lattice_index(IntMatrix.from_columns(K[0].columns() + K[1].columns(), n))
        if alt is INFINITE or alt != idx:
            return 0
    return factor * idx


def _rank_of(rows, n) -> int:
    return exact_rank([[Fraction(x) for x in r] for r in rows]) if rows else 0


def stable_intersection_points(
    blocks: Sequence[Block],
    n: int,
    strict: bool = True,
    seed: int = 0,
    circuit_cap: int = MAX_CIRCUIT_SUBSETS,
    circuit_lists: Sequence[Sequence[CircuitForm]] | None = None,
    time_budget: float | None = None,
) -> list[TropicalPoint]:
    """Points of the stable intersection with multiplicities, sorted by ``w``.

    With ``time_budget`` (seconds) the computation raises
    :class:`IncompleteEnumeration` instead of running past the budget.
    """
    deadline = None if time_budget is None else time.perf_counter() + time_budget
    blocks = list(blocks)
    ranks = [b.rows for b in blocks]
    if sum(ranks) != n:
        raise DimensionMismatch(f"block ranks sum to {sum(ranks)}, ambient dimension is {n}")
    for b in blocks:
        if b.monomials and b.nvars != n:
            raise DimensionMismatch("block monomials do not live in the ambient space")
    _check_lineality(blocks, n)
    if circuit_lists is None:
        circuit_lists = [circuits(b, i, circuit_cap, deadline) for i, b in enumerate(blocks)]
    circ_list = _prepare(blocks, circuit_lists)

    rng = random.Random(seed)
    for attempt in range(MAX_REDRAWS):
        u = [tuple([0] * n)] + [
            tuple(rng.randint(-997, 997) for _ in range(n)) for _ in range(len(blocks) - 1)
        ]
        try:
            return _solve_with_perturbation(blocks, circ_list, ranks, n, u, strict, deadline)
        except PerturbationFailure:
            continue
    raise PerturbationFailure(f"no generic perturbation found after {MAX_REDRAWS} draws")


def _solve_with_perturbation(blocks, circ_list, ranks, n, u, strict, deadline=None):
    raw = _enumerate(blocks, circ_list, ranks, n, u, deadline)
    perturbed = []
    for w0, w1 in sorted(raw):
        ties = _leaf_ties(circ_list, w0, w1, u)
        if ties is None:
            continue
        per_block = [_forest_rows(circ_list, b, ties) for b in range(len(blocks))]
        for b, rows in enumerate(per_block):
            if ranks[b] == 1 and len(rows) > 1:
                rows = per_block[b] = _collinear_cell_row(circ_list, b, ties) or rows
            if len(rows) != ranks[b] or _rank_of(rows, n) != ranks[b]:
                raise PerturbationFailure("perturbed intersection is not transverse")
        mult = _lattice_multiplicity(per_block, n)
        if mult is None:
            raise PerturbationFailure("perturbed tie lattice is degenerate")
        check = _definitional_multiplicity(per_block, n)
        if check != mult:
            raise PerturbationFailure("lattice-index cross-check failed")
        perturbed.append((w0, mult))

    grouped: dict[tuple, int] = {}
    for w0, mult in perturbed:
        grouped[w0] = grouped.get(w0, 0) + mult
    points = []
    zero = tuple([Fraction(0)] * n)
    for w0 in sorted(grouped):
        total = grouped[w0]
        ties = tuple(_argmins(c, w0, zero, zero, False) for c in circ_list)
        per_block = [_forest_rows(circ_list, b, ties) for b in range(len(blocks))]
        transverse = all(
            len(rows) == ranks[b] and _rank_of(rows, n) == ranks[b] for b, rows in enumerate(per_block)
        )
        if transverse:
            transverse = _lattice_multiplicity(per_block, n) == total
        if not transverse and strict:
            raise NonGenericValuation(f"intersection at w = {[str(x) for x in w0]} is not transverse")
        witness = []
        lattices = []
        for b in range(len(blocks)):
            witness.append(tuple(t for c, t in zip(circ_list, ties) if c.block == b))
            rows = per_block[b]
            lattices.append(integer_kernel(IntMatrix.from_rows(rows, cols=n)) if rows else IntMatrix.identity(n))
        points.append(TropicalPoint(w0, tuple(witness), tuple(lattices), total, transverse))
    return points


def is_member(point_w: Sequence, blocks: Sequence[Block], circuit_lists=None) -> bool:
    """Literal membership test: every circuit attains its minimum at least twice."""
    from .puiseux import trop_eval

    if circuit_lists is None:
        circuit_lists = [circuits(b, i) for i, b in enumerate(blocks)]
    return all(len(trop_eval(c.form, point_w)[1]) >= 2 for cl in circuit_lists for c in cl)


# ---------------------------------------------------------------------------
# Mixed cells and mixed volume
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MixedCell:
    pairs: tuple[tuple[int, int], ...]
    w: tuple[Fraction, ...]
    volume: int


def _forms_as_blocks(forms: Sequence[TropicalForm]) -> list[Block]:
    blocks = []
    for f in forms:
        row = tuple(PuiseuxScalar.monomial(1, v) for v in f.valuations())
        blocks.append(Block((row,), tuple(f.exponents()), (), "form"))
    return blocks


def mixed_cells(forms: Sequence[TropicalForm]) -> list[MixedCell]:
    """Mixed cells of the regular subdivision induced by the valuations."""
    forms = list(forms)
    if not forms:
        return []
    n = forms[0].nvars
    if len(forms) != n:
        raise DimensionMismatch(f"{len(forms)} forms in dimension {n}")
    circ_list = [
        _Circ(i, tuple(range(len(f.terms))), tuple(f.exponents()), tuple(f.valuations()))
        for i, f in enumerate(forms)
    ]
    blocks = _forms_as_blocks(forms)
    zero = tuple([0] * n)
    raw = _enumerate(blocks, circ_list, [1] * n, n, [zero] * n)
    cells = []
    zero_f = tuple([Fraction(0)] * n)
    for w0, _ in sorted(raw):
        ties = [_argmins(c, w0, zero_f, zero_f, False) for c in circ_list]
        if any(len(t) < 2 for t in ties):
            continue
        pairs = []
        rows = []
        for c, t in zip(circ_list, ties):
            if len(t) != 2:
                raise NonGenericValuation(
                    f"form {c.block} has {len(t)} minimizing terms at w = {[str(x) for x in w0]}"
                )
            a, b = sorted(t)
            pairs.append((a, b))
            rows.append(tuple(x - y for x, y in zip(c.exps[a], c.exps[b])))
        vol = abs(IntMatrix.from_rows(rows, cols=n).det())
        cells.append(MixedCell(tuple(pairs), w0, vol))
    return cells


def mixed_volume(forms: Sequence[TropicalForm], seed: int = 0) -> int:
    """Mixed volume of the Newton polytopes, via a random generic lift."""
    forms = list(forms)
    if not forms:
        return 0
    n = forms[0].nvars
    if len(forms) != n:
        raise DimensionMismatch(f"{len(forms)} forms in dimension {n}")
    if any(len(f.terms) < 2 for f in forms):
        return 0
    rng = random.Random(seed)
    for _ in range(MAX_REDRAWS):
        lifted = [TropicalForm([(a, rng.randint(1, 10 ** 4)) for a in f.exponents()]) for f in forms]
        try:
            return sum(c.volume for c in mixed_cells(lifted))
        except NonGenericValuation:
            continue
    raise PerturbationFailure(f"no generic lift found after {MAX_REDRAWS} draws")


def hypersurface_forms(polys) -> list[TropicalForm]:
    from .puiseux import trop_form

    return [trop_form(f) for f in polys]
