"""Exact scalars and integer lattice algebra.

Rationals are :class:`fractions.Fraction`; this module adds Gaussian
rationals, Smith normal form, saturated integer kernels, lattice indices and
small generic linear-algebra helpers over exact fields.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import DivisionByZero

Rational = Fraction
RationalLike = Union[int, Fraction, str]


def to_fraction(value: RationalLike | float) -> Fraction:
    """Parse an exact rational. Decimal strings are converted exactly."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # Use the shortest decimal literal rather than the binary expansion.
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a rational")


class GaussianRational:
    """Exact complex number with rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: RationalLike = 0, im: RationalLike = 0):
        object.__setattr__(self, "re", to_fraction(re))
        object.__setattr__(self, "im", to_fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    @staticmethod
    def coerce(value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, complex):
            return GaussianRational(to_fraction(value.real), to_fraction(value.imag))
        return GaussianRational(to_fraction(value), 0)

    @classmethod
    def parse(cls, value) -> "GaussianRational":
        """Accept ``"p/q"``, ``["re", "im"]`` or a number."""
        if isinstance(value, (list, tuple)):
            if len(value) != 2:
                raise ValueError("complex literal must be [re, im]")
            return cls(to_fraction(value[0]), to_fraction(value[1]))
        return cls.coerce(value)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other) -> bool:
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        if isinstance(other, complex):
            return complex(self) == other
        return NotImplemented

    def __hash__(self) -> int:
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __add__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        if o.im == 0:
            return GaussianRational(self.re * o.re, self.im * o.re)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        if o.is_zero():
            raise DivisionByZero("division by zero Gaussian rational")
        if o.im == 0:
            return GaussianRational(self.re / o.re, self.im / o.re)
        den = o.re * o.re + o.im * o.im
        return GaussianRational(
            (self.re * o.re + self.im * o.im) / den, (self.im * o.re - self.re * o.im) / den
        )

    def __rtruediv__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return (GaussianRational(1) / self) ** (-exponent)
        result = GaussianRational(1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def log(self) -> complex:
        """Principal logarithm, safe for magnitudes beyond float range."""
        if self.is_zero():
            raise DivisionByZero("logarithm of zero")
        n2 = self.norm2()
        log_abs = 0.5 * (math.log(n2.numerator) - math.log(n2.denominator))
        scale = max(abs(self.re), abs(self.im))
        arg = math.atan2(float(self.im / scale), float(self.re / scale))
        return complex(log_abs, arg)

    def __repr__(self) -> str:
        if self.im == 0:
            return f"GaussianRational({self.re})"
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self) -> str:
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}i)"


def _coerce_or_none(value) -> GaussianRational | None:
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return GaussianRational(value, 0)
    return None


ZERO_G = GaussianRational(0)
ONE_G = GaussianRational(1)


# ---------------------------------------------------------------------------
# Integer matrices and lattices
# ---------------------------------------------------------------------------


class Index(enum.Enum):
    """Sentinel for a sublattice of infinite index."""

    INFINITE = "infinite"


INFINITE = Index.INFINITE


@dataclass(frozen=True)
class IntMatrix:
    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValueError("matrix dimensions must be nonnegative")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError("entry count must equal rows*cols")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> "IntMatrix":
        rows = [list(r) for r in rows]
        ncols = len(rows[0]) if rows else (cols or 0)
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged matrix")
        return cls(len(rows), ncols, tuple(int(x) for r in rows for x in r))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], rows: int) -> "IntMatrix":
        columns = [list(c) for c in columns]
        if any(len(c) != rows for c in columns):
            raise ValueError("column length mismatch")
        return cls.from_rows([[c[i] for c in columns] for i in range(rows)], cols=len(columns))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls.from_rows([[int(i == j) for j in range(n)] for i in range(n)], cols=n)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, (0,) * (rows * cols))

    def to_rows(self) -> list[list[int]]:
        c = self.cols
        return [list(self.entries[i * c:(i + 1) * c]) for i in range(self.rows)]

    def column(self, j: int) -> list[int]:
        return [self.entries[i * self.cols + j] for i in range(self.rows)]

    def columns(self) -> list[list[int]]:
        return [self.column(j) for j in range(self.cols)]

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i * self.cols + j]

    def transpose(self) -> "IntMatrix":
        return IntMatrix.from_rows(self.columns(), cols=self.rows)

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        a, b = self.to_rows(), other.to_rows()
        out = [[sum(a[i][k] * b[k][j] for k in range(self.cols)) for j in range(other.cols)]
               for i in range(self.rows)]
        return IntMatrix.from_rows(out, cols=other.cols)

    def det(self) -> int:
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        return int_det(self.to_rows())


def _as_rows(A) -> list[list[int]]:
    if isinstance(A, IntMatrix):
        return A.to_rows()
    return [[int(x) for x in r] for r in A]


def int_det(rows: Sequence[Sequence[int]]) -> int:
    """Fraction-free (Bareiss) determinant of a square integer matrix."""
    M = [list(r) for r in rows]
    n = len(M)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k] != 0:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def smith_normal_form(A) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return unimodular ``U``, ``V`` and diagonal ``D`` with ``U·A·V = D``.

    Diagonal entries are nonnegative and form a divisibility chain. The pivot
    is always the entry of least absolute value in the active submatrix.
    """
    D = _as_rows(A)
    m = len(D)
    n = len(D[0]) if m else (A.cols if isinstance(A, IntMatrix) else 0)
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in D:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):
        # row_dst += q * row_src
        D[dst] = [a + q * b for a, b in zip(D[dst], D[src])]
        U[dst] = [a + q * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, q):
        for row in D:
            row[dst] += q * row[src]
        for row in V:
            row[dst] += q * row[src]

    for k in range(min(m, n)):
        best = None
        for i in range(k, m):
            for j in range(k, n):
                if D[i][j] != 0 and (best is None or abs(D[i][j]) < abs(D[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(k, best[0])
        swap_cols(k, best[1])
        while True:
            changed = False
            for i in range(k + 1, m):
                if D[i][k] != 0:
                    add_row(i, k, -(D[i][k] // D[k][k]))
                    if D[i][k] != 0:
                        changed = True
            for j in range(k + 1, n):
                if D[k][j] != 0:
                    add_col(j, k, -(D[k][j] // D[k][k]))
                    if D[k][j] != 0:
                        changed = True
            if changed:
                best = None
                for i in range(k, m):
                    if D[i][k] != 0 and (best is None or abs(D[i][k]) < abs(D[best][k])):
                        best = i
                swap_rows(k, best)
                bestc = None
                for j in range(k, n):
                    if D[k][j] != 0 and (bestc is None or abs(D[k][j]) < abs(D[k][bestc])):
                        bestc = j
                swap_cols(k, bestc)
                continue
            bad = None
            for i in range(k + 1, m):
                for j in range(k + 1, n):
                    if D[i][j] % D[k][k] != 0:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(k, bad, 1)
        if D[k][k] < 0:
            D[k] = [-x for x in D[k]]
            U[k] = [-x for x in U[k]]
    return (IntMatrix.from_rows(U, cols=m), IntMatrix.from_rows(D, cols=n),
            IntMatrix.from_rows(V, cols=n))


def invariant_factors(A) -> list[int]:
    _, D, _ = smith_normal_form(A)
    return [D[i, i] for i in range(min(D.rows, D.cols)) if D[i, i] != 0]


def integer_kernel(A) -> IntMatrix:
    """Columns form a saturated lattice basis of ``{x ∈ Z^cols : A x = 0}``."""
    if isinstance(A, IntMatrix):
        ncols = A.cols
    else:
        rows = _as_rows(A)
        ncols = len(rows[0]) if rows else 0
        A = IntMatrix.from_rows(rows, cols=ncols)
    if A.rows == 0:
        return IntMatrix.identity(ncols)
    _, D, V = smith_normal_form(A)
    rank = sum(1 for i in range(min(D.rows, D.cols)) if D[i, i] != 0)
    cols = [V.column(j) for j in range(rank, ncols)]
    return IntMatrix.from_columns(cols, ncols) if cols else IntMatrix.zeros(ncols, 0)


def lattice_index(generators) -> int | Index:
    """Index in ``Z^n`` of the lattice spanned by the columns, or ``INFINITE``."""
    if isinstance(generators, IntMatrix):
        G = generators
    else:
        rows = _as_rows(generators)
        G = IntMatrix.from_rows(rows)
    n = G.rows
    if n == 0:
        return 1
    if G.cols == 0:
        return INFINITE
    factors = invariant_factors(G)
    if len(factors) < n:
        return INFINITE
    return math.prod(factors)


# ---------------------------------------------------------------------------
# Exact field linear algebra (Fractions or Gaussian rationals)
# ---------------------------------------------------------------------------


def _is_zero(x) -> bool:
    return x == 0


def rref(matrix: Sequence[Sequence], pivot_order: Sequence[int] | None = None):
    """Reduced row echelon form over an exact field.

    Returns ``(R, pivots)`` where ``pivots[i]`` is the pivot column of row ``i``.
    Columns are scanned in ``pivot_order`` (default left to right).
    """
    M = [list(r) for r in matrix]
    if not M:
        return [], []
    ncols = len(M[0])
    order = list(range(ncols)) if pivot_order is None else list(pivot_order)
    pivots: list[int] = []
    r = 0
    for c in order:
        if r == len(M):
            break
        p = next((i for i in range(r, len(M)) if not _is_zero(M[i][c])), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c] if not isinstance(M[r][c], int) else Fraction(1, M[r][c])
        M[r] = [x * inv for x in M[r]]
        for i in range(len(M)):
            if i != r and not _is_zero(M[i][c]):
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
    return M[:r], pivots


def rank(matrix: Sequence[Sequence]) -> int:
    return len(rref(matrix)[1])


def solve_square(A: Sequence[Sequence], b: Sequence) -> list | None:
    """Solve ``A x = b`` exactly for square nonsingular ``A``; None if singular."""
    n = len(A)
    aug = [list(A[i]) + [b[i]] for i in range(n)]
    R, piv = rref(aug, pivot_order=list(range(n)))
    if len(piv) < n:
        return None
    return [R[i][n] for i in range(n)]


def frac_vector(values: Iterable) -> tuple[Fraction, ...]:
    return tuple(to_fraction(v) for v in values)


def dot(u: Sequence, v: Sequence):
    return sum((a * b for a, b in zip(u, v)), Fraction(0))
