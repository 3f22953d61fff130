"""Finite Puiseux polynomials, sparse Laurent polynomials and their tropical data.

Coefficients are exact scalars: a :class:`~fractions.Fraction` when real and a
:class:`~trophom.exact.GaussianRational` otherwise. Keeping real values as
plain fractions makes the common real-coefficient case markedly faster while
both types interoperate transparently.
"""

from __future__ import annotations

import enum
import math
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .errors import DivisionByZero, NonMonomialDivisor, ZeroPolynomial
from .exact import GaussianRational, RationalLike, to_fraction

Exact = Union[Fraction, GaussianRational]
Exponent = tuple[int, ...]


class Infinity(enum.Enum):
    """Valuation of the zero scalar."""

    INFINITY = "inf"

    def __repr__(self) -> str:
        return "INFINITY"


INFINITY = Infinity.INFINITY


def exact_scalar(value) -> Exact:
    """Canonical exact scalar: Fraction when the imaginary part vanishes."""
    if isinstance(value, GaussianRational):
        return value.re if value.im == 0 else value
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (list, tuple, complex)):
        return exact_scalar(GaussianRational.parse(value))
    return to_fraction(value)


def scalar_to_complex(value: Exact) -> complex:
    return complex(value) if isinstance(value, GaussianRational) else complex(float(value), 0.0)


def scalar_to_json(value: Exact) -> list[str]:
    g = GaussianRational.coerce(value)
    return [str(g.re), str(g.im)]


def _add_into(acc: dict, key, value) -> None:
    cur = acc.get(key)
    new = value if cur is None else cur + value
    if new == 0:
        acc.pop(key, None)
    else:
        acc[key] = new


class PuiseuxScalar:
    """Finite sum ``Σ c_k t^{e_k}`` with rational exponents and exact coefficients."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Iterable[tuple] | Mapping = ()):
        acc: dict[Fraction, Exact] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for e, c in items:
            c = exact_scalar(c)
            if c != 0:
                _add_into(acc, to_fraction(e), c)
        self.terms: tuple[tuple[Fraction, Exact], ...] = tuple(
            (e, exact_scalar(acc[e])) for e in sorted(acc)
        )
        self._hash = None

    @classmethod
    def _raw(cls, terms: tuple) -> "PuiseuxScalar":
        obj = cls.__new__(cls)
        obj.terms = terms
        obj._hash = None
        return obj

    @classmethod
    def _from_dict(cls, acc: dict) -> "PuiseuxScalar":
        return cls._raw(tuple((e, exact_scalar(acc[e])) for e in sorted(acc)))

    @classmethod
    def constant(cls, c) -> "PuiseuxScalar":
        return cls([(0, c)])

    @classmethod
    def monomial(cls, c, exponent) -> "PuiseuxScalar":
        return cls([(exponent, c)])

    @classmethod
    def coerce(cls, value) -> "PuiseuxScalar":
        if isinstance(value, PuiseuxScalar):
            return value
        return cls.constant(value)

    # -- queries -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def valuation(self) -> Fraction | Infinity:
        return self.terms[0][0] if self.terms else INFINITY

    def leading_coefficient(self) -> Exact:
        if not self.terms:
            raise ZeroPolynomial("zero scalar has no leading coefficient")
        return self.terms[0][1]

    def max_exponent(self) -> Fraction:
        if not self.terms:
            raise ZeroPolynomial("zero scalar has no exponents")
        return self.terms[-1][0]

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and self.terms[0][0] == 0)

    def constant_value(self) -> Exact:
        """Coefficient of ``t^0`` (zero when absent)."""
        for e, c in self.terms:
            if e == 0:
                return c
        return Fraction(0)

    def exponent_denominators(self) -> set[int]:
        return {e.denominator for e, _ in self.terms}

    # -- ring operations ---------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, PuiseuxScalar):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction, GaussianRational)):
            return self == PuiseuxScalar.constant(other) if other != 0 else not self.terms
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.terms)
        return self._hash

    def __add__(self, other):
        if not isinstance(other, PuiseuxScalar):
            if isinstance(other, (int, Fraction, GaussianRational)):
                other = PuiseuxScalar.constant(other)
            else:
                return NotImplemented
        if not other.terms:
            return self
        if not self.terms:
            return other
        acc = dict(self.terms)
        for e, c in other.terms:
            _add_into(acc, e, c)
        return PuiseuxScalar._from_dict(acc)

    __radd__ = __add__

    def __neg__(self):
        return PuiseuxScalar._raw(tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other):
        if not isinstance(other, PuiseuxScalar):
            if isinstance(other, (int, Fraction, GaussianRational)):
                other = PuiseuxScalar.constant(other)
            else:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return PuiseuxScalar.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, PuiseuxScalar):
            if isinstance(other, (int, Fraction, GaussianRational)):
                c = exact_scalar(other)
                if c == 0:
                    return PuiseuxScalar._raw(())
                return PuiseuxScalar._raw(tuple((e, exact_scalar(a * c)) for e, a in self.terms))
            return NotImplemented
        if not self.terms or not other.terms:
            return PuiseuxScalar._raw(())
        if len(other.terms) == 1:
            e2, c2 = other.terms[0]
            return PuiseuxScalar._raw(tuple((e + e2, exact_scalar(c * c2)) for e, c in self.terms))
        if len(self.terms) == 1:
            return other * self
        acc: dict[Fraction, Exact] = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                _add_into(acc, e1 + e2, c1 * c2)
        return PuiseuxScalar._from_dict(acc)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            if len(self.terms) != 1:
                raise NonMonomialDivisor("negative power of a non-monomial scalar")
            e, c = self.terms[0]
            return PuiseuxScalar._raw(((e * k, exact_scalar(GaussianRational.coerce(c) ** k)),))
        result = PuiseuxScalar.constant(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __truediv__(self, other):
        """Scalar division; the divisor must be a single term."""
        other = PuiseuxScalar.coerce(other)
        if not other.terms:
            raise DivisionByZero("division by the zero scalar")
        if len(other.terms) != 1:
            raise NonMonomialDivisor("divisor has more than one term")
        e2, c2 = other.terms[0]
        inv = 1 / c2 if isinstance(c2, GaussianRational) else Fraction(1) / c2
        return PuiseuxScalar._raw(tuple((e - e2, exact_scalar(c * inv)) for e, c in self.terms))

    def divexact(self, other: "PuiseuxScalar") -> "PuiseuxScalar":
        """Exact quotient ``self / other`` when it is a finite Puiseux polynomial.

        Runs long division from the lowest-order term; raises
        :class:`NonMonomialDivisor` when the division does not terminate.
        """
        other = PuiseuxScalar.coerce(other)
        if not other.terms:
            raise DivisionByZero("division by the zero scalar")
        if len(other.terms) == 1:
            return self / other
        if not self.terms:
            return self
        e0, c0 = other.terms[0]
        inv0 = 1 / c0 if isinstance(c0, GaussianRational) else Fraction(1) / c0
        limit = self.terms[-1][0] - other.terms[-1][0]
        rem = dict(self.terms)
        quotient: dict[Fraction, Exact] = {}
        while rem:
            e = min(rem)
            qe = e - e0
            if qe > limit:
                raise NonMonomialDivisor("division is not exact")
            qc = exact_scalar(rem[e] * inv0)
            quotient[qe] = qc
            for f, d in other.terms:
                _add_into(rem, qe + f, -(qc * d))
        return PuiseuxScalar._from_dict(quotient)

    # -- transformations ---------------------------------------------------

    def shift(self, e) -> "PuiseuxScalar":
        """Multiply by ``t^e``."""
        e = to_fraction(e)
        return PuiseuxScalar._raw(tuple((f + e, c) for f, c in self.terms))

    def scale_exponents(self, k) -> "PuiseuxScalar":
        """Substitute ``t ↦ t^k`` for a positive rational ``k``."""
        k = to_fraction(k)
        if k <= 0:
            raise ValueError("exponent scaling must be positive")
        return PuiseuxScalar._raw(tuple((f * k, c) for f, c in self.terms))

    def at_one(self) -> Exact:
        """Value at ``t = 1`` (exact)."""
        return exact_scalar(sum((c for _, c in self.terms), Fraction(0)))

    def evaluate(self, t0: float) -> complex:
        """Numeric value at a positive real ``t0`` via the real branch of ``t0^e``."""
        total = 0j
        for e, c in self.terms:
            total += scalar_to_complex(c) * (t0 ** float(e) if e != 0 else 1.0)
        return total

    def __repr__(self) -> str:
        return f"PuiseuxScalar({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.terms:
            cs = str(c)
            if e == 0:
                parts.append(cs)
            else:
                tpart = "t" if e == 1 else f"t^({e})"
                parts.append(tpart if c == 1 else f"{cs}*{tpart}")
        return " + ".join(parts)


ZERO = PuiseuxScalar()
ONE = PuiseuxScalar.constant(1)


def valuation(a: PuiseuxScalar) -> Fraction | Infinity:
    return PuiseuxScalar.coerce(a).valuation()


def puiseux_arith(op: str, a, b=None) -> PuiseuxScalar:
    """Dispatch for the four primitive operations."""
    a = PuiseuxScalar.coerce(a)
    if op == "neg":
        return -a
    b = PuiseuxScalar.coerce(b)
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "scalar-div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


# ---------------------------------------------------------------------------
# Laurent polynomials
# ---------------------------------------------------------------------------


def _exp(vec: Sequence[int]) -> Exponent:
    return tuple(int(x) for x in vec)


def _add_exp(a: Exponent, b: Exponent) -> Exponent:
    return tuple(x + y for x, y in zip(a, b))


class LaurentPoly:
    """Sparse Laurent polynomial over :class:`PuiseuxScalar`."""

    __slots__ = ("variables", "terms")

    def __init__(self, variables: Sequence[str], terms: Mapping | Iterable = ()):
        self.variables: tuple[str, ...] = tuple(variables)
        n = len(self.variables)
        acc: dict[Exponent, PuiseuxScalar] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for a, c in items:
            a = _exp(a)
            if len(a) != n:
                raise ValueError(f"exponent {a} has length {len(a)}, expected {n}")
            c = PuiseuxScalar.coerce(c)
            if c:
                cur = acc.get(a)
                s = c if cur is None else cur + c
                if s:
                    acc[a] = s
                else:
                    acc.pop(a, None)
        self.terms: dict[Exponent, PuiseuxScalar] = acc

    @classmethod
    def _raw(cls, variables: tuple, terms: dict) -> "LaurentPoly":
        obj = cls.__new__(cls)
        obj.variables = variables
        obj.terms = terms
        return obj

    @classmethod
    def constant(cls, variables: Sequence[str], c) -> "LaurentPoly":
        return cls(variables, {(0,) * len(variables): c})

    @classmethod
    def monomial(cls, variables: Sequence[str], exponent: Sequence[int], c=1) -> "LaurentPoly":
        return cls(variables, {_exp(exponent): c})

    @classmethod
    def variable(cls, variables: Sequence[str], name: str) -> "LaurentPoly":
        i = list(variables).index(name)
        e = [0] * len(variables)
        e[i] = 1
        return cls.monomial(variables, e)

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def support(self) -> list[Exponent]:
        return sorted(self.terms)

    def items(self) -> list[tuple[Exponent, PuiseuxScalar]]:
        return sorted(self.terms.items())

    def __len__(self) -> int:
        return len(self.terms)

    def _check(self, other: "LaurentPoly") -> None:
        if self.variables != other.variables:
            raise ValueError("polynomials live in different rings")

    def _lift(self, other) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            self._check(other)
            return other
        return LaurentPoly.constant(self.variables, other)

    def __eq__(self, other) -> bool:
        if isinstance(other, LaurentPoly):
            return self.variables == other.variables and self.terms == other.terms
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.variables, frozenset(self.terms.items())))

    def __add__(self, other):
        other = self._lift(other)
        acc = dict(self.terms)
        for a, c in other.terms.items():
            cur = acc.get(a)
            s = c if cur is None else cur + c
            if s:
                acc[a] = s
            else:
                acc.pop(a, None)
        return LaurentPoly._raw(self.variables, acc)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly._raw(self.variables, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, LaurentPoly):
            c = PuiseuxScalar.coerce(other)
            if not c:
                return LaurentPoly._raw(self.variables, {})
            return LaurentPoly._raw(self.variables, {a: v * c for a, v in self.terms.items()})
        self._check(other)
        acc: dict[Exponent, PuiseuxScalar] = {}
        for a, c in self.terms.items():
            for b, d in other.terms.items():
                k = _add_exp(a, b)
                cur = acc.get(k)
                s = c * d if cur is None else cur + c * d
                if s:
                    acc[k] = s
                else:
                    acc.pop(k, None)
        return LaurentPoly._raw(self.variables, acc)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            if len(self.terms) != 1:
                raise NonMonomialDivisor("negative power of a non-monomial polynomial")
            (a, c), = self.terms.items()
            return LaurentPoly._raw(self.variables, {tuple(x * k for x in a): c ** k})
        result = LaurentPoly.constant(self.variables, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def mul_monomial(self, exponent: Sequence[int], c=1) -> "LaurentPoly":
        e = _exp(exponent)
        c = PuiseuxScalar.coerce(c)
        return LaurentPoly._raw(self.variables, {_add_exp(a, e): v * c for a, v in self.terms.items()} if c else {})

    def map_coefficients(self, fn) -> "LaurentPoly":
        return LaurentPoly(self.variables, {a: fn(a, c) for a, c in self.terms.items()})

    def with_variables(self, variables: Sequence[str], positions: Sequence[int]) -> "LaurentPoly":
        """Embed into a larger ring: old variable ``i`` becomes ``variables[positions[i]]``."""
        n = len(variables)
        out = {}
        for a, c in self.terms.items():
            e = [0] * n
            for i, p in enumerate(positions):
                e[p] += a[i]
            out[tuple(e)] = c
        return LaurentPoly(variables, out)

    def substitute(self, index: int, value: "LaurentPoly") -> "LaurentPoly":
        """Replace variable ``index`` by ``value`` (same ring).

        Negative powers require ``value`` to be a monomial.
        """
        self._check(value)
        result = LaurentPoly._raw(self.variables, {})
        powers: dict[int, LaurentPoly] = {}
        for a, c in self.terms.items():
            k = a[index]
            if k not in powers:
                powers[k] = value ** k
            rest = list(a)
            rest[index] = 0
            result = result + powers[k].mul_monomial(rest, c)
        return result

    def degree_in(self, index: int) -> tuple[int, int]:
        ks = [a[index] for a in self.terms]
        return (min(ks), max(ks)) if ks else (0, 0)

    def coefficient_of(self, exponent: Sequence[int]) -> PuiseuxScalar:
        return self.terms.get(_exp(exponent), ZERO)

    def at_t_one(self) -> "LaurentPoly":
        """Specialize ``t = 1`` exactly."""
        return LaurentPoly(self.variables, {a: PuiseuxScalar.constant(c.at_one()) for a, c in self.terms.items()})

    def exponent_denominators(self) -> set[int]:
        out: set[int] = set()
        for c in self.terms.values():
            out |= c.exponent_denominators()
        return out

    def scale_t(self, k) -> "LaurentPoly":
        return LaurentPoly._raw(self.variables, {a: c.scale_exponents(k) for a, c in self.terms.items()})

    def t_shift(self, e) -> "LaurentPoly":
        return LaurentPoly._raw(self.variables, {a: c.shift(e) for a, c in self.terms.items()})

    def __repr__(self) -> str:
        return f"LaurentPoly({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for a, c in sorted(self.terms.items()):
            mono = "*".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(self.variables, a) if k != 0
            )
            cs = str(c)
            if c.is_monomial() and len(cs.split(" + ")) == 1 and "+" not in cs:
                coeff = cs
            else:
                coeff = f"({cs})"
            if not mono:
                parts.append(coeff)
            elif coeff == "1":
                parts.append(mono)
            else:
                parts.append(f"{coeff}*{mono}")
        return " + ".join(parts)


# ---------------------------------------------------------------------------
# Tropical forms and initial forms
# ---------------------------------------------------------------------------


class TropicalForm:
    """Min-plus form ``min_k (v_k + α_k·w)``."""

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[tuple[Sequence[int], RationalLike]]):
        items = [(_exp(a), to_fraction(v)) for a, v in terms]
        if not items:
            raise ZeroPolynomial("tropical form needs at least one term")
        if len({a for a, _ in items}) != len(items):
            raise ValueError("tropical form exponents must be distinct")
        self.terms: tuple[tuple[Exponent, Fraction], ...] = tuple(items)

    @property
    def nvars(self) -> int:
        return len(self.terms[0][0])

    def exponents(self) -> list[Exponent]:
        return [a for a, _ in self.terms]

    def valuations(self) -> list[Fraction]:
        return [v for _, v in self.terms]

    def __eq__(self, other) -> bool:
        if isinstance(other, TropicalForm):
            return sorted(self.terms) == sorted(other.terms)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.terms)))

    def __repr__(self) -> str:
        return f"TropicalForm({list(self.terms)})"



def trop_form(f: LaurentPoly) -> TropicalForm:
    if not f.terms:
        raise ZeroPolynomial("tropicalization of the zero polynomial")
    return TropicalForm([(a, c.valuation()) for a, c in f.items()])


def trop_eval(F: TropicalForm, w: Sequence) -> tuple[Fraction, frozenset[int]]:
    w = [to_fraction(x) for x in w]
    if len(w) != F.nvars:
        raise ValueError("weight vector has the wrong dimension")
    vals = [v + sum((ai * wi for ai, wi in zip(a, w)), Fraction(0)) for a, v in F.terms]
    m = min(vals)
    return m, frozenset(i for i, x in enumerate(vals) if x == m)


def weighted_valuations(f: LaurentPoly, w: Sequence) -> dict[Exponent, Fraction]:
    w = [to_fraction(x) for x in w]
    return {
        a: c.valuation() + sum((ai * wi for ai, wi in zip(a, w)), Fraction(0))
        for a, c in f.terms.items()
    }


def trop_value(f: LaurentPoly, w: Sequence) -> Fraction:
    if not f.terms:
        raise ZeroPolynomial("tropicalization of the zero polynomial")
    return min(weighted_valuations(f, w).values())


def initial_form(f: LaurentPoly, w: Sequence) -> LaurentPoly:
    """Sum of leading coefficients over the terms minimizing ``val + α·w``."""
    if not f.terms:
        raise ZeroPolynomial("initial form of the zero polynomial")
    vals = weighted_valuations(f, w)
    m = min(vals.values())
    return LaurentPoly(
        f.variables,
        {a: PuiseuxScalar.constant(f.terms[a].leading_coefficient()) for a, v in vals.items() if v == m},
    )


def evaluate_numeric(f: LaurentPoly, t0: float, x: Sequence[complex]) -> complex:
    if len(x) != f.nvars:
        raise ValueError("point has the wrong dimension")
    total = 0j
    for a, c in f.terms.items():
        mono = 1 + 0j
        for xi, k in zip(x, a):
            if k:
                mono *= complex(xi) ** k
        total += c.evaluate(t0) * mono
    return total


def term_magnitudes(f: LaurentPoly, t0: float, x: Sequence[complex]) -> float:
    total = 0.0
    for a, c in f.terms.items():
        mono = 1 + 0j
        for xi, k in zip(x, a):
            if k:
                mono *= complex(xi) ** k
        total += abs(c.evaluate(t0) * mono)
    return total


def lcm_of(values: Iterable[int]) -> int:
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out
