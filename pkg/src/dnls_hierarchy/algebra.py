"""Exact differential polynomial ring in two conjugate potentials q, r.

Elements are finite sums of monomials ``c * q^(a0) q^(a1) ... r^(b0) ...``
where each factor is a derivative ``∂_x^k q`` or ``∂_x^k r`` and the
coefficient c is a Gaussian rational (exact rational real and imaginary
parts).  The ring carries

  * the total derivative ``dp_dx`` (Leibniz rule, raising each factor's
    order in turn),
  * conjugation ``dp_conj`` (swap q <-> r, conjugate coefficients),
  * a grading ``monomial_order`` = 2 * (#derivatives) + (#factors).

Every value is immutable and every operation pure.  Monomials keep their
factors in a fixed total order (variable q before r, then ascending
derivative order), polynomials keep their terms merged and sorted, so the
text serialization below is canonical byte-for-byte.
"""

from __future__ import annotations

import re as _re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

__all__ = [
    "GaussianRational",
    "DiffMonomial",
    "DiffPoly",
    "dp_add",
    "dp_mul",
    "dp_dx",
    "dp_conj",
    "monomial_order",
    "serialize_poly",
    "parse_poly",
    "poly_to_json",
    "poly_from_json",
    "poly_to_latex",
]

RationalLike = Union[int, Fraction]

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass(frozen=True)
class GaussianRational:
    """Exact complex number with rational real and imaginary parts."""

    re: Fraction = _ZERO
    im: Fraction = _ZERO

    @staticmethod
    def of(re: RationalLike = 0, im: RationalLike = 0) -> "GaussianRational":
        return GaussianRational(Fraction(re), Fraction(im))

    @staticmethod
    def i() -> "GaussianRational":
        return GaussianRational(_ZERO, _ONE)

    @staticmethod
    def two_i_pow(k: int) -> "GaussianRational":
        """(2i)**k for any integer k, exactly."""
        mag = Fraction(2) ** k
        rem = k % 4
        if rem == 0:
            return GaussianRational(mag, _ZERO)
        if rem == 1:
            return GaussianRational(_ZERO, mag)
        if rem == 2:
            return GaussianRational(-mag, _ZERO)
        return GaussianRational(_ZERO, -mag)

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __add__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def __truediv__(self, other: "GaussianRational") -> "GaussianRational":
        n = other.re * other.re + other.im * other.im
        if not n:
            raise ZeroDivisionError("division by zero GaussianRational")
        return GaussianRational(
            (self.re * other.re + self.im * other.im) / n,
            (self.im * other.re - self.re * other.im) / n,
        )

    def __pow__(self, k: int) -> "GaussianRational":
        if k < 0:
            return GaussianRational.of(1) / self.__pow__(-k)
        out = GaussianRational.of(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def scale(self, f: RationalLike) -> "GaussianRational":
        f = Fraction(f)
        return GaussianRational(self.re * f, self.im * f)

    @property
    def is_real(self) -> bool:
        return not self.im

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __repr__(self) -> str:
        return f"GaussianRational({self.re!s}, {self.im!s})"


# A factor is (variable, derivative order); factor tuples are kept sorted.
Factor = tuple[str, int]
Factors = tuple[Factor, ...]

_VARS = ("q", "r")


def _check_factors(factors: Iterable[Factor]) -> Factors:
    fs = tuple(sorted(factors))
    for var, order in fs:
        if var not in _VARS:
            raise ValueError(f"unknown variable {var!r}")
        if order < 0:
            raise ValueError("negative derivative order")
    return fs


@dataclass(frozen=True)
class DiffMonomial:
    """One term: Gaussian-rational coefficient times a multiset of factors."""

    coeff: GaussianRational
    factors: Factors

    @property
    def order(self) -> int:
        return 2 * self.derivative_count + len(self.factors)

    @property
    def derivative_count(self) -> int:
        return sum(order for _, order in self.factors)

    def count(self, var: str) -> int:
        return sum(1 for v, _ in self.factors if v == var)

    @property
    def is_phase_balanced(self) -> bool:
        return self.count("q") == self.count("r") + 1


def monomial_order(m: DiffMonomial) -> int:
    """Grading: twice the number of derivatives plus the number of factors."""
    return m.order


class DiffPoly:
    """Canonical differential polynomial: merged, sorted, zero-free terms."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Factors, GaussianRational] | None = None):
        if not terms:
            object.__setattr__(self, "_terms", ())
            return
        items = tuple(sorted((f, c) for f, c in terms.items() if c))
        object.__setattr__(self, "_terms", items)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero() -> "DiffPoly":
        return _ZERO_POLY

    @staticmethod
    def constant(c: GaussianRational | RationalLike) -> "DiffPoly":
        if not isinstance(c, GaussianRational):
            c = GaussianRational.of(c)
        return DiffPoly({(): c})

    @staticmethod
    def variable(var: str, order: int = 0) -> "DiffPoly":
        return DiffPoly.monomial(GaussianRational.of(1), ((var, order),))

    @staticmethod
    def monomial(coeff: GaussianRational, factors: Iterable[Factor]) -> "DiffPoly":
        return DiffPoly({_check_factors(factors): coeff})

    @staticmethod
    def from_terms(terms: Iterable[DiffMonomial]) -> "DiffPoly":
        acc: dict[Factors, GaussianRational] = {}
        for t in terms:
            f = _check_factors(t.factors)
            acc[f] = acc.get(f, GaussianRational()) + t.coeff
        return DiffPoly(acc)

    # -- views -------------------------------------------------------------

    @property
    def terms(self) -> tuple[DiffMonomial, ...]:
        return tuple(DiffMonomial(c, f) for f, c in self._terms)

    def items(self) -> tuple[tuple[Factors, GaussianRational], ...]:
        return self._terms

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def coefficient(self, factors: Iterable[Factor]) -> GaussianRational:
        key = _check_factors(factors)
        for f, c in self._terms:
            if f == key:
                return c
        return GaussianRational()

    # -- ring operations ----------------------------------------------------

    def __add__(self, other: "DiffPoly") -> "DiffPoly":
        acc = dict(self._terms)
        for f, c in other._terms:
            s = acc.get(f)
            acc[f] = c if s is None else s + c
        return DiffPoly(acc)

    def __sub__(self, other: "DiffPoly") -> "DiffPoly":
        return self + (-other)

    def __neg__(self) -> "DiffPoly":
        return DiffPoly({f: -c for f, c in self._terms})

    def __mul__(self, other: "DiffPoly | GaussianRational | int") -> "DiffPoly":
        if isinstance(other, int):
            other = DiffPoly.constant(other)
        if isinstance(other, GaussianRational):
            other = DiffPoly.constant(other)
        acc: dict[Factors, GaussianRational] = {}
        for f1, c1 in self._terms:
            for f2, c2 in other._terms:
                f = tuple(sorted(f1 + f2))
                c = c1 * c2
                s = acc.get(f)
                acc[f] = c if s is None else s + c
        return DiffPoly(acc)

    __rmul__ = __mul__

    def scale(self, c: GaussianRational | RationalLike) -> "DiffPoly":
        if not isinstance(c, GaussianRational):
            c = GaussianRational.of(c)
        if not c:
            return _ZERO_POLY
        return DiffPoly({f: v * c for f, v in self._terms})

    def dx(self) -> "DiffPoly":
        """Total x-derivative (Leibniz rule per monomial)."""
        acc: dict[Factors, GaussianRational] = {}
        for f, c in self._terms:
            for idx in range(len(f)):
                var, order = f[idx]
                nf = tuple(sorted(f[:idx] + ((var, order + 1),) + f[idx + 1:]))
                s = acc.get(nf)
                acc[nf] = c if s is None else s + c
        return DiffPoly(acc)

    def conj(self) -> "DiffPoly":
        """Swap q <-> r in every factor and conjugate every coefficient."""
        acc: dict[Factors, GaussianRational] = {}
        for f, c in self._terms:
            nf = tuple(sorted(("r" if v == "q" else "q", o) for v, o in f))
            acc[nf] = c.conjugate()
        return DiffPoly(acc)

    # -- comparison ----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        return isinstance(other, DiffPoly) and self._terms == other._terms

    def __hash__(self) -> int:
        return hash(self._terms)

    def __repr__(self) -> str:
        return f"DiffPoly({serialize_poly(self)!r})"


_ZERO_POLY = DiffPoly()


def dp_add(p: DiffPoly, q: DiffPoly) -> DiffPoly:
    return p + q


def dp_mul(p: DiffPoly, q: DiffPoly) -> DiffPoly:
    return p * q


def dp_dx(p: DiffPoly) -> DiffPoly:
    return p.dx()


def dp_conj(p: DiffPoly) -> DiffPoly:
    return p.conj()


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def fmt_fraction(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


_fmt_fraction = fmt_fraction


def serialize_poly(p: DiffPoly) -> str:
    """Canonical text form: ``(re,im)·q[k]·r[m]...`` terms joined by ' + '."""
    if p.is_zero:
        return "0"
    parts = []
    for factors, coeff in p.items():
        s = f"({_fmt_fraction(coeff.re)},{_fmt_fraction(coeff.im)})"
        for var, order in factors:
            s += f"·{var}[{order}]"
        parts.append(s)
    return " + ".join(parts)


_TERM_RE = _re.compile(
    r"^\((?P<re>-?\d+(?:/\d+)?),(?P<im>-?\d+(?:/\d+)?)\)(?P<factors>(?:·[qr]\[\d+\])*)$"
)
_FACTOR_RE = _re.compile(r"·([qr])\[(\d+)\]")


def parse_poly(text: str) -> DiffPoly:
    """Inverse of :func:`serialize_poly`."""
    text = text.strip()
    if text == "0":
        return DiffPoly.zero()
    acc: dict[Factors, GaussianRational] = {}
    for chunk in text.split(" + "):
        m = _TERM_RE.match(chunk.strip())
        if m is None:
            raise ValueError(f"cannot parse term {chunk!r}")
        coeff = GaussianRational(Fraction(m.group("re")), Fraction(m.group("im")))
        factors = tuple(
            sorted((var, int(order)) for var, order in _FACTOR_RE.findall(m.group("factors")))
        )
        acc[factors] = acc.get(factors, GaussianRational()) + coeff
    return DiffPoly(acc)


def poly_to_json(p: DiffPoly) -> dict:
    return {
        "terms": [
            {
                "coeff": {"re": _fmt_fraction(c.re), "im": _fmt_fraction(c.im)},
                "factors": [{"var": v, "order": o} for v, o in f],
            }
            for f, c in p.items()
        ]
    }


def poly_from_json(obj: dict) -> DiffPoly:
    acc: dict[Factors, GaussianRational] = {}
    for term in obj["terms"]:
        coeff = GaussianRational(Fraction(term["coeff"]["re"]), Fraction(term["coeff"]["im"]))
        factors = tuple(sorted((f["var"], int(f["order"])) for f in term["factors"]))
        acc[factors] = acc.get(factors, GaussianRational()) + coeff
    return DiffPoly(acc)


# ---------------------------------------------------------------------------
# LaTeX rendering (subscript style: q_x, q_{xx}, powers grouped)
# ---------------------------------------------------------------------------

def _latex_factor(var: str, order: int, power: int) -> str:
    name = var if order == 0 else (f"{var}_x" if order == 1 else f"{var}_{{{'x' * order}}}")
    return name if power == 1 else f"{name}^{power}" if power < 10 else f"{name}^{{{power}}}"


def _latex_rational(f: Fraction, unit: str = "") -> str:
    # unit is "" or "i"; |f| rendered as integer or \frac.
    sign = "-" if f < 0 else ""
    a = abs(f)
    if a.denominator == 1:
        mag = str(a.numerator)
        if mag == "1" and unit:
            mag = ""
        return f"{sign}{mag}{unit}"
    return f"{sign}\\frac{{{a.numerator}{unit}}}{{{a.denominator}}}"


def _latex_coeff(c: GaussianRational) -> str:
    if c.is_real:
        return _latex_rational(c.re)
    if not c.re:
        return _latex_rational(c.im, "i")
    return f"({_latex_rational(c.re)}{'+' if c.im > 0 else ''}{_latex_rational(c.im, 'i')})"


def latex_coefficient(c: GaussianRational) -> str:
    return _latex_coeff(c)


def poly_to_latex(p: DiffPoly, var_names: tuple[str, str] = ("q", "r")) -> str:
    if p.is_zero:
        return "0"
    rendered = []
    for factors, coeff in p.items():
        powers: dict[Factor, int] = {}
        for fac in factors:
            powers[fac] = powers.get(fac, 0) + 1
        body = "".join(
            _latex_factor(var_names[0] if v == "q" else var_names[1], o, k)
            for (v, o), k in sorted(powers.items())
        )
        cs = _latex_coeff(coeff)
        if cs == "1" and body:
            cs = ""
        elif cs == "-1" and body:
            cs = "-"
        rendered.append(f"{cs}{body}")
    out = rendered[0]
    for term in rendered[1:]:
        out += term if term.startswith("-") else "+" + term
    return out
