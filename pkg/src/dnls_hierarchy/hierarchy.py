"""Generation of the dNLS hierarchy: Y_n recursion, Hamiltonians, equations.

The Kaup-Newell style recursion

    Y_0 = -r/(2i),    Y_{n+1} = ( dx(Y_n) + q * sum_{k=0}^{n} Y_{n-k} Y_k ) / (2i)

produces differential polynomials whose pairing I_n = ∫ q Y_n dx yields the
hierarchy Hamiltonians.  The n-th equation is the Hamiltonian flow

    i dq/dt = 2 alpha * dx( delta/delta r  [q Y_n] )

with r identified with the complex conjugate of q.  Odd n = 2j-1 gives the
Schrödinger-type (dNLS) equations, even n >= 2 the mKdV-type companions,
n = 0 the transport equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .algebra import (
    DiffMonomial,
    DiffPoly,
    Factors,
    GaussianRational,
    fmt_fraction,
    latex_coefficient,
    poly_to_json,
    poly_to_latex,
)

__all__ = [
    "PropertyViolation",
    "NormalizationMismatch",
    "YPropertyReport",
    "Equation",
    "compute_Y",
    "hamiltonian_density",
    "check_Y_properties",
    "variational_derivative",
    "build_hierarchy_equation",
    "unit_form",
    "extract_bad_cubics",
    "predicted_bad_cubic_coefficient",
    "merged_bad_cubic_prediction",
    "verify_bad_cubics",
    "cubic_terms",
]

_Q = DiffPoly.variable("q")


class PropertyViolation(Exception):
    """A structural invariant of Y_n failed; carries item and monomial."""

    def __init__(self, item: int, monomial: DiffMonomial | None, message: str):
        self.item = item
        self.monomial = monomial
        super().__init__(f"Y property {item}: {message}")


class NormalizationMismatch(Exception):
    """The derived linear coefficient contradicts the expected normalization."""


@lru_cache(maxsize=None)
def compute_Y(n: int) -> DiffPoly:
    """n-th conserved-density generator, by the exact recursion (memoized)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return DiffPoly.monomial(GaussianRational.two_i_pow(-1).scale(-1), (("r", 0),))
    prev = compute_Y(n - 1)
    acc = prev.dx()
    for k in range(n):
        acc = acc + _Q * (compute_Y(n - 1 - k) * compute_Y(k))
    return acc.scale(GaussianRational.two_i_pow(-1))


def hamiltonian_density(n: int) -> DiffPoly:
    """Density q*Y_n whose integral is the n-th Hamiltonian I_n."""
    return _Q * compute_Y(n)


@dataclass(frozen=True)
class YPropertyReport:
    """Outcome of the structural checks on Y_n (items 1-4 plus the
    single-factor comparison of item 5, which is reported, never enforced)."""

    n: int
    n_terms: int
    items_1_to_4_pass: bool
    multiple_sign: int  # uniform sign of the integer multiples, (-1)^(n+1)
    single_factor_coeff: GaussianRational
    matches_minus_n_exponent: bool        # coefficient == -(2i)^(-n)
    matches_minus_n_plus_1_exponent: bool  # coefficient == -(2i)^(-(n+1))


def check_Y_properties(n: int) -> YPropertyReport:
    """Verify the structure of Y_n.

    Items checked (violations raise :class:`PropertyViolation`):
      1. sum of monomials in q, r and their derivatives (no constant term);
      2. homogeneous order 2n+1 (order = 2*#derivatives + #factors);
      3. every monomial has one more r-type factor than q-type;
      4. every coefficient is a positive-integer multiple of
         (-1)^(n+1) * (-1)^k * (2i)^(k-2n-1), k the monomial's derivative
         count.  (For odd n the leading sign is +1, matching the usual
         statement; for even n the recursion flips it.)

    Item 5 compares the unique single-factor term against both candidate
    normalizations -(2i)^(-n) ∂_x^n r and -(2i)^(-(n+1)) ∂_x^n r and reports
    which one holds.
    """
    if n < 1:
        raise ValueError("check_Y_properties requires n >= 1")
    y = compute_Y(n)
    if y.is_zero:
        raise PropertyViolation(1, None, "Y_n is zero")
    sign = -1 if n % 2 == 0 else 1  # (-1)^(n+1)
    single: list[DiffMonomial] = []
    for m in y.terms:
        if not m.factors:
            raise PropertyViolation(1, m, "constant term present")
        if m.order != 2 * n + 1:
            raise PropertyViolation(2, m, f"order {m.order} != {2 * n + 1}")
        if m.count("r") != m.count("q") + 1:
            raise PropertyViolation(3, m, "factor counts not r = q + 1")
        k = m.derivative_count
        base = GaussianRational.two_i_pow(k - 2 * n - 1)
        if k % 2 == 1:
            base = -base
        ratio = m.coeff / base
        if not ratio.is_real or ratio.re.denominator != 1 or ratio.re * sign <= 0:
            raise PropertyViolation(
                4, m, f"coefficient is not a positive-integer multiple (ratio {ratio!r})"
            )
        if len(m.factors) == 1:
            single.append(m)
    if len(single) != 1 or single[0].factors != (("r", n),):
        raise PropertyViolation(1, None, "single-factor term is not ∂_x^n r")
    c = single[0].coeff
    return YPropertyReport(
        n=n,
        n_terms=len(y),
        items_1_to_4_pass=True,
        multiple_sign=sign,
        single_factor_coeff=c,
        matches_minus_n_exponent=(c == GaussianRational.two_i_pow(-n).scale(-1)),
        matches_minus_n_plus_1_exponent=(c == GaussianRational.two_i_pow(-(n + 1)).scale(-1)),
    )


# ---------------------------------------------------------------------------
# Variational (Euler) derivative
# ---------------------------------------------------------------------------

def _partial_wrt(p: DiffPoly, var: str, order: int) -> DiffPoly:
    """Formal partial derivative of p with respect to the factor ∂_x^order var."""
    target = (var, order)
    acc: dict[Factors, GaussianRational] = {}
    for factors, coeff in p.items():
        mult = factors.count(target)
        if not mult:
            continue
        idx = factors.index(target)
        nf = factors[:idx] + factors[idx + 1:]
        c = coeff.scale(mult)
        s = acc.get(nf)
        acc[nf] = c if s is None else s + c
    return DiffPoly(acc)


def variational_derivative(p: DiffPoly, var: str) -> DiffPoly:
    """Euler operator: sum_k (-1)^k dx^k [ ∂p / ∂(∂_x^k var) ]."""
    if var not in ("q", "r"):
        raise ValueError("var must be 'q' or 'r'")
    max_order = max(
        (o for factors, _ in p.items() for v, o in factors if v == var), default=-1
    )
    acc = DiffPoly.zero()
    for k in range(max_order + 1):
        piece = _partial_wrt(p, var, k)
        for _ in range(k):
            piece = piece.dx()
        acc = acc + (piece if k % 2 == 0 else -piece)
    return acc


# ---------------------------------------------------------------------------
# Hierarchy equations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Equation:
    """A hierarchy (or gauged) equation in canonical form.

    Schrödinger parity (odd n):   i dq/dt + g * ∂_x^(2j) q = N(q, r)
    mKdV parity (even n >= 2):      dq/dt + g * ∂_x^(n+1) q = N(q, r)
    transport (n = 0):              dq/dt + g * ∂_x q = 0   (g = -alpha)

    ``g`` is stored exactly; the canonical normalization g = (-1)^(j+1)
    (resp. (-1)^(n/2+1)) holds exactly when alpha = 2^n.
    """

    n: int
    alpha: GaussianRational
    parity: str  # "schrodinger" | "mkdv" | "transport"
    j: int | None
    lhs_coeff: GaussianRational
    nonlinearity: DiffPoly

    @property
    def dispersion_order(self) -> int:
        return self.n + 1

    @property
    def is_canonical(self) -> bool:
        if self.parity == "schrodinger":
            want = -1 if self.j % 2 == 0 else 1  # (-1)^(j+1)
        elif self.parity == "mkdv":
            want = -1 if (self.n // 2) % 2 == 1 else 1  # (-1)^(n/2+1) ... n/2 even -> +1
            want = -want
        else:
            return True
        return self.lhs_coeff == GaussianRational.of(want)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "j": self.j,
            "parity": self.parity,
            "alpha": {"re": fmt_fraction(self.alpha.re), "im": fmt_fraction(self.alpha.im)},
            "linear": {
                "order": self.dispersion_order,
                "sign": {
                    "re": fmt_fraction(self.lhs_coeff.re),
                    "im": fmt_fraction(self.lhs_coeff.im),
                },
                "canonical": self.is_canonical,
            },
            "nonlinearity": poly_to_json(self.nonlinearity),
        }

    def latex(self, var_names: tuple[str, str] = ("q", "r")) -> str:
        u = var_names[0]
        order = self.dispersion_order
        deriv = (
            f"{u}_x" if order == 1
            else f"{u}_{{{'x' * order}}}" if order <= 6
            else f"\\partial_x^{{{order}}} {u}"
        )
        cs = latex_coefficient(self.lhs_coeff)
        if cs == "1":
            lin = "+" + deriv
        elif cs == "-1":
            lin = "-" + deriv
        else:
            lin = ("" if cs.startswith("-") else "+") + cs + deriv
        time = f"i{u}_t" if self.parity == "schrodinger" else f"{u}_t"
        return f"{time}{lin} = {poly_to_latex(self.nonlinearity, var_names)}"


def _hamiltonian_rhs(n: int, alpha: GaussianRational) -> DiffPoly:
    """Right-hand side of i dq/dt = 2 alpha dx(delta/delta r [q Y_n])."""
    return variational_derivative(hamiltonian_density(n), "r").dx().scale(alpha.scale(2))


def build_hierarchy_equation(n: int, alpha: GaussianRational | int) -> Equation:
    """Derive the n-th hierarchy equation and put it in canonical form."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if not isinstance(alpha, GaussianRational):
        alpha = GaussianRational.of(alpha)
    if not alpha:
        raise ValueError("alpha must be nonzero")
    rhs = _hamiltonian_rhs(n, alpha)  # i q_t = rhs
    lin_key: Factors = (("q", n + 1),)
    observed = rhs.coefficient(lin_key)
    expected = GaussianRational.two_i_pow(-(n + 1)).scale(-2 if n % 2 == 0 else 2) * alpha
    if observed != expected:
        raise NormalizationMismatch(
            f"linear coefficient {observed!r} differs from expected {expected!r} at n={n}"
        )
    nonlinear = rhs - DiffPoly.monomial(observed, lin_key)
    for m in nonlinear.terms:
        if m.order != 2 * n + 3 or not m.is_phase_balanced:
            raise NormalizationMismatch(
                f"nonlinear term violates order/phase homogeneity at n={n}: {m!r}"
            )
    if n == 0:
        # i q_t = i alpha q_x  ->  q_t - alpha q_x = 0
        return Equation(0, alpha, "transport", None, -alpha, DiffPoly.zero())
    if n % 2 == 1:
        # i q_t + g ∂^(2j) q = N with g = -observed
        return Equation(n, alpha, "schrodinger", (n + 1) // 2, -observed, nonlinear)
    # even n: q_t = -i rhs  ->  q_t + g ∂^(n+1) q = N
    minus_i = GaussianRational.of(0, -1)
    return Equation(n, alpha, "mkdv", None, -(minus_i * observed), nonlinear.scale(minus_i))


def unit_form(n: int) -> DiffPoly:
    """Per-unit-alpha presentation ∂_x^(n+1) q + NL_n.

    The n-th flow reads q_t = (alpha i^n / 2^n) * unit_form(n); the returned
    polynomial is the parenthesized content with unit linear coefficient.
    """
    scale = (
        GaussianRational.of(Fraction(2) ** n)
        * (GaussianRational.i() ** (-n))
        * GaussianRational.of(0, -2)
    )
    p = variational_derivative(hamiltonian_density(n), "r").dx().scale(scale)
    if p.coefficient((("q", n + 1),)) != GaussianRational.of(1):
        raise NormalizationMismatch(f"unit form linear term is not ∂^{n + 1}q at n={n}")
    return p


# ---------------------------------------------------------------------------
# Bad cubic coefficients
# ---------------------------------------------------------------------------

def cubic_terms(p: DiffPoly) -> DiffPoly:
    """The three-factor part of a polynomial."""
    return DiffPoly({f: c for f, c in p.items() if len(f) == 3})


def extract_bad_cubics(eq: Equation) -> dict[int, GaussianRational]:
    """Coefficients of cubic monomials with every derivative on q-type factors.

    Keys are min(k, n-k) for the two q-derivative orders (k, n-k); the value
    is the canonical merged coefficient in the equation's stored frame.
    """
    out: dict[int, GaussianRational] = {}
    for factors, coeff in eq.nonlinearity.items():
        if len(factors) != 3:
            continue
        qs = [o for v, o in factors if v == "q"]
        rs = [o for v, o in factors if v == "r"]
        if len(qs) != 2 or rs != [0]:
            continue
        key = min(qs)
        if key in out:
            raise AssertionError("duplicate bad-cubic key; nonlinearity not canonical")
        out[key] = coeff
    return out


def predicted_bad_cubic_coefficient(
    n: int, k: int, alpha: GaussianRational | int
) -> GaussianRational:
    """Closed form (4 (-1)^(n+1) alpha / (2i)^(n+2)) (C(n+2, k+1) - d_{0,k} - d_{n,k})."""
    if n < 1 or not 0 <= k <= n:
        raise ValueError("need n >= 1 and 0 <= k <= n")
    if not isinstance(alpha, GaussianRational):
        alpha = GaussianRational.of(alpha)
    lead = alpha.scale(4 if n % 2 == 1 else -4) / GaussianRational.two_i_pow(n + 2)
    count = math.comb(n + 2, k + 1) - (1 if k == 0 else 0) - (1 if k == n else 0)
    return lead.scale(count)


def merged_bad_cubic_prediction(
    n: int, k: int, alpha: GaussianRational | int
) -> GaussianRational:
    """Predicted canonical coefficient of the merged monomial for pair {k, n-k}.

    The closed form counts the ordered slot pair; when k = n - k the two slots
    coincide and the canonical coefficient is half the formula value.
    """
    value = predicted_bad_cubic_coefficient(n, k, alpha)
    return value.scale(Fraction(1, 2)) if 2 * k == n else value


@dataclass(frozen=True)
class BadCubicCheck:
    n: int
    alpha: GaussianRational
    observed: dict[int, GaussianRational]
    predicted: dict[int, GaussianRational]
    matches: bool


def verify_bad_cubics(n: int, alpha: GaussianRational | int | None = None) -> BadCubicCheck:
    """Compare extracted bad-cubic coefficients with the closed form, exactly.

    The closed form lives in the i*dq/dt frame; for mKdV parity the stored
    nonlinearity sits in the dq/dt frame, a factor i apart.
    """
    if alpha is None:
        alpha = GaussianRational.of(Fraction(2) ** n)
    elif not isinstance(alpha, GaussianRational):
        alpha = GaussianRational.of(alpha)
    eq = build_hierarchy_equation(n, alpha)
    frame = GaussianRational.of(1) if eq.parity == "schrodinger" else GaussianRational.i()
    observed = {k: frame * c for k, c in extract_bad_cubics(eq).items()}
    predicted = {
        min(k, n - k): merged_bad_cubic_prediction(n, min(k, n - k), alpha)
        for k in range(n + 1)
    }
    return BadCubicCheck(n, alpha, observed, predicted, observed == predicted)
