"""Symbolic gauge transformation for Schrödinger-parity hierarchy equations.

Writing v = exp(-i Phi) q with Phi_x = q r, the transformed flow

    i v_t + (-1)^(j+1) ∂_x^(2j) v
      = exp(-i Phi) [ N(q, r) + Phi_t q + (-1)^(j+1) ((∂_x - i q r)^(2j) - ∂_x^(2j)) q ]

is local because Phi_t (the time derivative of the accumulated phase) is an
exact antiderivative of the mass flux q_t r + q r_t.  Rewriting the bracket
in v via the twisted substitution ∂_x^k q -> (∂_x + i q r)^k q (conjugate
rule for r factors) yields an equation with no bad cubic terms.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .algebra import (
    DiffMonomial,
    DiffPoly,
    Factors,
    GaussianRational,
    poly_to_json,
    serialize_poly,
)
from .hierarchy import Equation, extract_bad_cubics, fmt_fraction

__all__ = [
    "NotExact",
    "PhaseImbalance",
    "ResidualBadCubic",
    "GaugeDerivation",
    "antiderivative",
    "phase_time_derivative",
    "twist_substitute",
    "derive_gauged",
    "is_gauged_form",
]

_MINUS_I = GaussianRational.of(0, -1)
_QR = DiffPoly.variable("q") * DiffPoly.variable("r")


class NotExact(Exception):
    """p has no antiderivative in the ring; carries the unreachable part."""

    def __init__(self, residual: DiffPoly):
        self.residual = residual
        super().__init__(f"not an exact derivative; residual {serialize_poly(residual)}")


class PhaseImbalance(Exception):
    """A monomial does not have exactly one more q-type than r-type factor."""


class ResidualBadCubic(Exception):
    """Bad cubic terms survived the gauge derivation."""

    def __init__(self, residual: dict[int, GaussianRational]):
        self.residual = residual
        super().__init__(f"bad cubics survived gauging: {residual}")


# ---------------------------------------------------------------------------
# Exact antiderivative by graded linear solve
# ---------------------------------------------------------------------------

def _partitions(total: int, slots: int):
    """Nonincreasing tuples of `slots` nonnegative ints summing to `total`."""
    if slots == 0:
        if total == 0:
            yield ()
        return
    for first in range(total, -1, -1):
        if first * slots < total:
            break
        for rest in _partitions(total - first, slots - 1):
            if not rest or first >= rest[0]:
                yield (first,) + rest


def _candidate_monomials(nq: int, nr: int, derivs: int) -> list[Factors]:
    """All canonical factor tuples with given variable counts and total order."""
    out = []
    for dq in range(derivs + 1):
        for part_q in _partitions(dq, nq):
            for part_r in _partitions(derivs - dq, nr):
                factors = tuple(sorted(
                    [("q", o) for o in part_q] + [("r", o) for o in part_r]
                ))
                out.append(factors)
    return out


def antiderivative(p: DiffPoly) -> DiffPoly:
    """The unique P with dx(P) = p, or :class:`NotExact`.

    dx raises the grading (order, #q, #r) -> (order + 2, #q, #r), so the
    problem splits into independent finite linear systems, one per graded
    block, solved exactly over the Gaussian rationals.  Injectivity of dx on
    constant-free polynomials makes the solution unique when it exists.
    """
    if p.is_zero:
        return DiffPoly.zero()
    blocks: dict[tuple[int, int, int], dict[Factors, GaussianRational]] = {}
    for factors, coeff in p.items():
        m = DiffMonomial(coeff, factors)
        key = (m.order, m.count("q"), m.count("r"))
        blocks.setdefault(key, {})[factors] = coeff
    result: dict[Factors, GaussianRational] = {}
    residual: dict[Factors, GaussianRational] = {}
    for (order, nq, nr), target in blocks.items():
        derivs = order - 2 - nq - nr
        if derivs < 0 or derivs % 2 == 1:
            residual.update(target)
            continue
        basis = _candidate_monomials(nq, nr, derivs // 2)
        solution, block_residual = _solve_dx_block(basis, target)
        if block_residual:
            residual.update(block_residual)
        else:
            result.update(solution)
    if residual:
        raise NotExact(DiffPoly(residual))
    return DiffPoly(result)


def _solve_dx_block(
    basis: list[Factors], target: dict[Factors, GaussianRational]
) -> tuple[dict[Factors, GaussianRational], dict[Factors, GaussianRational]]:
    """Solve dx(sum x_j basis_j) = target by exact Gaussian elimination."""
    # Sparse columns: image of each basis monomial under dx.
    columns = []
    row_index: dict[Factors, int] = {}
    for factors in basis:
        col: dict[int, GaussianRational] = {}
        image = DiffPoly.monomial(GaussianRational.of(1), factors).dx()
        for f, c in image.items():
            idx = row_index.setdefault(f, len(row_index))
            col[idx] = c
        columns.append(col)
    rows = len(row_index)
    rhs: dict[int, GaussianRational] = {}
    unreachable: dict[Factors, GaussianRational] = {}
    for f, c in target.items():
        idx = row_index.get(f)
        if idx is None:
            unreachable[f] = c
        else:
            rhs[idx] = c
    if unreachable:
        return {}, dict(target)
    # Dense elimination on the (rows x len(basis)) system; blocks are small.
    zero = GaussianRational()
    mat = [[columns[j].get(i, zero) for j in range(len(basis))] for i in range(rows)]
    vec = [rhs.get(i, zero) for i in range(rows)]
    piv_rows: list[int] = []
    piv_cols: list[int] = []
    r = 0
    for cidx in range(len(basis)):
        pivot = next((i for i in range(r, rows) if mat[i][cidx]), None)
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        vec[r], vec[pivot] = vec[pivot], vec[r]
        inv = GaussianRational.of(1) / mat[r][cidx]
        mat[r] = [x * inv for x in mat[r]]
        vec[r] = vec[r] * inv
        for i in range(rows):
            if i != r and mat[i][cidx]:
                factor = mat[i][cidx]
                mat[i] = [a - factor * b for a, b in zip(mat[i], mat[r])]
                vec[i] = vec[i] - factor * vec[r]
        piv_rows.append(r)
        piv_cols.append(cidx)
        r += 1
    # Rows with no pivot must be zero on the right-hand side, else not exact.
    for i in range(r, rows):
        if vec[i]:
            return {}, dict(target)
    solution: dict[Factors, GaussianRational] = {}
    for row, cidx in zip(piv_rows, piv_cols):
        if vec[row]:
            solution[basis[cidx]] = vec[row]
    return solution, {}


# ---------------------------------------------------------------------------
# Phase time derivative and twisted substitution
# ---------------------------------------------------------------------------

def time_derivative_rhs(eq: Equation) -> DiffPoly:
    """q_t expressed through the equation: q_t = -i (N - g ∂_x^(n+1) q)."""
    if eq.parity != "schrodinger":
        raise ValueError("time_derivative_rhs requires Schrödinger parity")
    linear = DiffPoly.monomial(eq.lhs_coeff, (("q", eq.dispersion_order),))
    return (eq.nonlinearity - linear).scale(_MINUS_I)


def phase_time_derivative(eq: Equation) -> DiffPoly:
    """Phi_t: the exact antiderivative of the mass flux q_t r + q r_t."""
    qt = time_derivative_rhs(eq)
    rt = qt.conj()
    flux = qt * DiffPoly.variable("r") + DiffPoly.variable("q") * rt
    return antiderivative(flux)


@lru_cache(maxsize=None)
def _twisted_q_power(order: int, direction: int) -> DiffPoly:
    """(∂_x + direction*i*q*r)^order applied to q, expanded exactly."""
    if order == 0:
        return DiffPoly.variable("q")
    w = _twisted_q_power(order - 1, direction)
    return w.dx() + (_QR * w).scale(GaussianRational.of(0, direction))


def twist_substitute(p: DiffPoly, direction: int, require_balanced: bool = True) -> DiffPoly:
    """Replace ∂_x^k q by (∂_x + direction*i*qr)^k q and the conjugate rule for r.

    Correctness rests on ∂_x(e^{iPhi} w) = e^{iPhi}(∂_x + i Phi_x) w with
    Phi_x = qr, which is invariant under the substitution itself (the gauge
    factor is unimodular).  With ``require_balanced`` every monomial must
    carry exactly one more q-type factor than r-type, so the phases cancel.
    """
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    acc = DiffPoly.zero()
    for factors, coeff in p.items():
        m = DiffMonomial(coeff, factors)
        if require_balanced and not m.is_phase_balanced:
            raise PhaseImbalance(f"monomial {serialize_poly(DiffPoly({factors: coeff}))}")
        prod = DiffPoly.constant(coeff)
        for var, order in factors:
            piece = _twisted_q_power(order, direction)
            if var == "r":
                piece = piece.conj()
            prod = prod * piece
        acc = acc + prod
    return acc


# ---------------------------------------------------------------------------
# Gauged equations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaugeDerivation:
    """Bundle: source equation, Phi_t, derived gauged equation, residual."""

    source: Equation
    phase_time_derivative: DiffPoly
    gauged: Equation
    residual_bad_cubics: dict[int, GaussianRational]

    def to_json(self) -> dict:
        return {
            "source": self.source.to_json(),
            "phase_time_derivative": poly_to_json(self.phase_time_derivative),
            "gauged": self.gauged.to_json(),
            "residual_bad_cubics": {
                str(k): {"re": fmt_fraction(c.re), "im": fmt_fraction(c.im)}
                for k, c in self.residual_bad_cubics.items()
            },
        }


def derive_gauged(eq: Equation) -> GaugeDerivation:
    """Conjugate a Schrödinger-parity equation by exp(-i ∫|q|^2).

    Returns the gauged equation for v = exp(-i Phi) q in canonical form,
    asserting that no bad cubic term survives.
    """
    if eq.parity != "schrodinger":
        raise ValueError("derive_gauged requires Schrödinger parity")
    if not eq.is_canonical:
        raise ValueError("derive_gauged requires the canonical normalization (alpha = 2^n)")
    j = eq.j
    sign = GaussianRational.of(1 if j % 2 == 1 else -1)  # (-1)^(j+1)
    phi_t = phase_time_derivative(eq)
    # (∂_x - i q r)^(2j) q - ∂_x^(2j) q: the twisted Leibniz correction.
    correction = _twisted_q_power(2 * j, -1) - DiffPoly.variable("q", 2 * j)
    bracket = eq.nonlinearity + phi_t * DiffPoly.variable("q") + correction.scale(sign)
    gauged_nl = twist_substitute(bracket, +1)
    gauged = Equation(
        n=eq.n,
        alpha=eq.alpha,
        parity="schrodinger",
        j=j,
        lhs_coeff=sign,
        nonlinearity=gauged_nl,
    )
    residual = extract_bad_cubics(gauged)
    if residual:
        raise ResidualBadCubic(residual)
    return GaugeDerivation(eq, phi_t, gauged, residual)


def is_gauged_form(eq: Equation) -> bool:
    """True iff the nonlinearity matches the gauged shape for this j.

    Every monomial must have an odd factor count 2k+1 with 1 <= k <= 2j,
    total derivative count 2j - k, phase balance, and cubic monomials must
    put at least one derivative on the conjugated factor.
    """
    if eq.parity != "schrodinger":
        return False
    j = eq.j
    for factors, _coeff in eq.nonlinearity.items():
        m = DiffMonomial(GaussianRational.of(1), factors)
        nfac = len(factors)
        if nfac % 2 == 0:
            return False
        k = (nfac - 1) // 2
        if not 1 <= k <= 2 * j:
            return False
        if m.derivative_count != 2 * j - k:
            return False
        if not m.is_phase_balanced:
            return False
        if nfac == 3:
            r_orders = [o for v, o in factors if v == "r"]
            if r_orders == [0]:
                return False
    return True
