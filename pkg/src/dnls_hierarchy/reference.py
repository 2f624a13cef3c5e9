"""Curated reference tables for the first hierarchy equations.

The ``reference_data`` directory stores, in the canonical text serialization,
the expanded nonlinearity NL_n and its antiderivative (bracket form) for the
flows n = 0..5 in the per-unit-alpha presentation

    q_t = (alpha i^n / 2^n) ( ∂_x^(n+1) q + NL_n ),

plus the gauged nonlinearities for j = 1, 2, 3 at alpha = 2^(2j-1).  The
tables were transcribed and cross-checked independently of the generator
(bracket and expanded forms differentiate into each other; cubic
coefficients obey the closed form), so they pin the derivation down to the
coefficient level.

``expected_differences.json`` lists monomials that are allowed to differ
from the derivation without failing a comparison; each is reported either
way.  The sixth-order gauged table carries one such flagged entry, the
quintic +q³r_x r_xxx whose sign breaks the pattern of its neighbours.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from .algebra import DiffPoly, Factors, GaussianRational, parse_poly, serialize_poly
from .gauge import antiderivative, derive_gauged
from .hierarchy import build_hierarchy_equation, unit_form

__all__ = [
    "reference_expanded",
    "reference_bracket",
    "reference_gauged",
    "reference_equation_nonlinearity",
    "expected_differences",
    "GoldenDiff",
    "compare_hierarchy_equation",
    "compare_gauged_equation",
    "REFERENCE_HIERARCHY_RANGE",
    "REFERENCE_GAUGED_RANGE",
]

REFERENCE_HIERARCHY_RANGE = range(0, 6)
REFERENCE_GAUGED_RANGE = (1, 2, 3)


def _load_text(name: str) -> str:
    return resources.files("dnls_hierarchy").joinpath("reference_data", name).read_text()


def reference_expanded(n: int) -> DiffPoly:
    """Stored NL_n (expanded, per-unit-alpha frame)."""
    return parse_poly(_load_text(f"hierarchy_n{n}_expanded.txt"))


def reference_bracket(n: int) -> DiffPoly:
    """Stored antiderivative of NL_n (the nonlinearity under one ∂_x)."""
    return parse_poly(_load_text(f"hierarchy_n{n}_bracket.txt"))


def reference_gauged(j: int) -> DiffPoly:
    """Stored gauged nonlinearity for dispersion order 2j, canonical frame."""
    return parse_poly(_load_text(f"gauged_j{j}.txt"))


def expected_differences() -> dict[str, list[dict]]:
    return json.loads(_load_text("expected_differences.json"))


def reference_equation_nonlinearity(n: int) -> tuple[GaussianRational, DiffPoly]:
    """Canonical-frame (lhs coefficient g, nonlinearity N) implied by the table.

    With alpha = 2^n the stored unit form converts exactly:
      odd n = 2j-1:  i q_t + (-1)^(j+1) ∂^(2j) q = (-1)^j NL_n
      even n >= 2:     q_t + (-1)^(n/2+1) ∂^(n+1) q = (-1)^(n/2) NL_n
      n = 0:           q_t - alpha q_x = 0
    """
    nl = reference_expanded(n)
    if n == 0:
        return GaussianRational.of(-(2 ** n)), DiffPoly.zero()
    if n % 2 == 1:
        j = (n + 1) // 2
        s = 1 if j % 2 == 0 else -1
        return GaussianRational.of(-s), nl.scale(s)
    s = 1 if (n // 2) % 2 == 0 else -1
    return GaussianRational.of(-s), nl.scale(s)


# ---------------------------------------------------------------------------
# Comparisons
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GoldenDiff:
    """Outcome of one reference comparison.

    ``differences`` maps the serialized monomial to (derived, stored) pairs
    for every unexpected mismatch; ``allowed`` does the same for monomials on
    the expected-differences list (reported, never failing).
    """

    label: str
    matches: bool
    differences: dict[str, tuple[str, str]] = field(default_factory=dict)
    allowed: dict[str, tuple[str, str]] = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "matches": self.matches,
            "differences": {k: list(v) for k, v in self.differences.items()},
            "allowed_differences": {k: list(v) for k, v in self.allowed.items()},
            "notes": list(self.notes),
        }


def _coeff_str(c: GaussianRational | None) -> str:
    if c is None:
        return "absent"
    return serialize_poly(DiffPoly({(): c})) if c else "0"


def _diff_polys(derived: DiffPoly, stored: DiffPoly, allowed_terms: set[Factors]):
    diffs: dict[str, tuple[str, str]] = {}
    allowed: dict[str, tuple[str, str]] = {}
    keys = {f for f, _ in derived.items()} | {f for f, _ in stored.items()}
    for f in sorted(keys):
        a = derived.coefficient(f)
        b = stored.coefficient(f)
        label = serialize_poly(DiffPoly({f: GaussianRational.of(1)}))
        entry = (_coeff_str(a), _coeff_str(b))
        if f in allowed_terms:
            allowed[label] = entry
        elif a != b:
            diffs[label] = entry
    return diffs, allowed


def _parse_term_key(term: str) -> Factors:
    poly = parse_poly(term)
    ((factors, _coeff),) = poly.items()
    return factors


def compare_hierarchy_equation(n: int) -> GoldenDiff:
    """Derived n-th equation (alpha = 2^n) against the stored tables."""
    eq = build_hierarchy_equation(n, 2 ** n)
    g_ref, nl_ref = reference_equation_nonlinearity(n)
    diffs, _ = _diff_polys(eq.nonlinearity, nl_ref, set())
    notes = []
    if eq.lhs_coeff != g_ref:
        diffs["<linear coefficient>"] = (_coeff_str(eq.lhs_coeff), _coeff_str(g_ref))
    # The unit form must also reproduce the bracket presentation exactly.
    if n >= 1:
        nl_unit = unit_form(n) - DiffPoly.monomial(GaussianRational.of(1), (("q", n + 1),))
        bracket_diffs, _ = _diff_polys(antiderivative(nl_unit), reference_bracket(n), set())
        for k, v in bracket_diffs.items():
            diffs[f"<bracket> {k}"] = v
        notes.append("bracket form checked via exact antiderivative")
    return GoldenDiff(
        label=f"hierarchy n={n}",
        matches=not diffs,
        differences=diffs,
        notes=tuple(notes),
    )


def compare_gauged_equation(j: int) -> GoldenDiff:
    """Derived gauged equation against the stored table, honouring the
    expected-differences list for this j."""
    gd = derive_gauged(build_hierarchy_equation(2 * j - 1, 2 ** (2 * j - 1)))
    stored = reference_gauged(j)
    allowed_entries = expected_differences().get(f"gauged_j{j}", [])
    allowed_terms = {_parse_term_key(e["term"]) for e in allowed_entries}
    diffs, allowed = _diff_polys(gd.gauged.nonlinearity, stored, allowed_terms)
    notes = []
    for key, (derived_c, stored_c) in allowed.items():
        status = "agrees with the stored table" if derived_c == stored_c else "DIFFERS from the stored table"
        notes.append(f"flagged term {key}: derived {derived_c}, stored {stored_c} ({status})")
    return GoldenDiff(
        label=f"gauged j={j}",
        matches=not diffs,
        differences=diffs,
        allowed=allowed,
        notes=tuple(notes),
    )
