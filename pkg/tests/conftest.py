"""Shared oracles and strategies.

The oracles here are deliberately independent of the library code paths they
check: norms are computed from the definition with an O(M^2) DFT, nonlinear
evaluation by direct summation of mode convolutions, never through the FFT
pipeline under test.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from dnls_hierarchy.algebra import DiffPoly, GaussianRational
from dnls_hierarchy.spectral import Field, Grid

# ---------------------------------------------------------------------------
# Hypothesis strategies for exact polynomials
# ---------------------------------------------------------------------------

_small_fraction = st.builds(
    Fraction,
    st.integers(min_value=-6, max_value=6),
    st.integers(min_value=1, max_value=4),
)

gaussian_rationals = st.builds(GaussianRational, _small_fraction, _small_fraction)

_nonzero_gaussian_rationals = gaussian_rationals.filter(bool)

_factors = st.lists(
    st.tuples(st.sampled_from(["q", "r"]), st.integers(min_value=0, max_value=3)),
    min_size=0,
    max_size=3,
).map(tuple)


@st.composite
def diff_polys(draw, max_terms: int = 4, allow_constant: bool = True):
    n_terms = draw(st.integers(min_value=0, max_value=max_terms))
    acc = DiffPoly.zero()
    for _ in range(n_terms):
        coeff = draw(_nonzero_gaussian_rationals)
        factors = draw(_factors)
        if not allow_constant and not factors:
            factors = (("q", 0),)
        acc = acc + DiffPoly.monomial(coeff, factors)
    return acc


# ---------------------------------------------------------------------------
# Numerical oracles
# ---------------------------------------------------------------------------

def random_band_field(grid: Grid, kmax: int, seed: int, decay: float = 2.0) -> Field:
    """Random band-limited field with polynomially decaying spectrum."""
    rng = np.random.default_rng(seed)
    ks = np.fft.fftfreq(grid.m, d=1.0 / grid.m).astype(int)
    coeffs = np.zeros(grid.m, dtype=np.complex128)
    band = np.abs(ks) <= kmax
    nb = int(np.count_nonzero(band))
    coeffs[band] = (rng.normal(size=nb) + 1j * rng.normal(size=nb)) / (
        1.0 + np.abs(ks[band])
    ) ** decay
    return Field(grid, np.fft.ifft(coeffs) * grid.m)


def convolution_oracle(nl: DiffPoly, f: Field) -> np.ndarray:
    """Spectral coefficients of N(u) by direct mode-convolution sums."""
    grid = f.grid
    m = grid.m
    coeffs = np.fft.fft(f.values) / m
    ks = np.fft.fftfreq(m, d=1.0 / m).astype(int)
    order = np.argsort(ks)
    ks_sorted = ks[order]
    out: dict[int, complex] = {}
    for factors, coeff in nl.items():
        spec = None
        kmin = 0
        for var, od in factors:
            amp = (coeffs * (1j * ks * grid.dxi) ** od)[order]
            lo = ks_sorted[0]
            if var == "r":
                amp = np.conj(amp[::-1])  # conj(u) spectrum lives at negated modes
                lo = -ks_sorted[-1]
            if spec is None:
                spec, kmin = amp, lo
            else:
                spec = np.convolve(spec, amp)
                kmin += lo
        cval = complex(coeff)
        for idx, val in enumerate(spec):
            k = kmin + idx
            out[k] = out.get(k, 0.0) + cval * val
    result = np.zeros(m, dtype=np.complex128)
    for idx, k in enumerate(ks):
        result[idx] = out.get(int(k), 0.0)
    return result


def hat_norm_oracle(f: Field, s: float, r: float) -> float:
    """Fourier-Lebesgue norm straight from the definition (O(M^2) DFT)."""
    grid = f.grid
    x = grid.x
    uhat = np.array(
        [
            grid.length / grid.m * np.sum(f.values * np.exp(-1j * xi * x))
            for xi in grid.wavenumbers
        ]
    ) / np.sqrt(2 * np.pi)
    xis = grid.true_frequencies
    rp = r / (r - 1) if np.isfinite(r) else 1.0
    weighted = (1 + xis ** 2) ** (s / 2) * np.abs(uhat)
    return float((grid.dxi * np.sum(weighted ** rp)) ** (1 / rp))


def modulation_norm_oracle(f: Field, s: float, p: float) -> float:
    """Modulation norm from the definition, box by box."""
    grid = f.grid
    x = grid.x
    uhat = np.array(
        [
            grid.length / grid.m * np.sum(f.values * np.exp(-1j * xi * x))
            for xi in grid.wavenumbers
        ]
    ) / np.sqrt(2 * np.pi)
    boxes: dict[int, float] = {}
    for xi, amp in zip(grid.true_frequencies, uhat):
        n = int(np.floor(xi + 0.5))
        boxes[n] = boxes.get(n, 0.0) + grid.dxi * abs(amp) ** 2
    values = [(1 + n * n) ** (s / 2) * np.sqrt(e) for n, e in boxes.items()]
    if np.isinf(p):
        return float(max(values))
    return float(sum(v ** p for v in values) ** (1 / p))


def l2_distance(a: Field, b: Field) -> float:
    return float(np.sqrt(a.grid.dx * np.sum(np.abs(a.values - b.values) ** 2)))
