"""Discrete norms, numeric gauge maps, and the ill-posedness experiments.

Fourier-side conventions: a field u = sum_k c_k exp(i xi_k x) on a grid with
mode spacing dxi has unitary-convention transform values

    u_hat(xi_k) = c_k * sqrt(2 pi) / dxi,

so that ||u_hat||_{L^2(d xi)} equals the physical L^2 norm and discrete sums
carry the quadrature weight dxi.  All norms below converge to their
continuum counterparts under grid refinement.

The third-Picard-iterate experiment runs on a frequency-window grid (carrier
offset xi0 ~ N): the packet, the cubic interactions and the output all live
within the window, so the windowed computation coincides with the same
computation on an impossibly large dense grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import DiffPoly
from .hierarchy import build_hierarchy_equation, cubic_terms
from .spectral import Field, Grid

__all__ = [
    "NormSpec",
    "PacketSpec",
    "ResonanceSample",
    "ResonanceStats",
    "GrowthFit",
    "LipschitzProbe",
    "BoundaryDecayViolation",
    "ResolutionError",
    "FitDegenerate",
    "hat_norm",
    "modulation_norm",
    "gauge_apply_numeric",
    "packet_grid",
    "packet_datum",
    "cubic_symbol_terms",
    "cubic_symbol",
    "resonance_phase",
    "max_resonance_phase",
    "picard3",
    "growth_exponent_fit",
    "predicted_growth_exponent",
    "resonance_ratio_stats",
    "gauge_lipschitz_probe",
    "hierarchy_cubic",
]


class BoundaryDecayViolation(ValueError):
    """Samples near the left grid boundary are not negligibly small."""


class ResolutionError(ValueError):
    """The grid does not resolve the requested frequency packet."""


class FitDegenerate(RuntimeError):
    """Not enough usable points for a growth-exponent fit."""


@dataclass(frozen=True)
class NormSpec:
    """Norm parameters: Fourier-Lebesgue (s, r) or modulation (s, p)."""

    kind: str  # "fourier_lebesgue" | "modulation"
    s: float
    exponent: float  # r for Fourier-Lebesgue (1 < r <= inf), p for modulation

    def __post_init__(self):
        if self.kind not in ("fourier_lebesgue", "modulation"):
            raise ValueError("unknown norm kind")
        if self.kind == "fourier_lebesgue" and not self.exponent > 1:
            raise ValueError("Fourier-Lebesgue exponent must satisfy r > 1")
        if self.kind == "modulation" and not self.exponent >= 1:
            raise ValueError("modulation exponent must satisfy p >= 1")

    def __call__(self, f: Field) -> float:
        if self.kind == "fourier_lebesgue":
            return hat_norm(f, self.s, self.exponent)
        return modulation_norm(f, self.s, self.exponent)


def _hat_values(f: Field) -> tuple[np.ndarray, np.ndarray, float]:
    """(true frequencies, unitary-convention u_hat samples, dxi)."""
    grid = f.grid
    coeffs = np.fft.fft(f.values) / grid.m
    return grid.true_frequencies, coeffs * np.sqrt(2 * np.pi) / grid.dxi, grid.dxi


def hat_norm(f: Field, s: float, r: float) -> float:
    """Weighted Fourier-Lebesgue norm: l^{r'} of <xi>^s u_hat with dxi weight."""
    if not r > 1:
        raise ValueError("need r > 1")
    xi, uhat, dxi = _hat_values(f)
    weighted = (1 + xi ** 2) ** (s / 2) * np.abs(uhat)
    rp = r / (r - 1) if np.isfinite(r) else 1.0
    return float((dxi * np.sum(weighted ** rp)) ** (1.0 / rp))


def modulation_norm(f: Field, s: float, p: float) -> float:
    """l^p over unit boxes of <n>^s times the L^2 mass captured by each box."""
    xi, uhat, dxi = _hat_values(f)
    boxes = np.floor(xi + 0.5).astype(np.int64)
    order = np.argsort(boxes, kind="stable")
    boxes_sorted = boxes[order]
    energy2 = dxi * np.abs(uhat[order]) ** 2
    uniq, starts = np.unique(boxes_sorted, return_index=True)
    sums = np.add.reduceat(energy2, starts)
    weighted = (1 + uniq.astype(float) ** 2) ** (s / 2) * np.sqrt(sums)
    if np.isinf(p):
        return float(np.max(weighted)) if weighted.size else 0.0
    return float(np.sum(weighted ** p) ** (1.0 / p))


# ---------------------------------------------------------------------------
# Numeric gauge map
# ---------------------------------------------------------------------------

def gauge_apply_numeric(f: Field, direction: int, boundary_tol: float = 1e-8) -> Field:
    """Multiply by exp(direction * i * Phi), Phi(x) = integral of |f|^2 from x=0.

    The grid stands in for the line, so the datum must vanish at the left
    boundary (checked on the first 1% of points).  The modulus is untouched
    and opposite directions invert each other exactly.
    """
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    grid = f.grid
    head = max(1, grid.m // 100)
    if np.max(np.abs(f.values[:head])) >= boundary_tol:
        raise BoundaryDecayViolation(
            f"|samples| up to {np.max(np.abs(f.values[:head])):.3e} on the first {head} points"
        )
    g = np.abs(f.values) ** 2
    ghat = np.fft.fft(g) / grid.m
    mean = ghat[0].real
    xi = grid.wavenumbers
    tilde = ghat.copy()
    tilde[0] = 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        tilde[1:] = tilde[1:] / (1j * xi[1:])
    anti = np.fft.ifft(tilde) * grid.m
    phi = (anti - anti[0]).real + mean * grid.x
    return Field(grid, np.exp(1j * direction * phi) * f.values, f.time)


# ---------------------------------------------------------------------------
# Frequency packets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PacketSpec:
    """Characteristic-function packet on [N, N + gamma), normalized in H_hat^s_r."""

    N: float
    j: int
    s: float
    r: float
    gamma: float | None = None

    @property
    def width(self) -> float:
        return self.gamma if self.gamma is not None else self.N ** (-(self.j - 1))

    @property
    def rprime(self) -> float:
        return self.r / (self.r - 1) if np.isfinite(self.r) else 1.0


def packet_grid(spec: PacketSpec, modes_in_packet: int = 48, m: int = 256) -> Grid:
    """Frequency-window grid resolving the packet and its cubic image."""
    dxi = spec.width / modes_in_packet
    # Support offsets live in [0, modes); the cubic image reaches 2*(modes-1).
    if 2 * modes_in_packet >= m // 2:
        raise ResolutionError("window too small for the cubic image of the packet")
    return Grid(m, 2 * np.pi / dxi, xi0=spec.N)


def packet_datum(spec: PacketSpec, grid: Grid) -> Field:
    """Field with u_hat = gamma^(-1/r') N^(-s) on [N, N + gamma), zero elsewhere."""
    xi = grid.true_frequencies
    eps = 1e-4 * grid.dxi  # half-open interval, robust to 1-ulp frequency rounding
    support = (xi >= spec.N - eps) & (xi < spec.N + spec.width - eps)
    if int(np.count_nonzero(support)) < 32:
        raise ResolutionError(
            f"only {int(np.count_nonzero(support))} modes resolve the packet; need >= 32"
        )
    amp = spec.width ** (-1.0 / spec.rprime) * spec.N ** (-spec.s)
    uhat = np.where(support, amp, 0.0).astype(np.complex128)
    coeffs = uhat * grid.dxi / np.sqrt(2 * np.pi)
    return Field.from_coefficients(grid, coeffs)


# ---------------------------------------------------------------------------
# Third Picard iterate
# ---------------------------------------------------------------------------

def _support_indices(coeffs: np.ndarray, rel_tol: float = 1e-12) -> np.ndarray:
    """Mode indices carrying actual content (ignores round-trip FFT dust)."""
    peak = float(np.max(np.abs(coeffs))) if coeffs.size else 0.0
    if peak == 0.0:
        return np.empty(0, dtype=np.int64)
    return np.nonzero(np.abs(coeffs) > rel_tol * peak)[0]


def cubic_symbol_terms(cubic: DiffPoly) -> list[tuple[complex, int, int, int]]:
    """(coefficient, a, b, c) per cubic monomial ∂^a q · ∂^b r · ∂^c q."""
    out = []
    for factors, coeff in cubic.items():
        if len(factors) != 3:
            raise ValueError("polynomial has a non-cubic term")
        qs = sorted(o for v, o in factors if v == "q")
        rs = [o for v, o in factors if v == "r"]
        if len(qs) != 2 or len(rs) != 1:
            raise ValueError("cubic term is not phase balanced")
        out.append((complex(coeff), qs[0], rs[0], qs[1]))
    return out


def cubic_symbol(cubic: DiffPoly):
    """Symmetrized trilinear symbol m(xi1, xi2, xi3) of a cubic nonlinearity.

    The quadratic-form convention pairs u_hat(xi1) conj(u_hat(xi2)) u_hat(xi3)
    on the simplex xi = xi1 - xi2 + xi3, so an r factor of order b contributes
    (-i xi2)^b and the two q slots are averaged.
    """
    terms = cubic_symbol_terms(cubic)

    def m(x1, x2, x3):
        total = 0
        for coeff, a, b, c in terms:
            sym = ((1j * x1) ** a * (1j * x3) ** c + (1j * x3) ** a * (1j * x1) ** c) / 2
            total = total + coeff * (-1j * x2) ** b * sym
        return total

    return m


def resonance_phase(j: int, x1, x2, x3):
    """Phi = -xi^(2j) + xi1^(2j) - xi2^(2j) + xi3^(2j), xi = xi1 - xi2 + xi3.

    Evaluated in the factored form (xi1 - xi2) * [S(xi1, xi2) - S(xi, xi3)]
    with S the complete homogeneous symmetric sum, which avoids the
    catastrophic cancellation of the naive power differences at high carrier
    frequency.
    """
    xi = x1 - x2 + x3
    band = 0
    for mdeg in range(2 * j):
        band = band + x1 ** mdeg * x2 ** (2 * j - 1 - mdeg) - xi ** mdeg * x3 ** (2 * j - 1 - mdeg)
    return (x1 - x2) * band


def hierarchy_cubic(j: int) -> DiffPoly:
    """Cubic part of the j-th hierarchy equation's nonlinearity (alpha = 2^n)."""
    return cubic_terms(build_hierarchy_equation(2 * j - 1, 2 ** (2 * j - 1)).nonlinearity)


def picard3(j: int, cubic: DiffPoly, phi: Field, t: float) -> Field:
    """Third Picard iterate of the cubic term, by direct simplex summation.

    In coefficient space:  out(xi) = sum over xi = xi1 - xi2 + xi3 of
    m(xi1,xi2,xi3) c(xi1) conj(c(xi2)) c(xi3) * (exp(i t Phi) - 1)/(i Phi),
    the removable singularity at Phi = 0 taking the value t.  The unimodular
    outer propagator is omitted; no norm can see it.
    """
    grid = phi.grid
    m_fn = cubic_symbol(cubic)
    coeffs = phi.coefficients()
    ks = np.fft.fftfreq(grid.m, d=1.0 / grid.m).astype(np.int64)
    support = _support_indices(coeffs)
    out = np.zeros(grid.m, dtype=np.complex128)
    if support.size == 0 or t == 0.0:
        return Field(grid, np.zeros(grid.m, dtype=np.complex128), t)
    k_sup = ks[support]
    c_sup = coeffs[support]
    k1, k2, k3 = np.meshgrid(k_sup, k_sup, k_sup, indexing="ij")
    a1, a2, a3 = np.meshgrid(c_sup, c_sup, c_sup, indexing="ij")
    x1 = grid.xi0 + k1 * grid.dxi
    x2 = grid.xi0 + k2 * grid.dxi
    x3 = grid.xi0 + k3 * grid.dxi
    phase = resonance_phase(j, x1, x2, x3)
    # (e^{i t Phi} - 1)/(i Phi) = t e^{i t Phi / 2} sinc(t Phi / 2), |.| <= t
    kernel = t * np.exp(0.5j * t * phase) * np.sinc(t * phase / (2 * np.pi))
    contrib = m_fn(x1, x2, x3) * a1 * np.conj(a2) * a3 * kernel
    k_out = (k1 - k2 + k3).ravel()
    idx = np.mod(k_out, grid.m)
    if np.any(ks[idx] != k_out):
        raise ResolutionError("cubic image of the packet leaves the frequency window")
    np.add.at(out, idx, contrib.ravel())
    return Field.from_coefficients(grid, out, t)


def max_resonance_phase(j: int, phi: Field) -> float:
    """max |Phi| over interacting mode triples of a packet field."""
    grid = phi.grid
    coeffs = phi.coefficients()
    ks = np.fft.fftfreq(grid.m, d=1.0 / grid.m).astype(np.int64)
    support = _support_indices(coeffs)
    if support.size == 0:
        return 0.0
    k_sup = ks[support]
    k1, k2, k3 = np.meshgrid(k_sup, k_sup, k_sup, indexing="ij")
    x1 = grid.xi0 + k1 * grid.dxi
    x2 = grid.xi0 + k2 * grid.dxi
    x3 = grid.xi0 + k3 * grid.dxi
    return float(np.max(np.abs(resonance_phase(j, x1, x2, x3))))


@dataclass(frozen=True)
class GrowthFit:
    j: int
    s: float
    r: float
    t: float
    N_values: tuple[float, ...]
    norms: tuple[float, ...]
    slope: float
    intercept: float
    stderr: float
    residuals: tuple[float, ...]  # log-norm residuals of the least-squares line
    predicted: float

    def to_json(self) -> dict:
        return {
            "j": self.j,
            "s": self.s,
            "r": self.r,
            "t": self.t,
            "N_values": list(self.N_values),
            "norms": list(self.norms),
            "slope": self.slope,
            "intercept": self.intercept,
            "stderr": self.stderr,
            "residuals": list(self.residuals),
            "predicted": self.predicted,
        }


def predicted_growth_exponent(j: int, s: float, r: float) -> float:
    rp = r / (r - 1) if np.isfinite(r) else 1.0
    return -2 * s + (2 * j - 2) / rp + 1


def growth_exponent_fit(
    j: int,
    s: float,
    r: float,
    N_list: list[int],
    modes_in_packet: int = 48,
    window: int = 256,
) -> GrowthFit:
    """Fit log ||picard3|| against log N for characteristic-function packets.

    The evaluation time t is fixed across N with t * max|Phi| <= 0.1, keeping
    every interaction inside the t-linear regime of the Duhamel kernel.
    """
    if len(N_list) < 4:
        raise FitDegenerate("need at least 4 packet frequencies")
    cubic = hierarchy_cubic(j)
    packets = []
    phi_max = 0.0
    for N in N_list:
        spec = PacketSpec(N=float(N), j=j, s=s, r=r)
        grid = packet_grid(spec, modes_in_packet=modes_in_packet, m=window)
        datum = packet_datum(spec, grid)
        phi_max = max(phi_max, max_resonance_phase(j, datum))
        packets.append(datum)
    t = 0.1 / phi_max if phi_max > 0 else 0.1
    norms = []
    for datum in packets:
        out = picard3(j, cubic, datum, t)
        norms.append(hat_norm(out, s, r))
    if any(not v > 0 for v in norms):
        raise FitDegenerate("vanishing third-iterate norm")
    logN = np.log(np.asarray(N_list, dtype=float))
    logv = np.log(np.asarray(norms))
    (slope, intercept), cov = np.polyfit(logN, logv, 1, cov=True)
    residuals = logv - (slope * logN + intercept)
    return GrowthFit(
        j=j,
        s=s,
        r=r,
        t=t,
        N_values=tuple(float(N) for N in N_list),
        norms=tuple(float(v) for v in norms),
        slope=float(slope),
        intercept=float(intercept),
        stderr=float(np.sqrt(cov[0, 0])),
        residuals=tuple(float(v) for v in residuals),
        predicted=predicted_growth_exponent(j, s, r),
    )


# ---------------------------------------------------------------------------
# Resonance sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResonanceSample:
    xi1: float
    xi2: float
    xi3: float
    alpha: float
    lhs: float
    rhs: float

    @staticmethod
    def evaluate(xi1: float, xi2: float, xi3: float, alpha: float) -> "ResonanceSample":
        xi = xi1 + xi2 + xi3
        lhs = abs(
            abs(xi) ** alpha - abs(xi1) ** alpha + abs(xi2) ** alpha - abs(xi3) ** alpha
        )
        ximax = max(abs(xi1), abs(xi2), abs(xi3), abs(xi))
        rhs = abs(xi1 + xi2) * abs(xi2 + xi3) * ximax ** (alpha - 2)
        return ResonanceSample(xi1, xi2, xi3, alpha, lhs, rhs)


@dataclass(frozen=True)
class ResonanceStats:
    alpha: float
    count_requested: int
    count_kept: int
    min_ratio: float
    median_ratio: float
    seed: int

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "count_requested": self.count_requested,
            "count_kept": self.count_kept,
            "min_ratio": self.min_ratio,
            "median_ratio": self.median_ratio,
            "seed": self.seed,
        }


def resonance_ratio_stats(
    j: int, count: int, seed: int, sample_range: float = 1.0, floor: float = 1e-9
) -> ResonanceStats:
    """Sample lhs/rhs of the resonance comparison over random triples.

    Near-resonant triples (rhs below floor * R^(2j), where both sides vanish)
    are discarded; the statistics of the remaining ratios probe the implied
    lower bound.
    """
    if count < 1:
        raise ValueError("count must be positive")
    alpha = 2.0 * j
    rng = np.random.default_rng(seed)
    xi = rng.uniform(-sample_range, sample_range, size=(3, count))
    total = xi.sum(axis=0)
    lhs = np.abs(
        np.abs(total) ** alpha
        - np.abs(xi[0]) ** alpha
        + np.abs(xi[1]) ** alpha
        - np.abs(xi[2]) ** alpha
    )
    ximax = np.maximum(np.abs(xi).max(axis=0), np.abs(total))
    rhs = np.abs(xi[0] + xi[1]) * np.abs(xi[1] + xi[2]) * ximax ** (alpha - 2)
    keep = rhs >= floor * sample_range ** alpha
    ratios = lhs[keep] / rhs[keep]
    return ResonanceStats(
        alpha=alpha,
        count_requested=count,
        count_kept=int(np.count_nonzero(keep)),
        min_ratio=float(np.min(ratios)),
        median_ratio=float(np.median(ratios)),
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Gauge continuity probe
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LipschitzProbe:
    s: float
    p: float
    radius: float
    trials: int
    seed: int
    max_ratio: float
    pairs_used: int

    def to_json(self) -> dict:
        return {
            "s": self.s,
            "p": self.p,
            "radius": self.radius,
            "trials": self.trials,
            "seed": self.seed,
            "max_ratio": self.max_ratio,
            "pairs_used": self.pairs_used,
        }


def _random_localized_field(grid: Grid, rng: np.random.Generator, kmax: int = 6) -> Field:
    ks = np.fft.fftfreq(grid.m, d=1.0 / grid.m).astype(int)
    coeffs = np.zeros(grid.m, dtype=np.complex128)
    band = np.abs(ks) <= kmax
    nb = int(np.count_nonzero(band))
    coeffs[band] = (rng.normal(size=nb) + 1j * rng.normal(size=nb)) / (1 + np.abs(ks[band])) ** 2
    values = np.fft.ifft(coeffs) * grid.m
    window = np.exp(-((grid.x - grid.length / 2) ** 2) / (2 * (grid.length / 12) ** 2))
    return Field(grid, values * window)


def gauge_lipschitz_probe(
    s: float,
    p: float,
    radius: float,
    trials: int,
    seed: int = 0,
    grid: Grid | None = None,
) -> LipschitzProbe:
    """Largest observed modulation-norm ratio ||G-(u) - G-(v)|| / ||u - v||
    over random localized pairs inside the ball of the given radius."""
    if not s > 0.5 - 1.0 / p:
        raise ValueError("need s > 1/2 - 1/p for the gauge map to act on this space")
    if grid is None:
        grid = Grid(256, 32 * np.pi)
    rng = np.random.default_rng(seed)
    spec = NormSpec("modulation", s, p)
    max_ratio = 0.0
    used = 0
    for _ in range(trials):
        fields = []
        for _ in range(2):
            f = _random_localized_field(grid, rng)
            norm = spec(f)
            target = radius * rng.uniform(0.3, 1.0)
            fields.append(Field(grid, f.values * (target / norm)))
        u, v = fields
        denom = spec(Field(grid, u.values - v.values))
        if denom < 1e-12:
            continue
        gu = gauge_apply_numeric(u, -1)
        gv = gauge_apply_numeric(v, -1)
        ratio = spec(Field(grid, gu.values - gv.values)) / denom
        used += 1
        max_ratio = max(max_ratio, ratio)
    return LipschitzProbe(s, p, radius, trials, seed, float(max_ratio), used)
