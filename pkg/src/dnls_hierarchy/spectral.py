"""Periodic Fourier pseudospectral solver for the generated equations.

Fields live on a uniform grid over [0, L); the linear flow of

    i u_t + (-1)^(j+1) ∂_x^(2j) u = N(u)

multiplies the mode xi by exp(-i xi^(2j) t) and is applied exactly, so the
time steppers (integrating-factor RK4 by default, ETDRK4 optionally) only
resolve the nonlinear scale.  Nonlinearities arrive as exact differential
polynomials and are compiled to evaluators: derivatives in frequency space,
factor products in physical space, with either zero-padded (alias-free)
products or classical 2/3-rule truncation.

A grid may carry a carrier offset xi0, in which case the stored samples are
the envelope w of u = exp(i xi0 x) w and mode k represents the true
frequency xi0 + 2 pi k / L.  Offset grids serve the frequency-window
experiments in :mod:`.analysis`; the solver itself requires xi0 = 0.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .algebra import DiffPoly, GaussianRational
from .hierarchy import hamiltonian_density

__all__ = [
    "Grid",
    "Field",
    "SimConfig",
    "SimResult",
    "ConfigError",
    "BlowupDetected",
    "NonlinearEvaluator",
    "compile_evaluator",
    "linear_propagate",
    "simulate",
    "conserved_functional",
    "ConservedFunctional",
    "plane_wave_reference",
    "plane_wave_nonlinearity",
    "plane_wave_sign",
    "gaussian_bump",
    "write_snapshot",
    "read_snapshot",
]


class ConfigError(ValueError):
    pass


class BlowupDetected(RuntimeError):
    """Non-finite samples appeared during a run."""


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid: m points on [0, length), optional carrier xi0."""

    m: int
    length: float = 2.0 * np.pi
    xi0: float = 0.0

    def __post_init__(self):
        if self.m < 16 or self.m & (self.m - 1):
            raise ConfigError("grid size must be a power of two, at least 16")
        if self.length <= 0:
            raise ConfigError("grid length must be positive")

    @property
    def dx(self) -> float:
        return self.length / self.m

    @property
    def dxi(self) -> float:
        return 2.0 * np.pi / self.length

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.m) * self.dx

    @property
    def wavenumbers(self) -> np.ndarray:
        """Intrinsic wavenumbers in FFT layout (no carrier)."""
        return np.fft.fftfreq(self.m, d=1.0 / self.m) * self.dxi

    @property
    def true_frequencies(self) -> np.ndarray:
        return self.xi0 + self.wavenumbers


@dataclass
class Field:
    """Complex samples on a grid at one instant."""

    grid: Grid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != (self.grid.m,):
            raise ConfigError("sample count does not match the grid")

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy(), self.time)

    def coefficients(self) -> np.ndarray:
        """Fourier series coefficients c_k with u = sum c_k exp(i xi_k x)."""
        return np.fft.fft(self.values) / self.grid.m

    @staticmethod
    def from_coefficients(grid: Grid, coeffs: np.ndarray, time: float = 0.0) -> "Field":
        return Field(grid, np.fft.ifft(coeffs) * grid.m, time)

    def l2_norm(self) -> float:
        return float(np.sqrt(self.grid.dx * np.sum(np.abs(self.values) ** 2)))


def _require_no_carrier(grid: Grid, what: str):
    if grid.xi0 != 0.0:
        raise ConfigError(f"{what} requires a grid without carrier offset")


# ---------------------------------------------------------------------------
# Nonlinearity compilation
# ---------------------------------------------------------------------------

def _pad_length(m: int, max_factors: int) -> int:
    need = (max_factors + 1) * (m // 2) + 1
    p = m
    while p < need:
        p *= 2
    return p


class NonlinearEvaluator:
    """Pointwise evaluator for a phase-balanced differential polynomial.

    ``dealias="pad"`` computes every product on a grid long enough that no
    retained mode aliases (exact up to rounding); ``dealias="truncate"``
    applies the classical sharp filter at ``fraction`` of the Nyquist mode to
    each factor and to the result.
    """

    def __init__(self, nl: DiffPoly, dealias: str = "pad", fraction: float = 2.0 / 3.0):
        if dealias not in ("pad", "truncate"):
            raise ConfigError("dealias must be 'pad' or 'truncate'")
        for m in nl.terms:
            if not m.is_phase_balanced:
                raise ConfigError("nonlinearity is not phase balanced")
        self.nl = nl
        self.dealias = dealias
        self.fraction = fraction
        self.terms: list[tuple[complex, tuple[tuple[str, int], ...]]] = [
            (complex(c), f) for f, c in nl.items()
        ]
        self.max_factors = max((len(f) for _, f in self.terms), default=1)

    def __call__(self, f: Field) -> Field:
        _require_no_carrier(f.grid, "nonlinear evaluation")
        return Field(f.grid, self.evaluate_values(f.grid, f.values), f.time)

    def evaluate_values(self, grid: Grid, values: np.ndarray) -> np.ndarray:
        coeffs = np.fft.fft(values) / grid.m
        return np.fft.ifft(self.rhs_coefficients(grid, coeffs, bare=True)) * grid.m

    def rhs_coefficients(self, grid: Grid, coeffs: np.ndarray, bare: bool = False) -> np.ndarray:
        """Spectral coefficients of N(u) (bare) or of -i N(u) (time stepping)."""
        m = grid.m
        xi = grid.wavenumbers
        if self.dealias == "truncate":
            keep = np.abs(xi) <= self.fraction * (m // 2) * grid.dxi
            out = np.zeros(m, dtype=np.complex128)
            cache: dict[tuple[str, int], np.ndarray] = {}
            for coeff, factors in self.terms:
                prod = np.full(m, coeff, dtype=np.complex128)
                for key in factors:
                    phys = cache.get(key)
                    if phys is None:
                        var, order = key
                        spec = coeffs * (1j * xi) ** order * keep
                        phys = np.fft.ifft(spec) * m
                        if var == "r":
                            phys = np.conj(phys)
                        cache[key] = phys
                    prod = prod * phys
                out += np.fft.fft(prod) / m
            out *= keep
        else:
            p = _pad_length(m, self.max_factors)
            half = m // 2
            out = np.zeros(m, dtype=np.complex128)
            cache = {}
            for coeff, factors in self.terms:
                prod = np.full(p, coeff, dtype=np.complex128)
                for key in factors:
                    phys = cache.get(key)
                    if phys is None:
                        var, order = key
                        spec = coeffs * (1j * xi) ** order
                        padded = np.zeros(p, dtype=np.complex128)
                        padded[:half] = spec[:half]
                        padded[p - half:] = spec[half:]
                        phys = np.fft.ifft(padded) * p
                        if var == "r":
                            phys = np.conj(phys)
                        cache[key] = phys
                    prod = prod * phys
                spec_p = np.fft.fft(prod) / p
                out[:half] += spec_p[:half]
                out[half:] += spec_p[p - half:]
        return out if bare else -1j * out


def compile_evaluator(
    nl: DiffPoly, dealias: str = "pad", fraction: float = 2.0 / 3.0
) -> NonlinearEvaluator:
    """Lower a differential-polynomial nonlinearity to a grid evaluator."""
    return NonlinearEvaluator(nl, dealias=dealias, fraction=fraction)


# ---------------------------------------------------------------------------
# Linear flow and time stepping
# ---------------------------------------------------------------------------

def linear_propagate(f: Field, j: int, t: float) -> Field:
    """Apply the exact linear flow: mode xi picks up exp(-i xi^(2j) t)."""
    _require_no_carrier(f.grid, "linear propagation")
    xi = f.grid.wavenumbers
    coeffs = f.coefficients() * np.exp(-1j * xi ** (2 * j) * t)
    return Field.from_coefficients(f.grid, coeffs, f.time + t)


@dataclass(frozen=True)
class SimConfig:
    """Time-stepping configuration.

    ``monitors`` lists conserved-functional indices (-1 for mass, n >= 0 for
    I_n); their values are recorded every ``monitor_stride`` steps.
    """

    j: int
    dt: float
    t_end: float
    dealias: str = "pad"
    dealias_fraction: float = 2.0 / 3.0
    integrator: str = "IFRK4"
    monitors: tuple[int, ...] = ()
    monitor_stride: int = 1

    def __post_init__(self):
        if self.j < 1:
            raise ConfigError("j must be >= 1")
        if self.dt <= 0 or self.t_end < 0:
            raise ConfigError("need dt > 0 and t_end >= 0")
        if self.integrator not in ("IFRK4", "ETDRK4"):
            raise ConfigError("integrator must be IFRK4 or ETDRK4")
        if self.monitor_stride < 1:
            raise ConfigError("monitor_stride must be >= 1")
        steps = round(self.t_end / self.dt)
        if abs(steps * self.dt - self.t_end) > 1e-9 * max(1.0, self.t_end):
            raise ConfigError("t_end must be an integer number of steps")

    @property
    def n_steps(self) -> int:
        return round(self.t_end / self.dt)

    def linear_phase_per_step(self, grid: Grid) -> float:
        """dt * max|xi|^(2j): the stiff linear rotation absorbed exactly by
        the exponential integrators (recorded for diagnostics, not enforced)."""
        xi_max = float(np.max(np.abs(grid.wavenumbers)))
        return self.dt * xi_max ** (2 * self.j)


@dataclass
class SimResult:
    field: Field
    times: np.ndarray
    monitors: dict[int, np.ndarray]
    steps: int
    l2_errors: np.ndarray | None = None


def _etdrk4_weights(z: np.ndarray, dt: float):
    # Circular contour (32 points) around each stiff eigenvalue; the phi
    # functions are entire so the averaged values are spectrally accurate.
    pts = np.exp(2j * np.pi * (np.arange(32) + 0.5) / 32)
    zc = z[:, None] + pts[None, :]
    q = dt * np.mean((np.exp(zc / 2) - 1) / zc, axis=1)
    f1 = dt * np.mean((-4 - zc + np.exp(zc) * (4 - 3 * zc + zc ** 2)) / zc ** 3, axis=1)
    f2 = dt * np.mean((2 + zc + np.exp(zc) * (-2 + zc)) / zc ** 3, axis=1)
    f3 = dt * np.mean((-4 - 3 * zc - zc ** 2 + np.exp(zc) * (4 - zc)) / zc ** 3, axis=1)
    return q, f1, f2, f3


def simulate(
    cfg: SimConfig,
    u0: Field,
    nl: NonlinearEvaluator | None,
    reference=None,
) -> SimResult:
    """Integrate i u_t + (-1)^(j+1) ∂_x^(2j) u = N(u) from u0 to t_end.

    ``reference``, if given, maps a time to the exact Field; the relative L^2
    error is then recorded alongside the monitors.
    """
    grid = u0.grid
    _require_no_carrier(grid, "simulation")
    if nl is not None and cfg.dealias != nl.dealias:
        nl = NonlinearEvaluator(nl.nl, cfg.dealias, cfg.dealias_fraction)
    xi = grid.wavenumbers
    lam = -1j * xi ** (2 * cfg.j)
    dt = cfg.dt
    c = u0.coefficients()

    if nl is None:
        rhs = lambda c: np.zeros_like(c)
    else:
        rhs = lambda c: nl.rhs_coefficients(grid, c)

    functionals = {n: conserved_functional(n) for n in cfg.monitors}
    times = [u0.time]
    series: dict[int, list[complex]] = {n: [] for n in cfg.monitors}
    errors: list[float] = []

    def record(c: np.ndarray, t: float):
        if not np.all(np.isfinite(c)):
            raise BlowupDetected(f"non-finite values at t = {t:.6g}")
        if functionals or reference is not None:
            f = Field.from_coefficients(grid, c, t)
            for n, functional in functionals.items():
                series[n].append(functional(f))
            if reference is not None:
                ref = reference(t)
                scale = ref.l2_norm() or 1.0
                errors.append(
                    float(np.sqrt(grid.dx * np.sum(np.abs(f.values - ref.values) ** 2)) / scale)
                )

    record(c, u0.time)
    times = [u0.time]

    # Overflow in the nonlinear products is how blowing-up runs manifest;
    # the monitor turns the resulting non-finite values into BlowupDetected.
    with np.errstate(over="ignore", invalid="ignore"):
        if cfg.integrator == "IFRK4":
            e1 = np.exp(lam * dt)
            e2 = np.exp(lam * dt / 2)
            for step in range(cfg.n_steps):
                k1 = rhs(c)
                k2 = rhs(e2 * (c + (dt / 2) * k1))
                k3 = rhs(e2 * c + (dt / 2) * k2)
                k4 = rhs(e1 * c + dt * e2 * k3)
                c = e1 * c + (dt / 6) * (e1 * k1 + 2 * e2 * (k2 + k3) + k4)
                t = u0.time + (step + 1) * dt
                if (step + 1) % cfg.monitor_stride == 0 or step + 1 == cfg.n_steps:
                    record(c, t)
                    times.append(t)
        else:
            e1 = np.exp(lam * dt)
            e2 = np.exp(lam * dt / 2)
            q, f1, f2, f3 = _etdrk4_weights(lam * dt, dt)
            for step in range(cfg.n_steps):
                nu = rhs(c)
                a = e2 * c + q * nu
                na = rhs(a)
                b = e2 * c + q * na
                nb = rhs(b)
                cc = e2 * a + q * (2 * nb - nu)
                nc = rhs(cc)
                c = e1 * c + f1 * nu + 2 * f2 * (na + nb) + f3 * nc
                t = u0.time + (step + 1) * dt
                if (step + 1) % cfg.monitor_stride == 0 or step + 1 == cfg.n_steps:
                    record(c, t)
                    times.append(t)

    final = Field.from_coefficients(grid, c, u0.time + cfg.n_steps * dt)
    return SimResult(
        field=final,
        times=np.asarray(times),
        monitors={n: np.asarray(v) for n, v in series.items()},
        steps=cfg.n_steps,
        l2_errors=np.asarray(errors) if reference is not None else None,
    )


# ---------------------------------------------------------------------------
# Conserved functionals
# ---------------------------------------------------------------------------

class ConservedFunctional:
    """Spectral quadrature of a hierarchy density (index -1 is the mass)."""

    def __init__(self, n: int):
        if n < -1:
            raise ValueError("index must be >= -1")
        self.n = n
        if n >= 0:
            self.terms = [(complex(c), f) for f, c in hamiltonian_density(n).items()]

    def __call__(self, f: Field) -> complex:
        grid, u = f.grid, f.values
        if self.n == -1:
            return complex(grid.dx * np.sum(np.abs(u) ** 2))
        xi = grid.wavenumbers
        coeffs = np.fft.fft(u) / grid.m
        cache: dict[tuple[str, int], np.ndarray] = {}
        density = np.zeros(grid.m, dtype=np.complex128)
        for coeff, factors in self.terms:
            prod = np.full(grid.m, coeff, dtype=np.complex128)
            for key in factors:
                phys = cache.get(key)
                if phys is None:
                    var, order = key
                    phys = np.fft.ifft(coeffs * (1j * xi) ** order) * grid.m
                    if var == "r":
                        phys = np.conj(phys)
                    cache[key] = phys
                prod = prod * phys
            density += prod
        return complex(grid.dx * np.sum(density))


def conserved_functional(n: int) -> ConservedFunctional:
    return ConservedFunctional(n)


# ---------------------------------------------------------------------------
# Exact plane-wave family
# ---------------------------------------------------------------------------

def plane_wave_nonlinearity(j: int, sigma: int | None = None) -> DiffPoly:
    """sigma * i * u^2 ∂_x^(2j-1) conj(u), with sigma solved for if omitted."""
    if sigma is None:
        sigma = plane_wave_sign(j)
    return DiffPoly.monomial(
        GaussianRational.of(0, sigma), (("q", 0), ("q", 0), ("r", 2 * j - 1))
    )


def _symbol_at_unit(poly: DiffPoly) -> GaussianRational:
    """Exact cubic symbol at frequencies (1, 1, 1): sum c * i^a (-i)^b i^c."""
    total = GaussianRational()
    i = GaussianRational.i()
    for factors, coeff in poly.items():
        if len(factors) != 3:
            raise ValueError("cubic polynomial expected")
        term = coeff
        for var, order in factors:
            base = i if var == "q" else GaussianRational.of(0, -1)
            term = term * (base ** order)
        total = total + term
    return total


def plane_wave_sign(j: int) -> int:
    """Sign sigma for which u = N^{-s} a exp(i(Nx - N^(2j) t + N^(2j-1-2s)|a|^2 t))
    solves i u_t + (-1)^(j+1) ∂_x^(2j) u = sigma i u^2 ∂_x^(2j-1) conj(u).

    Substituting the ansatz reduces the equation to m(N, N, N) = -N^(2j-1)
    for the cubic symbol m; homogeneity lets the sign be solved exactly at
    unit frequency.
    """
    m_plus = _symbol_at_unit(plane_wave_nonlinearity(j, sigma=1))
    sigma = GaussianRational.of(-1) / m_plus
    if not sigma.is_real or abs(sigma.re) != 1:
        raise AssertionError("plane-wave sign did not resolve to ±1")
    return int(sigma.re)


def plane_wave_reference(
    j: int, N: int, a: complex, s: float, t: float, grid: Grid
) -> Field:
    """Exact one-mode solution member at time t on the given grid."""
    if N == 0:
        raise ValueError("N must be nonzero")
    _require_no_carrier(grid, "plane-wave reference")
    amp = abs(a) ** 2
    phase = N * grid.x - float(N) ** (2 * j) * t + float(N) ** (2 * j - 1 - 2 * s) * amp * t
    values = float(N) ** (-s) * a * np.exp(1j * phase)
    return Field(grid, values, t)


# ---------------------------------------------------------------------------
# Helpers and snapshot format
# ---------------------------------------------------------------------------

def gaussian_bump(
    grid: Grid,
    amplitude: complex = 0.25,
    width: float = 3.0,
    center: float | None = None,
    carrier: int = 0,
) -> Field:
    """Smooth localized datum exp(-(x-c)^2 / (2 width^2)), optionally modulated."""
    c = grid.length / 2 if center is None else center
    x = grid.x
    values = amplitude * np.exp(-((x - c) ** 2) / (2 * width ** 2))
    if carrier:
        values = values * np.exp(1j * carrier * grid.dxi * x)
    return Field(grid, values)


_HEADER = struct.Struct("<qdqd")  # m, length, j, time


def write_snapshot(path, f: Field, j: int):
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(f.grid.m, f.grid.length, j, f.time))
        fh.write(np.ascontiguousarray(f.values, dtype=np.complex128).tobytes())


def read_snapshot(path) -> tuple[Field, int]:
    with open(path, "rb") as fh:
        m, length, j, time = _HEADER.unpack(fh.read(_HEADER.size))
        values = np.frombuffer(fh.read(16 * m), dtype=np.complex128)
    return Field(Grid(m, length), values.copy(), time), j
