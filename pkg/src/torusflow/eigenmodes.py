"""Least-eigenvalue analysis of the torus Laplacian, eigenspace
projections, sinusoidal orbit families and distance-to-orbit metrics.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .diagnostics import lp_norm
from .spectral import (
    GridField,
    TorusGeometry,
    forward_transform,
    inverse_transform,
    SpectralField,
)

DEGENERACY_GAP = 1e-12
PHASE_TOL = 1e-8
COARSE_SAMPLES = 128
GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


class TorusCase(enum.Enum):
    SHORT = "short"  # nu1 < nu2
    LONG = "long"  # nu1 > nu2
    SQUARE = "square"  # nu1 == nu2


class OrbitKind(enum.Enum):
    AXIS1 = "axis1"
    AXIS2 = "axis2"
    SQUARE_PAIR = "square_pair"


@dataclass(frozen=True)
class EigenvalueInfo:
    """Least eigenvalue of the negative Laplacian and its mode set."""

    lambda1: float
    case: TorusCase
    j_set: tuple[tuple[int, int], ...]


class NoSolutionError(ValueError):
    """The amplitude identification system has no admissible solution."""


def analyze(geom: TorusGeometry) -> EigenvalueInfo:
    """Classify the torus and return the least eigenvalue and its modes.

    The square case requires exact equality of nu1 and nu2; a gap below
    1e-12 is rejected because the eigenvalue multiplicity jumps there.
    """
    nu1, nu2 = geom.nu1, geom.nu2
    if nu1 == nu2:
        return EigenvalueInfo(
            nu1**-2, TorusCase.SQUARE, ((0, 1), (0, -1), (1, 0), (-1, 0))
        )
    if abs(nu1 - nu2) < DEGENERACY_GAP:
        raise ValueError(
            "aspect ratio within 1e-12 of square but not equal; "
            "declare the square case with nu1 == nu2 exactly"
        )
    if nu1 < nu2:
        return EigenvalueInfo(nu2**-2, TorusCase.SHORT, ((0, 1), (0, -1)))
    return EigenvalueInfo(nu1**-2, TorusCase.LONG, ((1, 0), (-1, 0)))


@dataclass(frozen=True)
class OrbitSpec:
    """A sinusoidal vorticity family with fixed amplitudes and free phases."""

    geometry: TorusGeometry
    kind: OrbitKind
    A: float
    B: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self) -> None:
        if self.A < 0 or self.B < 0:
            raise ValueError("amplitudes must be nonnegative")
        if self.kind is OrbitKind.SQUARE_PAIR and self.geometry.nu1 != self.geometry.nu2:
            raise ValueError("SquarePair orbits require a square torus")


def make_eigenstate(spec: OrbitSpec) -> GridField:
    """Sample the orbit member with the spec's phases on the grid."""
    geom = spec.geometry
    X1, X2 = geom.coords()
    if spec.kind is OrbitKind.AXIS1:
        data = spec.A * np.sin(X1 / geom.nu1 + spec.alpha)
    elif spec.kind is OrbitKind.AXIS2:
        data = spec.A * np.sin(X2 / geom.nu2 + spec.alpha)
    else:
        nu = geom.nu1
        data = spec.A * np.sin(X1 / nu + spec.alpha) + spec.B * np.sin(X2 / nu + spec.beta)
    return GridField(geom, data)


def _mode_mask(geom: TorusGeometry, j_set) -> np.ndarray:
    mask = np.zeros(geom.shape, dtype=bool)
    for k1, k2 in j_set:
        mask[k2 % geom.ny, k1 % geom.nx] = True
    return mask


def project_least(f: GridField, info: EigenvalueInfo) -> tuple[GridField, GridField]:
    """Split f = fbar + ftilde: fbar keeps only the least-eigenvalue modes."""
    F = forward_transform(f)
    mask = _mode_mask(f.geometry, info.j_set)
    fbar = inverse_transform(SpectralField(f.geometry, np.where(mask, F.coeffs, 0.0)))
    return fbar, GridField(f.geometry, f.data - fbar.data)


def _axis_component(omega: GridField, axis: int) -> tuple[float, float]:
    """Amplitude R and phase phi of the sin(x_axis/nu + phi) content of omega."""
    geom = omega.geometry
    c = forward_transform(omega).coeffs
    if axis == 1:
        ck = c[0, 1 % geom.nx]
    else:
        ck = c[1 % geom.ny, 0]
    # 2*Re(c) cos(theta) - 2*Im(c) sin(theta) = R sin(theta + phi)
    R = 2.0 * abs(ck)
    phi = float(np.arctan2(2.0 * ck.real, -2.0 * ck.imag)) % (2.0 * np.pi)
    return R, phi


def _golden_min(fun, lo: float, hi: float, tol: float = PHASE_TOL) -> tuple[float, float]:
    """Golden-section minimization of fun on [lo, hi]."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fun(d)
    x = 0.5 * (a + b)
    return x, fun(x)


def _search_1d(fun, n_coarse: int = COARSE_SAMPLES) -> tuple[float, float]:
    """Coarse phase grid followed by golden-section refinement."""
    phases = 2.0 * np.pi * np.arange(n_coarse) / n_coarse
    vals = np.array([fun(a) for a in phases])
    i = int(np.argmin(vals))
    h = 2.0 * np.pi / n_coarse
    x, fx = _golden_min(fun, phases[i] - h, phases[i] + h)
    return x % (2.0 * np.pi), fx


def _search_2d(fun, n_coarse: int = COARSE_SAMPLES, rounds: int = 6):
    """2-phase minimization: coarse grid then alternating golden refinement."""
    phases = 2.0 * np.pi * np.arange(n_coarse) / n_coarse
    best = (np.inf, 0.0, 0.0)
    for a in phases:
        for b in phases:
            v = fun(a, b)
            if v < best[0]:
                best = (v, a, b)
    _, a, b = best
    h = 2.0 * np.pi / n_coarse
    for _ in range(rounds):
        a, _ = _golden_min(lambda x: fun(x, b), a - h, a + h)
        b, fv = _golden_min(lambda y: fun(a, y), b - h, b + h)
        h = max(h * 0.25, 10 * PHASE_TOL)
    return fv, a % (2.0 * np.pi), b % (2.0 * np.pi)


def orbit_distance(
    omega: GridField, spec: OrbitSpec, p: float
) -> tuple[float, tuple[float, float]]:
    """Minimal Lp distance from omega to the orbit, with the argmin phases.

    For p = 2 the closed form via the least-eigenvalue Fourier coefficients
    is used; otherwise a coarse phase grid plus golden-section refinement.
    """
    if p <= 1:
        raise ValueError(f"p must be > 1, got {p}")
    geom = spec.geometry
    if p == 2:
        return _orbit_distance_l2(omega, spec)
    if spec.kind in (OrbitKind.AXIS1, OrbitKind.AXIS2):
        axis = 1 if spec.kind is OrbitKind.AXIS1 else 2
        X1, X2 = geom.coords()
        theta = X1 / geom.nu1 if axis == 1 else X2 / geom.nu2

        def objective(a: float) -> float:
            return lp_norm(GridField(geom, omega.data - spec.A * np.sin(theta + a)), p)

        alpha, dist = _search_1d(objective)
        return dist, (alpha, 0.0)

    X1, X2 = geom.coords()
    t1, t2 = X1 / geom.nu1, X2 / geom.nu2

    def objective2(a: float, b: float) -> float:
        v = spec.A * np.sin(t1 + a) + spec.B * np.sin(t2 + b)
        return lp_norm(GridField(geom, omega.data - v), p)

    dist, alpha, beta = _search_2d(objective2, n_coarse=32)
    return dist, (alpha, beta)


def _orbit_distance_l2(omega: GridField, spec: OrbitSpec) -> tuple[float, tuple[float, float]]:
    geom = spec.geometry
    norm_sq = 2.0 * 0.5 * float(np.sum(omega.data**2)) * geom.cell_area  # ||omega||_L2^2
    half_area = 0.5 * geom.area
    if spec.kind in (OrbitKind.AXIS1, OrbitKind.AXIS2):
        axis = 1 if spec.kind is OrbitKind.AXIS1 else 2
        R, phi = _axis_component(omega, axis)
        tilde_sq = norm_sq - half_area * R**2
        dist_sq = max(tilde_sq + half_area * (R - spec.A) ** 2, 0.0)
        alpha = phi if R > 0 else 0.0
        return float(np.sqrt(dist_sq)), (alpha, 0.0)
    R1, phi1 = _axis_component(omega, 1)
    R2, phi2 = _axis_component(omega, 2)
    tilde_sq = norm_sq - half_area * (R1**2 + R2**2)
    dist_sq = max(
        tilde_sq + half_area * ((R1 - spec.A) ** 2 + (R2 - spec.B) ** 2), 0.0
    )
    alpha = phi1 if R1 > 0 else 0.0
    beta = phi2 if R2 > 0 else 0.0
    return float(np.sqrt(dist_sq)), (alpha, beta)


def identify_amplitudes(sumAB: float, sumsqAB: float):
    """Solve A+B = s, A^2+B^2 = q for the two nonnegative assignments.

    Returns ((C, D), (D, C)) with C >= D.  Raises NoSolutionError when the
    system has no real solution or forces a negative amplitude.
    """
    s, q = float(sumAB), float(sumsqAB)
    disc = 2.0 * q - s**2  # (A - B)^2
    if disc < 0:
        raise NoSolutionError(f"no real solution: 2q - s^2 = {disc} < 0")
    half_gap = np.sqrt(disc) / 2.0
    C, D = s / 2.0 + half_gap, s / 2.0 - half_gap
    if D < 0:
        raise NoSolutionError(f"solution has negative amplitude {D}")
    return (C, D), (D, C)


def orbit_separation(specA: OrbitSpec, specB: OrbitSpec, p: float) -> float:
    """Minimal Lp distance between two SquarePair orbits over all phases.

    Translation invariance pins one orbit's phases at zero, leaving a
    2-phase minimization.
    """
    if specA.kind is not OrbitKind.SQUARE_PAIR or specB.kind is not OrbitKind.SQUARE_PAIR:
        raise ValueError("orbit_separation requires SquarePair specs")
    geom = specA.geometry
    if geom != specB.geometry:
        raise ValueError("specs live on different geometries")
    fixed = make_eigenstate(
        OrbitSpec(geom, OrbitKind.SQUARE_PAIR, specB.A, specB.B, 0.0, 0.0)
    )
    X1, X2 = geom.coords()
    t1, t2 = X1 / geom.nu1, X2 / geom.nu2

    if p == 2:
        # cross terms vanish unless modes share an axis; closed form per axis
        def objective_l2(a: float, b: float) -> float:
            u = specA.A * np.sin(t1 + a) + specA.B * np.sin(t2 + b)
            return lp_norm(GridField(geom, u - fixed.data), 2)

        d, _, _ = _search_2d(objective_l2, n_coarse=64)
        return d

    def objective(a: float, b: float) -> float:
        u = specA.A * np.sin(t1 + a) + specA.B * np.sin(t2 + b)
        return lp_norm(GridField(geom, u - fixed.data), p)

    d, _, _ = _search_2d(objective, n_coarse=32)
    return d
