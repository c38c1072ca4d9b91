"""Conserved-quantity diagnostics: flux, energy, enstrophy, Lp norms,
vorticity value distributions, and the explicit stability-bound constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import (
    FluxVector,
    GridField,
    TorusGeometry,
    _check_same_grid,
    _report_mean,
    forward_transform,
    inner,
    poisson_inverse,
)


@dataclass
class ValueDistribution:
    """Sorted multiset of cell values: the discrete distribution function."""

    sorted_values: np.ndarray
    cell_area: float

    def __post_init__(self) -> None:
        self.sorted_values = np.asarray(self.sorted_values, dtype=np.float64)

    def matches(self, other: "ValueDistribution", rel_tol: float = 1e-12) -> bool:
        """Elementwise equality of the sorted arrays within rel_tol * value range."""
        a, b = self.sorted_values, other.sorted_values
        if a.shape != b.shape:
            return False
        rng = max(a[-1] - a[0], b[-1] - b[0]) if a.size else 0.0
        return bool(np.max(np.abs(a - b)) <= rel_tol * max(rng, 1.0))

    def max_deviation(self, other: "ValueDistribution") -> float:
        return float(np.max(np.abs(self.sorted_values - other.sorted_values)))


@dataclass
class ConservedLedger:
    """One sampled row of conserved quantities along a simulation."""

    time: float
    flux: FluxVector
    energy: float
    enstrophy: float
    lp_norms: dict[float, float] = field(default_factory=dict)
    perp_enstrophy: float = 0.0
    orbit_distances: dict[float, float] = field(default_factory=dict)


def energy(omega: GridField) -> float:
    """Kinetic energy of the mean-free velocity: E = (1/2) <w, Kw>."""
    data = _report_mean(omega, "energy")
    w = GridField(omega.geometry, data)
    return 0.5 * inner(w, poisson_inverse(w))


def energy_spectral(omega: GridField) -> float:
    """E evaluated as the Fourier sum (1/2)|T^2| sum |c_k|^2 / lambda_k."""
    geom = omega.geometry
    c = forward_transform(omega).coeffs
    lam = geom.laplacian_eigenvalues()
    lam[0, 0] = np.inf  # zero mode carries no energy
    return 0.5 * geom.area * float(np.sum(np.abs(c) ** 2 / lam))


def enstrophy(omega: GridField) -> float:
    """Z = (1/2) integral of w^2."""
    return 0.5 * float(np.sum(omega.data**2)) * omega.geometry.cell_area


def enstrophy_spectral(omega: GridField) -> float:
    """Z evaluated as the Fourier sum (1/2)|T^2| sum |c_k|^2, k != 0."""
    geom = omega.geometry
    c = forward_transform(omega).coeffs.copy()
    c[0, 0] = 0.0
    return 0.5 * geom.area * float(np.sum(np.abs(c) ** 2))


def lp_norm(f: GridField, p: float) -> float:
    """(integral |f|^p)^(1/p) by grid quadrature; requires p > 1."""
    if p <= 1:
        raise ValueError(f"p must be > 1, got {p}")
    return float(np.sum(np.abs(f.data) ** p) * f.geometry.cell_area) ** (1.0 / p)


def distribution(f: GridField) -> ValueDistribution:
    return ValueDistribution(np.sort(f.values), f.geometry.cell_area)


def flux(v1: GridField, v2: GridField) -> FluxVector:
    """Total flux of a velocity field, componentwise quadrature."""
    _check_same_grid(v1, v2)
    return FluxVector(v1.quadrature(), v2.quadrature())


def arnold_constant(geom: TorusGeometry) -> float:
    """Growth bound (1 - max{(nu1/nu2)^2, 1/4})^-1 for the orthogonal
    enstrophy component; defined for nu1 < nu2 (swap axes otherwise)."""
    if not geom.nu1 < geom.nu2:
        raise ValueError("arnold_constant requires nu1 < nu2; swap axes for long tori")
    return 1.0 / (1.0 - max((geom.nu1 / geom.nu2) ** 2, 0.25))
