"""Geometry, field containers and spectral operators on the flat torus.

The domain is the rectangle [0, 2*pi*nu1] x [0, 2*pi*nu2] with periodic
boundary conditions.  Real fields are sampled on a uniform nx-by-ny grid
(x1 index fastest); spectral fields hold the standard FFT coefficient
layout normalized so that ``coeffs[0, 0]`` is the grid mean.  All
integrals are uniform-grid sums times the cell area, which is exact for
trigonometric polynomials below the Nyquist limit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger("torusflow")

MEAN_TOL = 1e-10  # relative tolerance for "mean-zero" inputs


class GeometryError(ValueError):
    """Invalid torus geometry parameters."""


class ShapeMismatchError(ValueError):
    """Field does not match the geometry it is used with."""


@dataclass(frozen=True)
class TorusGeometry:
    """Flat torus [0, 2*pi*nu1] x [0, 2*pi*nu2] with an nx-by-ny grid."""

    nu1: float
    nu2: float
    nx: int
    ny: int

    @property
    def area(self) -> float:
        return 4.0 * np.pi**2 * self.nu1 * self.nu2

    @property
    def cell_area(self) -> float:
        return self.area / (self.nx * self.ny)

    @property
    def shape(self) -> tuple[int, int]:
        # (ny, nx): axis 0 is x2, axis 1 is x1
        return (self.ny, self.nx)

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Mesh of sample coordinates (X1, X2), each of shape (ny, nx)."""
        x1 = 2.0 * np.pi * self.nu1 * np.arange(self.nx) / self.nx
        x2 = 2.0 * np.pi * self.nu2 * np.arange(self.ny) / self.ny
        return np.meshgrid(x1, x2, indexing="xy")

    def wavenumbers(self) -> tuple[np.ndarray, np.ndarray]:
        """Integer wavevector mesh (K1, K2) in FFT layout, shape (ny, nx)."""
        k1 = np.fft.fftfreq(self.nx, d=1.0 / self.nx)
        k2 = np.fft.fftfreq(self.ny, d=1.0 / self.ny)
        return np.meshgrid(k1, k2, indexing="xy")

    def laplacian_eigenvalues(self) -> np.ndarray:
        """lambda_k = (k1/nu1)^2 + (k2/nu2)^2 on the FFT grid; 0 at k=0."""
        K1, K2 = self.wavenumbers()
        return (K1 / self.nu1) ** 2 + (K2 / self.nu2) ** 2


def make_geometry(nu1: float, nu2: float, nx: int, ny: int) -> TorusGeometry:
    if not (nu1 > 0 and nu2 > 0):
        raise GeometryError(f"period scales must be positive, got nu1={nu1}, nu2={nu2}")
    if nx % 2 or ny % 2 or nx < 8 or ny < 8:
        raise GeometryError(f"grid sizes must be even and >= 8, got nx={nx}, ny={ny}")
    return TorusGeometry(float(nu1), float(nu2), int(nx), int(ny))


@dataclass
class GridField:
    """Real-valued samples on the periodic grid, shape (ny, nx)."""

    geometry: TorusGeometry
    data: np.ndarray

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.shape != self.geometry.shape:
            raise ShapeMismatchError(
                f"field shape {self.data.shape} != grid shape {self.geometry.shape}"
            )
        if not np.all(np.isfinite(self.data)):
            raise ValueError("field contains non-finite values")

    @property
    def values(self) -> np.ndarray:
        """Flat view, row-major with x1 index fastest."""
        return self.data.reshape(-1)

    def mean(self) -> float:
        return float(self.data.mean())

    def quadrature(self) -> float:
        """Integral over the torus (uniform-grid sum times cell area)."""
        return float(self.data.sum()) * self.geometry.cell_area

    def __add__(self, other: "GridField") -> "GridField":
        _check_same_grid(self, other)
        return GridField(self.geometry, self.data + other.data)

    def __sub__(self, other: "GridField") -> "GridField":
        _check_same_grid(self, other)
        return GridField(self.geometry, self.data - other.data)

    def __mul__(self, scalar: float) -> "GridField":
        return GridField(self.geometry, self.data * scalar)

    __rmul__ = __mul__


@dataclass
class SpectralField:
    """FFT coefficients of a grid field; ``coeffs[0, 0]`` is the mean."""

    geometry: TorusGeometry
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.shape != self.geometry.shape:
            raise ShapeMismatchError(
                f"coefficient shape {self.coeffs.shape} != grid shape {self.geometry.shape}"
            )


@dataclass(frozen=True)
class FluxVector:
    """Total flux of velocity, integral of v over the torus."""

    f1: float = 0.0
    f2: float = 0.0

    def __post_init__(self) -> None:
        if not (np.isfinite(self.f1) and np.isfinite(self.f2)):
            raise ValueError("flux components must be finite")


def _check_same_grid(a, b) -> None:
    if a.geometry != b.geometry:
        raise ShapeMismatchError("fields live on different geometries")


def constant_field(geom: TorusGeometry, value: float = 0.0) -> GridField:
    return GridField(geom, np.full(geom.shape, float(value)))


def inner(f: GridField, g: GridField) -> float:
    """L2 inner product by grid quadrature."""
    _check_same_grid(f, g)
    return float(np.sum(f.data * g.data)) * f.geometry.cell_area


def forward_transform(f: GridField) -> SpectralField:
    """FFT of a real field, normalized by 1/(nx*ny)."""
    coeffs = np.fft.fft2(f.data) / (f.geometry.nx * f.geometry.ny)
    return SpectralField(f.geometry, coeffs)


def inverse_transform(F: SpectralField) -> GridField:
    """Inverse FFT back to real samples (imaginary part discarded)."""
    data = np.fft.ifft2(F.coeffs * (F.geometry.nx * F.geometry.ny))
    return GridField(F.geometry, np.real(data))


def _derivative_factors(geom: TorusGeometry) -> tuple[np.ndarray, np.ndarray]:
    """Spectral derivative multipliers i*k/nu with Nyquist modes zeroed."""
    K1, K2 = geom.wavenumbers()
    d1 = 1j * K1 / geom.nu1
    d2 = 1j * K2 / geom.nu2
    # Nyquist columns/rows are excluded so derivatives of real fields stay real
    d1[:, geom.nx // 2] = 0.0
    d2[geom.ny // 2, :] = 0.0
    return d1, d2


def gradient(f: GridField) -> tuple[GridField, GridField]:
    """Spectral gradient (d/dx1 f, d/dx2 f)."""
    geom = f.geometry
    fh = np.fft.fft2(f.data)
    d1, d2 = _derivative_factors(geom)
    g1 = np.real(np.fft.ifft2(d1 * fh))
    g2 = np.real(np.fft.ifft2(d2 * fh))
    return GridField(geom, g1), GridField(geom, g2)


def perp_gradient(f: GridField) -> tuple[GridField, GridField]:
    """Clockwise-rotated gradient (d/dx2 f, -d/dx1 f)."""
    g1, g2 = gradient(f)
    return g2, GridField(f.geometry, -g1.data)


def _report_mean(f: GridField, where: str) -> np.ndarray:
    """Return mean-subtracted samples; warn when the discarded mean is large."""
    m = f.data.mean()
    scale = np.max(np.abs(f.data)) or 1.0
    if abs(m) > MEAN_TOL * scale:
        logger.warning("%s: discarding input mean %.3e (max %.3e)", where, m, scale)
    return f.data - m


def poisson_inverse(f: GridField) -> GridField:
    """The Green operator K: unique mean-zero solution of -Lap(u) = f.

    The input mean is subtracted (and reported at warn level if it exceeds
    tolerance); the zero mode of the output is zero.
    """
    geom = f.geometry
    data = _report_mean(f, "poisson_inverse")
    fh = np.fft.fft2(data)
    lam = geom.laplacian_eigenvalues()
    lam_safe = lam.copy()
    lam_safe[0, 0] = 1.0
    uh = fh / lam_safe
    uh[0, 0] = 0.0
    return GridField(geom, np.real(np.fft.ifft2(uh)))


def biot_savart(omega: GridField, flux: FluxVector = FluxVector()) -> tuple[GridField, GridField]:
    """Velocity from vorticity and total flux: v = perp_grad(K w) + F/|T^2|."""
    geom = omega.geometry
    psi = poisson_inverse(omega)
    v1, v2 = perp_gradient(psi)
    area = geom.area
    return (
        GridField(geom, v1.data + flux.f1 / area),
        GridField(geom, v2.data + flux.f2 / area),
    )


def dealias_mask(geom: TorusGeometry, fraction: float) -> np.ndarray:
    """Boolean mask keeping modes with |k1| <= fraction*nx/2 and |k2| <= fraction*ny/2."""
    if not (0.0 < fraction <= 1.0):
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    K1, K2 = geom.wavenumbers()
    return (np.abs(K1) <= fraction * geom.nx / 2) & (np.abs(K2) <= fraction * geom.ny / 2)


def truncate(F: SpectralField, fraction: float) -> SpectralField:
    """Zero all modes outside the retained box; Hermitian symmetry is preserved."""
    mask = dealias_mask(F.geometry, fraction)
    return SpectralField(F.geometry, np.where(mask, F.coeffs, 0.0))
