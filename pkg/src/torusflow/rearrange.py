"""Discrete rearrangement classes and the energy-maximization machinery:
monotone pairing against a fixed function, convex combinations, and the
Burton-style iteration ascending to the class energy supremum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import diagnostics, eigenmodes
from .diagnostics import ValueDistribution, distribution
from .eigenmodes import EigenvalueInfo, OrbitSpec
from .spectral import GridField, TorusGeometry, poisson_inverse

MEMBER_TOL = 1e-12
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITERS = 500


class MembershipError(ValueError):
    """A field does not belong to the rearrangement class."""


@dataclass
class RearrangementClass:
    """All grid fields sharing one sorted multiset of cell values."""

    distribution: ValueDistribution
    geometry: TorusGeometry
    generator: GridField | None = None

    def __post_init__(self) -> None:
        vals = self.distribution.sorted_values
        rng = max(vals[-1] - vals[0], 1.0)
        if abs(vals.sum() * self.distribution.cell_area) > 1e-10 * rng * self.geometry.area:
            raise ValueError("rearrangement class generator must be mean-zero")

    @classmethod
    def from_field(cls, f: GridField) -> "RearrangementClass":
        return cls(distribution(f), f.geometry, generator=f)

    def contains(self, f: GridField) -> bool:
        return distribution(f).matches(self.distribution, MEMBER_TOL)

    def require_member(self, f: GridField) -> None:
        if f.geometry != self.geometry:
            raise MembershipError("field is on a different geometry")
        if not self.contains(f):
            raise MembershipError("field is not a rearrangement of the class generator")

    def random_member(self, seed: int) -> GridField:
        """Seeded uniform random permutation of the class values."""
        rng = np.random.default_rng(seed)
        vals = rng.permutation(self.distribution.sorted_values)
        return GridField(self.geometry, vals.reshape(self.geometry.shape))

    def enstrophy(self) -> float:
        vals = self.distribution.sorted_values
        return 0.5 * float(np.sum(vals**2)) * self.distribution.cell_area


@dataclass
class IterationReport:
    iterates: int
    energies: np.ndarray
    final_field: GridField
    final_orbit_distance: float
    converged: bool
    nearest_orbit: str | None = None


def monotone_pairing(sorted_values: np.ndarray, g_flat: np.ndarray) -> np.ndarray:
    """Assign ascending values to cells in ascending order of g.

    Ties in g are broken by cell index ascending (stable sort), so the
    result is deterministic.
    """
    order = np.argsort(g_flat, kind="stable")
    out = np.empty_like(sorted_values)
    out[order] = sorted_values
    return out


def max_rearrangement_against(class_: RearrangementClass, g: GridField) -> GridField:
    """The class member maximizing the quadrature pairing <f, g>."""
    if g.geometry != class_.geometry:
        raise MembershipError("pairing field is on a different geometry")
    paired = monotone_pairing(class_.distribution.sorted_values, g.values)
    return GridField(class_.geometry, paired.reshape(class_.geometry.shape))


def convex_combination_distribution(
    class_: RearrangementClass, theta: float, f1: GridField, f2: GridField
) -> GridField:
    """theta*f1 + (1-theta)*f2 for two class members.

    The blend generally leaves the class, but its energy stays below the
    class supremum.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must be in [0, 1]")
    class_.require_member(f1)
    class_.require_member(f2)
    return GridField(class_.geometry, theta * f1.data + (1.0 - theta) * f2.data)


def class_supremum(class_: RearrangementClass, info: EigenvalueInfo) -> float:
    """Closed-form supremum of E over the class: lambda1^-1 * Z(generator).

    Valid only when the generator is a least eigenstate; otherwise raises.
    """
    if class_.generator is None:
        raise ValueError("no closed form: class has no recorded generator")
    bar, tilde = eigenmodes.project_least(class_.generator, info)
    resid = float(np.max(np.abs(tilde.data)))
    scale = max(float(np.max(np.abs(class_.generator.data))), 1.0)
    if resid > 1e-10 * scale:
        raise ValueError("no closed form: generator is not a least eigenstate")
    return class_.enstrophy() / info.lambda1


def burton_iterate(
    class_: RearrangementClass,
    omega0: GridField,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
    orbit_specs: tuple[OrbitSpec, ...] = (),
    trace: list | None = None,
) -> IterationReport:
    """Repeated maximizing rearrangement against the stream function.

    Each step replaces omega with the class member maximizing <f, K omega>,
    which cannot decrease the energy.  Stops when the relative energy gain
    drops below tol or after max_iters; the iteration may stall at a
    non-global fixed point, which the report records via ``converged`` and
    the final energy rather than asserting optimality.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    class_.require_member(omega0)

    omega = omega0
    energies = [diagnostics.energy(omega)]
    if not np.isfinite(energies[0]):
        raise RuntimeError(f"non-finite energy {energies[0]} in Burton iteration")
    converged = False
    for it in range(max_iters):
        omega_next = max_rearrangement_against(class_, poisson_inverse(omega))
        e_next = diagnostics.energy(omega_next)
        if not np.isfinite(e_next):
            raise RuntimeError(f"non-finite energy {e_next} in Burton iteration")
        delta = e_next - energies[-1]
        energies.append(e_next)
        if trace is not None:
            trace.append((it + 1, e_next, delta, _nearest_orbit(omega_next, orbit_specs)[0]))
        omega = omega_next
        if delta <= tol * max(abs(e_next), 1e-300):
            converged = True
            break

    dist, label = _nearest_orbit(omega, orbit_specs)
    return IterationReport(
        iterates=len(energies) - 1,
        energies=np.array(energies),
        final_field=omega,
        final_orbit_distance=dist,
        converged=converged,
        nearest_orbit=label,
    )


def _nearest_orbit(omega: GridField, orbit_specs) -> tuple[float, str | None]:
    best = (float("nan"), None)
    for spec in orbit_specs:
        d, _ = eigenmodes.orbit_distance(omega, spec, 2.0)
        if best[1] is None or d < best[0]:
            best = (d, f"{spec.kind.value}(A={spec.A}, B={spec.B})")
    return best


def burton_iterate_dense(
    sorted_values: np.ndarray,
    kernel: np.ndarray,
    cell_area: float,
    omega0: np.ndarray,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
) -> tuple[np.ndarray, np.ndarray, bool]:
    """Burton iteration for tiny explicit instances.

    ``kernel`` is a symmetric positive semidefinite matrix playing the role
    of the inverse Laplacian; energy is (1/2) w^T kernel w * cell_area.
    Returns (final values, energy history, converged).  Used for debug
    grids too small for the spectral machinery.
    """
    vals = np.sort(np.asarray(sorted_values, dtype=np.float64))

    def e_of(w: np.ndarray) -> float:
        return 0.5 * float(w @ kernel @ w) * cell_area

    omega = np.asarray(omega0, dtype=np.float64)
    energies = [e_of(omega)]
    converged = False
    for _ in range(max_iters):
        omega_next = monotone_pairing(vals, kernel @ omega)
        e_next = e_of(omega_next)
        delta = e_next - energies[-1]
        energies.append(e_next)
        omega = omega_next
        if delta <= tol * max(abs(e_next), 1e-300):
            converged = True
            break
    return omega, np.array(energies), converged
