"""Pseudo-spectral 2D incompressible Euler simulation and stability
verification on a flat two-torus of arbitrary aspect ratio."""

from .spectral import (
    FluxVector,
    GeometryError,
    GridField,
    SpectralField,
    TorusGeometry,
    biot_savart,
    constant_field,
    dealias_mask,
    forward_transform,
    inner,
    gradient,
    inverse_transform,
    make_geometry,
    perp_gradient,
    poisson_inverse,
    truncate,
)
from .diagnostics import (
    ConservedLedger,
    ValueDistribution,
    arnold_constant,
    distribution,
    energy,
    enstrophy,
    flux,
    lp_norm,
)
from .eigenmodes import (
    EigenvalueInfo,
    OrbitKind,
    OrbitSpec,
    TorusCase,
    analyze,
    identify_amplitudes,
    make_eigenstate,
    orbit_distance,
    orbit_separation,
    project_least,
)
from .rearrange import (
    IterationReport,
    RearrangementClass,
    burton_iterate,
    class_supremum,
    convex_combination_distribution,
    max_rearrangement_against,
)
from .runio import content_hash, read_snapshot, write_snapshot
from .solver import SolverConfig, SolverState, band_limited_perturbation, rhs, run, step

__version__ = "0.1.0"
