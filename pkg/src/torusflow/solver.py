"""Dealiased pseudo-spectral RK4 integration of the vorticity transport
equation, with an optional passively advected follower field and
conserved-quantity sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics, eigenmodes
from .diagnostics import ConservedLedger
from .spectral import (
    FluxVector,
    GridField,
    TorusGeometry,
    _derivative_factors,
    _report_mean,
    dealias_mask,
)


class NumericalAbort(RuntimeError):
    """The integration produced non-finite values."""


@dataclass
class SolverConfig:
    geometry: TorusGeometry
    t_end: float
    dt: float | None = None
    cfl_target: float | None = None
    dealias_fraction: float = 2.0 / 3.0
    sample_interval: float = 0.5
    flux: FluxVector = field(default_factory=FluxVector)
    spectral_filter: bool = False  # flagged "dissipative" in run manifests
    track_follower: bool = False
    follower_init: GridField | None = None
    # optional orbit metrics sampled into the ledger
    orbit_spec: "eigenmodes.OrbitSpec | None" = None
    p_list: tuple[float, ...] = (2.0, 4.0)

    def __post_init__(self) -> None:
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if (self.dt is None) == (self.cfl_target is None):
            raise ValueError("exactly one of dt and cfl_target must be given")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.cfl_target is not None and not (0 < self.cfl_target < 1):
            raise ValueError("cfl_target must be in (0, 1)")
        if self.sample_interval <= 0:
            raise ValueError("sample_interval must be positive")
        if self.track_follower and self.follower_init is None:
            raise ValueError("track_follower requires follower_init")


@dataclass
class SolverState:
    t: float
    omega: GridField
    zeta: GridField | None = None
    ledger: list[ConservedLedger] = field(default_factory=list)


class _Workspace:
    """Precomputed spectral operators for one geometry and dealias fraction."""

    def __init__(self, geom: TorusGeometry, fraction: float, flux: FluxVector,
                 spectral_filter: bool = False):
        self.geom = geom
        self.d1, self.d2 = _derivative_factors(geom)
        lam = geom.laplacian_eigenvalues()
        lam[0, 0] = 1.0
        self.inv_lam = 1.0 / lam
        self.inv_lam[0, 0] = 0.0
        self.mask = dealias_mask(geom, fraction)
        self.u1_mean = flux.f1 / geom.area
        self.u2_mean = flux.f2 / geom.area
        self.filter = None
        if spectral_filter:
            K1, K2 = geom.wavenumbers()
            r = np.maximum(np.abs(K1) / (geom.nx / 2), np.abs(K2) / (geom.ny / 2))
            self.filter = np.exp(-36.0 * r**36)

    def velocity(self, w_h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        psi_h = w_h * self.inv_lam
        v1 = np.real(np.fft.ifft2(self.d2 * psi_h)) + self.u1_mean
        v2 = np.real(np.fft.ifft2(-self.d1 * psi_h)) + self.u2_mean
        return v1, v2

    def advect(self, v1: np.ndarray, v2: np.ndarray, f_h: np.ndarray) -> np.ndarray:
        """Spectral tendency of -v . grad(f), dealiased and mean-free."""
        fx = np.real(np.fft.ifft2(self.d1 * f_h))
        fy = np.real(np.fft.ifft2(self.d2 * f_h))
        n_h = np.fft.fft2(-(v1 * fx + v2 * fy))
        n_h *= self.mask
        n_h[0, 0] = 0.0
        return n_h

    def rhs(self, w_h: np.ndarray, z_h: np.ndarray | None):
        v1, v2 = self.velocity(w_h)
        dw = self.advect(v1, v2, w_h)
        dz = self.advect(v1, v2, z_h) if z_h is not None else None
        return dw, dz

    def max_speed(self, w_h: np.ndarray) -> float:
        v1, v2 = self.velocity(w_h)
        return float(max(np.max(np.abs(v1)), np.max(np.abs(v2))))


def rhs(omega: GridField, flux: FluxVector = FluxVector(), dealias_fraction: float = 2.0 / 3.0) -> GridField:
    """Tendency -v . grad(omega) with v from the Biot-Savart law.

    Products are formed in physical space and the result is truncated to
    the dealiasing box; the returned field is mean-zero.
    """
    geom = omega.geometry
    ws = _Workspace(geom, dealias_fraction, flux)
    w_h = np.fft.fft2(_report_mean(omega, "rhs"))
    dw, _ = ws.rhs(w_h, None)
    return GridField(geom, np.real(np.fft.ifft2(dw)))


def _rk4(ws: _Workspace, w_h, z_h, dt: float):
    k1w, k1z = ws.rhs(w_h, z_h)
    if z_h is None:
        k2w, _ = ws.rhs(w_h + 0.5 * dt * k1w, None)
        k3w, _ = ws.rhs(w_h + 0.5 * dt * k2w, None)
        k4w, _ = ws.rhs(w_h + dt * k3w, None)
        w_h = w_h + (dt / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
        return w_h, None
    k2w, k2z = ws.rhs(w_h + 0.5 * dt * k1w, z_h + 0.5 * dt * k1z)
    k3w, k3z = ws.rhs(w_h + 0.5 * dt * k2w, z_h + 0.5 * dt * k2z)
    k4w, k4z = ws.rhs(w_h + dt * k3w, z_h + dt * k3z)
    w_h = w_h + (dt / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
    z_h = z_h + (dt / 6.0) * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
    return w_h, z_h


def _check_finite(w_h: np.ndarray, t: float) -> None:
    if not np.all(np.isfinite(w_h)):
        raise NumericalAbort(f"non-finite vorticity at t={t:.6g}")


def _choose_dt(config: SolverConfig, ws: _Workspace, w_h: np.ndarray) -> float:
    if config.dt is not None:
        return config.dt
    geom = config.geometry
    dx = min(2.0 * np.pi * geom.nu1 / geom.nx, 2.0 * np.pi * geom.nu2 / geom.ny)
    vmax = max(ws.max_speed(w_h), 1e-12)
    return config.cfl_target * dx / vmax


def step(state: SolverState, config: SolverConfig) -> SolverState:
    """Advance the state by one RK4 step (dt from config or CFL)."""
    ws = _Workspace(config.geometry, config.dealias_fraction, config.flux,
                    config.spectral_filter)
    w_h = np.fft.fft2(state.omega.data) * ws.mask
    z_h = np.fft.fft2(state.zeta.data) if state.zeta is not None else None
    dt = _choose_dt(config, ws, w_h)
    w_h, z_h = _rk4(ws, w_h, z_h, dt)
    if ws.filter is not None:
        w_h = w_h * ws.filter
    _check_finite(w_h, state.t + dt)
    w_h[0, 0] = 0.0
    omega = GridField(config.geometry, np.real(np.fft.ifft2(w_h)))
    zeta = GridField(config.geometry, np.real(np.fft.ifft2(z_h))) if z_h is not None else None
    return SolverState(state.t + dt, omega, zeta, state.ledger)


def _sample(
    t: float,
    omega: GridField,
    config: SolverConfig,
    info: "eigenmodes.EigenvalueInfo",
) -> ConservedLedger:
    ws = _Workspace(config.geometry, config.dealias_fraction, config.flux)
    w_h = np.fft.fft2(omega.data)
    u1, u2 = ws.velocity(w_h)
    fl = diagnostics.flux(
        GridField(config.geometry, u1), GridField(config.geometry, u2)
    )
    _, tilde = eigenmodes.project_least(omega, info)
    row = ConservedLedger(
        time=t,
        flux=fl,
        energy=diagnostics.energy(omega),
        enstrophy=diagnostics.enstrophy(omega),
        lp_norms={p: diagnostics.lp_norm(omega, p) for p in config.p_list},
        perp_enstrophy=diagnostics.enstrophy(tilde),
    )
    if config.orbit_spec is not None:
        row.orbit_distances = {
            p: eigenmodes.orbit_distance(omega, config.orbit_spec, p)[0]
            for p in config.p_list
        }
    return row


def run(
    config: SolverConfig, omega0: GridField, on_sample=None
) -> tuple[SolverState, list[ConservedLedger]]:
    """Integrate to t_end, sampling the conserved-quantity ledger every
    sample_interval.  Returns the final state and the sampled rows."""
    geom = config.geometry
    ws = _Workspace(geom, config.dealias_fraction, config.flux, config.spectral_filter)
    info = eigenmodes.analyze(geom)

    w_h = np.fft.fft2(_report_mean(omega0, "run")) * ws.mask
    w_h[0, 0] = 0.0
    z_h = None
    if config.track_follower:
        z_h = np.fft.fft2(config.follower_init.data) * ws.mask

    rows: list[ConservedLedger] = []
    t = 0.0
    omega = GridField(geom, np.real(np.fft.ifft2(w_h)))
    rows.append(_sample(t, omega, config, info))
    if on_sample is not None:
        on_sample(0, t, omega)

    n_samples = math.ceil(config.t_end / config.sample_interval - 1e-12)
    for s in range(n_samples):
        t_target = min((s + 1) * config.sample_interval, config.t_end)
        dt_nom = _choose_dt(config, ws, w_h)
        n_steps = max(1, math.ceil((t_target - t) / dt_nom - 1e-12))
        dt = (t_target - t) / n_steps
        for _ in range(n_steps):
            w_h, z_h = _rk4(ws, w_h, z_h, dt)
            if ws.filter is not None:
                w_h = w_h * ws.filter
            w_h[0, 0] = 0.0
        _check_finite(w_h, t_target)
        t = t_target
        omega = GridField(geom, np.real(np.fft.ifft2(w_h)))
        rows.append(_sample(t, omega, config, info))
        if on_sample is not None:
            on_sample(s + 1, t, omega)

    zeta = GridField(geom, np.real(np.fft.ifft2(z_h))) if z_h is not None else None
    final = SolverState(t, omega, zeta, rows)
    return final, rows


def band_limited_perturbation(
    geom: TorusGeometry,
    seed: int,
    kmin: int = 2,
    kmax: int = 8,
    project_perp: bool = True,
) -> GridField:
    """Seeded random real field with modes kmin <= |k|_inf <= kmax,
    unit L2 norm, optionally projected off the least-eigenvalue space."""
    rng = np.random.default_rng(seed)
    K1, K2 = geom.wavenumbers()
    band = (np.maximum(np.abs(K1), np.abs(K2)) >= kmin) & (
        np.maximum(np.abs(K1), np.abs(K2)) <= kmax
    )
    c = rng.standard_normal(geom.shape) + 1j * rng.standard_normal(geom.shape)
    c *= band
    data = np.real(np.fft.ifft2(c))  # real part enforces Hermitian symmetry
    f = GridField(geom, data - data.mean())
    if project_perp:
        info = eigenmodes.analyze(geom)
        _, f = eigenmodes.project_least(f, info)
    norm = diagnostics.lp_norm(f, 2)
    return GridField(geom, f.data / norm)
