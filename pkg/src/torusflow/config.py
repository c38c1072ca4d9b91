"""Experiment configuration: a sectioned TOML file validated up front,
before any compute starts."""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .eigenmodes import OrbitKind, OrbitSpec
from .spectral import FluxVector, GeometryError, TorusGeometry, make_geometry


class ConfigError(ValueError):
    """Invalid or unreadable experiment configuration."""


@dataclass
class InitialCondition:
    kind: OrbitKind
    A: float = 1.0
    B: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0
    epsilon: float = 0.0
    band_min: int = 2
    band_max: int = 8
    seed: int = 0
    project_perp: bool = True


@dataclass
class SolverBlock:
    t_end: float
    dt: float | None = None
    cfl: float | None = None
    sample_interval: float = 0.5
    dealias_fraction: float = 2.0 / 3.0
    spectral_filter: bool = False
    track_follower: bool = False
    flux: FluxVector = field(default_factory=FluxVector)


@dataclass
class MaximizeBlock:
    max_iters: int = 500
    tol: float = 1e-10
    seed: int = 0
    n_starts: int = 1


@dataclass
class ExperimentConfig:
    name: str
    geometry: TorusGeometry
    initial: InitialCondition
    solver: SolverBlock | None = None
    maximize: MaximizeBlock | None = None
    p_list: tuple[float, ...] = (2.0, 4.0)
    orbit_distance: bool = True
    out_dir: str = "runs"
    snapshot_every: int = 0  # in samples; 0 = initial and final only
    sweep: dict[str, list] = field(default_factory=dict)
    faults: dict[str, bool] = field(default_factory=dict)
    verify_seed: int = 0
    verify_samples: int = 200

    def orbit_spec(self) -> OrbitSpec:
        ic = self.initial
        return OrbitSpec(self.geometry, ic.kind, ic.A, ic.B, ic.alpha, ic.beta)

    @property
    def corrupt_poisson(self) -> bool:
        return bool(self.faults.get("corrupt_poisson", False))


_KINDS = {k.value: k for k in OrbitKind}


def _section(doc: dict, name: str, required: bool = True) -> dict:
    sec = doc.get(name)
    if sec is None:
        if required:
            raise ConfigError(f"missing [{name}] section")
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(f"[{name}] must be a table")
    return sec


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    return parse_config(doc, default_name=path.stem)


SWEEP_AXES = ("epsilon", "nu1", "nu2", "seed")
FAULT_KEYS = ("corrupt_poisson",)


def _validated_keys(mapping: dict, allowed: tuple[str, ...], what: str) -> dict:
    for key in mapping:
        if key not in allowed:
            raise ConfigError(f"unknown {what} {key!r}; expected one of {list(allowed)}")
    return mapping


def parse_config(doc: dict, default_name: str = "experiment") -> ExperimentConfig:
    geo = _section(doc, "geometry")
    try:
        geometry = make_geometry(
            geo.get("nu1", 1.0), geo.get("nu2", 1.0), geo.get("nx", 64), geo.get("ny", 64)
        )
    except GeometryError as exc:
        raise ConfigError(str(exc)) from exc

    ini = _section(doc, "initial") if "initial" in doc else {}
    kind_key = ini.get("kind", "axis2")
    if kind_key not in _KINDS:
        raise ConfigError(f"unknown initial kind {kind_key!r}; expected one of {sorted(_KINDS)}")
    initial = InitialCondition(
        kind=_KINDS[kind_key],
        A=float(ini.get("A", 1.0)),
        B=float(ini.get("B", 0.0)),
        alpha=float(ini.get("alpha", 0.0)),
        beta=float(ini.get("beta", 0.0)),
        epsilon=float(ini.get("epsilon", 0.0)),
        band_min=int(ini.get("band_min", 2)),
        band_max=int(ini.get("band_max", 8)),
        seed=int(ini.get("seed", 0)),
        project_perp=bool(ini.get("project_perp", True)),
    )
    if initial.A < 0 or initial.B < 0 or initial.epsilon < 0:
        raise ConfigError("amplitudes and epsilon must be nonnegative")
    if initial.kind is OrbitKind.SQUARE_PAIR and geometry.nu1 != geometry.nu2:
        raise ConfigError("square_pair initial condition requires a square torus")

    solver = None
    if "solver" in doc:
        sol = _section(doc, "solver")
        flux_pair = sol.get("flux", [0.0, 0.0])
        if not (isinstance(flux_pair, list) and len(flux_pair) == 2):
            raise ConfigError("solver.flux must be a two-element list")
        solver = SolverBlock(
            t_end=float(sol.get("t_end", 10.0)),
            dt=float(sol["dt"]) if "dt" in sol else None,
            cfl=float(sol["cfl"]) if "cfl" in sol else None,
            sample_interval=float(sol.get("sample_interval", 0.5)),
            dealias_fraction=float(sol.get("dealias_fraction", 2.0 / 3.0)),
            spectral_filter=bool(sol.get("spectral_filter", False)),
            track_follower=bool(sol.get("track_follower", False)),
            flux=FluxVector(float(flux_pair[0]), float(flux_pair[1])),
        )
        if solver.t_end <= 0:
            raise ConfigError("solver.t_end must be positive")
        if (solver.dt is None) == (solver.cfl is None):
            raise ConfigError("exactly one of solver.dt and solver.cfl must be set")

    maximize = None
    if "maximize" in doc:
        mx = _section(doc, "maximize")
        maximize = MaximizeBlock(
            max_iters=int(mx.get("max_iters", 500)),
            tol=float(mx.get("tol", 1e-10)),
            seed=int(mx.get("seed", 0)),
            n_starts=int(mx.get("n_starts", 1)),
        )
        if maximize.max_iters < 1:
            raise ConfigError("maximize.max_iters must be >= 1")

    met = _section(doc, "metrics", required=False)
    p_list = tuple(float(p) for p in met.get("p", [2, 4]))
    if any(p <= 1 for p in p_list):
        raise ConfigError("metrics.p entries must be > 1")

    out = _section(doc, "output", required=False)
    ver = _section(doc, "verify", required=False)

    return ExperimentConfig(
        name=str(doc.get("name", default_name)),
        geometry=geometry,
        initial=initial,
        solver=solver,
        maximize=maximize,
        p_list=p_list,
        orbit_distance=bool(met.get("orbit_distance", True)),
        out_dir=str(out.get("directory", "runs")),
        snapshot_every=int(out.get("snapshot_every", 0)),
        sweep=_validated_keys(
            {k: list(v) for k, v in _section(doc, "sweep", required=False).items()},
            SWEEP_AXES,
            "sweep axis",
        ),
        faults=_validated_keys(
            {k: bool(v) for k, v in _section(doc, "faults", required=False).items()},
            FAULT_KEYS,
            "fault",
        ),
        verify_seed=int(ver.get("seed", 0)),
        verify_samples=int(ver.get("samples", 200)),
    )


def config_echo(cfg: ExperimentConfig) -> dict:
    """JSON-serializable echo of a parsed config for the run manifest."""
    g = cfg.geometry
    echo = {
        "name": cfg.name,
        "geometry": {"nu1": g.nu1, "nu2": g.nu2, "nx": g.nx, "ny": g.ny},
        "initial": {
            "kind": cfg.initial.kind.value,
            "A": cfg.initial.A,
            "B": cfg.initial.B,
            "alpha": cfg.initial.alpha,
            "beta": cfg.initial.beta,
            "epsilon": cfg.initial.epsilon,
            "band_min": cfg.initial.band_min,
            "band_max": cfg.initial.band_max,
            "seed": cfg.initial.seed,
            "project_perp": cfg.initial.project_perp,
        },
        "metrics": {"p": list(cfg.p_list), "orbit_distance": cfg.orbit_distance},
        "output": {"directory": cfg.out_dir, "snapshot_every": cfg.snapshot_every},
    }
    if cfg.solver is not None:
        s = cfg.solver
        echo["solver"] = {
            "t_end": s.t_end,
            "dt": s.dt,
            "cfl": s.cfl,
            "sample_interval": s.sample_interval,
            "dealias_fraction": s.dealias_fraction,
            "spectral_filter": s.spectral_filter,
            "track_follower": s.track_follower,
            "flux": [s.flux.f1, s.flux.f2],
        }
    if cfg.maximize is not None:
        m = cfg.maximize
        echo["maximize"] = {
            "max_iters": m.max_iters,
            "tol": m.tol,
            "seed": m.seed,
            "n_starts": m.n_starts,
        }
    if cfg.sweep:
        echo["sweep"] = cfg.sweep
    return echo
