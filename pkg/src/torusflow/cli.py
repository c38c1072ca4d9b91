"""Command-line front door: simulate | maximize | verify | sweep | export-plot.

Exit codes: 0 clean, 1 config error, 2 numerical abort, 3 verification
failure.  TORUSFLOW_THREADS caps sweep-level parallelism.
"""

from __future__ import annotations

import argparse
import dataclasses
import itertools
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import diagnostics, eigenmodes, rearrange, runio, solver, verify
from .config import ConfigError, ExperimentConfig, config_echo, load_config
from .eigenmodes import OrbitKind, OrbitSpec
from .spectral import GridField, make_geometry
from .solver import NumericalAbort

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_VERIFY = 3


def _worker_count() -> int:
    env = os.environ.get("TORUSFLOW_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def build_initial_condition(cfg: ExperimentConfig) -> tuple[GridField, GridField]:
    """Base eigenstate and the (possibly perturbed) initial vorticity."""
    base = eigenmodes.make_eigenstate(cfg.orbit_spec())
    if cfg.initial.epsilon == 0.0:
        return base, base
    pert = solver.band_limited_perturbation(
        cfg.geometry,
        seed=cfg.initial.seed,
        kmin=cfg.initial.band_min,
        kmax=cfg.initial.band_max,
        project_perp=cfg.initial.project_perp,
    )
    scale = cfg.initial.epsilon * diagnostics.lp_norm(base, 2)
    return base, GridField(cfg.geometry, base.data + scale * pert.data)


def _drift_summary(rows) -> dict:
    r0 = rows[0]

    def rel(get, ref):
        if abs(ref) < 1e-300:
            return max(abs(get(r)) for r in rows)
        return max(abs(get(r) - ref) / abs(ref) for r in rows)

    summary = {
        "energy_rel_drift": rel(lambda r: r.energy, r0.energy),
        "enstrophy_rel_drift": rel(lambda r: r.enstrophy, r0.enstrophy),
        "flux1_drift": max(abs(r.flux.f1 - r0.flux.f1) for r in rows),
        "flux2_drift": max(abs(r.flux.f2 - r0.flux.f2) for r in rows),
    }
    for p in rows[0].lp_norms:
        summary[f"lp{runio._plabel(p)}_rel_drift"] = rel(lambda r: r.lp_norms[p], r0.lp_norms[p])
    if r0.perp_enstrophy > 0:
        summary["max_zperp_ratio"] = max(r.perp_enstrophy for r in rows) / r0.perp_enstrophy
    for p in rows[0].orbit_distances:
        d0 = r0.orbit_distances[p]
        if d0 > 0:
            summary[f"max_dist_p{runio._plabel(p)}_ratio"] = (
                max(r.orbit_distances[p] for r in rows) / d0
            )
    return summary


def _run_simulation(cfg: ExperimentConfig, run_dir: Path) -> dict:
    """Execute one solver run and persist its artifacts; returns the manifest."""
    if cfg.solver is None:
        raise ConfigError("simulate requires a [solver] section")
    base, omega0 = build_initial_condition(cfg)
    sol = cfg.solver
    sconfig = solver.SolverConfig(
        geometry=cfg.geometry,
        t_end=sol.t_end,
        dt=sol.dt,
        cfl_target=sol.cfl,
        dealias_fraction=sol.dealias_fraction,
        sample_interval=sol.sample_interval,
        flux=sol.flux,
        spectral_filter=sol.spectral_filter,
        track_follower=sol.track_follower,
        follower_init=base if sol.track_follower else None,
        orbit_spec=cfg.orbit_spec() if cfg.orbit_distance else None,
        p_list=cfg.p_list,
    )
    run_dir.mkdir(parents=True, exist_ok=True)
    runio.write_snapshot(run_dir / "omega_initial.tfld", omega0)

    def on_sample(idx, t, omega):
        if cfg.snapshot_every > 0 and idx % cfg.snapshot_every == 0:
            runio.write_snapshot(run_dir / f"omega_{idx:05d}.tfld", omega)

    manifest = {
        "name": cfg.name,
        "config": config_echo(cfg),
        "seed": cfg.initial.seed,
        "input_hash": runio.content_hash(omega0),
        "series_csv": "series.csv",
        "columns": None,
        "status": "running",
    }
    try:
        final, rows = solver.run(sconfig, omega0, on_sample=on_sample)
    except NumericalAbort as exc:
        manifest["status"] = "numerical_abort"
        manifest["error"] = str(exc)
        runio.write_manifest(run_dir / "manifest.json", manifest)
        raise
    runio.write_series(run_dir / "series.csv", rows)
    runio.write_snapshot(run_dir / "omega_final.tfld", final.omega)
    if final.zeta is not None:
        runio.write_snapshot(run_dir / "zeta_final.tfld", final.zeta)
    manifest["columns"] = runio.series_columns(rows)
    manifest["drift"] = _drift_summary(rows)
    manifest["status"] = "ok"
    manifest["dissipative"] = sol.spectral_filter
    runio.write_manifest(run_dir / "manifest.json", manifest)
    return manifest


def cmd_simulate(config_path: str, out_dir: str | None = None, seed: int | None = None) -> int:
    try:
        cfg = load_config(config_path)
        cfg = _apply_overrides(cfg, out_dir, seed)
        run_dir = Path(cfg.out_dir) / cfg.name
        _run_simulation(cfg, run_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"run complete: {run_dir}")
    return EXIT_OK


def cmd_maximize(config_path: str, out_dir: str | None = None, seed: int | None = None) -> int:
    try:
        cfg = load_config(config_path)
        cfg = _apply_overrides(cfg, out_dir, seed)
        if cfg.maximize is None:
            raise ConfigError("maximize requires a [maximize] section")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    run_dir = Path(cfg.out_dir) / cfg.name
    run_dir.mkdir(parents=True, exist_ok=True)
    generator = eigenmodes.make_eigenstate(cfg.orbit_spec())
    cls = rearrange.RearrangementClass.from_field(generator)
    info = eigenmodes.analyze(cfg.geometry)
    try:
        supremum = rearrange.class_supremum(cls, info)
    except ValueError:
        supremum = float("nan")
    specs = _target_orbits(cfg)

    starts = []
    best = None
    try:
        for i in range(cfg.maximize.n_starts):
            w0 = cls.random_member(cfg.maximize.seed + i)
            trace: list = []
            report = rearrange.burton_iterate(
                cls, w0, cfg.maximize.max_iters, cfg.maximize.tol,
                orbit_specs=specs, trace=trace,
            )
            runio.write_trace(run_dir / f"trace_{i:03d}.csv", trace)
            starts.append({
                "seed": cfg.maximize.seed + i,
                "iterates": report.iterates,
                "final_energy": float(report.energies[-1]),
                "converged": report.converged,
                "orbit_distance": report.final_orbit_distance,
                "nearest_orbit": report.nearest_orbit,
            })
            if best is None or report.energies[-1] > best[1].energies[-1]:
                best = (i, report)
    except RuntimeError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    runio.write_snapshot(run_dir / "omega_final.tfld", best[1].final_field)
    runio.write_manifest(run_dir / "manifest.json", {
        "name": cfg.name,
        "config": config_echo(cfg),
        "seed": cfg.maximize.seed,
        "input_hash": runio.content_hash(generator),
        "class_supremum": supremum,
        "starts": starts,
        "best_start": best[0],
        "status": "ok",
    })
    print(f"maximize complete: {run_dir} (best E = {best[1].energies[-1]:.12g})")
    return EXIT_OK


def _target_orbits(cfg: ExperimentConfig) -> tuple[OrbitSpec, ...]:
    spec = cfg.orbit_spec()
    if spec.kind is OrbitKind.SQUARE_PAIR and spec.A != spec.B:
        swapped = OrbitSpec(cfg.geometry, spec.kind, spec.B, spec.A)
        return (spec, swapped)
    return (spec,)


def cmd_verify(config_path: str | None = None) -> int:
    seed, samples, p_list, corrupt = 0, 500, (2.0, 4.0), False
    if config_path is not None:
        try:
            cfg = load_config(config_path)
            seed, samples = cfg.verify_seed, cfg.verify_samples
            p_list = cfg.p_list
            corrupt = cfg.faults.get("corrupt_poisson", False)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    results = verify.run_all(seed=seed, samples=samples, p_list=p_list, corrupt_poisson=corrupt)
    width = max(len(r.name) for r in results)
    all_pass = True
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        all_pass &= r.passed
        print(f"{r.name:<{width}}  {status}  {r.detail}")
    return EXIT_OK if all_pass else EXIT_VERIFY


def _sweep_point(cfg: ExperimentConfig, assignment: dict) -> ExperimentConfig:
    geometry = cfg.geometry
    if "nu1" in assignment or "nu2" in assignment:
        geometry = make_geometry(
            assignment.get("nu1", geometry.nu1),
            assignment.get("nu2", geometry.nu2),
            geometry.nx,
            geometry.ny,
        )
    initial = dataclasses.replace(
        cfg.initial,
        epsilon=assignment.get("epsilon", cfg.initial.epsilon),
        seed=assignment.get("seed", cfg.initial.seed),
    )
    label = "_".join(f"{k}{v:g}" if isinstance(v, float) else f"{k}{v}"
                     for k, v in assignment.items())
    return dataclasses.replace(
        cfg, geometry=geometry, initial=initial, name=f"{cfg.name}_{label}", sweep={}
    )


def cmd_sweep(config_path: str, out_dir: str | None = None, seed: int | None = None) -> int:
    try:
        cfg = load_config(config_path)
        cfg = _apply_overrides(cfg, out_dir, seed)
        if not cfg.sweep:
            raise ConfigError("sweep requires a [sweep] section with at least one axis")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    axes = sorted(cfg.sweep)
    points = [dict(zip(axes, combo)) for combo in itertools.product(*(cfg.sweep[a] for a in axes))]
    base_dir = Path(cfg.out_dir) / cfg.name
    base_dir.mkdir(parents=True, exist_ok=True)

    def one(assignment):
        point_cfg = _sweep_point(cfg, assignment)
        manifest = _run_simulation(point_cfg, base_dir / point_cfg.name)
        return assignment, manifest

    try:
        with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
            outcomes = list(pool.map(one, points))
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    lines = []
    drift_cols: list[str] = []
    for assignment, manifest in outcomes:
        drift = manifest["drift"]
        if not drift_cols:
            drift_cols = sorted(k for k in drift if k.startswith("max_"))
            lines.append(",".join(axes + ["arnold_constant"] + drift_cols))
        g = manifest["config"]["geometry"]
        try:
            c_arn = diagnostics.arnold_constant(make_geometry(g["nu1"], g["nu2"], g["nx"], g["ny"]))
        except ValueError:
            c_arn = float("nan")
        row = [f"{assignment[a]:.17g}" for a in axes] + [f"{c_arn:.17g}"]
        row += [f"{drift.get(c, float('nan')):.17g}" for c in drift_cols]
        lines.append(",".join(row))
    (base_dir / "aggregate.csv").write_text("\n".join(lines) + "\n")
    print(f"sweep complete: {len(points)} points in {base_dir}")
    return EXIT_OK


def cmd_export_plot(run_dir: str, columns: list[str]) -> int:
    run_path = Path(run_dir)
    csv_path = run_path / "series.csv"
    if not csv_path.is_file():
        print(f"no series.csv under {run_dir}", file=sys.stderr)
        return EXIT_CONFIG
    series = runio.read_series(csv_path)
    available = [c for c in series if c != "t"]
    unknown = [c for c in columns if c not in series]
    if unknown:
        print(f"unknown columns {unknown}; available: {available}", file=sys.stderr)
        return EXIT_CONFIG
    for col in columns:
        out = run_path / f"{col}.dat"
        lines = [f"{t:.17g} {v:.17g}" for t, v in zip(series["t"], series[col])]
        out.write_text("\n".join(lines) + "\n")
        print(f"wrote {out}")
    return EXIT_OK


def _apply_overrides(cfg: ExperimentConfig, out_dir: str | None, seed: int | None) -> ExperimentConfig:
    if out_dir is not None:
        cfg = dataclasses.replace(cfg, out_dir=out_dir)
    if seed is not None:
        cfg = dataclasses.replace(cfg, initial=dataclasses.replace(cfg.initial, seed=seed))
        if cfg.maximize is not None:
            cfg = dataclasses.replace(cfg, maximize=dataclasses.replace(cfg.maximize, seed=seed))
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="torusflow", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("simulate", "maximize", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None)
        p.add_argument("--seed", type=int, default=None)

    pv = sub.add_parser("verify")
    pv.add_argument("--config", default=None)

    pe = sub.add_parser("export-plot")
    pe.add_argument("run_dir")
    pe.add_argument("--columns", required=True, help="comma-separated column names")

    args = parser.parse_args(argv)
    if args.command == "simulate":
        return cmd_simulate(args.config, args.out, args.seed)
    if args.command == "maximize":
        return cmd_maximize(args.config, args.out, args.seed)
    if args.command == "verify":
        return cmd_verify(args.config)
    if args.command == "sweep":
        return cmd_sweep(args.config, args.out, args.seed)
    return cmd_export_plot(args.run_dir, args.columns.split(","))


if __name__ == "__main__":
    sys.exit(main())
