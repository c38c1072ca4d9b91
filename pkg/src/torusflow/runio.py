"""File formats shared by all front ends: TFLD field snapshots, the
diagnostics time-series CSV, iteration traces and JSON run manifests.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .diagnostics import ConservedLedger
from .spectral import GridField, TorusGeometry, make_geometry

TFLD_MAGIC = b"TFLD"
TFLD_VERSION = 1
_HEADER = struct.Struct("<4sIQQdd")


class SnapshotError(ValueError):
    """Malformed TFLD snapshot."""


def write_snapshot(path: str | Path, f: GridField) -> None:
    """Write a field snapshot; round-trips bit-exactly."""
    geom = f.geometry
    header = _HEADER.pack(TFLD_MAGIC, TFLD_VERSION, geom.nx, geom.ny, geom.nu1, geom.nu2)
    payload = np.ascontiguousarray(f.data, dtype="<f8").tobytes()
    Path(path).write_bytes(header + payload)


def read_snapshot(path: str | Path) -> GridField:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise SnapshotError("file too short for TFLD header")
    magic, version, nx, ny, nu1, nu2 = _HEADER.unpack_from(raw)
    if magic != TFLD_MAGIC:
        raise SnapshotError(f"bad magic {magic!r}")
    if version != TFLD_VERSION:
        raise SnapshotError(f"unsupported version {version}")
    expected = _HEADER.size + nx * ny * 8
    if len(raw) != expected:
        raise SnapshotError(f"payload size {len(raw)} != expected {expected}")
    geom = make_geometry(nu1, nu2, nx, ny)
    values = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(ny, nx)
    return GridField(geom, values.copy())


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def series_columns(rows: list[ConservedLedger]) -> list[str]:
    cols = ["t", "E", "Z", "F1", "F2", "Zperp"]
    if rows:
        cols += [f"lp_p{_plabel(p)}" for p in sorted(rows[0].lp_norms)]
        cols += [f"dist_p{_plabel(p)}" for p in sorted(rows[0].orbit_distances)]
    return cols


def _plabel(p: float) -> str:
    return str(int(p)) if float(p).is_integer() else str(p)


def write_series(path: str | Path, rows: list[ConservedLedger]) -> None:
    cols = series_columns(rows)
    lines = [",".join(cols)]
    for r in rows:
        vals = [r.time, r.energy, r.enstrophy, r.flux.f1, r.flux.f2, r.perp_enstrophy]
        vals += [r.lp_norms[p] for p in sorted(r.lp_norms)]
        vals += [r.orbit_distances[p] for p in sorted(r.orbit_distances)]
        lines.append(",".join(_fmt(v) for v in vals))
    Path(path).write_text("\n".join(lines) + "\n")


def read_series(path: str | Path) -> dict[str, np.ndarray]:
    lines = Path(path).read_text().strip().splitlines()
    cols = lines[0].split(",")
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    return {c: data[:, i] for i, c in enumerate(cols)}


def write_trace(path: str | Path, trace: list[tuple[int, float, float, float]]) -> None:
    """Burton iteration trace: iter, energy, energy gain, orbit distance."""
    lines = ["iter,E,delta_E,orbit_dist"]
    for it, e, de, d in trace:
        lines.append(f"{it},{_fmt(e)},{_fmt(de)},{_fmt(d)}")
    Path(path).write_text("\n".join(lines) + "\n")


def content_hash(f: GridField) -> str:
    h = hashlib.sha256()
    geom = f.geometry
    h.update(_HEADER.pack(TFLD_MAGIC, TFLD_VERSION, geom.nx, geom.ny, geom.nu1, geom.nu2))
    h.update(np.ascontiguousarray(f.data, dtype="<f8").tobytes())
    return h.hexdigest()


def write_manifest(path: str | Path, manifest: dict) -> None:
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def read_manifest(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())
