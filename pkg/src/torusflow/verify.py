"""Batch property suites: spectral identities, Green-operator structure,
energy-enstrophy inequalities and Lp invariance, run as pass/fail checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import diagnostics, eigenmodes
from .spectral import (
    GridField,
    TorusGeometry,
    forward_transform,
    gradient,
    inner,
    inverse_transform,
    make_geometry,
    poisson_inverse,
)

STANDARD_GEOMETRIES = ((1.0, 2.0), (2.0, 1.0), (1.0, 1.0))


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _random_mean_zero(geom: TorusGeometry, rng) -> GridField:
    data = rng.standard_normal(geom.shape)
    return GridField(geom, data - data.mean())


def _corrupted_poisson(f: GridField) -> GridField:
    # fault-injection hook: an asymmetric perturbation of K
    u = poisson_inverse(f)
    return GridField(f.geometry, u.data + 1e-3 * np.roll(f.data, 1, axis=1))


def _random_in_least_space(geom: TorusGeometry, info, rng) -> GridField:
    X1, X2 = geom.coords()
    data = np.zeros(geom.shape)
    if (0, 1) in info.j_set:
        data += rng.standard_normal() * np.sin(X2 / geom.nu2) + rng.standard_normal() * np.cos(X2 / geom.nu2)
    if (1, 0) in info.j_set:
        data += rng.standard_normal() * np.sin(X1 / geom.nu1) + rng.standard_normal() * np.cos(X1 / geom.nu1)
    return GridField(geom, data)


def _random_in_complement(geom: TorusGeometry, info, rng) -> GridField:
    f = _random_mean_zero(geom, rng)
    _, tilde = eigenmodes.project_least(f, info)
    return tilde


def check_roundtrip(seed: int, n: int = 20) -> CheckResult:
    rng = np.random.default_rng(seed)
    geom = make_geometry(1.0, 2.0, 32, 32)
    worst = 0.0
    for _ in range(n):
        f = _random_mean_zero(geom, rng)
        g = inverse_transform(forward_transform(f))
        worst = max(worst, float(np.max(np.abs(f.data - g.data)) / np.max(np.abs(f.data))))
    return CheckResult("fft_roundtrip", worst <= 1e-12, f"max rel err {worst:.3e}")


def check_parseval(seed: int, n: int = 20) -> CheckResult:
    rng = np.random.default_rng(seed)
    geom = make_geometry(1.0, 2.0, 32, 48)
    worst = 0.0
    for _ in range(n):
        f = _random_mean_zero(geom, rng)
        quad = float(np.sum(f.data**2)) * geom.cell_area
        spec = geom.area * float(np.sum(np.abs(forward_transform(f).coeffs) ** 2))
        worst = max(worst, abs(quad - spec) / quad)
    return CheckResult("parseval", worst <= 1e-10, f"max rel err {worst:.3e}")


def check_k_symmetry(seed: int, n: int = 20, corrupt: bool = False) -> CheckResult:
    rng = np.random.default_rng(seed)
    geom = make_geometry(1.0, 2.0, 32, 32)
    K = _corrupted_poisson if corrupt else poisson_inverse
    worst = 0.0
    for _ in range(n):
        f = _random_mean_zero(geom, rng)
        g = _random_mean_zero(geom, rng)
        a, b = inner(f, K(g)), inner(g, K(f))
        worst = max(worst, abs(a - b) / max(abs(a), abs(b)))
    return CheckResult("k_symmetry", worst <= 1e-10, f"max rel asymmetry {worst:.3e}")


def check_k_positive(seed: int, n: int = 20, corrupt: bool = False) -> CheckResult:
    rng = np.random.default_rng(seed)
    geom = make_geometry(1.0, 2.0, 32, 32)
    K = _corrupted_poisson if corrupt else poisson_inverse
    vals = []
    for _ in range(n):
        f = _random_mean_zero(geom, rng)
        vals.append(inner(f, K(f)))
    zero = inner(
        GridField(geom, np.zeros(geom.shape)), K(GridField(geom, np.zeros(geom.shape)))
    )
    ok = all(v > 0 for v in vals) and zero == 0.0
    return CheckResult("k_positive_definite", ok, f"min quad form {min(vals):.3e}")


def check_k_eigenmodes() -> CheckResult:
    worst = 0.0
    for nu1, nu2 in STANDARD_GEOMETRIES:
        geom = make_geometry(nu1, nu2, 64, 64)
        info = eigenmodes.analyze(geom)
        X1, X2 = geom.coords()
        modes = []
        for k1, k2 in info.j_set:
            theta = k1 * X1 / geom.nu1 + k2 * X2 / geom.nu2
            modes += [np.sin(theta), np.cos(theta)]
        for m in modes:
            f = GridField(geom, m)
            u = poisson_inverse(f)
            err = float(np.max(np.abs(u.data - m / info.lambda1)) * info.lambda1)
            worst = max(worst, err)
    return CheckResult("k_eigenfunction_exactness", worst <= 1e-12, f"max rel err {worst:.3e}")


def check_orthogonality(seed: int, n: int = 20) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for nu1, nu2 in STANDARD_GEOMETRIES:
        geom = make_geometry(nu1, nu2, 32, 32)
        info = eigenmodes.analyze(geom)
        for _ in range(n):
            g = _random_in_least_space(geom, info, rng)
            h = _random_in_complement(geom, info, rng)
            g1, g2 = gradient(poisson_inverse(g))
            h1, h2 = gradient(poisson_inverse(h))
            ip = inner(g1, h1) + inner(g2, h2)
            scale = np.sqrt(
                (inner(g1, g1) + inner(g2, g2)) * (inner(h1, h1) + inner(h2, h2))
            )
            worst = max(worst, abs(ip) / max(scale, 1e-300))
    return CheckResult("least_space_orthogonality", worst <= 1e-10, f"max rel ip {worst:.3e}")


def check_energy_enstrophy(seed: int, n: int = 500) -> CheckResult:
    """Eigenspace energy identity and complement-space energy bound for all
    three torus cases."""
    rng = np.random.default_rng(seed)
    worst_eq, worst_bound = 0.0, 0.0
    for nu1, nu2 in STANDARD_GEOMETRIES:
        geom = make_geometry(nu1, nu2, 32, 32)
        info = eigenmodes.analyze(geom)
        if info.case is eigenmodes.TorusCase.SQUARE:
            bound = geom.nu1**2 / 4.0
        elif info.case is eigenmodes.TorusCase.SHORT:
            bound = max(geom.nu1**2, geom.nu2**2 / 4.0)
        else:
            bound = max(geom.nu2**2, geom.nu1**2 / 4.0)
        for _ in range(n):
            f = _random_in_least_space(geom, info, rng)
            E, Z = diagnostics.energy(f), diagnostics.enstrophy(f)
            worst_eq = max(worst_eq, abs(E - Z / info.lambda1) / max(E, 1e-300))
            g = _random_in_complement(geom, info, rng)
            Eg, Zg = diagnostics.energy(g), diagnostics.enstrophy(g)
            worst_bound = max(worst_bound, Eg / (bound * Zg) - 1.0)
    ok = worst_eq <= 1e-10 and worst_bound <= 1e-10
    return CheckResult(
        "energy_enstrophy_bounds", ok,
        f"max eq err {worst_eq:.3e}, max bound excess {worst_bound:.3e}",
    )


def check_lp_conservation(p: float, seed: int, n: int = 20) -> CheckResult:
    """Lp norms are invariant under discrete rearrangements (value permutations)."""
    rng = np.random.default_rng(seed)
    geom = make_geometry(1.0, 2.0, 32, 32)
    worst = 0.0
    for _ in range(n):
        f = _random_mean_zero(geom, rng)
        perm = rng.permutation(f.values).reshape(geom.shape)
        a = diagnostics.lp_norm(f, p)
        b = diagnostics.lp_norm(GridField(geom, perm), p)
        worst = max(worst, abs(a - b) / a)
    name = f"lp_conservation_p{int(p) if float(p).is_integer() else p}"
    return CheckResult(name, worst <= 1e-12, f"max rel err {worst:.3e}")


def run_all(
    seed: int = 0,
    samples: int = 500,
    p_list: tuple[float, ...] = (2.0, 4.0),
    corrupt_poisson: bool = False,
) -> list[CheckResult]:
    results = [
        check_roundtrip(seed),
        check_parseval(seed + 1),
        check_k_symmetry(seed + 2, corrupt=corrupt_poisson),
        check_k_positive(seed + 3, corrupt=corrupt_poisson),
        check_k_eigenmodes(),
        check_orthogonality(seed + 4),
        check_energy_enstrophy(seed + 5, n=samples),
    ]
    results += [check_lp_conservation(p, seed + 6) for p in p_list]
    return results
