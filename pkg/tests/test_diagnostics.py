"""Energy, enstrophy, Lp norms, distributions, flux, and the stability constant."""

import numpy as np
import pytest

from torusflow import (
    FluxVector,
    GridField,
    analyze,
    arnold_constant,
    biot_savart,
    constant_field,
    distribution,
    energy,
    enstrophy,
    flux,
    lp_norm,
    make_geometry,
    project_least,
)
from torusflow.diagnostics import energy_spectral, enstrophy_spectral


def random_mean_zero(geom, seed):
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal(geom.shape)
    vals -= vals.mean()
    return GridField(geom, vals)


def random_in_eigenspace(geom, info, seed):
    return project_least(random_mean_zero(geom, seed), info)[0]


def random_in_complement(geom, info, seed):
    return project_least(random_mean_zero(geom, seed), info)[1]


class TestEnergy:
    def test_axis2_eigenstate_short_torus(self):
        geom = make_geometry(1.0, 2.0, 64, 64)
        _, x2 = geom.coords()
        w = GridField(geom, np.sin(x2 / 2.0))
        # E = nu2^2 * Z with Z = 2 pi^2 here
        assert energy(w) == pytest.approx(8.0 * np.pi**2, rel=1e-12)

    def test_zero_field(self):
        geom = make_geometry(1.0, 2.0, 32, 32)
        assert energy(constant_field(geom, 0.0)) == 0.0

    def test_two_way_agreement_square_pair(self):
        geom = make_geometry(1.0, 1.0, 64, 64)
        x1, x2 = geom.coords()
        w = GridField(geom, np.sin(x1) + np.sin(x2))
        e_real = energy(w)
        e_four = energy_spectral(w)
        assert e_real == pytest.approx(e_four, rel=1e-10)
        assert e_real == pytest.approx(enstrophy(w), rel=1e-10)  # nu = 1

    def test_two_way_agreement_random(self):
        geom = make_geometry(1.0, 2.0, 128, 128)
        for seed in range(20):
            w = random_mean_zero(geom, seed)
            assert energy(w) == pytest.approx(energy_spectral(w), rel=1e-10)
            assert enstrophy(w) == pytest.approx(enstrophy_spectral(w), rel=1e-10)

    def test_energy_additive_under_eigenspace_split(self):
        geom = make_geometry(1.0, 2.0, 64, 64)
        info = analyze(geom)
        for seed in range(5):
            w = random_mean_zero(geom, seed)
            wbar, wtil = project_least(w, info)
            assert energy(w) == pytest.approx(energy(wbar) + energy(wtil), rel=1e-10)


class TestEnstrophy:
    def test_axis2_eigenstate(self):
        geom = make_geometry(1.0, 2.0, 64, 64)
        _, x2 = geom.coords()
        assert enstrophy(GridField(geom, np.sin(x2 / 2.0))) == pytest.approx(
            2.0 * np.pi**2, rel=1e-12
        )

    def test_zero_field(self):
        geom = make_geometry(1.0, 1.0, 16, 16)
        assert enstrophy(constant_field(geom, 0.0)) == 0.0

    def test_square_pair(self):
        geom = make_geometry(1.0, 1.0, 64, 64)
        x1, x2 = geom.coords()
        w = GridField(geom, 2.0 * np.sin(x1) + 1.0 * np.sin(x2))
        assert enstrophy(w) == pytest.approx(5.0 * np.pi**2, rel=1e-12)


class TestLemma25Bounds:
    """Sharp energy-enstrophy inequalities on the least eigenspace and its complement."""

    CASES = [(1.0, 2.0), (2.0, 1.0), (1.0, 1.0)]

    @pytest.mark.parametrize("nu1,nu2", CASES)
    def test_equality_on_eigenspace(self, nu1, nu2):
        geom = make_geometry(nu1, nu2, 64, 64)
        info = analyze(geom)
        for seed in range(50):
            f = random_in_eigenspace(geom, info, seed)
            if enstrophy(f) == 0.0:
                continue
            assert energy(f) == pytest.approx(enstrophy(f) / info.lambda1, rel=1e-10)

    @pytest.mark.parametrize("nu1,nu2", CASES)
    def test_bound_on_complement(self, nu1, nu2):
        geom = make_geometry(nu1, nu2, 64, 64)
        info = analyze(geom)
        if nu1 == nu2:
            bound = nu1**2 / 4.0
        else:
            bound = max(nu1**2, nu2**2 / 4.0) if nu1 < nu2 else max(nu2**2, nu1**2 / 4.0)
        for seed in range(50):
            f = random_in_complement(geom, info, seed)
            assert energy(f) <= bound * enstrophy(f) * (1.0 + 1e-10)


class TestLpNorm:
    def test_constant_field(self):
        geom = make_geometry(1.0, 2.0, 32, 32)
        f = constant_field(geom, -1.5)
        assert lp_norm(f, 3.0) == pytest.approx(1.5 * geom.area ** (1.0 / 3.0), rel=1e-12)

    def test_p2_matches_enstrophy(self):
        geom = make_geometry(1.0, 2.0, 64, 64)
        _, x2 = geom.coords()
        f = GridField(geom, np.sin(x2 / 2.0))
        assert lp_norm(f, 2.0) == pytest.approx(2.0 * np.pi, rel=1e-12)

    def test_p4_closed_form(self):
        geom = make_geometry(1.0, 2.0, 64, 64)
        _, x2 = geom.coords()
        f = GridField(geom, np.sin(x2 / 2.0))
        # integral of sin^4 over the torus is 3|T^2|/8
        assert lp_norm(f, 4.0) == pytest.approx((3.0 * geom.area / 8.0) ** 0.25, rel=1e-12)

    def test_invalid_p(self):
        geom = make_geometry(1.0, 1.0, 16, 16)
        with pytest.raises(ValueError):
            lp_norm(constant_field(geom, 1.0), 0.5)


class TestDistribution:
    def test_constant(self):
        geom = make_geometry(1.0, 1.0, 16, 16)
        d = distribution(constant_field(geom, 2.5))
        assert np.all(d.sorted_values == 2.5)

    def test_translation_invariant(self):
        geom = make_geometry(1.0, 1.0, 16, 16)
        f = random_mean_zero(geom, 2)
        g = GridField(geom, np.roll(f.data, (3, 5), axis=(0, 1)))
        assert distribution(f).matches(distribution(g))

    def test_quarter_phase_shift(self):
        geom = make_geometry(1.0, 2.0, 32, 32)  # ny multiple of 4
        _, x2 = geom.coords()
        f = GridField(geom, np.sin(x2 / 2.0))
        g = GridField(geom, np.sin(x2 / 2.0 + np.pi / 2.0))
        assert distribution(f).matches(distribution(g))


class TestFlux:
    def test_unit_mean_flow(self):
        geom = make_geometry(1.0, 2.0, 32, 32)
        F = flux(constant_field(geom, 1.0), constant_field(geom, 0.0))
        assert F.f1 == pytest.approx(geom.area, rel=1e-14)
        assert F.f2 == 0.0

    def test_induced_velocity_has_zero_flux(self):
        geom = make_geometry(1.0, 2.0, 64, 64)
        w = random_mean_zero(geom, 4)
        v1, v2 = biot_savart(w)
        F = flux(v1, v2)
        scale = max(np.max(np.abs(v1.data)), np.max(np.abs(v2.data)))
        assert abs(F.f1) < 1e-10 * scale * geom.area
        assert abs(F.f2) < 1e-10 * scale * geom.area

    def test_biot_savart_returns_prescribed_flux(self):
        geom = make_geometry(1.0, 2.0, 64, 64)
        w = random_mean_zero(geom, 8)
        v1, v2 = biot_savart(w, FluxVector(0.8, -2.3))
        F = flux(v1, v2)
        assert F.f1 == pytest.approx(0.8, abs=1e-10)
        assert F.f2 == pytest.approx(-2.3, abs=1e-10)


class TestArnoldConstant:
    def test_aspect_ratio_two(self):
        geom = make_geometry(1.0, 2.0, 16, 16)
        assert arnold_constant(geom) == pytest.approx(4.0 / 3.0, rel=1e-15)

    def test_aspect_ratio_three(self):
        geom = make_geometry(1.0, 3.0, 16, 16)
        assert arnold_constant(geom) == pytest.approx(4.0 / 3.0, rel=1e-15)

    def test_near_square(self):
        geom = make_geometry(1.0, 1.1, 16, 16)
        expected = 1.0 / (1.0 - (1.0 / 1.1) ** 2)
        assert arnold_constant(geom) == pytest.approx(expected, rel=1e-12)
        assert arnold_constant(geom) == pytest.approx(5.7619, abs=5e-4)

    def test_rejects_nonshort_torus(self):
        with pytest.raises(ValueError):
            arnold_constant(make_geometry(2.0, 1.0, 16, 16))
        with pytest.raises(ValueError):
            arnold_constant(make_geometry(1.0, 1.0, 16, 16))
