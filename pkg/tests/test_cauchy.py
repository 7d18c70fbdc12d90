import math

import numpy as np
import pytest

from dflow.cauchy import (
    BoundsReport,
    hilbert_transform,
    safe_radius,
    stieltjes_invert,
    univalence_check,
    verify_bounds,
)
from dflow.errors import InversionError, PoleError
from dflow.measure import (
    Arcsine,
    Atoms,
    DensityGridMeasure,
    Semicircle,
    UniformInterval,
)


def test_safe_radius_values():
    assert safe_radius(1.0, 0.5) == pytest.approx(6.6)
    assert safe_radius(1.0, 1e-12) == pytest.approx(2.2)
    assert safe_radius(2.0, 0.5) == pytest.approx(9.9)


def test_safe_radius_domain():
    with pytest.raises(ValueError):
        safe_radius(1.0, 1.0)
    with pytest.raises(ValueError):
        safe_radius(-1.0, 0.5)


def test_bounds_point_mass():
    rep = verify_bounds(Atoms([(0j, 1.0)]), r=0.5, R=2.0, samples=32)
    assert rep.ok
    assert rep.min_abs_zC == pytest.approx(1.0)
    assert rep.max_abs_zC == pytest.approx(1.0)


def test_bounds_two_atoms_closed_form():
    # zC = z^2/(z^2-1); at z = 2.5 this is 1.190 <= R/(R-r) = 5/3
    m = Atoms([(-1 + 0j, 0.5), (1 + 0j, 0.5)])
    rep = verify_bounds(m, r=1.0, R=2.5, samples=64)
    assert rep.ok
    assert rep.max_abs_zC <= 5 / 3 + 1e-12
    zc_on_axis = abs(2.5 * m.cauchy(2.5))
    assert zc_on_axis == pytest.approx(2.5**2 / (2.5**2 - 1))
    assert rep.min_abs_zC > 2 / 9  # strict lower envelope from the paper


def test_bounds_random_atomic_suite():
    rng = np.random.default_rng(1234)
    r = 1.0
    for _ in range(40):
        k = int(rng.integers(1, 51))
        pts = rng.uniform(-1, 1, k) + 1j * rng.uniform(-1, 1, k)
        pts *= 0.98 * r / np.maximum(1.0, np.abs(pts).max())
        w = rng.uniform(0.1, 1.0, k)
        w /= w.sum()
        m = Atoms(list(zip(pts, w)))
        rep = verify_bounds(m, r=r, R=2.5 * r, samples=24)
        assert rep.ok, rep.bound_violations[:3]


def test_bounds_preconditions():
    with pytest.raises(ValueError):
        verify_bounds(Atoms([(0j, 1.0)]), r=1.0, R=1.5)
    with pytest.raises(ValueError):
        verify_bounds(Arcsine(), r=0.5, R=2.0)


def test_bounds_report_json():
    rep = BoundsReport(2.0, 0.9, 1.1, 0.8, 1.2, [(1 + 0j, "zC", 0.1, 0.2)])
    assert not rep.ok
    assert "violations" in rep.to_json()


def test_univalence_point_mass():
    ok, witness = univalence_check(Atoms([(0j, 1.0)]), r=0.1, R=2.0, samples=64)
    assert ok and witness is None


def test_univalence_arcsine():
    ok, witness = univalence_check(Arcsine(), r=1.0, R=2.5, samples=96)
    assert ok, witness


def test_univalence_radius_precondition():
    with pytest.raises(ValueError):
        univalence_check(Arcsine(), r=1.0, R=2.0)


def test_univalence_catches_noninjective_map():
    class Squarer:
        def cauchy(self, z):
            return np.asarray(z) ** 2

        def support_radius(self):
            return 0.1

    ok, witness = univalence_check(Squarer(), r=0.1, R=1.0, samples=64)
    assert not ok
    assert witness is not None


def test_hilbert_semicircle():
    sc = Semicircle()
    for x in (-0.7, -0.2, 0.0, 0.4, 0.85):
        assert hilbert_transform(sc, x) == pytest.approx(2 * x / np.pi, abs=1e-13)


def test_hilbert_arcsine_zero_inside():
    arc = Arcsine()
    for x in (-0.9, -0.3, 0.0, 0.5):
        assert hilbert_transform(arc, x) == pytest.approx(0.0, abs=1e-13)


def test_hilbert_even_measures_at_zero():
    for m in (Semicircle(), UniformInterval(), Atoms([(-1 + 0j, 0.5), (1 + 0j, 0.5)])):
        assert hilbert_transform(m, 0.0) == pytest.approx(0.0, abs=1e-13)


def test_hilbert_outside_support_is_cauchy():
    arc = Arcsine()
    assert hilbert_transform(arc, 2.0) == pytest.approx(1 / (np.pi * math.sqrt(3)))
    m = Atoms([(-1 + 0j, 0.5), (1 + 0j, 0.5)])
    assert hilbert_transform(m, 3.0) == pytest.approx((0.125 + 0.25) / np.pi)


def test_hilbert_atom_pole():
    with pytest.raises(PoleError):
        hilbert_transform(Atoms([(1 + 0j, 1.0)]), 1.0)


def test_hilbert_grid_matches_closed_form():
    x = np.linspace(-1, 1, 4001)
    grid = DensityGridMeasure(x, Semicircle().density(x))
    for xx in (-0.5, -0.1, 0.3):
        assert hilbert_transform(grid, xx) == pytest.approx(2 * xx / np.pi, abs=1e-4)


def test_stieltjes_invert_semicircle_point():
    sc = Semicircle()
    f = stieltjes_invert(sc.cauchy, [0.0], 1e-3)
    assert f[0] == pytest.approx(2 / np.pi, abs=1e-9)


def test_stieltjes_invert_arcsine_point():
    arc = Arcsine()
    f = stieltjes_invert(arc.cauchy, [0.0], 1e-3)
    assert f[0] == pytest.approx(1 / np.pi, abs=1e-9)


def test_stieltjes_invert_atom_gives_zero():
    f = stieltjes_invert(lambda z: 1.0 / z, np.linspace(0.5, 2.0, 7), 1e-3)
    assert np.max(f) <= 1e-8


def test_stieltjes_invert_semicircle_curve():
    sc = Semicircle()
    x = np.linspace(-0.9, 0.9, 181)
    f = stieltjes_invert(sc.cauchy, x, 1e-3)
    want = sc.density(x)
    assert np.max(np.abs(f - want)) <= 1e-6


def test_stieltjes_invert_divergence_detected():
    # a pole sitting on the grid: boundary values blow up as eps shrinks
    with pytest.raises(InversionError):
        stieltjes_invert(lambda z: 1.0 / (z - 0.5), np.linspace(0.0, 1.0, 11), 1e-3)


def test_boundary_value_consistency():
    # C(x + i0) = pi H(x) - i pi f(x) for the semicircle
    sc = Semicircle()
    for x in (-0.6, 0.1, 0.75):
        bv = complex(sc.boundary_value(x))
        h = hilbert_transform(sc, x)
        f = float(sc.density(x))
        assert bv.real == pytest.approx(np.pi * h, abs=1e-12)
        assert bv.imag == pytest.approx(-np.pi * f, abs=1e-12)
        # and the eps-limit of the transform agrees with the closed form
        lim = complex(sc.cauchy(x + 1e-9j))
        assert lim == pytest.approx(bv, abs=1e-6)
