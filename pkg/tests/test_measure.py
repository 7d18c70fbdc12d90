import math

import numpy as np
import pytest

from dflow.errors import MassMismatchError, PoleError
from dflow.measure import (
    Arcsine,
    Atoms,
    DensityGridMeasure,
    EmpiricalMeasure,
    MarchenkoPastur,
    PolyRoots,
    Semicircle,
    SignedAtoms,
    UniformInterval,
    cauchy_transform,
    compare_cauchy,
    measure_from_json,
    moments,
    real_distance,
    support_radius,
)
from dflow.polycore import Polynomial
from dflow.rootfind import chebyshev_recurrence, tridiagonal_orthogonal_roots

ALL_PROBABILITY_SPECS = [
    Atoms([(0j, 1.0)]),
    Atoms([(-1 + 0j, 0.5), (1 + 0j, 0.5)]),
    Arcsine(),
    Semicircle(),
    UniformInterval(),
    MarchenkoPastur(),
]


def test_cauchy_point_mass():
    assert cauchy_transform(Atoms([(0j, 1.0)]), 2.0) == pytest.approx(0.5)


def test_cauchy_arcsine():
    assert cauchy_transform(Arcsine(), 2.0) == pytest.approx(1 / math.sqrt(3), rel=1e-14)


def test_cauchy_semicircle():
    assert cauchy_transform(Semicircle(), 2.0) == pytest.approx(2 * (2 - math.sqrt(3)), rel=1e-14)


def test_cauchy_uniform_log_branch():
    # (1/2) log((z+1)/(z-1)) must be real for real z outside [-1,1]
    u = UniformInterval()
    assert cauchy_transform(u, 3.0) == pytest.approx(0.5 * math.log(2.0))
    assert cauchy_transform(u, -3.0) == pytest.approx(-0.5 * math.log(2.0))


def test_cauchy_pole_rejection():
    with pytest.raises(PoleError):
        cauchy_transform(Atoms([(1 + 0j, 1.0)]), 1.0)
    with pytest.raises(PoleError):
        cauchy_transform(Arcsine(), 0.3)


def test_cauchy_quadrature_grid_matches_closed_form():
    # grid route carries the linear-interpolation error of the sampled density
    x = np.linspace(-1, 1, 2001)
    sc = Semicircle()
    grid = DensityGridMeasure(x, sc.density(x))
    for z in (2.0, 1.5j, -1.2 + 0.8j):
        assert grid.cauchy(z) == pytest.approx(sc.cauchy(z), abs=1e-5)


def test_moments_point_masses():
    assert moments(Atoms([(0j, 1.0)]), 4) == [1, 0, 0, 0, 0]
    m = moments(Atoms([(-1 + 0j, 0.5), (1 + 0j, 0.5)]), 5)
    assert m == [1, 0, 1, 0, 1, 0]


def test_moments_semicircle_catalan_and_quadrature():
    got = moments(Semicircle(), 4)
    assert got == pytest.approx([1, 0, 0.25, 0, 0.125])
    # independent check: adaptive-ish quadrature of the density
    x = np.linspace(-1, 1, 200001)
    f = Semicircle().density(x)
    for j, m in enumerate(got):
        q = np.trapezoid(f * x**j, x)
        assert m.real == pytest.approx(q, abs=1e-7)


def test_moments_arcsine_quadrature():
    got = moments(Arcsine(), 6)
    # independent oracle: substitute x = cos(theta), the integrand smooths out
    # and the trapezoid rule on [0, pi] is spectrally accurate
    theta = np.linspace(0, np.pi, 20001)
    for j, m in enumerate(got):
        q = np.trapezoid(np.cos(theta) ** j, theta) / np.pi
        assert m.real == pytest.approx(q, abs=1e-12)
    assert got[2].real == pytest.approx(0.5)
    assert got[4].real == pytest.approx(3 / 8)


def test_support_radius():
    assert support_radius(Atoms([(-1 + 0j, 0.5), (1 + 0j, 0.5)])) == 1.0
    assert support_radius(Arcsine()) == 1.0
    assert support_radius(Atoms([(2j, 0.5), (-3 + 0j, 0.5)])) == 3.0
    assert support_radius(MarchenkoPastur()) == 4.0


def test_compare_cauchy_identical_zero():
    assert compare_cauchy(Arcsine(), Arcsine(), 2.0, 64) == 0.0


def test_compare_cauchy_split_atom():
    eps = 0.1
    m1 = Atoms([(0j, 1.0)])
    m2 = Atoms([(-eps + 0j, 0.5), (eps + 0j, 0.5)])
    d = compare_cauchy(m1, m2, 2.0, 128)
    # |C1-C2| = eps^2/|z(z^2-eps^2)| <= eps^2 * C with C <= 2 on |z|=2
    assert d <= 2.0 * eps**2
    assert d > 0


def test_compare_cauchy_chebyshev_vs_arcsine():
    n = 64
    a, b = chebyshev_recurrence(n)
    roots = tridiagonal_orthogonal_roots(a, b, n)
    emp = EmpiricalMeasure.from_roots([complex(r) for r in roots], n)
    assert compare_cauchy(emp, Arcsine(), 2.0, 100) <= 0.02


def test_compare_cauchy_radius_precondition():
    with pytest.raises(ValueError, match="radius"):
        compare_cauchy(Arcsine(), MarchenkoPastur(), 2.0, 16)


def test_compare_cauchy_symmetry_triangle():
    ms = [Arcsine(), Semicircle(), Atoms([(0j, 1.0)])]
    r, s = 3.0, 64
    d01 = compare_cauchy(ms[0], ms[1], r, s)
    d10 = compare_cauchy(ms[1], ms[0], r, s)
    assert d01 == d10
    d02 = compare_cauchy(ms[0], ms[2], r, s)
    d12 = compare_cauchy(ms[1], ms[2], r, s)
    assert d02 <= d01 + d12 + 1e-15


def test_real_distance_identity_and_point_masses():
    assert real_distance(Atoms([(0j, 1.0)]), Atoms([(0j, 1.0)])) == (0.0, 0.0)
    ks, w1 = real_distance(Atoms([(0j, 1.0)]), Atoms([(1 + 0j, 1.0)]))
    assert (ks, w1) == (1.0, 1.0)


def test_real_distance_uniform_discretization():
    n = 1000
    xs = -1 + 2 * (np.arange(n) + 0.5) / n
    disc = Atoms([(complex(x), 1 / n) for x in xs])
    ks, w1 = real_distance(UniformInterval(), disc)
    assert w1 <= 2 / n
    assert ks <= 1.5 / n + 1e-6


def test_real_distance_mass_mismatch():
    with pytest.raises(MassMismatchError):
        real_distance(Atoms([(0j, 1.0)]), Atoms([(0j, 0.5)]))


def test_real_distance_complex_support_rejected():
    with pytest.raises(ValueError):
        real_distance(Atoms([(1j, 1.0)]), Atoms([(0j, 1.0)]))


def test_mass_decay_at_infinity():
    # z C(z) -> total mass, checked far out per the Laurent expansion
    for m in ALL_PROBABILITY_SPECS:
        r = support_radius(m)
        z = 1e6 * max(r, 1.0) * np.exp(0.3j)
        assert abs(z * m.cauchy(z) - m.mass) <= 1e-5


def test_moments_match_laurent_contour():
    # m_j equals the contour integrals of z^j C(z) on |z| = 2r + 1
    for m in ALL_PROBABILITY_SPECS:
        r = support_radius(m)
        rad = 2 * r + 1
        nodes = 512
        z = rad * np.exp(2j * np.pi * np.arange(nodes) / nodes)
        cz = m.cauchy(z)
        want = moments(m, 5)
        for j in range(6):
            est = np.mean(z ** (j + 1) * cz)
            assert abs(est - want[j]) <= 1e-8 * max(1.0, abs(want[j]))


def test_signed_atoms_counterexample_bookkeeping():
    a = 2.0
    m = SignedAtoms([(0j, a + 1), (1 + 0j, -a)])
    assert m.total_mass == pytest.approx(1.0)
    assert m.total_variation == pytest.approx(2 * a + 1)
    # u(z,0) = (a+1)/z - a/(z-1)
    z = 3.0 + 1.0j
    assert m.cauchy(z) == pytest.approx((a + 1) / z - a / (z - 1))


def test_empirical_measure_mass_invariant():
    n, k = 10, 3
    roots = [complex(j) for j in range(n - k)]
    emp = EmpiricalMeasure.from_roots(roots, n)
    assert emp.total_mass == pytest.approx((n - k) / n, abs=1e-12)


def test_empirical_csv_roundtrip():
    emp = EmpiricalMeasure([(1 + 2j, 0.25), (-0.5 + 0j, 0.75)])
    back = EmpiricalMeasure.from_csv(emp.to_csv())
    assert back.atoms == emp.atoms


def test_measure_json_roundtrip():
    specs = [
        Atoms([(1 + 2j, 0.5), (0j, 0.5)]),
        SignedAtoms([(0j, 3.0), (1 + 0j, -2.0)]),
        Arcsine(),
        Semicircle(),
        MarchenkoPastur(),
        UniformInterval(),
        DensityGridMeasure([0.0, 0.5, 1.0], [1.0, 1.0, 1.0]),
    ]
    for m in specs:
        back = measure_from_json(m.to_json())
        assert type(back) is type(m)
        z = 7.3 + 0.2j
        assert back.cauchy(z) == pytest.approx(m.cauchy(z), rel=1e-9)


def test_poly_roots_measure():
    m = measure_from_json(PolyRoots(Polynomial([-1, 0, 1])).to_json())
    assert sorted((z.real, w) for z, w in m.atoms) == [(-1.0, 0.5), (1.0, 0.5)]


def test_marchenko_pastur_cdf_consistency():
    mp = MarchenkoPastur()
    assert mp.cdf(4.0) == pytest.approx(1.0)
    assert mp.cdf(0.0) == pytest.approx(0.0)
    xs = np.linspace(0.1, 3.9, 50)
    h = 1e-6
    dnum = (mp.cdf(xs + h) - mp.cdf(xs - h)) / (2 * h)
    assert dnum == pytest.approx(mp.density(xs), abs=1e-5)


def test_quantile_inverts_cdf():
    for m in (Semicircle(), MarchenkoPastur(), Arcsine()):
        ps = np.linspace(0.05, 0.95, 19)
        xs = m.quantile(ps)
        assert m.cdf(xs) == pytest.approx(ps, abs=1e-9)


def test_density_grid_moments_richardson():
    # smooth density (15/16)(1-x^2)^2: moments 1, 0, 1/7, 0, 1/21 by hand
    x = np.linspace(-1, 1, 4097)
    g = DensityGridMeasure(x, 15 / 16 * (1 - x**2) ** 2)
    got = g.moments(4)
    assert got[0].real == pytest.approx(1.0, abs=1e-12)
    assert got[2].real == pytest.approx(1 / 7, abs=1e-12)
    assert got[4].real == pytest.approx(1 / 21, abs=1e-12)
    # semicircle endpoints limit trapezoid to ~h^(3/2); stays within 5e-6
    g2 = DensityGridMeasure(x, Semicircle().density(x))
    got2 = g2.moments(2)
    assert got2[0].real == pytest.approx(1.0, abs=5e-6)
    assert got2[2].real == pytest.approx(0.25, abs=5e-6)
