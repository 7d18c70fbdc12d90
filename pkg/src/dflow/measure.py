"""Measures, their Cauchy transforms, moments, and comparison metrics.

Weak-* convergence statements are operationalized two ways: sup distance of
Cauchy transforms on a circle outside both supports (``compare_cauchy``), and
Kolmogorov / order-1 transport distance on the real line (``real_distance``).

All closed-form transforms use the square-root / logarithm branch that is
asymptotic to z (resp. the principal log) at infinity, cut along the support,
so that z * C(z) -> total mass as z -> infinity.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import MassMismatchError, PoleError
from .polycore import Polynomial

_QUANTILE_ATOMS = 20000  # resolution of the equal-mass discretization


def _sqrt_cut(z, a: float, b: float):
    """sqrt((z-a)(z-b)) with branch cut on [a, b], asymptotic to z at infinity."""
    return np.sqrt(z - a) * np.sqrt(z - b)


def _catalan(j: int) -> int:
    return math.comb(2 * j, j) // (j + 1)


class Measure:
    """Shared protocol; concrete specs override the closed forms they have."""

    mass: float = 1.0

    def cauchy(self, z):
        raise NotImplementedError

    def cauchy_prime(self, z):
        """dC/dz; central difference fallback for specs without a closed form."""
        h = 1e-6 * max(1.0, self.support_radius())
        return (self.cauchy(z + h) - self.cauchy(z - h)) / (2 * h)

    def moments(self, kmax: int) -> list[complex]:
        raise NotImplementedError

    def support_radius(self) -> float:
        raise NotImplementedError

    def is_real(self) -> bool:
        return True

    def _on_support(self, z: complex) -> bool:
        raise NotImplementedError

    def to_json_dict(self) -> dict:
        raise NotImplementedError

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


class Atoms(Measure):
    """Finitely many weighted point masses; weights must be positive."""

    def __init__(self, atoms: Sequence[tuple[complex, float]]):
        if not atoms:
            raise ValueError("need at least one atom")
        locs = np.asarray([a[0] for a in atoms], dtype=complex)
        wts = np.asarray([a[1] for a in atoms], dtype=float)
        if np.any(wts <= 0) and type(self) is not SignedAtoms:
            raise ValueError("atom weights must be positive")
        self.locations = locs
        self.weights = wts
        self.mass = float(wts.sum())

    @property
    def atoms(self) -> list[tuple[complex, float]]:
        return [(complex(z), float(w)) for z, w in zip(self.locations, self.weights)]

    def cauchy(self, z):
        z = np.asarray(z, dtype=complex)
        diff = z[..., None] - self.locations
        out = (self.weights / diff).sum(axis=-1)
        return out if out.ndim else complex(out)

    def cauchy_prime(self, z):
        z = np.asarray(z, dtype=complex)
        diff = z[..., None] - self.locations
        out = -(self.weights / diff**2).sum(axis=-1)
        return out if out.ndim else complex(out)

    def moments(self, kmax: int) -> list[complex]:
        return [complex((self.weights * self.locations**j).sum()) for j in range(kmax + 1)]

    def support_radius(self) -> float:
        return float(np.max(np.abs(self.locations)))

    def is_real(self) -> bool:
        return bool(np.all(self.locations.imag == 0))

    def _on_support(self, z: complex) -> bool:
        scale = max(1.0, self.support_radius())
        return bool(np.min(np.abs(z - self.locations)) <= 1e-12 * scale)

    def hilbert(self, x: float) -> float:
        if self._on_support(complex(x)):
            raise PoleError(f"atom at x = {x}")
        return float((self.weights / (x - self.locations.real)).sum() / np.pi)

    def to_json_dict(self) -> dict:
        return {
            "type": "atoms",
            "atoms": [[z.real, z.imag, w] for z, w in self.atoms],
        }


class EmpiricalMeasure(Atoms):
    """sigma_{n,k}: zero-counting measure of Q_{n,k} divided by n.

    Total mass is (n-k)/n by construction.
    """

    def __init__(self, atoms: Sequence[tuple[complex, float]]):
        super().__init__(atoms)
        self.total_mass = self.mass

    @classmethod
    def from_roots(cls, roots: Sequence[complex], n: int) -> "EmpiricalMeasure":
        from .rootfind import cluster_roots

        clusters = cluster_roots(list(roots), tol=1e-14)
        return cls([(z, m / n) for z, m in clusters])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("re,im,weight\n")
        for z, w in self.atoms:
            buf.write(f"{z.real:.17g},{z.imag:.17g},{w:.17g}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "EmpiricalMeasure":
        atoms = []
        for line in text.strip().splitlines()[1:]:
            re_, im_, w = (float(v) for v in line.split(","))
            atoms.append((complex(re_, im_), w))
        return cls(atoms)


class SignedAtoms(Atoms):
    """Atoms with real (possibly negative) weights; tracks total variation."""

    def __init__(self, atoms: Sequence[tuple[complex, float]]):
        super().__init__(atoms)
        self.total_mass = float(self.weights.sum())
        self.total_variation = float(np.abs(self.weights).sum())
        self.mass = self.total_mass

    def to_json_dict(self) -> dict:
        d = super().to_json_dict()
        d["type"] = "signed_atoms"
        return d


class _RealInterval(Measure):
    """Base for absolutely continuous specs supported on a real interval."""

    a: float
    b: float

    def support_radius(self) -> float:
        return max(abs(self.a), abs(self.b))

    def _on_support(self, z: complex) -> bool:
        tol = 1e-12 * max(1.0, self.support_radius())
        return abs(z.imag) <= tol and self.a - tol <= z.real <= self.b + tol

    # subclasses provide density/cdf for the real-line metrics
    def density(self, x):
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def quantile(self, p):
        """Inverse CDF by vectorized bisection (monotone, bracketed)."""
        p = np.asarray(p, dtype=float)
        lo = np.full(p.shape, float(self.a))
        hi = np.full(p.shape, float(self.b))
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            below = self.cdf(mid) < p * self.mass
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)


class Arcsine(_RealInterval):
    """Equilibrium measure of [-1,1]: density 1/(pi sqrt(1-x^2))."""

    a, b = -1.0, 1.0

    def cauchy(self, z):
        return 1.0 / _sqrt_cut(np.asarray(z, dtype=complex), -1.0, 1.0)

    def cauchy_prime(self, z):
        z = np.asarray(z, dtype=complex)
        s = _sqrt_cut(z, -1.0, 1.0)
        return -z / s**3

    def moments(self, kmax: int) -> list[complex]:
        return [complex(m) for m in self.moments_exact(kmax)]

    def moments_exact(self, kmax: int) -> list[Fraction]:
        return [
            Fraction(math.comb(j, j // 2), 2**j) if j % 2 == 0 else Fraction(0)
            for j in range(kmax + 1)
        ]

    def support_radius(self) -> float:
        return 1.0

    def density(self, x):
        x = np.asarray(x, dtype=float)
        inside = np.abs(x) < 1.0
        out = np.zeros_like(x)
        out[inside] = 1.0 / (np.pi * np.sqrt(1.0 - x[inside] ** 2))
        return out

    def cdf(self, x):
        x = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
        return 0.5 + np.arcsin(x) / np.pi

    def quantile(self, p):
        return -np.cos(np.pi * np.asarray(p, dtype=float))

    def boundary_value(self, x):
        """C(x + i0) for x strictly inside (-1, 1)."""
        x = np.asarray(x, dtype=float)
        return -1j / np.sqrt(1.0 - x**2)

    def to_json_dict(self) -> dict:
        return {"type": "arcsine"}


class Semicircle(_RealInterval):
    """Semicircle law on [-1,1]: density (2/pi) sqrt(1-x^2)."""

    a, b = -1.0, 1.0

    def cauchy(self, z):
        # 2(z - sqrt(z^2-1)) rewritten as 2/(z + sqrt(z^2-1)): no cancellation
        z = np.asarray(z, dtype=complex)
        return 2.0 / (z + _sqrt_cut(z, -1.0, 1.0))

    def cauchy_prime(self, z):
        # 2(1 - z/s) = 2(s-z)/s = -2/(s(z+s)) with s = sqrt(z^2-1)
        z = np.asarray(z, dtype=complex)
        s = _sqrt_cut(z, -1.0, 1.0)
        return -2.0 / (s * (z + s))

    def moments(self, kmax: int) -> list[complex]:
        return [complex(m) for m in self.moments_exact(kmax)]

    def moments_exact(self, kmax: int) -> list[Fraction]:
        return [
            Fraction(_catalan(j // 2), 4 ** (j // 2)) if j % 2 == 0 else Fraction(0)
            for j in range(kmax + 1)
        ]

    def support_radius(self) -> float:
        return 1.0

    def density(self, x):
        x = np.asarray(x, dtype=float)
        inside = np.abs(x) < 1.0
        out = np.zeros_like(x)
        out[inside] = 2.0 / np.pi * np.sqrt(1.0 - x[inside] ** 2)
        return out

    def cdf(self, x):
        x = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
        return 0.5 + (x * np.sqrt(1.0 - x**2) + np.arcsin(x)) / np.pi

    def boundary_value(self, x):
        x = np.asarray(x, dtype=float)
        return 2.0 * (x - 1j * np.sqrt(1.0 - x**2))

    def to_json_dict(self) -> dict:
        return {"type": "semicircle"}


class UniformInterval(_RealInterval):
    """Normalized Lebesgue measure on [-1,1]."""

    a, b = -1.0, 1.0

    def cauchy(self, z):
        z = np.asarray(z, dtype=complex)
        return 0.5 * np.log((z + 1.0) / (z - 1.0))

    def cauchy_prime(self, z):
        z = np.asarray(z, dtype=complex)
        return -1.0 / (z**2 - 1.0)

    def moments(self, kmax: int) -> list[complex]:
        return [complex(m) for m in self.moments_exact(kmax)]

    def moments_exact(self, kmax: int) -> list[Fraction]:
        return [
            Fraction(1, j + 1) if j % 2 == 0 else Fraction(0) for j in range(kmax + 1)
        ]

    def support_radius(self) -> float:
        return 1.0

    def density(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) <= 1.0, 0.5, 0.0)

    def cdf(self, x):
        return np.clip((np.asarray(x, dtype=float) + 1.0) / 2.0, 0.0, 1.0)

    def quantile(self, p):
        return 2.0 * np.asarray(p, dtype=float) - 1.0

    def boundary_value(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * (np.log((1.0 + x) / (1.0 - x)) - 1j * np.pi)

    def to_json_dict(self) -> dict:
        return {"type": "uniform"}


class MarchenkoPastur(_RealInterval):
    """Marchenko-Pastur law on [0,4]: density sqrt((4-x)/x) / (2 pi)."""

    a, b = 0.0, 4.0

    def cauchy(self, z):
        # (1 - sqrt(1-4/z))/2 rewritten as 2/(z + sqrt(z(z-4))): no cancellation
        z = np.asarray(z, dtype=complex)
        return 2.0 / (z + _sqrt_cut(z, 0.0, 4.0))

    def cauchy_prime(self, z):
        z = np.asarray(z, dtype=complex)
        return -1.0 / (z * _sqrt_cut(z, 0.0, 4.0))

    def moments(self, kmax: int) -> list[complex]:
        return [complex(m) for m in self.moments_exact(kmax)]

    def moments_exact(self, kmax: int) -> list[Fraction]:
        return [Fraction(_catalan(j)) for j in range(kmax + 1)]

    def support_radius(self) -> float:
        return 4.0

    def density(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0.0) & (x < 4.0)
        out = np.zeros_like(x)
        out[inside] = np.sqrt((4.0 - x[inside]) / x[inside]) / (2.0 * np.pi)
        return out

    def cdf(self, x):
        # substitute x = 2(1 - cos u): the integrand becomes (1 + cos u)/pi
        x = np.clip(np.asarray(x, dtype=float), 0.0, 4.0)
        u = np.arccos(1.0 - x / 2.0)
        return (u + np.sin(u)) / np.pi

    def boundary_value(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * (1.0 - 1j * np.sqrt((4.0 - x) / x))

    def to_json_dict(self) -> dict:
        return {"type": "marchenko_pastur"}


class PolyRoots(Atoms):
    """Normalized zero-counting measure of a polynomial (atoms, weight 1/deg)."""

    def __init__(self, poly: Polynomial):
        from .rootfind import RootFindConfig, all_roots, cluster_roots

        self.poly = poly
        roots = all_roots(poly, RootFindConfig())
        n = poly.degree
        super().__init__([(z, m / n) for z, m in cluster_roots(roots, tol=1e-14)])

    def to_json_dict(self) -> dict:
        return {
            "type": "poly_roots",
            "coeffs": [[c.real, c.imag] for c in self.poly.coeffs],
        }


class DensityGridMeasure(_RealInterval):
    """Density sampled on a real grid; quadrature-backed transforms."""

    def __init__(self, x: Sequence[float], f: Sequence[float]):
        x = np.asarray(x, dtype=float)
        f = np.asarray(f, dtype=float)
        if x.ndim != 1 or x.shape != f.shape or x.size < 2:
            raise ValueError("x and f must be equal-length 1-d arrays, >= 2 points")
        if np.any(np.diff(x) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(f < 0):
            raise ValueError("density values must be nonnegative")
        self.x = x
        self.f = f
        self.a = float(x[0])
        self.b = float(x[-1])
        self.mass = float(np.trapezoid(f, x))
        self._cum = np.concatenate(
            ([0.0], np.cumsum(np.diff(x) * (f[1:] + f[:-1]) / 2.0))
        )

    def _gauss_refine(self, kernel) -> complex:
        """Gauss-Legendre on [a,b], nodes doubled until 1e-12 agreement."""
        prev = None
        nodes = 256
        while nodes <= 4096:
            t, w = np.polynomial.legendre.leggauss(nodes)
            y = 0.5 * (self.b - self.a) * t + 0.5 * (self.a + self.b)
            fy = np.interp(y, self.x, self.f)
            val = 0.5 * (self.b - self.a) * np.sum(w * fy * kernel(y))
            if prev is not None and abs(val - prev) < 1e-12 * max(1.0, abs(val)):
                return val
            prev = val
            nodes *= 2
        return prev

    def cauchy(self, z):
        z = np.asarray(z, dtype=complex)
        if z.ndim:
            return np.array([self.cauchy(complex(zz)) for zz in z.ravel()]).reshape(z.shape)
        return complex(self._gauss_refine(lambda y: 1.0 / (complex(z) - y)))

    def cauchy_prime(self, z):
        z = np.asarray(z, dtype=complex)
        if z.ndim:
            return np.array([self.cauchy_prime(complex(zz)) for zz in z.ravel()]).reshape(z.shape)
        return complex(-self._gauss_refine(lambda y: 1.0 / (complex(z) - y) ** 2))

    def moments(self, kmax: int) -> list[complex]:
        dx = np.diff(self.x)
        uniform = np.allclose(dx, dx[0], rtol=1e-12, atol=0.0)
        out = []
        for j in range(kmax + 1):
            g = self.f * self.x**j
            full = np.trapezoid(g, self.x)
            if uniform and self.x.size >= 5 and self.x.size % 2 == 1:
                half = np.trapezoid(g[::2], self.x[::2])
                full = (4.0 * full - half) / 3.0  # Richardson on the trapezoid
            out.append(complex(full))
        return out

    def density(self, x):
        return np.interp(np.asarray(x, dtype=float), self.x, self.f, left=0.0, right=0.0)

    def cdf(self, x):
        return np.interp(np.asarray(x, dtype=float), self.x, self._cum, left=0.0, right=self.mass)

    def to_json_dict(self) -> dict:
        return {"type": "density_grid", "x": self.x.tolist(), "f": self.f.tolist()}


def measure_from_json(text: str | dict) -> Measure:
    d = json.loads(text) if isinstance(text, str) else text
    kind = d["type"]
    if kind == "atoms":
        return Atoms([(complex(r, i), w) for r, i, w in d["atoms"]])
    if kind == "signed_atoms":
        return SignedAtoms([(complex(r, i), w) for r, i, w in d["atoms"]])
    if kind == "arcsine":
        return Arcsine()
    if kind == "semicircle":
        return Semicircle()
    if kind == "marchenko_pastur":
        return MarchenkoPastur()
    if kind == "uniform":
        return UniformInterval()
    if kind == "poly_roots":
        return PolyRoots(Polynomial([complex(r, i) for r, i in d["coeffs"]]))
    if kind == "density_grid":
        return DensityGridMeasure(d["x"], d["f"])
    raise ValueError(f"unknown measure type {kind!r}")


# ---------------------------------------------------------------------------
# operations


def cauchy_transform(m: Measure, z: complex):
    """C(z) = integral d mu(y) / (z - y); raises PoleError on the support."""
    zz = np.asarray(z, dtype=complex)
    if zz.ndim == 0:
        if m._on_support(complex(zz)):
            raise PoleError(f"z = {z} lies on the support")
        return m.cauchy(complex(zz))
    return m.cauchy(zz)


def moments(m: Measure, kmax: int) -> list[complex]:
    return m.moments(kmax)


def support_radius(m: Measure) -> float:
    return m.support_radius()


def compare_cauchy(m1, m2, radius: float, samples: int = 256) -> float:
    """max_{|z| = radius} |C1(z) - C2(z)| over equispaced circle points."""
    r1 = m1.support_radius() if hasattr(m1, "support_radius") else 0.0
    r2 = m2.support_radius() if hasattr(m2, "support_radius") else 0.0
    if radius <= max(r1, r2):
        raise ValueError(
            f"comparison radius {radius} must exceed both support radii "
            f"({r1:.3g}, {r2:.3g})"
        )
    z = radius * np.exp(2j * np.pi * np.arange(samples) / samples)
    c1 = m1.cauchy(z) if hasattr(m1, "cauchy") else m1(z)
    c2 = m2.cauchy(z) if hasattr(m2, "cauchy") else m2(z)
    return float(np.max(np.abs(np.asarray(c1) - np.asarray(c2))))


def _quantile_atoms(m: Measure, n: int = _QUANTILE_ATOMS):
    """Equal-mass real discretization (locations, weights), atoms kept exact."""
    if isinstance(m, Atoms):
        order = np.argsort(m.locations.real)
        return m.locations.real[order], m.weights[order] / m.mass
    ps = (np.arange(n) + 0.5) / n
    return np.asarray(m.quantile(ps), dtype=float), np.full(n, 1.0 / n)


def real_distance(m1: Measure, m2: Measure) -> tuple[float, float]:
    """(Kolmogorov, W1) distance between the unit-normalized measures.

    Both measures must sit on the real line and carry equal total mass
    (within 1e-9).  Continuous specs are discretized by equal-mass quantile
    sampling; the step-function distances are then exact.
    """
    for m in (m1, m2):
        if not m.is_real():
            raise ValueError("real_distance needs real-supported measures")
    if abs(m1.mass - m2.mass) > 1e-9:
        raise MassMismatchError(f"total masses differ: {m1.mass} vs {m2.mass}")

    x1, w1 = _quantile_atoms(m1)
    x2, w2 = _quantile_atoms(m2)
    xs = np.concatenate([x1, x2])
    ws = np.concatenate([w1, -w2])
    # aggregate coincident locations first, else intra-point partial sums leak
    # into the sup norm (identical measures must give exactly zero)
    ux, inv = np.unique(xs, return_inverse=True)
    uw = np.zeros_like(ux)
    np.add.at(uw, inv, ws)
    dcdf = np.cumsum(uw)  # F1 - F2 just right of each event point
    ks = float(np.max(np.abs(dcdf)))
    w1dist = float(np.sum(np.abs(dcdf[:-1]) * np.diff(ux)))
    return ks, w1dist
