"""Analytic estimates and boundary machinery around the Cauchy transform.

Sign convention used throughout (fixed by the semicircle closed form):

    C(x +- i0) = pi * H(x) -+ i * pi * f(x)

with H the Hilbert transform (1/pi) p.v. integral d mu(y)/(x-y) and f the
density.  Stieltjes inversion therefore reads f(x) = -(1/pi) Im C(x + i0),
realized by Richardson extrapolation in the offset eps.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InversionError, PoleError
from .measure import Atoms, DensityGridMeasure, Measure, _RealInterval


def safe_radius(r: float, T: float) -> float:
    """Radius beyond which the characteristics solve is guaranteed up to time T.

    1.1 * max(2r, r(1+r), (1+r)(1+T)/(1-T)); the 10% margin buys slack for
    the strict inequalities in floating point.
    """
    if r <= 0:
        raise ValueError("support radius must be positive")
    if not 0.0 < T < 1.0:
        raise ValueError("time horizon T must lie in (0, 1)")
    return 1.1 * max(2.0 * r, r * (1.0 + r), (1.0 + r) * (1.0 + T) / (1.0 - T))


@dataclass
class BoundsReport:
    radius_R: float
    min_abs_zC: float
    max_abs_zC: float
    min_abs_z2dC: float
    max_abs_z2dC: float
    bound_violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.bound_violations

    def to_json(self) -> str:
        return json.dumps(
            {
                "radius_R": self.radius_R,
                "min_abs_zC": self.min_abs_zC,
                "max_abs_zC": self.max_abs_zC,
                "min_abs_z2dC": self.min_abs_z2dC,
                "max_abs_z2dC": self.max_abs_z2dC,
                "bound_violations": [
                    {"z": [z.real, z.imag], "quantity": q, "value": v, "bound": b}
                    for z, q, v, b in self.bound_violations
                ],
            },
            sort_keys=True,
        )


def verify_bounds(m: Measure, r: float, R: float, samples: int = 64) -> BoundsReport:
    """Check the envelope bounds on zC(z) and z^2 C'(z) for |z| >= R > 2r.

    Sampled on the circles |z| in {R, 2R, 10R}: the two-sided bounds

        (1-r/R)/(1+r/R)^2 <= |zC(z)| <= R/(R-r)
        (1-2r/R)/(1+r/R)^4 <= |z^2 C'(z)| <= 1/(1-r/R)^2

    must hold at every sample for a probability measure supported in D_r.
    """
    if m.support_radius() > r * (1 + 1e-12):
        raise ValueError(f"support radius {m.support_radius()} exceeds r={r}")
    if R <= 2 * r:
        raise ValueError("need R > 2r")
    rho = r / R
    lo1 = (1 - rho) / (1 + rho) ** 2
    hi1 = R / (R - r)
    lo2 = (1 - 2 * rho) / (1 + rho) ** 4
    hi2 = 1.0 / (1 - rho) ** 2

    violations = []
    vals1, vals2 = [], []
    for mult in (1.0, 2.0, 10.0):
        z = mult * R * np.exp(2j * np.pi * np.arange(samples) / samples)
        zc = np.abs(z * np.asarray(m.cauchy(z)))
        z2dc = np.abs(z**2 * np.asarray(m.cauchy_prime(z)))
        vals1.append(zc)
        vals2.append(z2dc)
        for arr, lo, hi, name in ((zc, lo1, hi1, "zC"), (z2dc, lo2, hi2, "z2dC")):
            bad_lo = arr < lo
            bad_hi = arr > hi
            for i in np.flatnonzero(bad_lo):
                violations.append((complex(z[i]), name, float(arr[i]), lo))
            for i in np.flatnonzero(bad_hi):
                violations.append((complex(z[i]), name, float(arr[i]), hi))
    v1 = np.concatenate(vals1)
    v2 = np.concatenate(vals2)
    return BoundsReport(
        radius_R=R,
        min_abs_zC=float(v1.min()),
        max_abs_zC=float(v1.max()),
        min_abs_z2dC=float(v2.min()),
        max_abs_z2dC=float(v2.max()),
        bound_violations=violations,
    )


def univalence_check(m, r: float, R: float, samples: int = 128):
    """Numeric injectivity + covered-disk check for C on Omega_R.

    Samples concentric circles in Omega_R and asserts no two distinct sample
    points map within 1e-12 of each other; then asserts the image curve of
    |z| = R winds once around 0 and around probes on the circle of radius
    1/(4R), i.e. the closed disk D_{1/(4R)} is covered.

    Returns (ok, witness); witness identifies the offending pair or probe.
    """
    if R <= (math.sqrt(2.0) + 1.0) * r:
        raise ValueError("need R > (sqrt(2)+1) r for the univalence radius")
    radii = R * np.array([1.0, 1.3, 1.7, 2.5, 4.0])
    zs = np.concatenate(
        [rad * np.exp(2j * np.pi * (np.arange(samples) + 0.5 * i) / samples)
         for i, rad in enumerate(radii)]
    )
    cs = np.asarray(m.cauchy(zs))
    d = np.abs(cs[:, None] - cs[None, :])
    np.fill_diagonal(d, np.inf)
    i, j = np.unravel_index(np.argmin(d), d.shape)
    if d[i, j] < 1e-12 and abs(zs[i] - zs[j]) > 1e-12:
        return False, {"z1": complex(zs[i]), "z2": complex(zs[j]), "image_gap": float(d[i, j])}

    theta = 2j * np.pi * np.arange(8 * samples) / (8 * samples)
    curve = np.asarray(m.cauchy(R * np.exp(theta)))
    probes = [0j] + list(0.999 / (4.0 * R) * np.exp(2j * np.pi * np.arange(16) / 16))
    for w in probes:
        rel = curve - w
        dphi = np.angle(rel / np.roll(rel, 1))
        winding = np.sum(dphi) / (2 * np.pi)
        if abs(abs(winding) - 1.0) > 1e-6:
            return False, {"probe": complex(w), "winding": float(winding)}
    return True, None


def hilbert_transform(m: Measure, x: float) -> float:
    """(1/pi) p.v. integral d mu(y)/(x-y) for a real-supported measure."""
    if not m.is_real():
        raise ValueError("Hilbert transform needs a real-supported measure")
    if isinstance(m, Atoms):
        return m.hilbert(x)  # raises PoleError on an atom
    if isinstance(m, DensityGridMeasure):
        return _hilbert_grid(m, x)
    if isinstance(m, _RealInterval):
        if m.a < x < m.b:
            return float(np.real(m.boundary_value(x)) / np.pi)
        if m._on_support(complex(x)):
            raise PoleError(f"x = {x} sits at a support endpoint")
        return float(np.real(m.cauchy(complex(x))) / np.pi)
    raise TypeError(f"unsupported measure type {type(m).__name__}")


def _hilbert_grid(m: DensityGridMeasure, x: float) -> float:
    """Principal-value trapezoid with the singularity subtracted out."""
    a, b = m.a, m.b
    if not a < x < b:
        if m._on_support(complex(x)):
            raise PoleError(f"x = {x} sits at a support endpoint")
        return float(np.real(m.cauchy(complex(x))) / np.pi)
    fx = float(m.density(x))
    fprime = float(np.interp(x, m.x[:-1], np.diff(m.f) / np.diff(m.x)))
    with np.errstate(divide="ignore", invalid="ignore"):
        g = (m.f - fx) / (x - m.x)
    g[~np.isfinite(g)] = -fprime
    near = np.abs(x - m.x) < 1e-14 * max(1.0, abs(x))
    g[near] = -fprime
    pv = np.trapezoid(g, m.x) + fx * math.log((x - a) / (b - x))
    return float(pv / np.pi)


def stieltjes_invert(u_eval, x_grid, eps0: float) -> np.ndarray:
    """Density on x_grid from boundary values: f = -(1/pi) Im u(x + i eps),
    Richardson-extrapolated over eps in {eps0, eps0/2, eps0/4}.

    Raises InversionError when the eps-sequence fails to settle or when the
    extrapolated density is significantly negative; small negative values are
    clamped to zero.
    """
    x = np.asarray(x_grid, dtype=float)
    if eps0 <= 0:
        raise ValueError("eps0 must be positive")
    levels = []
    for eps in (eps0, eps0 / 2.0, eps0 / 4.0):
        vals = _eval_vectorized(u_eval, x + 1j * eps)
        levels.append(-np.imag(vals) / np.pi)
    a1, a2, a3 = levels
    d1 = np.max(np.abs(a2 - a1))
    d2 = np.max(np.abs(a3 - a2))
    if d2 > 0.75 * d1 + 1e-13:
        raise InversionError(
            f"eps-sequence not decaying: |A(e/2)-A(e)|={d1:.3g}, |A(e/4)-A(e/2)|={d2:.3g}"
        )
    b1 = 2.0 * a2 - a1
    b2 = 2.0 * a3 - a2
    f = (4.0 * b2 - b1) / 3.0
    if np.min(f) < -1e-6:
        raise InversionError(f"inverted density is negative: min = {np.min(f):.3g}")
    return np.clip(f, 0.0, None)


def _eval_vectorized(u_eval, z: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(u_eval(z), dtype=complex)
        if out.shape == z.shape:
            return out
    except Exception:
        pass
    return np.array([u_eval(complex(zz)) for zz in z.ravel()], dtype=complex).reshape(z.shape)
