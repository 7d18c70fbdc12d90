"""Characteristics solution of the complex Hopf equation u_t = u_z / u.

The solution with initial datum u(z,0) = C(z) of a measure is constant along
straight characteristics: u(z,t) = u(s,0) where s solves

    F(z,s) = z - s + t / u(s,0) = 0.

``solve_u`` realizes that by continuation in t with a fixed-point/Newton
hybrid.  For polynomial zero-counting initial data the same germ satisfies an
algebraic equation of degree m in w = u(z,t) (``shapiro_coefficients``),
giving an independent solve route and explicit branch-point locations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cauchy import safe_radius
from .errors import (
    BranchAmbiguityError,
    CharacteristicError,
    SingularCharacteristicError,
)
from .measure import Measure
from .polycore import Polynomial, differentiate, evaluate, log_derivative
from .rootfind import RootFindConfig, all_roots, derivative_flow


@dataclass
class HopfConfig:
    residual_tol: float = 1e-12
    continuation_step: float = 0.05
    min_step: float = 1e-4
    max_newton: int = 60
    fixed_point_iters: int = 24


@dataclass
class BranchSelection:
    """Caller-owned continuation state for the algebraic branch choice."""

    previous_t: float = 0.0
    previous_w: complex | None = None


class FlowSolution:
    """Bundle of an initial measure and the solvers for its Hopf flow."""

    def __init__(self, initial: Measure, config: HopfConfig | None = None):
        self.initial = initial
        self.u0 = initial.cauchy
        self.u0_prime = initial.cauchy_prime
        self.r = initial.support_radius()
        self.config = config or HopfConfig()

    def safe_radius(self, T: float) -> float:
        return safe_radius(self.r, max(T, 0.5))

    def u(self, z: complex, t: float) -> complex:
        return solve_u(self, z, t)


def _newton_on_F(sol: FlowSolution, z, t: float, s, active=None):
    """Damped Newton for F(z,s) = z - s + t/u0(s), vectorized over points."""
    cfg = sol.config
    z = np.asarray(z, dtype=complex)
    s = np.asarray(s, dtype=complex).copy()
    n = s.size
    if active is None:
        active = np.ones(n, dtype=bool)
    tol = cfg.residual_tol * np.maximum(1.0, np.abs(z))
    for _ in range(cfg.max_newton):
        u0s = np.asarray(sol.u0(s), dtype=complex)
        if np.any(np.abs(u0s[active]) < 1e-300):
            raise SingularCharacteristicError(
                "characteristic field hit a zero of u0", last_iterate=s
            )
        F = z - s + t / u0s
        res = np.abs(F)
        active = active & (res > tol)
        if not active.any():
            return s, res, True
        du = np.asarray(sol.u0_prime(s), dtype=complex)
        Fp = -1.0 - t * du / u0s**2
        Fp = np.where(np.abs(Fp) < 1e-300, 1e-300, Fp)
        step = -F / Fp
        # pole guard: cap the step at half the current magnitude
        cap = 0.5 * np.maximum(np.abs(s), 1e-2)
        big = np.abs(step) > cap
        step = np.where(big, step * cap / np.abs(np.where(big, step, 1.0)), step)
        s_try = np.where(active, s + step, s)
        # backtrack halving while the residual grows
        for _ in range(12):
            u0t = np.asarray(sol.u0(s_try), dtype=complex)
            small = np.abs(u0t) < 1e-300
            F_try = np.where(small, np.inf, z - s_try + t / np.where(small, 1.0, u0t))
            worse = active & (np.abs(F_try) > res)
            if not worse.any():
                break
            s_try = np.where(worse, (s + s_try) / 2.0, s_try)
        s = s_try
    u0s = np.asarray(sol.u0(s), dtype=complex)
    res = np.abs(z - s + t / u0s)
    return s, res, bool(np.all(res <= tol))


def _fixed_point(sol: FlowSolution, z, t: float, s):
    """s <- z + t/u0(s); cheap and contractive far out, may stall inside."""
    cfg = sol.config
    z = np.asarray(z, dtype=complex)
    s = np.asarray(s, dtype=complex).copy()
    tol = cfg.residual_tol * np.maximum(1.0, np.abs(z))
    prev = np.full(s.shape, np.inf)
    for _ in range(cfg.fixed_point_iters):
        u0s = np.asarray(sol.u0(s), dtype=complex)
        if np.any(np.abs(u0s) < 1e-300):
            return s, prev, False  # hand over to Newton
        s_new = z + t / u0s
        res = np.abs(s_new - s)
        if np.all(res <= tol):
            return s_new, res, True
        if np.all(res > 0.7 * prev):  # stalled everywhere: switch to Newton
            return s, res, False
        prev = res
        s = s_new
    return s, prev, False


def _solve_batch(sol: FlowSolution, z: np.ndarray, t: float, step: float | None = None):
    """Continuation in t for a batch of z sharing the same target time."""
    cfg = sol.config
    z = np.asarray(z, dtype=complex)
    if t == 0.0:
        return z.copy(), np.asarray(sol.u0(z), dtype=complex), np.zeros(z.shape), 0
    nsteps = max(1, math.ceil(t / (step or cfg.continuation_step)))
    s = z.copy()
    iters = 0
    for j in range(1, nsteps + 1):
        t_c = t * j / nsteps
        s_fp, res, done = _fixed_point(sol, z, t_c, s)
        iters += cfg.fixed_point_iters
        if done:
            s = s_fp
            continue
        s, res, ok = _newton_on_F(sol, z, t_c, s_fp)
        iters += cfg.max_newton
        if not ok:
            raise CharacteristicError(
                f"characteristics solve failed at t = {t_c:.6g} "
                f"(max residual {np.max(res):.3g})",
                last_iterate=s,
            )
    u = np.asarray(sol.u0(s), dtype=complex)
    res = np.abs(z - s + t / u)
    return s, u, res, iters


def solve_u(sol: FlowSolution, z: complex, t: float) -> complex:
    """u(z,t) by characteristics; adaptive step halving down to the floor."""
    u, _, _ = solve_u_detailed(sol, z, t)
    return u


def solve_u_detailed(sol: FlowSolution, z: complex, t: float):
    """(u, residual, iterations); scalar path with adaptive continuation."""
    if not 0.0 <= t < 1.0:
        raise ValueError("t must lie in [0, 1)")
    cfg = sol.config
    if t == 0.0:
        return complex(sol.u0(complex(z))), 0.0, 0
    step = cfg.continuation_step
    while True:
        try:
            _, u, res, iters = _solve_batch(sol, np.array([z], dtype=complex), t, step)
            return complex(u[0]), float(res[0]), iters
        except CharacteristicError:
            step /= 2.0
            if step < cfg.min_step:
                raise


def solve_u_grid(sol: FlowSolution, zs, t: float):
    """Vectorized u(z,t) over an array of z; falls back per point on failure."""
    zs = np.asarray(zs, dtype=complex)
    try:
        _, u, _, _ = _solve_batch(sol, zs.ravel(), t)
        return u.reshape(zs.shape)
    except CharacteristicError:
        flat = zs.ravel()
        out = np.empty(flat.shape, dtype=complex)
        for i, zz in enumerate(flat):
            out[i] = solve_u(sol, complex(zz), t)
        return out.reshape(zs.shape)


def inverse_u(sol: FlowSolution, w: complex, t: float) -> complex:
    """u^{-1}(w,t) = u^{-1}(w,0) - t/w, the inverse at t = 0 by Newton."""
    if w == 0:
        raise ValueError("w = 0 is outside the image of the transform")
    s = _invert_u0(sol, complex(w))
    return s - t / w


def _invert_u0(sol: FlowSolution, w: complex) -> complex:
    s = 1.0 / w
    for _ in range(100):
        f = complex(sol.u0(s)) - w
        if abs(f) <= 1e-14 * abs(w):
            return s
        df = complex(sol.u0_prime(s))
        if df == 0:
            break
        step = f / df
        if abs(step) > 0.5 * abs(s):
            step *= 0.5 * abs(s) / abs(step)
        s -= step
    f = complex(sol.u0(s)) - w
    if abs(f) <= 1e-9 * abs(w):
        return s
    raise CharacteristicError(f"Newton failed inverting u0 at w = {w}", last_iterate=s)


# ---------------------------------------------------------------------------
# algebraic route for polynomial initial data


def shapiro_coefficients(P: Polynomial, z: complex, t: float) -> Polynomial:
    """Degree-m polynomial in w whose root (right branch) is u(z,t).

    Coefficient of w^{m-j} is (m - j/t) * P^(j)(z)/j! * t^j.  Degenerates at
    t = 0, where the caller should use u0 directly.
    """
    if t == 0.0:
        raise ValueError("t = 0 degenerates; evaluate u0 instead")
    if not 0.0 < t < 1.0:
        raise ValueError("t must lie in (0, 1)")
    m = P.degree
    if m < 1:
        raise ValueError("polynomial data must have degree >= 1")
    derivs = []
    q = P
    fact = 1.0
    for j in range(m + 1):
        derivs.append(evaluate(q, z) / fact)
        if j < m:
            q = differentiate(q)
            fact *= j + 1
    coeffs = [0j] * (m + 1)
    for j in range(m + 1):
        coeffs[m - j] = (m - j / t) * derivs[j] * t**j
    return Polynomial(coeffs)


def solve_u_algebraic(
    P: Polynomial,
    z: complex,
    t: float,
    sel: BranchSelection | None = None,
    cfg: RootFindConfig | None = None,
) -> complex:
    """u(z,t) as the continuation-selected root of the algebraic equation."""
    wpoly = shapiro_coefficients(P, z, t)
    roots = np.asarray(all_roots(wpoly, cfg or RootFindConfig()), dtype=complex)
    target = (1.0 - t) / z
    if sel is not None and sel.previous_w is not None:
        target = complex(sel.previous_w)
    dist = np.abs(roots - target)
    order = np.argsort(dist)
    if roots.size > 1 and abs(dist[order[0]] - dist[order[1]]) <= 1e-12:
        raise BranchAmbiguityError(
            f"two branches equidistant from {target}: roots "
            f"{roots[order[0]]}, {roots[order[1]]}"
        )
    w = complex(roots[order[0]])
    if sel is not None:
        sel.previous_t = t
        sel.previous_w = w
    return w


def branch_points(
    P: Polynomial, t: float, cfg: RootFindConfig | None = None
) -> list[complex]:
    """z-locations where the algebraic w-equation has a colliding root pair.

    Candidates come from the w-discriminant, interpolated as a polynomial in
    z from Sylvester-determinant samples on a circle; each candidate is then
    polished by Newton on the analytic collision function (w_a - w_b)^2 and
    kept only if the pair genuinely merges.
    """
    if not 0.0 < t < 1.0:
        raise ValueError("t must lie in (0, 1)")
    cfg = cfg or RootFindConfig()
    m = P.degree
    root_scale = 1.0 + max(
        (abs(r) for r in all_roots(P, cfg)), default=1.0
    )
    deg_bound = 2 * m * (m - 1) + 1
    nsamp = 1 << max(4, (deg_bound + 1).bit_length())
    rho = 1.5 * root_scale
    zs = rho * np.exp(2j * np.pi * np.arange(nsamp) / nsamp)
    dets = np.array([_sylvester_det(P, complex(zz), t) for zz in zs])
    coeffs = np.fft.ifft(dets) / rho ** np.arange(nsamp)
    mags = np.abs(coeffs)
    keep = mags > 1e-9 * mags.max()
    top = int(np.flatnonzero(keep).max())
    disc = Polynomial(list(coeffs[: top + 1]))
    if disc.degree < 1:
        return []
    candidates = all_roots(disc, cfg)

    found: list[complex] = []
    for zc in candidates:
        zp = _polish_collision(P, complex(zc), t, cfg)
        if zp is None:
            continue
        if all(abs(zp - f) > 1e-7 * max(1.0, abs(zp)) for f in found):
            found.append(zp)
    found.sort(key=lambda w: (round(w.real, 9), round(w.imag, 9)))
    return found


def _sylvester_det(P: Polynomial, z: complex, t: float) -> complex:
    w = shapiro_coefficients(P, z, t)
    a = np.zeros(P.degree + 1, dtype=complex)
    raw = np.asarray(w.coeffs, dtype=complex)
    a[: raw.size] = raw  # keep formal degree m even when the top coeff vanishes
    m = P.degree
    b = a[1:] * np.arange(1, m + 1)
    n1, n2 = m, m - 1
    size = n1 + n2
    mat = np.zeros((size, size), dtype=complex)
    for i in range(n2):
        mat[i, i : i + n1 + 1] = a[::-1]
    for i in range(n1):
        mat[n2 + i, i : i + n2 + 1] = b[::-1]
    return complex(np.linalg.det(mat))


def _collision_gap(P: Polynomial, z: complex, t: float, cfg: RootFindConfig):
    """Squared gap of the two closest w-roots: analytic with a simple zero
    at a branch point (symmetric function of the colliding pair)."""
    try:
        wpoly = shapiro_coefficients(P, z, t)
        roots = np.asarray(all_roots(wpoly, cfg), dtype=complex)
    except Exception:
        return None
    if roots.size < 2:
        return None
    d = np.abs(roots[:, None] - roots[None, :])
    np.fill_diagonal(d, np.inf)
    i, j = np.unravel_index(np.argmin(d), d.shape)
    return (roots[i] - roots[j]) ** 2


def _polish_collision(P, z0: complex, t: float, cfg) -> complex | None:
    z = z0
    scale = max(1.0, abs(z0))
    h = 1e-7 * scale
    for _ in range(60):
        g = _collision_gap(P, z, t, cfg)
        if g is None:
            return None
        if abs(g) <= 1e-24 * scale**2:
            return z
        gp = _collision_gap(P, z + h, t, cfg)
        gm = _collision_gap(P, z - h, t, cfg)
        if gp is None or gm is None:
            return None
        dg = (gp - gm) / (2 * h)
        if dg == 0:
            return None
        step = g / dg
        if abs(step) > 0.2 * scale:
            step *= 0.2 * scale / abs(step)
        z = z - step
        if abs(step) <= 1e-13 * scale:
            g = _collision_gap(P, z, t, cfg)
            if g is not None and abs(g) <= 1e-20 * scale**2:
                return z
    g = _collision_gap(P, z, t, cfg)
    if g is not None and abs(g) <= 1e-20 * scale**2:
        return z
    return None


def signed_example_branch_points(a: float, t: float) -> tuple[complex, complex]:
    """Branch points of the signed-measure flow (a+1) delta_0 - a delta_1.

    Roots of z^2 - 2(t-1+a(1-2t)) z + (a+1-t)^2; a conjugate pair of modulus
    a + 1 - t.
    """
    if a <= 0:
        raise ValueError("a must be positive")
    if not 0.0 < t < 1.0:
        raise ValueError("t must lie in (0, 1)")
    b = t - 1.0 + a * (1.0 - 2.0 * t)
    c = (a + 1.0 - t) ** 2
    disc = complex(b * b - c)
    root = np.sqrt(disc)
    z1, z2 = b + root, b - root
    if z1.imag < z2.imag:
        z1, z2 = z2, z1
    return complex(z1), complex(z2)


# ---------------------------------------------------------------------------
# discrete Hopf equation and proximity of inverses


def discrete_hopf_residual(roots_k, roots_k1, n: int, z: complex) -> complex:
    """Residual of v_{n,k+1} - v_{n,k} = (1/n) v'_{n,k} / v_{n,k} in root form."""
    roots_k = list(roots_k)
    roots_k1 = list(roots_k1)
    if len(roots_k1) != len(roots_k) - 1:
        raise ValueError("derivative root multiset must be one root shorter")
    v_k = log_derivative(roots_k, z) / n
    v_k1 = log_derivative(roots_k1, z) / n
    rr = np.asarray(roots_k, dtype=complex)
    vp_k = complex(-np.sum(1.0 / (z - rr) ** 2)) / n
    return (v_k1 - v_k) - vp_k / (n * v_k)


def _invert_rational(roots, mass_over_n: float, zeta: complex) -> complex:
    """Newton solve of (1/n) sum 1/(s - r_i) = zeta, seeded by the asymptote."""
    rr = np.asarray(roots, dtype=complex)
    n_atoms = rr.size
    s = mass_over_n / zeta
    weight = mass_over_n / n_atoms  # each root carries 1/n
    for _ in range(100):
        diff = s - rr
        v = weight * np.sum(1.0 / diff)
        f = v - zeta
        if abs(f) <= 1e-14 * abs(zeta):
            return complex(s)
        dv = -weight * np.sum(1.0 / diff**2)
        if dv == 0:
            break
        step = f / dv
        if abs(step) > 0.5 * abs(s):
            step *= 0.5 * abs(s) / abs(step)
        s -= step
    if abs(weight * np.sum(1.0 / (s - rr)) - zeta) <= 1e-10 * abs(zeta):
        return complex(s)
    raise CharacteristicError(f"inverse of v failed at zeta = {zeta}")


def inverse_proximity_rate(
    roots_by_n: dict[int, list[complex]],
    t: float,
    zeta_circle: tuple[float, int],
    cfg: RootFindConfig | None = None,
) -> tuple[float, dict[int, float]]:
    """Fitted log-log slope of max_zeta |v_{n,k}^{-1} - u_{n,k}^{-1}| vs n.

    u_{n,k}^{-1}(zeta) = v_{n,0}^{-1}(zeta) - (k/n)/zeta exactly, so no
    limiting measure enters; the comparison isolates the discrete-to-
    continuous defect, which decays like 1/n.
    """
    if not 0.0 < t < 1.0:
        raise ValueError("t must lie in (0, 1)")
    radius, samples = zeta_circle
    zetas = radius * np.exp(2j * np.pi * np.arange(samples) / samples)
    cfg = cfg or RootFindConfig(mode="real-interlacing")
    errors: dict[int, float] = {}
    for n, roots in sorted(roots_by_n.items()):
        roots = list(roots)
        if len(roots) != n:
            raise ValueError(f"got {len(roots)} roots for n = {n}")
        k = round(t * n)
        flow = derivative_flow(roots, k, cfg)
        roots_k = flow[-1]
        err = 0.0
        for zeta in zetas:
            v0_inv = _invert_rational(roots, 1.0, complex(zeta))
            u_inv = v0_inv - (k / n) / zeta
            vk_inv = _invert_rational(roots_k, (n - k) / n, complex(zeta))
            err = max(err, abs(vk_inv - u_inv))
        errors[n] = err
    ns = np.array(sorted(errors))
    es = np.array([errors[n] for n in ns])
    slope = float(np.polyfit(np.log(ns), np.log(es), 1)[0])
    return slope, errors
