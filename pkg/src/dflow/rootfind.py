"""Zero finding for the derivative table.

Three routes, matched to how the polynomial is held:

* ``all_roots`` -- Aberth-Ehrlich simultaneous iteration on coefficient form,
  for general complex polynomials of moderate degree;
* ``critical_points_real`` -- root-form solve of P'/P = 0 gap by gap for
  real-rooted input, which never expands coefficients and carries multiple
  roots symbolically (an m-fold root stays put with multiplicity m-1);
* ``tridiagonal_orthogonal_roots`` -- Sturm-sequence bisection on the Jacobi
  matrix of a three-term recurrence, used to generate orthogonal-polynomial
  test families (Chebyshev, Hermite, ...).

``derivative_flow`` strings k differentiation steps together with whichever
route the configuration picks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import RootFindError
from .polycore import EXPANSION_DEGREE_CAP, ExactPolynomial, FactoredPolynomial, Polynomial

# roots closer than this (times the root scale) are merged into one
# multiplicity-weighted root at the cluster centroid
CLUSTER_TOL = 1e-8

_MODES = ("general-complex", "real-interlacing", "exact-coefficient")


@dataclass(frozen=True)
class RootFindConfig:
    tolerance: float = 1e-12
    max_iterations: int = 200
    mode: str = "general-complex"

    def __post_init__(self):
        if not 0.0 < self.tolerance <= 1e-3:
            raise ValueError("tolerance must lie in (0, 1e-3]")
        if self.max_iterations < 10:
            raise ValueError("max_iterations must be >= 10")
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}")


def _sorted_roots(roots: Sequence[complex]) -> list[complex]:
    return sorted((complex(r) for r in roots), key=lambda z: (z.real, z.imag))


def cluster_roots(roots: Sequence[complex], tol: float | None = None) -> list[tuple[complex, int]]:
    """Merge near-coincident roots into (centroid, multiplicity) pairs.

    Single-linkage clustering with threshold tol * max(1, root scale); the
    default threshold is CLUSTER_TOL. Output sorted by (re, im).
    """
    rs = np.asarray(list(roots), dtype=complex)
    if rs.size == 0:
        return []
    scale = max(1.0, float(np.max(np.abs(rs))))
    thr = (CLUSTER_TOL if tol is None else tol) * scale
    order = np.lexsort((rs.imag, rs.real))
    rs = rs[order]
    parent = list(range(rs.size))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(rs.size):
        for j in range(i + 1, rs.size):
            if rs[j].real - rs[i].real > thr:
                break
            if abs(rs[j] - rs[i]) <= thr:
                pi, pj = find(i), find(j)
                if pi != pj:
                    parent[pj] = pi
    groups: dict[int, list[complex]] = {}
    for i in range(rs.size):
        groups.setdefault(find(i), []).append(complex(rs[i]))
    out = [(sum(g) / len(g), len(g)) for g in groups.values()]
    out.sort(key=lambda pair: (pair[0].real, pair[0].imag))
    return out


def expand_clusters(clusters: Sequence[tuple[complex, int]]) -> list[complex]:
    out: list[complex] = []
    for z, m in clusters:
        out.extend([complex(z)] * m)
    return _sorted_roots(out)


def all_roots(p: Polynomial, cfg: RootFindConfig) -> list[complex]:
    """All zeros of p, with multiplicity, by Aberth-Ehrlich + Newton polish.

    Initial points sit on the circle of radius 1 + max |c_j / c_n|.  Roots
    within the cluster tolerance are merged to their centroid and reported
    with multiplicity (repeated in the returned list).
    """
    n = p.degree
    if n < 1:
        raise ValueError("cannot root-find a constant")
    mono = np.asarray(p.mono, dtype=complex)
    if n == 1:
        return [complex(-mono[0])]
    if n == 2:
        b, c = mono[1], mono[0]
        disc = np.sqrt(complex(b * b - 4.0 * c))
        # stable quadratic: avoid cancellation in the small root
        q = -(b + disc) / 2.0 if abs(b + disc) >= abs(b - disc) else -(b - disc) / 2.0
        if q == 0:
            return [0j, 0j]
        return _sorted_roots([q, c / q])

    if not np.any(mono[:-1]):  # pure monomial x^n
        return [0j] * n

    # The Cauchy bound 1 + max|c_j/c_n| can overshoot by many orders of
    # magnitude on badly scaled coefficients; the Fujiwara bound is also a
    # certified inclusion radius, so start on the smaller of the two circles.
    cauchy = 1.0 + float(np.max(np.abs(mono[:-1])))
    with np.errstate(divide="ignore"):
        fuji = 2.0 * float(
            np.max(np.abs(mono[:-1]) ** (1.0 / np.arange(n, 0, -1)))
        )
    radius = min(cauchy, max(fuji, 1e-8))
    angles = 2.0 * np.pi * (np.arange(n) + 0.5) / n + 0.45
    z = radius * np.exp(1j * angles)
    dmono = mono[1:] * np.arange(1, n + 1)
    abs_mono = np.abs(mono)

    def horner(coeffs, x):
        acc = np.zeros_like(x)
        for c in coeffs[::-1]:
            acc = acc * x + c
        return acc

    tol = cfg.tolerance
    eps_floor = 8.0 * np.finfo(float).eps
    for _ in range(cfg.max_iterations):
        pv = horner(mono, z)
        dv = horner(dmono, z)
        dv = np.where(dv == 0, 1e-300, dv)
        w = pv / dv
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        s = inv.sum(axis=1)
        denom = 1.0 - w * s
        denom = np.where(np.abs(denom) < 1e-300, 1e-300, denom)
        step = w / denom
        z = z - step
        scale = np.maximum(1.0, np.abs(z))
        # stop a root when its correction is tiny or its residual has hit the
        # evaluation noise floor sum |c_j||z|^j (multiple-root clusters stall
        # there and cannot do better in double precision)
        bound = horner(abs_mono, np.abs(z).astype(complex)).real
        converged = (np.abs(step) <= tol * scale) | (np.abs(pv) <= eps_floor * bound)
        if converged.all():
            break
    else:
        raise RootFindError(
            f"Aberth iteration did not converge in {cfg.max_iterations} iterations",
            best=_sorted_roots(z),
            residual=float(np.max(np.abs(horner(mono, z)))),
        )

    # Newton polish (quadratic cleanup for simple roots; harmless for clusters)
    for _ in range(4):
        pv = horner(mono, z)
        dv = horner(dmono, z)
        mask = np.abs(dv) > 1e-300
        z = np.where(mask, z - pv / np.where(mask, dv, 1.0), z)

    return expand_clusters(cluster_roots(z))


# ---------------------------------------------------------------------------
# real-rooted route


def _grouped(values: Sequence[float], mults: Sequence[int] | None = None):
    """Group exactly-equal consecutive sorted values into (value, mult) arrays."""
    if mults is not None:
        return np.asarray(values, dtype=float), np.asarray(mults, dtype=np.int64)
    vals: list[float] = []
    ms: list[int] = []
    for v in values:
        if vals and v == vals[-1]:
            ms[-1] += 1
        else:
            vals.append(float(v))
            ms.append(1)
    return np.asarray(vals), np.asarray(ms, dtype=np.int64)


def _gap_zeros(a: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Zeros of sum_i m_i/(x - a_i) inside each gap of the sorted distinct a.

    The function is strictly decreasing from +inf to -inf on every gap, so a
    bracketed Newton/bisection hybrid cannot miss.  Vectorized over gaps.
    """
    d = a.size
    if d < 2:
        return np.empty(0)
    lo = a[:-1].copy()
    hi = a[1:].copy()
    mw = m.astype(float)
    # electrostatic balance point of the two nearest charges as the seed
    x = (mw[:-1] * hi + mw[1:] * lo) / (mw[:-1] + mw[1:])
    for _ in range(200):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            diff = x[:, None] - a[None, :]
            inv = mw[None, :] / diff
            s = inv.sum(axis=1)
            sp = (inv / diff).sum(axis=1)  # = sum m_i/(x-a_i)^2 = -S'(x)
            pos = s > 0
            lo = np.where(pos, x, lo)
            hi = np.where(pos, hi, x)
            x_new = x + s / sp  # Newton step: S' = -sp
        bad = ~((x_new > lo) & (x_new < hi)) | ~np.isfinite(x_new)
        x_new = np.where(bad, 0.5 * (lo + hi), x_new)
        done = np.abs(x_new - x) <= 1e-15 * np.maximum(1.0, np.abs(x_new))
        x = x_new
        if done.all():
            break
    return x


def critical_points_real(sorted_roots: Sequence[float]) -> list[float]:
    """Roots of P' for real-rooted P given by its sorted zeros.

    Multiple zeros are retained with multiplicity reduced by one; one simple
    zero of P' is found in each open gap between consecutive distinct zeros.
    """
    r = np.asarray(list(sorted_roots), dtype=float)
    if r.size < 1:
        raise ValueError("need at least one root")
    if np.any(np.diff(r) < 0):
        raise ValueError("input roots must be sorted ascending")
    a, m = _grouped(r)
    vals, mults = _critical_points_grouped(a, m)
    return expand_real(vals, mults)


def _critical_points_grouped(a: np.ndarray, m: np.ndarray):
    gaps = _gap_zeros(a, m)
    keep = m > 1
    vals = np.concatenate([a[keep], gaps])
    mults = np.concatenate([m[keep] - 1, np.ones(gaps.size, dtype=np.int64)])
    order = np.argsort(vals, kind="stable")
    return vals[order], mults[order]


def expand_real(vals: np.ndarray, mults: np.ndarray) -> list[float]:
    return list(np.repeat(vals, mults))


def derivative_flow(
    roots0: Sequence[complex],
    k: int,
    cfg: RootFindConfig,
    exact: ExactPolynomial | None = None,
) -> list[list[complex]]:
    """Root multisets of the k successive normalized derivatives.

    real-interlacing mode iterates the root-form critical-point solve (and
    re-polishes simple roots against the exact polynomial's derivatives when
    one is supplied).  The other modes differentiate coefficients -- exact
    integer form when given, float expansion (degree cap applies) otherwise --
    and call ``all_roots`` per step.
    """
    roots0 = list(roots0)
    n = len(roots0)
    if not 0 <= k < n:
        raise ValueError("need 0 <= k < number of roots")

    if cfg.mode == "real-interlacing":
        r = np.asarray(roots0, dtype=complex)
        if np.any(r.imag != 0):
            raise ValueError("real-interlacing mode requires real roots")
        a, m = _grouped(np.sort(r.real))
        out: list[list[complex]] = []
        for step in range(1, k + 1):
            a, m = _critical_points_grouped(a, m)
            if exact is not None:
                a = _polish_simple(a, m, exact.derivative(step))
            out.append([complex(x) for x in expand_real(a, m)])
        return out

    if cfg.mode == "exact-coefficient" and exact is None:
        raise ValueError("exact-coefficient mode needs the exact polynomial")

    out = []
    if exact is not None:
        q = exact
        for _ in range(k):
            q = q.derivative()
            out.append(all_roots(q.to_polynomial(), cfg))
        return out

    if n > EXPANSION_DEGREE_CAP:
        raise ValueError(
            f"degree {n} exceeds the float-expansion cap; pass the exact form "
            "or use real-interlacing mode"
        )
    poly = FactoredPolynomial(roots0).expand()
    coeffs = np.asarray(poly.coeffs, dtype=complex)
    for _ in range(k):
        coeffs = coeffs[1:] * np.arange(1, coeffs.size)
        out.append(all_roots(Polynomial(list(coeffs)), cfg))
    return out


def _polish_simple(vals: np.ndarray, mults: np.ndarray, dq: ExactPolynomial) -> np.ndarray:
    """One Newton sweep of the simple roots against the exact derivative."""
    c = np.array([float(x) for x in dq.coeffs])
    dc = c[1:] * np.arange(1, c.size)
    x = vals.copy()
    simple = mults == 1
    for _ in range(2):
        pv = np.polyval(c[::-1], x[simple])
        dv = np.polyval(dc[::-1], x[simple])
        ok = dv != 0
        upd = x[simple]
        upd[ok] -= pv[ok] / dv[ok]
        x[simple] = upd
    return x


# ---------------------------------------------------------------------------
# Jacobi-matrix route for orthogonal-polynomial zeros


def tridiagonal_orthogonal_roots(
    recurrence_a: Sequence[float], recurrence_b: Sequence[float], n: int
) -> list[float]:
    """Zeros of the degree-n monic orthogonal polynomial of the recurrence
    p_{k+1} = (x - a_k) p_k - b_k p_{k-1}  (b_0 is never used).

    They are the eigenvalues of the n x n symmetric tridiagonal Jacobi matrix
    with diagonal a_k and off-diagonal sqrt(b_k); computed by bisection on the
    Sturm-sequence sign count to absolute tolerance 1e-13 * scale.
    """
    if len(recurrence_a) < n or len(recurrence_b) < n:
        raise ValueError("recurrence lists must have length >= n")
    diag = np.asarray(recurrence_a[:n], dtype=float)
    bsq = np.asarray(recurrence_b[:n], dtype=float)
    if n == 0:
        return []
    if np.any(bsq[1:n] <= 0):
        raise ValueError("off-diagonal recurrence entries must be positive")
    off2 = bsq[1:n]  # squared off-diagonals c_i^2 = b_i

    offr = np.sqrt(off2)
    rad = np.zeros(n)
    rad[:-1] += offr
    rad[1:] += offr
    lo_all = float(np.min(diag - rad))
    hi_all = float(np.max(diag + rad))
    scale = max(1.0, abs(lo_all), abs(hi_all))

    pivmin = 1e-300

    def count_below(x: np.ndarray) -> np.ndarray:
        """Number of eigenvalues strictly below each entry of x."""
        d = diag[0] - x
        d = np.where(np.abs(d) < pivmin, -pivmin, d)  # zero pivot counts as negative
        cnt = (d < 0).astype(np.int64)
        for i in range(1, n):
            d = (diag[i] - x) - off2[i - 1] / d
            d = np.where(np.abs(d) < pivmin, -pivmin, d)
            cnt += d < 0
        return cnt

    margin = 1e-12 * scale
    lo = np.full(n, lo_all - margin)
    hi = np.full(n, hi_all + margin)
    idx = np.arange(1, n + 1)
    while np.max(hi - lo) > 1e-13 * scale:
        mid = 0.5 * (lo + hi)
        c = count_below(mid)
        takes_hi = c >= idx  # at least i eigenvalues below mid -> i-th is left of mid
        hi = np.where(takes_hi, mid, hi)
        lo = np.where(takes_hi, lo, mid)
    return list(0.5 * (lo + hi))


def chebyshev_recurrence(n: int) -> tuple[list[float], list[float]]:
    """Monic Chebyshev-T recurrence coefficients (a_k, b_k) up to order n."""
    b = [0.0, 0.5] + [0.25] * max(0, n - 2)
    return [0.0] * n, b[:n]


def hermite_recurrence(n: int) -> tuple[list[float], list[float]]:
    """Monic (physicists' scaling) Hermite recurrence: a_k = 0, b_k = k/2."""
    return [0.0] * n, [k / 2.0 for k in range(n)]
