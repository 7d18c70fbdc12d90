"""Polynomial representations and differentiation.

Three representations cover the needs of the zero-flow pipeline:

* ``Polynomial`` -- double-precision coefficients, monic-normalized at
  construction with the leading scalar stored separately;
* ``FactoredPolynomial`` -- a root multiset plus leading scalar, the form in
  which high-degree polynomials must stay (coefficient expansion is capped);
* ``ExactPolynomial`` -- arbitrary-precision integer (or rational)
  coefficients for exact pipelines such as iterated derivatives of
  (x^2-1)^n, converted to floating point only at the final root solve.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import PoleError

# Coefficient expansion from a root multiset is unreliable past this degree:
# binomial-scale coefficient growth (~2^n for (x^2-1)^n) eats double precision.
EXPANSION_DEGREE_CAP = 60


def _trim(coeffs: Sequence[complex]) -> tuple[complex, ...]:
    """Drop exactly-zero leading coefficients (highest powers)."""
    cs = list(coeffs)
    while len(cs) > 1 and cs[-1] == 0:
        cs.pop()
    return tuple(complex(c) for c in cs)


@dataclass(frozen=True)
class Polynomial:
    """Dense polynomial with complex coefficients, ascending by power.

    The stored coefficient tuple is monic; ``leading`` carries the original
    scale, so ``coeffs`` round-trips the input. Zero-counting quantities are
    normalization independent, which is why the split is harmless.
    """

    mono: tuple[complex, ...]
    leading: complex = 1.0 + 0j

    def __init__(self, coeffs: Sequence[complex], leading: complex | None = None):
        cs = _trim(coeffs)
        scale = 1.0 + 0j if leading is None else complex(leading)
        top = cs[-1] * scale
        if top == 0:  # identically zero constant
            object.__setattr__(self, "mono", (0j,))
            object.__setattr__(self, "leading", 0j)
            return
        if cs[-1] == 1.0:  # already a monic tuple: keep it bit-exact
            mono = cs
        else:
            mono = tuple(c / cs[-1] for c in cs[:-1]) + (1.0 + 0j,)
        object.__setattr__(self, "mono", mono)
        object.__setattr__(self, "leading", top)

    @property
    def degree(self) -> int:
        return len(self.mono) - 1

    @property
    def coeffs(self) -> tuple[complex, ...]:
        return tuple(self.leading * c for c in self.mono)

    @property
    def is_monic(self) -> bool:
        return abs(self.leading - 1.0) <= 1e-12

    def __call__(self, z: complex) -> complex:
        return evaluate(self, z)

    def to_json(self) -> str:
        return json.dumps([[c.real, c.imag] for c in self.coeffs])

    @classmethod
    def from_json(cls, text: str) -> "Polynomial":
        pairs = json.loads(text)
        return cls([complex(re, im) for re, im in pairs])

    @classmethod
    def from_roots(cls, roots: Iterable[complex], leading: complex = 1.0) -> "Polynomial":
        return FactoredPolynomial(tuple(roots), leading).expand()


@dataclass(frozen=True)
class FactoredPolynomial:
    """Root-multiset form: leading * prod (x - r)."""

    roots: tuple[complex, ...]
    leading: complex = 1.0 + 0j

    def __init__(self, roots: Iterable[complex], leading: complex = 1.0):
        object.__setattr__(self, "roots", tuple(complex(r) for r in roots))
        object.__setattr__(self, "leading", complex(leading))

    @property
    def degree(self) -> int:
        return len(self.roots)

    def __call__(self, z: complex) -> complex:
        val = self.leading
        for r in self.roots:
            val *= z - r
        return val

    def expand(self) -> Polynomial:
        if self.degree > EXPANSION_DEGREE_CAP:
            raise ValueError(
                f"coefficient expansion capped at degree {EXPANSION_DEGREE_CAP}; "
                f"got {self.degree} (stay in root or exact-integer form)"
            )
        coeffs = np.array([1.0 + 0j])
        for r in self.roots:
            coeffs = np.concatenate(([0j], coeffs)) - r * np.concatenate((coeffs, [0j]))
        return Polynomial(list(coeffs * self.leading))


def evaluate(p: Polynomial, z: complex) -> complex:
    """Horner-scheme value of p at z. Accepts scalars or numpy arrays."""
    if np.isscalar(z) or isinstance(z, complex):
        acc = 0j
        for c in reversed(p.mono):
            acc = acc * z + c
        return p.leading * acc
    zz = np.asarray(z, dtype=complex)
    acc = np.zeros_like(zz)
    for c in reversed(p.mono):
        acc = acc * zz + c
    return p.leading * acc


def differentiate(p: Polynomial) -> Polynomial:
    """First derivative: c_j <- (j+1) c_{j+1}. Degree drops by one."""
    if p.degree == 0:
        raise ValueError("cannot differentiate constant to a nonconstant")
    n = p.degree
    dmono = tuple((j + 1) * p.mono[j + 1] / n for j in range(n))
    return Polynomial(dmono, leading=p.leading * n)


def normalized_derivative_table(p: Polynomial, k: int) -> Polynomial:
    """((n-k)!/n!) * d^k p / dx^k for monic p of degree n; monic of degree n-k.

    The factorial prefactor exactly cancels the leading-coefficient growth, so
    the result is constructed monic with no rounding in the normalization.
    """
    n = p.degree
    if k >= n:
        raise ValueError("derivative order exhausts degree")
    if k < 0:
        raise ValueError("derivative order must be nonnegative")
    mono = p.mono
    out = [mono[j + k] * (math.factorial(j + k) // math.factorial(j)) * _falling_inv(n, k)
           for j in range(n - k + 1)]
    out[-1] = 1.0 + 0j  # exact by construction of the normalization
    return Polynomial(tuple(out), leading=1.0)


def _falling_inv(n: int, k: int) -> float:
    """(n-k)!/n! as a float: inverse of the falling factorial n(n-1)...(n-k+1)."""
    return 1.0 / math.prod(range(n - k + 1, n + 1))


def log_derivative(roots: Sequence[complex], z: complex) -> complex:
    """P'(z)/P(z) = sum 1/(z - r_i) straight from the root multiset.

    Callers building the normalized transform of the zero-counting measure
    divide by n themselves.
    """
    rr = np.asarray(roots, dtype=complex)
    diff = z - rr
    if diff.size and np.min(np.abs(diff)) == 0.0:
        raise PoleError(f"log-derivative evaluated at a root: z = {z}")
    return complex(np.sum(1.0 / diff))


# ---------------------------------------------------------------------------
# exact integer / rational polynomials


@dataclass(frozen=True)
class ExactPolynomial:
    """Polynomial with int or Fraction coefficients; all arithmetic exact."""

    coeffs: tuple = field(default=(0,))

    def __init__(self, coeffs: Sequence):
        cs = [c if isinstance(c, (int, Fraction)) else Fraction(c) for c in coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __add__(self, other: "ExactPolynomial") -> "ExactPolynomial":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return ExactPolynomial(out)

    def __mul__(self, other) -> "ExactPolynomial":
        if isinstance(other, (int, Fraction)):
            return ExactPolynomial([c * other for c in self.coeffs])
        out = [0] * (self.degree + other.degree + 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return ExactPolynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "ExactPolynomial":
        if n < 0:
            raise ValueError("negative power")
        result = ExactPolynomial([1])
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def derivative(self, order: int = 1) -> "ExactPolynomial":
        cs = self.coeffs
        for _ in range(order):
            cs = tuple(j * cs[j] for j in range(1, len(cs))) or (0,)
        return ExactPolynomial(cs)

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def to_polynomial(self) -> Polynomial:
        return Polynomial([complex(float(c), 0.0) for c in self.coeffs])

    def to_json(self) -> str:
        return json.dumps([str(c) for c in self.coeffs])

    @classmethod
    def from_json(cls, text: str) -> "ExactPolynomial":
        items = json.loads(text)
        out = []
        for s in items:
            out.append(Fraction(s) if "/" in s else int(s))
        return cls(out)


def rodrigues(base: ExactPolynomial, n: int, k: int) -> ExactPolynomial:
    """Exact k-th derivative of base^n, no floating-point rounding anywhere."""
    if n < 1:
        raise ValueError("power n must be >= 1")
    if not 0 <= k <= n * base.degree - 1:
        raise ValueError(f"derivative order k={k} outside [0, {n * base.degree - 1}]")
    return (base ** n).derivative(k)
