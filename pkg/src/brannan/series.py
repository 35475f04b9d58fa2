"""Maclaurin coefficients of (1 + x z)**alpha / (1 - z)**beta on the unit circle.

All public functions take the odd coefficient index ``m`` (``m = 2n - 1``)
directly; nothing in this module ever sees ``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .errors import DomainError

# Powers of exp(i*theta) are renormalised to unit modulus this often.
RENORM_EVERY = 64


@dataclass(frozen=True)
class SeriesQuery:
    alpha: float
    m: int
    theta: float = 0.0
    beta: float = 1.0

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise DomainError(f"alpha must be positive and finite, got {self.alpha!r}")
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise DomainError(f"beta must be positive and finite, got {self.beta!r}")
        if int(self.m) != self.m or self.m < 1 or self.m % 2 == 0:
            raise DomainError(f"m must be a positive odd integer, got {self.m!r}")
        if not (-math.pi <= self.theta <= math.pi):
            raise DomainError(f"theta must lie in [-pi, pi], got {self.theta!r}")


def binom_coeff(alpha: float, k: int) -> float:
    """Coefficient of x**k in (1 + x)**alpha.

    Built by the recurrence c_0 = 1, c_k = c_{k-1} (alpha - k + 1) / k, which
    equals (-alpha)_k (-1)**k / k!.
    """
    if k < 0:
        raise DomainError("k must be nonnegative")
    c = 1.0
    for j in range(1, k + 1):
        c = c * (alpha - j + 1) / j
    return c


def pochhammer(beta: float, j: int) -> float:
    """Rising factorial beta (beta + 1) ... (beta + j - 1); empty product is 1."""
    if j < 0:
        raise DomainError("j must be nonnegative")
    p = 1.0
    for i in range(j):
        p *= beta + i
    return p


@lru_cache(maxsize=512)
def _weighted_coeffs(alpha: float, beta: float, m: int) -> tuple[float, ...]:
    # a_k = binom(alpha, k) * (beta)_{m-k} / (m-k)!, with the ratio built by
    # its own recurrence so large m never overflows the rising factorial.
    c = [1.0] * (m + 1)
    for k in range(1, m + 1):
        c[k] = c[k - 1] * (alpha - k + 1) / k
    if beta == 1.0:
        return tuple(c)
    r = [1.0] * (m + 1)
    for j in range(1, m + 1):
        r[j] = r[j - 1] * (beta + j - 1) / j
    return tuple(c[k] * r[m - k] for k in range(m + 1))


def unit_powers(theta: float, m: int) -> tuple[list[float], list[float]]:
    """Real and imaginary parts of exp(i k theta), k = 0..m, by repeated multiplication."""
    cr, ci = math.cos(theta), math.sin(theta)
    re = [1.0] * (m + 1)
    im = [0.0] * (m + 1)
    pr, pi_ = 1.0, 0.0
    for k in range(1, m + 1):
        pr, pi_ = pr * cr - pi_ * ci, pr * ci + pi_ * cr
        if k % RENORM_EVERY == 0:
            mod = math.hypot(pr, pi_)
            pr, pi_ = pr / mod, pi_ / mod
        re[k] = pr
        im[k] = pi_
    return re, im


def _sum_at_one(q: SeriesQuery) -> float:
    return math.fsum(_weighted_coeffs(q.alpha, q.beta, q.m))


def partial_sum(q: SeriesQuery) -> complex:
    """A_m(alpha, beta, exp(i theta)) summed in increasing k with exact rounding."""
    a = _weighted_coeffs(q.alpha, q.beta, q.m)
    if q.theta == 0.0:
        return complex(_sum_at_one(q), 0.0)
    re, im = unit_powers(q.theta, q.m)
    return complex(math.fsum(ak * r for ak, r in zip(a, re)),
                   math.fsum(ak * s for ak, s in zip(a, im)))


def partial_sum_horner(q: SeriesQuery) -> complex:
    """Same sum as :func:`partial_sum`, by Horner's rule at exp(i theta)."""
    a = _weighted_coeffs(q.alpha, q.beta, q.m)
    x = complex(math.cos(q.theta), math.sin(q.theta))
    h = complex(a[-1], 0.0)
    for ak in reversed(a[:-1]):
        h = h * x + ak
    return h


def value_at_one(q: SeriesQuery) -> float:
    """A_m(alpha, beta, 1), computed in real arithmetic only."""
    return _sum_at_one(q)


def brannan_margin(q: SeriesQuery) -> float:
    """A_m(alpha, beta, 1) - |A_m(alpha, beta, exp(i theta))|; >= 0 when the bound holds."""
    return _sum_at_one(q) - abs(partial_sum(q))


def term_magnitude(q: SeriesQuery) -> float:
    """Sum of |a_k|, the scale used in round-off estimates."""
    return math.fsum(abs(a) for a in _weighted_coeffs(q.alpha, q.beta, q.m))
