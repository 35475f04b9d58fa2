"""Integral representation of A_{2n-1}(alpha, exp(i theta)) for beta = 1, 0 < alpha < 1.

    Phi(theta) = pi / (alpha sin(pi alpha)) * A_m(alpha, exp(i theta))
               = int_0^1 F(t) [1/alpha + B(t, theta) + i C(t, theta)] dt,

with m = 2n - 1, F' = -t**(-1-alpha) (1-t)**(alpha-1), F(1) = 0, and
B + iC the closed form of sum_{k=1}^{m} (-t)**(k-1) exp(i k theta).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable

import numpy as np

from . import series
from .errors import DomainError, SingularPoint
from .quadrature import (
    QuadratureResult,
    QuadratureSpec,
    de_levels,
    de_nodes,
    integrate,
    integrate2d,
    substitution_power,
)

# pi = _PI_HI + _PI_LO to about 32 digits; used so that theta - pi keeps
# its relative accuracy next to theta = pi.
_PI_HI = math.pi
_PI_LO = 1.2246467991473532e-16

# Below this value of 1 + t^2 + 2 t cos(theta) the displayed quotient loses
# digits to cancellation and the geometric-sum form takes over.
_DENOM_SWITCH = 0.25

# F is split at this t: quadrature above, a convergent series below.
_F_SPLIT = 0.25
_F_SPEC = QuadratureSpec(abs_tol=1e-300, rel_tol=2e-15, max_levels=14)


@dataclass(frozen=True)
class KernelPoint:
    t: float
    theta: float
    n: int

    def __post_init__(self):
        if not 0.0 <= self.t <= 1.0:
            raise DomainError(f"t must lie in [0, 1], got {self.t!r}")
        if not -math.pi <= self.theta <= math.pi:
            raise DomainError(f"theta must lie in [-pi, pi], got {self.theta!r}")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")


@dataclass(frozen=True)
class PhiValue:
    value: complex
    error_estimate: float
    method: str


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")


def _n_from_m(m: int) -> int:
    if int(m) != m or m < 1 or m % 2 == 0:
        raise DomainError(f"m must be a positive odd integer, got {m!r}")
    return (int(m) + 1) // 2


def reflection_constant(alpha: float) -> float:
    """-Gamma(alpha) Gamma(-alpha) = pi / (alpha sin(pi alpha))."""
    _check_alpha(alpha)
    return math.pi / (alpha * math.sin(math.pi * alpha))


# ---------------------------------------------------------------- weight F


def _log_t(t, tc):
    with np.errstate(divide="ignore"):
        return np.where(t <= 0.5, np.log(t), np.log1p(-tc))


def _F_upper(t, tc, alpha: float, spec: QuadratureSpec):
    # w = (1 - s)**alpha turns F(t) into (1/alpha) int_0^{(1-t)^alpha} (1 - w^(1/alpha))^(-1-alpha) dw;
    # rescaled to w = W y with W = (1-t)^alpha, the integrand is bounded for t >= _F_SPLIT.
    log_W = alpha * np.log(tc)
    W = np.exp(log_W)

    def evaluate(nodes):
        log_w = log_W[:, None] + _log_t(nodes.t, nodes.tc)[None, :]
        gap = -np.expm1(log_w / alpha)
        return gap ** (-1.0 - alpha)

    value, err, _ = de_levels(evaluate, spec)
    return W * value / alpha, W * err / alpha


def _F_lower_series(t, alpha: float):
    # int_t^c s^(-1-alpha) (1-s)^(alpha-1) ds with (1-s)^(alpha-1) = sum_j d_j s^j,
    # d_j = (1-alpha)_j / j!, integrated term by term; ratio c = _F_SPLIT.
    c = _F_SPLIT
    with np.errstate(over="ignore"):
        total = (t ** -alpha - c ** -alpha) / alpha
    d_prev = 1.0
    for j in range(1, 400):
        term = d_prev / j * (c ** (j - alpha) - t ** (j - alpha))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
        d_prev *= (j - alpha) / j
    return total


@lru_cache(maxsize=64)
def _F_at_split(alpha: float, spec: QuadratureSpec) -> tuple[float, float]:
    v, e = _F_upper(np.array([_F_SPLIT]), np.array([1.0 - _F_SPLIT]), alpha, spec)
    return float(v[0]), float(e[0])


def weight_values(t, tc, alpha: float, spec: QuadratureSpec = _F_SPEC):
    """Vectorised F(t) and its error estimate; ``tc`` is 1 - t to full accuracy."""
    t = np.asarray(t, dtype=float)
    tc = np.asarray(tc, dtype=float)
    shape = np.broadcast(t, tc).shape
    t = np.broadcast_to(t, shape).ravel()
    tc = np.broadcast_to(tc, shape).ravel()
    F = np.zeros(t.shape)
    err = np.zeros(t.shape)
    upper = (t >= _F_SPLIT) & (tc > 0)
    if upper.any():
        F[upper], err[upper] = _F_upper(t[upper], tc[upper], alpha, spec)
    lower = t < _F_SPLIT
    if lower.any():
        f_split, e_split = _F_at_split(alpha, spec)
        F[lower] = f_split + _F_lower_series(t[lower], alpha)
        err[lower] = e_split + 4 * np.finfo(float).eps * F[lower]
    return F.reshape(shape), err.reshape(shape)


def weight_F(t: float, alpha: float, spec: QuadratureSpec | None = None) -> float:
    """F(t) = int_t^1 s^(-1-alpha) (1-s)^(alpha-1) ds, so F(1) = 0 and F decreases."""
    _check_alpha(alpha)
    if not 0.0 < t <= 1.0:
        raise DomainError(f"t must lie in (0, 1], got {t!r}")
    if t == 1.0:
        return 0.0
    inner = _F_SPEC if spec is None else replace(spec, left_exponent=0.0, right_exponent=0.0,
                                                 rule="double_exponential")
    value, _ = weight_values(np.array([t]), np.array([1.0 - t]), alpha, inner)
    return float(value[0])


class _NodeCache:
    """Thread-safe memo of F at the outer rule's nodes; fills are idempotent."""

    def __init__(self):
        self._lock = threading.Lock()
        self._table: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}

    def get(self, alpha: float, level: int, p: float, q: float):
        key = (alpha, level, p, q)
        with self._lock:
            hit = self._table.get(key)
        if hit is not None:
            return hit
        nodes = de_nodes(level, p, q)
        F, err = weight_values(nodes.t, nodes.tc, alpha)
        F.setflags(write=False)
        err.setflags(write=False)
        with self._lock:
            return self._table.setdefault(key, (F, err))

    def clear(self) -> None:
        with self._lock:
            self._table.clear()


F_CACHE = _NodeCache()


def integrate_against_F(alpha: float, g: Callable, spec: QuadratureSpec | None = None):
    """int_0^1 F(t) g(t, 1-t) dt for an array-valued ``g``; node axis last.

    Returns ``(value, error_estimate, levels_used)``; the estimate is the
    level difference plus the propagated error of F.
    """
    _check_alpha(alpha)
    spec = (spec or QuadratureSpec()).with_exponents(-alpha, alpha)
    if spec.rule == "double_exponential":
        p = substitution_power(spec.left_exponent)
        q = substitution_power(spec.right_exponent)
        memo: dict[int, np.ndarray] = {}

        def g_at(nodes):
            if nodes.level not in memo:
                memo[nodes.level] = np.asarray(g(nodes.t, nodes.tc))
            return memo[nodes.level]

        def evaluate(nodes):
            F, _ = F_CACHE.get(alpha, nodes.level, p, q)
            return F * g_at(nodes)

        def extra(nodes):
            _, Ferr = F_CACHE.get(alpha, nodes.level, p, q)
            return Ferr * np.abs(g_at(nodes))

        return de_levels(evaluate, spec, extra_error=extra)

    def parts(t, tc):
        F, _ = weight_values(t, tc, alpha)
        return F * np.asarray(g(t, tc))

    probe = np.asarray(g(np.array([0.5]), np.array([0.5])))
    lead = probe.shape[:-1]
    values = np.zeros(lead, dtype=probe.dtype)
    errs = np.zeros(lead)
    levels = 0
    for idx in np.ndindex(*lead) if lead else [()]:
        for comp in ("real", "imag") if np.iscomplexobj(probe) else ("real",):
            res = integrate(lambda t, tc: getattr(parts(t, tc)[idx], comp), spec, complement=True)
            values[idx] += res.value if comp == "real" else 1j * res.value
            errs[idx] += res.error_estimate
            levels = max(levels, res.levels_used)
    return (values if lead else values[()]), (errs if lead else errs[()]), levels


# ---------------------------------------------------------------- kernels


def _expm1_complex(a, b):
    with np.errstate(invalid="ignore", over="ignore"):
        re = np.expm1(a) * np.cos(b) - 2.0 * np.sin(0.5 * b) ** 2
        im = np.exp(a) * np.sin(b)
    return re + 1j * im


def _geometric_form(t, tc, theta: float, m: int):
    # sum_{k=1}^m (-t)^(k-1) e^{ik theta} = e^{i theta} (1 - z^m) / (1 - z), z = t e^{i phi},
    # phi = theta -+ pi; both differences evaluated with expm1.
    if abs(theta) == math.pi:
        phi = 0.0
        lead = -1.0 + 0.0j
    else:
        phi = (theta - _PI_HI) - _PI_LO if theta >= 0 else (theta + _PI_HI) + _PI_LO
        lead = complex(math.cos(theta), math.sin(theta))
    log_t = _log_t(t, tc)
    log_z = log_t + 1j * phi
    tiny = np.abs(log_z) < 1e-150
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        num = _expm1_complex(m * log_t, m * phi)
        den = _expm1_complex(log_t, np.full(np.shape(log_t), phi))
        # next to z = 1 the quotient is m (1 + (m-1) log z / 2) to double precision
        G = np.where(tiny, m * (1.0 + 0.5 * (m - 1) * log_z), num / np.where(tiny, 1.0, den))
    return lead * G


def kernel_values(t, tc, theta: float, n: int) -> np.ndarray:
    """B + iC at arrays of t (``tc`` = 1 - t), for fixed theta and n.

    The displayed quotient is used wherever its denominator is at least
    1/4; closer to (t, theta) = (1, +-pi) the geometric-sum form is used,
    and at theta = +-pi that form gives the finite limit
    B(t, pi) = -(1 - t^m) / (1 - t), C(t, pi) = 0.
    """
    m = 2 * n - 1
    t = np.asarray(t, dtype=float)
    tc = np.asarray(tc, dtype=float)
    c = math.cos(theta)
    s = math.sin(theta)
    one_plus_cos = 2.0 * math.cos(0.5 * theta) ** 2
    denom = tc * tc + 2.0 * t * one_plus_cos
    with np.errstate(divide="ignore", invalid="ignore", under="ignore"):
        tm = t ** m
        tm1 = tm * t
        B = (c + t + tm * math.cos(2 * n * theta) + tm1 * math.cos(m * theta)) / denom
        C = (s + tm * math.sin(2 * n * theta) + tm1 * math.sin(m * theta)) / denom
    S = B + 1j * C
    close = denom < _DENOM_SWITCH
    if abs(theta) == math.pi:
        close = np.ones(np.shape(S), dtype=bool)
    if np.any(close):
        S = np.where(close, _geometric_form(t, tc, theta, m), S)
    return S


def kernel_BC(p: KernelPoint, stabilized: bool = False) -> tuple[float, float]:
    """(B(t, theta), C(t, theta)) for sum index up to 2n - 1.

    At (t, theta) = (1, +-pi) the closed form is 0/0; that raises
    SingularPoint unless ``stabilized`` asks for the limit value.
    """
    if p.t == 1.0 and abs(p.theta) == math.pi and not stabilized:
        raise SingularPoint("B and C are 0/0 at t = 1, theta = +-pi")
    S = kernel_values(np.array([p.t]), np.array([1.0 - p.t]), p.theta, p.n)[0]
    return float(S.real), float(S.imag)


def kernel_direct(t: float, theta: float, n: int) -> complex:
    """sum_{k=1}^{2n-1} (-t)^(k-1) exp(i k theta) term by term; reference only."""
    return sum((-t) ** (k - 1) * complex(math.cos(k * theta), math.sin(k * theta))
               for k in range(1, 2 * n))


# ---------------------------------------------------------------- Phi


def phi_series(alpha: float, m: int, theta: float) -> PhiValue:
    _check_alpha(alpha)
    q = series.SeriesQuery(alpha=alpha, m=m, theta=theta)
    const = reflection_constant(alpha)
    value = const * series.partial_sum(q)
    err = const * m * np.finfo(float).eps * series.term_magnitude(q)
    return PhiValue(complex(value), float(err), "series")


def _phi_integrand(alpha: float, n: int, theta: float):
    def g(t, tc):
        return 1.0 / alpha + kernel_values(t, tc, theta, n)
    return g


def phi_quadrature(alpha: float, m: int, theta: float, spec: QuadratureSpec | None = None,
                   stabilized: bool = True) -> PhiValue:
    """Phi(theta) from the integral against F.

    theta = +-pi needs the stabilised kernel; with ``stabilized=False``
    it raises SingularPoint.
    """
    _check_alpha(alpha)
    n = _n_from_m(m)
    if not -math.pi <= theta <= math.pi:
        raise DomainError(f"theta must lie in [-pi, pi], got {theta!r}")
    if abs(theta) == math.pi and not stabilized:
        raise SingularPoint("theta = +-pi requires the stabilised kernel")
    value, err, _ = integrate_against_F(alpha, _phi_integrand(alpha, n, theta), spec)
    return PhiValue(complex(value), float(err), "quadrature")


def phi_sq_diff(alpha: float, m: int, theta: float, spec: QuadratureSpec | None = None,
                method: str = "via_phi") -> QuadratureResult:
    """Phi(0)**2 - |Phi(theta)|**2 with an error estimate.

    ``via_phi`` squares two quadrature values of Phi; ``double_integral``
    integrates the expanded product over the unit square.
    """
    _check_alpha(alpha)
    n = _n_from_m(m)
    if method == "via_phi":
        p0 = phi_quadrature(alpha, m, 0.0, spec)
        if theta == 0.0:
            pt = p0
        else:
            pt = phi_quadrature(alpha, m, theta, spec)
        a0, at = abs(p0.value), abs(pt.value)
        value = a0 * a0 - at * at
        err = (2 * a0 * p0.error_estimate + 2 * at * pt.error_estimate
               + p0.error_estimate ** 2 + pt.error_estimate ** 2)
        return QuadratureResult(float(value), float(err), 0)
    if method != "double_integral":
        raise DomainError(f"unknown method {method!r}")
    spec = (spec or QuadratureSpec()).with_exponents(-alpha, alpha)
    memo: dict[bytes, np.ndarray] = {}

    def F_of(t, tc):
        key = t.tobytes()
        if key not in memo:
            if len(memo) > 8:
                memo.clear()
            memo[key] = weight_values(t, tc, alpha)[0]
        return memo[key]

    inv = 1.0 / alpha

    def g(t, tc, v, vc):
        St0 = kernel_values(t, tc, 0.0, n).real
        Sv0 = kernel_values(v, vc, 0.0, n).real
        St = kernel_values(t, tc, theta, n)
        Sv = kernel_values(v, vc, theta, n)
        bracket = ((inv + St0) * (inv + Sv0) - (inv + St.real) * (inv + Sv.real)
                   - St.imag * Sv.imag)
        return F_of(t, tc) * F_of(v, vc) * bracket

    return integrate2d(g, spec, complement=True)


__all__ = [
    "F_CACHE",
    "KernelPoint",
    "PhiValue",
    "integrate_against_F",
    "kernel_BC",
    "kernel_direct",
    "kernel_values",
    "phi_quadrature",
    "phi_series",
    "phi_sq_diff",
    "reflection_constant",
    "weight_F",
    "weight_values",
]
