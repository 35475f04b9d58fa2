"""Signed margins for the lemma, theorem and conjecture inequalities.

Every check returns a :class:`MarginResult` whose ``margin`` is
``lhs - rhs`` oriented so that a nonnegative value means the inequality
holds at that point.  Parameters below a result's stated threshold are
evaluated anyway and marked with the ``below-threshold`` flag.

Angles enter only through cos(theta), so each check accepts theta of either
sign and validates |theta| against its range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import series
from .errors import DomainError, MonotonicityViolated
from .integral_rep import integrate_against_F, kernel_values, phi_quadrature, phi_sq_diff
from .quadrature import QuadratureResult, QuadratureSpec, integrate

BELOW_THRESHOLD = "below-threshold"
_ANGLE_SLACK = 1e-12

LEMMA5_VARIANTS = {
    "stated_27_50": (27 / 50, 50 / 27),
    "proof_12_25": (12 / 25, 25 / 12),
}


@dataclass(frozen=True)
class MarginResult:
    name: str
    inputs: dict
    lhs: float
    rhs: float
    margin: float
    error_estimate: float = 0.0
    flags: tuple[str, ...] = ()
    sub: tuple["MarginResult", ...] = field(default_factory=tuple)

    @property
    def holds(self) -> bool:
        return self.margin >= 0


@dataclass(frozen=True)
class RootResult:
    equation: str
    root: float
    residual: float


def _margin(name, inputs, lhs, rhs, err=0.0, flags=(), sub=()) -> MarginResult:
    return MarginResult(name, dict(inputs), float(lhs), float(rhs), float(lhs - rhs),
                        float(err), tuple(flags), tuple(sub))


def _check_angle(theta: float, lo: float, hi: float, what: str) -> None:
    a = abs(theta)
    if not (lo - _ANGLE_SLACK <= a <= hi + _ANGLE_SLACK):
        raise DomainError(f"{what} needs |theta| in [{lo:.6g}, {hi:.6g}], got {theta!r}")


def _check_n(n: int) -> int:
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    return int(n)


# ---------------------------------------------------------------- helpers


def chebyshev_check(f: Callable, g: Callable, same_monotony: bool,
                    spec: QuadratureSpec | None = None) -> MarginResult:
    """Margin of Chebyshev's integral inequality for monotone f and g on [0, 1].

    Same monotony: int fg - int f int g >= 0.  Opposite monotony: the
    reverse difference.  Monotony is verified on a 64-point grid.
    """
    grid = (np.arange(64) + 0.5) / 64
    directions = []
    for name, fn in (("f", f), ("g", g)):
        d = np.diff(np.broadcast_to(np.asarray(fn(grid), dtype=float), grid.shape))
        if np.all(d == 0):
            directions.append(0)
        elif np.all(d >= 0):
            directions.append(1)
        elif np.all(d <= 0):
            directions.append(-1)
        else:
            raise MonotonicityViolated(f"{name} is not monotone on [0, 1]")
    product = directions[0] * directions[1]
    if (same_monotony and product < 0) or (not same_monotony and product > 0):
        raise MonotonicityViolated("declared monotony does not match the samples")
    spec = spec or QuadratureSpec()
    i_fg = integrate(lambda t: f(t) * g(t), spec)
    i_f = integrate(f, spec)
    i_g = integrate(g, spec)
    prod = i_f.value * i_g.value
    err = i_fg.error_estimate + abs(i_g.value) * i_f.error_estimate + abs(i_f.value) * i_g.error_estimate
    if same_monotony:
        return _margin("chebyshev_same", {}, i_fg.value, prod, err)
    return _margin("chebyshev_opposite", {}, prod, i_fg.value, err)


def solve_tn(constant: float, n: int, max_iter: int = 200) -> RootResult:
    """Root in (0, 1) of constant - t - 2 t**(2n) = 0 by bisection.

    The left side falls strictly from ``constant`` > 0 to ``constant - 3`` < 0,
    so the root is unique.
    """
    if not 0.0 < constant < 1.0:
        raise DomainError(f"constant must lie in (0, 1), got {constant!r}")
    n = _check_n(n)

    def h(t):
        return constant - t - 2.0 * t ** (2 * n)

    lo, hi = 0.0, 1.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if h(mid) > 0:
            lo = mid
        else:
            hi = mid
    root = lo if abs(h(lo)) <= abs(h(hi)) else hi
    return RootResult(f"{constant!r} - t - 2 t^{2 * n} = 0", root, h(root))


# ---------------------------------------------------------------- coefficient bounds


def brannan_check(q: series.SeriesQuery) -> MarginResult:
    """A_m(1) - |A_m(e^{i theta})| with a round-off bound from the term magnitudes."""
    lhs = series.value_at_one(q)
    rhs = abs(series.partial_sum(q))
    err = 4 * q.m * np.finfo(float).eps * series.term_magnitude(q)
    inputs = dict(alpha=q.alpha, beta=q.beta, m=q.m, theta=q.theta)
    return _margin("brannan", inputs, lhs, rhs, err)


def phi_sq_check(alpha: float, m: int, theta: float, spec: QuadratureSpec | None = None) -> MarginResult:
    """Phi(0)^2 - |Phi(theta)|^2 from quadrature values of Phi."""
    res = phi_sq_diff(alpha, m, theta, spec)
    lhs = abs(phi_quadrature(alpha, m, 0.0, spec).value) ** 2
    return MarginResult("phi_sq_diff", dict(alpha=alpha, m=m, theta=theta), lhs,
                        lhs - res.value, res.value, res.error_estimate)


# ---------------------------------------------------------------- Lemmas 3-5


def _trig(theta: float, n: int):
    m = 2 * n - 1
    return dict(
        one_minus_cos=2.0 * math.sin(0.5 * theta) ** 2,
        one_plus_cos=2.0 * math.cos(0.5 * theta) ** 2,
        cos_2n=math.cos(2 * n * theta),
        cos_m=math.cos(m * theta),
    )


def _denominator(t, tc, one_plus_cos):
    # 1 + t^2 + 2 t cos(theta), written without cancellation
    return tc * tc + 2.0 * t * one_plus_cos


def _integral_pair(alpha, n, theta, spec, lhs_fn, rhs_fn):
    def g(t, tc):
        return np.stack([lhs_fn(t, tc), rhs_fn(t, tc)])

    values, errs, _ = integrate_against_F(alpha, g, spec)
    return float(values[0]), float(values[1]), float(errs[0] + errs[1])


def lemma3_margin(part: str, alpha: float, n: int, theta: float,
                  spec: QuadratureSpec | None = None, proof_form: bool = False) -> MarginResult:
    """Lemma 3 for |theta| <= pi/2.

    (a) int F (B(t,0) - B(t,theta)) >= int F [1/2 (1-cos) + t^m (1-cos 2n th)
        + t^2n (1-cos m th)] / ((1+t) D)
    (b) int F (1 + B(t,theta)) >= int F [(1+t)(1+cos) + t^m (1+cos 2n th)
        + t^2n (1+cos m th)] / D

    ``proof_form`` divides the whole right-hand numerator of (b) by
    (1+t) D instead of D.
    """
    n = _check_n(n)
    _check_angle(theta, 0.0, math.pi / 2, "Lemma 3")
    m = 2 * n - 1
    k = _trig(theta, n)

    def B(t, tc, th):
        return kernel_values(t, tc, th, n).real

    if part == "a":
        def lhs(t, tc):
            return B(t, tc, 0.0) - B(t, tc, theta)

        def rhs(t, tc):
            num = 0.5 * k["one_minus_cos"] + t ** m * (1 - k["cos_2n"]) + t ** (m + 1) * (1 - k["cos_m"])
            return num / ((1 + t) * _denominator(t, tc, k["one_plus_cos"]))
    elif part == "b":
        def lhs(t, tc):
            return 1.0 + B(t, tc, theta)

        def rhs(t, tc):
            num = ((1 + t) * k["one_plus_cos"] + t ** m * (1 + k["cos_2n"])
                   + t ** (m + 1) * (1 + k["cos_m"]))
            den = _denominator(t, tc, k["one_plus_cos"])
            return num / ((1 + t) * den) if proof_form else num / den
    else:
        raise DomainError(f"Lemma 3 part must be 'a' or 'b', got {part!r}")

    lhs_v, rhs_v, err = _integral_pair(alpha, n, theta, spec, lhs, rhs)
    flags = (BELOW_THRESHOLD,) if n < 27 else ()
    inputs = dict(alpha=alpha, n=n, theta=theta, part=part, proof_form=proof_form)
    return _margin(f"lemma3{part}", inputs, lhs_v, rhs_v, err, flags)


def lemma4_margin(t: float, theta: float) -> MarginResult:
    """Pointwise: 5/2 + (t + cos)/D >= (50/23)(1+t)(1+cos)/D for |theta| in [pi/2, 2pi/3]."""
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1], got {t!r}")
    _check_angle(theta, math.pi / 2, 2 * math.pi / 3, "Lemma 4")
    c = math.cos(theta)
    D = 1.0 + t * t + 2.0 * t * c
    lhs = 2.5 + (t + c) / D
    rhs = 50.0 / 23.0 * (1.0 + t) * (1.0 + c) / D
    return _margin("lemma4", dict(t=t, theta=theta), lhs, rhs)


def lemma4_auxiliary(x):
    """g(x) = -1/5 + 5x/13 - x^2/10; exact when given Fractions."""
    if isinstance(x, Fraction):
        return Fraction(-1, 5) + Fraction(5, 13) * x - x * x / 10
    return -0.2 + 5.0 / 13.0 * x - x * x / 10.0


def lemma5_margin(part: str, variant: str, alpha: float, n: int, theta: float,
                  spec: QuadratureSpec | None = None) -> MarginResult:
    """Lemma 5 for |theta| in [pi/2, 2pi/3], with either constant pair.

    (a) int F (B(t,0) - B(t,theta)) >= int F [c1 (1-cos) + t^m (1-cos 2n th)
        + t^2n (1-cos m th)] / ((1+t) D)
    (b) int F (2 + B(t,0) + B(t,theta)) >= int F [c2 (1+t)(1+cos)
        + 2 t^m (1+cos 2n th) + 2 t^2n (1+cos m th)] / D

    ``stated_27_50`` uses (c1, c2) = (27/50, 50/27); ``proof_12_25`` uses
    (12/25, 25/12), the pair that enters the Theorem 2 argument.
    """
    n = _check_n(n)
    _check_angle(theta, math.pi / 2, 2 * math.pi / 3, "Lemma 5")
    try:
        c1, c2 = LEMMA5_VARIANTS[variant]
    except KeyError:
        raise DomainError(f"unknown Lemma 5 variant {variant!r}") from None
    m = 2 * n - 1
    k = _trig(theta, n)

    def B(t, tc, th):
        return kernel_values(t, tc, th, n).real

    if part == "a":
        def lhs(t, tc):
            return B(t, tc, 0.0) - B(t, tc, theta)

        def rhs(t, tc):
            num = c1 * k["one_minus_cos"] + t ** m * (1 - k["cos_2n"]) + t ** (m + 1) * (1 - k["cos_m"])
            return num / ((1 + t) * _denominator(t, tc, k["one_plus_cos"]))
    elif part == "b":
        def lhs(t, tc):
            return 2.0 + B(t, tc, 0.0) + B(t, tc, theta)

        def rhs(t, tc):
            num = (c2 * (1 + t) * k["one_plus_cos"] + 2 * t ** m * (1 + k["cos_2n"])
                   + 2 * t ** (m + 1) * (1 + k["cos_m"]))
            return num / _denominator(t, tc, k["one_plus_cos"])
    else:
        raise DomainError(f"Lemma 5 part must be 'a' or 'b', got {part!r}")

    lhs_v, rhs_v, err = _integral_pair(alpha, n, theta, spec, lhs, rhs)
    threshold = 27 if variant == "stated_27_50" else 51
    flags = (BELOW_THRESHOLD,) if n < threshold else ()
    inputs = dict(alpha=alpha, n=n, theta=theta, part=part, variant=variant)
    return _margin(f"lemma5{part}", inputs, lhs_v, rhs_v, err, flags)


# ---------------------------------------------------------------- constants


def _tail_integral(n: int) -> float:
    # int_0^1 t^(2n) / (1 + t) dt = ln 2 - sum_{k=1}^{2n} (-1)^(k+1) / k
    terms = [math.log(2.0)] + [(-1.0) ** k / k for k in range(1, 2 * n + 1)]
    return math.fsum(terms)


def proof_constant_checks(n: int) -> list[MarginResult]:
    """The five scalar positivity claims used inside the proofs of Lemmas 3 and 5."""
    n = _check_n(n)
    ln2 = math.log(2.0)
    inputs = dict(n=n)
    return [
        _margin("log2_tail_bound", inputs, ln2 / (2 * n + 1), _tail_integral(n)),
        _margin("lemma3_log_constant", inputs, 1.5 * ln2 - 1 - 2 * ln2 / (2 * n + 1), 0.0),
        _margin("lemma3_power_constant", inputs, 1 / 3 - 1 / (2 * n + 1) - 1 / (2 * n), 0.0),
        _margin("lemma5_root_constant", inputs, 27 / 50 - 1 / 2 - 2 / (2 * n + 1), 0.0),
        _margin("lemma5_cubic_constant", inputs, 5 / 12 - 12 / n, 0.0),
    ]


# ---------------------------------------------------------------- Theorem 3


def product_one_minus(alpha: float, K: int) -> float:
    """prod_{k=1}^{K} (1 - alpha / k), multiplied in increasing k."""
    if int(K) != K or K < 1:
        raise DomainError(f"K must be a positive integer, got {K!r}")
    if K > 1_000_000:
        return math.exp(math.fsum(math.log1p(-alpha / k) for k in range(1, K + 1)))
    p = 1.0
    for k in range(1, int(K) + 1):
        p *= 1.0 - alpha / k
    return p


def power_term(alpha: float, x: float) -> float:
    """((2 - 2x)^(alpha/2) - 1) / (alpha/2); negative for x in (1/2, 1]."""
    return ((2.0 - 2.0 * x) ** (alpha / 2) - 1.0) / (alpha / 2)


def remainder_integral(alpha: float, n: int, x: float, spec: QuadratureSpec | None = None) -> QuadratureResult:
    """int_0^1 ((1-t)/r)^(2n-1) r^(alpha-1) dt with r = sqrt(1 + t^2 - 2tx).

    At x = 1 the integrand is (1-t)^(alpha-1).  For small alpha most of its
    mass sits closer to t = 1 than any double can resolve, so [1/2, 1] is
    mapped through s = (1-t)^alpha, where the integrand becomes
    ((1-t)/r)^(2n-alpha) / alpha and stays bounded for every x.
    """
    m = 2 * n - 1
    gap = 1.0 - x
    spec = (spec or QuadratureSpec()).with_exponents(0.0, 0.0)

    def ratio(t, tc):
        if gap == 0.0:
            return np.ones_like(tc)
        return tc / np.sqrt(tc * tc + 2.0 * t * gap)

    def near_zero(u, uc):
        t = 0.5 * u
        tc = 1.0 - t
        return 0.5 * ratio(t, tc) ** m * np.sqrt(tc * tc + 2.0 * t * gap) ** (alpha - 1.0)

    scale = 2.0 ** -alpha / alpha

    def near_one(u, uc):
        # s = 2^-alpha u, so 1 - t = s^(1/alpha) = u^(1/alpha) / 2
        tc = 0.5 * u ** (1.0 / alpha)
        t = 1.0 - tc
        return scale * ratio(t, tc) ** (m + 1 - alpha)

    with np.errstate(under="ignore"):
        lo = integrate(near_zero, spec, complement=True)
        hi = integrate(near_one, spec, complement=True)
    return QuadratureResult(lo.value + hi.value, lo.error_estimate + hi.error_estimate,
                            max(lo.levels_used, hi.levels_used))


def theorem3_remainder(alpha: float, n: int, x: float, spec: QuadratureSpec | None = None):
    """alpha * prod_{k<2n}(1 - alpha/k) * remainder integral, with its error estimate."""
    res = remainder_integral(alpha, n, x, spec)
    scale = alpha * product_one_minus(alpha, 2 * n - 1)
    return scale * res.value, scale * res.error_estimate


def _theorem3_like(name: str, alpha: float, n: int, x: float, spec, flags) -> MarginResult:
    n = _check_n(n)
    if not 0.5 <= x <= 1.0:
        raise DomainError(f"x must lie in [1/2, 1], got {x!r}")
    lhs = 1.0 + alpha * (1.0 + alpha) / 2.0
    tail, err = theorem3_remainder(alpha, n, x, spec)
    rhs = (2.0 - 2.0 * x) ** (alpha / 2) + tail
    a_one = series.value_at_one(series.SeriesQuery(alpha=alpha, m=2 * n - 1))
    sub = _margin("lower_bound_at_one", dict(alpha=alpha, n=n), a_one, lhs)
    return _margin(name, dict(alpha=alpha, n=n, x=x), lhs, rhs, err, flags, (sub,))


def theorem3_margin(alpha: float, n: int, x: float, spec: QuadratureSpec | None = None) -> MarginResult:
    """1 + a(1+a)/2 - [(2-2x)^(a/2) + a prod(1 - a/k) * remainder], x = -cos(theta) in [1/2, 1].

    ``sub`` carries A_{2n-1}(alpha, 1) - (1 + a(1+a)/2), the lower bound
    the reduction relies on.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    flags = (BELOW_THRESHOLD,) if (n < 27 or alpha < 1 / 3) else ()
    return _theorem3_like("theorem3", alpha, n, x, spec, flags)


def conjecture_margin(alpha: float, n: int, x: float, spec: QuadratureSpec | None = None) -> MarginResult:
    """The Theorem 3 inequality restricted to the open range 0 < alpha < 1/3."""
    if not 0.0 < alpha < 1 / 3:
        raise DomainError(f"the conjecture concerns alpha in (0, 1/3), got {alpha!r}")
    return _theorem3_like("conjecture", alpha, n, x, spec, ())


def final_display_margin(K: int, alpha: float = 1 / 3) -> MarginResult:
    """1 + alpha >= (2/alpha) prod_{k=1}^{K} (1 - alpha/k); at alpha = 1/3 the right side is 6 prod."""
    p = product_one_minus(alpha, K)
    return _margin("theorem3_final_display", dict(alpha=alpha, K=K), 1.0 + alpha, 2.0 * p / alpha)
