"""Integration over [0, 1] and [0, 1]**2 with algebraic endpoint singularities.

Two rules are available:

``double_exponential``
    tanh-sinh nodes, refined by halving the step.  Level 0 uses step 1,
    level L step 2**-L; every level reuses the nodes of the coarser ones.
``adaptive_bisection``
    10-point Gauss-Legendre panels, bisected sweep by sweep wherever the
    panel disagrees with its two halves.

Both are open rules: the integrand is never evaluated at 0 or 1.  Nodes are
produced together with their exact distance to the right endpoint, and an
integrand may ask for it (``complement=True``) so that factors such as
``(1 - t)**(a - 1)`` keep full relative accuracy next to t = 1.

Declared endpoint exponents drive a power substitution ``t = x**p`` (and its
mirror at 1) that turns ``t**a`` into a bounded integrand.  The double
exponential rule only substitutes for exponents below -1/2; the bisection
rule substitutes for any nonzero exponent, since it has no built-in
endpoint clustering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import DomainError, NonConvergence, NonFinite

RULES = ("double_exponential", "adaptive_bisection")

# tanh-sinh abscissae beyond |s| = 6.2 are closer to an endpoint than the
# smallest subnormal double.
_S_MAX = 6.2
_ROW_CHUNK = 256
# Tensor nodes closer than this to an edge are dropped: products of two
# singular factors would overflow there, and the mass they carry is below
# 1e-14 for every exponent the substitution rule regularises.
_EDGE_FLOOR_2D = 1e-150


@dataclass(frozen=True)
class QuadratureSpec:
    rule: str = "double_exponential"
    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    max_levels: int = 12
    left_exponent: float = 0.0
    right_exponent: float = 0.0

    def __post_init__(self):
        if self.rule not in RULES:
            raise DomainError(f"unknown quadrature rule {self.rule!r}; expected one of {RULES}")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("abs_tol and rel_tol must be positive")
        if int(self.max_levels) != self.max_levels or self.max_levels < 3:
            raise DomainError("max_levels must be an integer >= 3")
        if not (self.left_exponent > -1 and self.right_exponent > -1):
            raise DomainError("endpoint exponents must exceed -1 for integrability")

    def with_exponents(self, left: float, right: float) -> QuadratureSpec:
        return replace(self, left_exponent=float(left), right_exponent=float(right))

    def tolerance(self, value) -> np.ndarray:
        return np.maximum(self.abs_tol, self.rel_tol * np.abs(value))


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    levels_used: int


@dataclass(frozen=True, eq=False)
class NodeSet:
    """Nodes added at one refinement level, weights exclusive of the step ``h``."""

    level: int
    h: float
    t: np.ndarray
    tc: np.ndarray
    w: np.ndarray


def _readonly(*arrays):
    for a in arrays:
        a.setflags(write=False)
    return arrays


def substitution_power(exponent: float, rule: str = "double_exponential") -> float:
    if rule == "double_exponential":
        return 1.0 / (1.0 + exponent) if exponent < -0.5 else 1.0
    return 1.0 / (1.0 + exponent) if exponent != 0.0 else 1.0


def map_nodes(x, xc, p: float, q: float):
    """Apply t = R(L(x)) with L(x) = x**p and R(y) = 1 - (1 - y)**q.

    Returns ``(t, 1 - t, dt/dx)``, each accurate to a few ulps even where
    t or 1 - t is far below machine epsilon.
    """
    x = np.asarray(x, dtype=float)
    xc = np.asarray(xc, dtype=float)
    if p == 1.0 and q == 1.0:
        return x, xc, np.ones_like(x)
    with np.errstate(divide="ignore", under="ignore", over="ignore", invalid="ignore"):
        log_x = np.where(x <= 0.5, np.log(x), np.log1p(-xc))
        if p == 1.0:
            y, yc, jac = x, xc, np.ones_like(x)
        else:
            y = np.exp(p * log_x)
            yc = -np.expm1(p * log_x)
            jac = p * np.exp((p - 1.0) * log_x)
        if q == 1.0:
            return y, yc, jac
        log_yc = np.where(yc <= 0.5, np.log(yc), np.log1p(-y))
        tc = np.exp(q * log_yc)
        t = -np.expm1(q * log_yc)
        jac = jac * q * np.exp((q - 1.0) * log_yc)
    return t, tc, jac


@lru_cache(maxsize=256)
def de_nodes(level: int, p: float = 1.0, q: float = 1.0) -> NodeSet:
    """tanh-sinh nodes new at ``level``, pulled back through the power substitution."""
    h = 2.0 ** -level
    kmax = int(math.floor(_S_MAX / h))
    k = np.arange(-kmax, kmax + 1, dtype=float)
    if level > 0:
        k = k[np.mod(k, 2) == 1]
    s = k * h
    u = 0.5 * math.pi * np.sinh(s)
    with np.errstate(under="ignore", over="ignore"):
        e = np.exp(-2.0 * np.abs(u))
        near = e / (1.0 + e)
        far = 1.0 / (1.0 + e)
        x = np.where(s < 0, near, far)
        xc = np.where(s < 0, far, near)
        w = math.pi * np.cosh(s) * x * xc
    t, tc, jac = map_nodes(x, xc, p, q)
    with np.errstate(under="ignore", over="ignore", invalid="ignore"):
        w = w * jac
    keep = (t > 0) & (tc > 0) & (w > 0) & np.isfinite(w)
    t, tc, w = (np.ascontiguousarray(a[keep]) for a in (t, tc, w))
    _readonly(t, tc, w)
    return NodeSet(level, h, t, tc, w)


def _powers(spec: QuadratureSpec) -> tuple[float, float]:
    return (substitution_power(spec.left_exponent, spec.rule),
            substitution_power(spec.right_exponent, spec.rule))


def _check_finite(vals: np.ndarray, t: np.ndarray) -> None:
    ok = np.isfinite(vals)
    if not ok.all():
        bad = np.argwhere(~ok)[0]
        node = float(t[bad[-1]]) if t.ndim == 1 else float("nan")
        raise NonFinite(f"integrand is not finite at t = {node!r}", node)


# Floor on reported error estimates: level differences can vanish exactly
# once the rule has converged, but the sum itself still carries round-off.
_ROUNDOFF = 4 * np.finfo(float).eps


def de_levels(evaluate: Callable[[NodeSet], np.ndarray], spec: QuadratureSpec,
              extra_error: Callable[[NodeSet], np.ndarray] | None = None):
    """Run the double-exponential refinement on a vectorised evaluator.

    ``evaluate(nodes)`` returns values with the node axis last; any leading
    axes are integrated independently and must all converge.  The optional
    ``extra_error`` returns a nonnegative per-node error of the integrand
    whose weighted sum is added to the level-difference estimate.

    Returns ``(value, error_estimate, levels_used)`` as arrays or scalars.
    """
    p, q = _powers(spec)
    total = None
    inherited = 0.0
    diffs = []
    for level in range(spec.max_levels):
        nodes = de_nodes(level, p, q)
        vals = np.asarray(evaluate(nodes))
        _check_finite(vals, nodes.t)
        part = nodes.h * (vals * nodes.w).sum(axis=-1)
        if extra_error is not None:
            e_part = nodes.h * (np.asarray(extra_error(nodes)) * nodes.w).sum(axis=-1)
            inherited = e_part if level == 0 else 0.5 * inherited + e_part
        if total is None:
            total = part
            continue
        new_total = 0.5 * total + part
        diffs.append(np.abs(new_total - total))
        total = new_total
        tol = spec.tolerance(total)
        if len(diffs) >= 2 and np.all(diffs[-1] <= tol) and np.all(diffs[-2] <= tol):
            return total, diffs[-1] + inherited + _ROUNDOFF * np.abs(total), level + 1
    raise NonConvergence(
        f"double-exponential rule did not converge in {spec.max_levels} levels",
        value=total, error_estimate=diffs[-1] + inherited if diffs else float("inf"),
        levels_used=spec.max_levels)


def _call(f, t, tc, complement: bool) -> np.ndarray:
    vals = f(t, tc) if complement else f(t)
    return np.broadcast_to(np.asarray(vals), np.shape(t))


_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_XC = _GL_X[::-1].copy()
_GL_W = 0.5 * _GL_W


def _bisection(f, spec: QuadratureSpec, complement: bool):
    p, q = _powers(spec)

    def panel_values(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        width = (b - a)[:, None]
        x = a[:, None] + width * _GL_X
        xc = (1.0 - b)[:, None] + width * _GL_XC
        t, tc, jac = map_nodes(x, xc, p, q)
        vals = np.asarray(_call(f, t, tc, complement)) * jac
        _check_finite(vals, t.ravel())
        return (vals * _GL_W).sum(axis=-1) * width[:, 0]

    def refine(a, b, whole):
        mid = 0.5 * (a + b)
        left = panel_values(a, mid)
        right = panel_values(mid, b)
        return left + right, np.abs(left + right - whole)

    a = np.array([0.0])
    b = np.array([1.0])
    whole = panel_values(a, b)
    value, err = refine(a, b, whole)
    done_value = 0.0
    done_err = 0.0
    levels = 1
    while True:
        total = done_value + value.sum()
        total_err = done_err + err.sum()
        if total_err <= spec.tolerance(total):
            return total, total_err + _ROUNDOFF * abs(total), levels
        if levels >= spec.max_levels:
            raise NonConvergence(
                f"adaptive bisection did not converge in {spec.max_levels} levels",
                value=total, error_estimate=total_err, levels_used=levels)
        levels += 1
        split = err > spec.tolerance(total) * (b - a)
        done_value += value[~split].sum()
        done_err += err[~split].sum()
        a, b = a[split], b[split]
        mid = 0.5 * (a + b)
        na = np.concatenate([a, mid])
        nb = np.concatenate([mid, b])
        order = np.argsort(na, kind="stable")
        na, nb = na[order], nb[order]
        whole = panel_values(na, nb)
        value, err = refine(na, nb, whole)
        a, b = na, nb


def integrate(f: Callable, spec: QuadratureSpec | None = None, *,
              complement: bool = False) -> QuadratureResult:
    """Integrate ``f`` over (0, 1).

    ``f`` is called with numpy arrays of nodes.  With ``complement=True`` it
    is called as ``f(t, 1 - t)`` where the second argument is computed
    without cancellation.

    Raises NonConvergence (carrying the best value) when the level
    differences never drop below ``max(abs_tol, rel_tol * |value|)``, and
    NonFinite when ``f`` is not finite at some node.
    """
    spec = spec or QuadratureSpec()
    if spec.rule == "double_exponential":
        value, err, levels = de_levels(lambda ns: _call(f, ns.t, ns.tc, complement), spec)
    else:
        value, err, levels = _bisection(f, spec, complement)
    return QuadratureResult(float(value), float(err), int(levels))


def _trimmed(nodes: NodeSet) -> NodeSet:
    keep = (nodes.t >= _EDGE_FLOOR_2D) & (nodes.tc >= _EDGE_FLOOR_2D)
    return NodeSet(nodes.level, nodes.h, nodes.t[keep], nodes.tc[keep], nodes.w[keep])


def _de_2d(g, spec: QuadratureSpec, complement: bool):
    p, q = _powers(spec)
    sets = []
    history = []
    total = float("nan")
    for level in range(spec.max_levels):
        sets.append(_trimmed(de_nodes(level, p, q)))
        t = np.concatenate([s.t for s in sets])
        tc = np.concatenate([s.tc for s in sets])
        h = sets[-1].h
        fine = np.concatenate([s.w for s in sets]) * h
        coarse = np.concatenate([s.w * (2.0 * h) for s in sets[:-1]] + [np.zeros(len(sets[-1].t))])
        t_ff = t_cf = t_fc = 0.0
        for lo in range(0, len(t), _ROW_CHUNK):
            rows = slice(lo, lo + _ROW_CHUNK)
            if complement:
                block = g(t[rows, None], tc[rows, None], t[None, :], tc[None, :])
            else:
                block = g(t[rows, None], t[None, :])
            block = np.broadcast_to(np.asarray(block), (len(t[rows]), len(t)))
            _check_finite(block, t[rows])
            r_fine = block @ fine
            r_coarse = block @ coarse
            t_ff += fine[rows] @ r_fine
            t_cf += coarse[rows] @ r_fine
            t_fc += fine[rows] @ r_coarse
        total = t_ff
        if level == 0:
            continue
        # refining each axis separately, with the other axis at full resolution
        history.append(abs(t_ff - t_cf) + abs(t_ff - t_fc))
        tol = spec.tolerance(total)
        if len(history) >= 2 and history[-1] <= tol and history[-2] <= tol:
            return total, history[-1] + _ROUNDOFF * abs(total), level + 1
    raise NonConvergence(
        f"tensor double-exponential rule did not converge in {spec.max_levels} levels",
        value=total, error_estimate=history[-1] if history else float("inf"),
        levels_used=spec.max_levels)


def _iterated_2d(g, spec: QuadratureSpec, complement: bool):
    inner_errors = []
    levels = [0]

    def outer(t, tc):
        out = np.empty(np.shape(t))
        for i, (ti, tci) in enumerate(zip(np.ravel(t), np.ravel(tc))):
            if complement:
                res = integrate(lambda v, vc: g(ti, tci, v, vc), spec, complement=True)
            else:
                res = integrate(lambda v: g(ti, v), spec)
            out.flat[i] = res.value
            inner_errors.append(res.error_estimate)
            levels[0] = max(levels[0], res.levels_used)
        return out

    res = integrate(outer, spec, complement=True)
    # the inner estimates integrate against a unit-measure outer domain
    err = res.error_estimate + (max(inner_errors) if inner_errors else 0.0)
    return res.value, err, max(res.levels_used, levels[0])


def integrate2d(g: Callable, spec: QuadratureSpec | None = None, *,
                complement: bool = False) -> QuadratureResult:
    """Integrate ``g(t, v)`` over (0, 1)**2 by the tensor product of the 1-d rule.

    The declared endpoint exponents apply to both axes.  With
    ``complement=True``, ``g`` is called as ``g(t, 1 - t, v, 1 - v)``.
    """
    spec = spec or QuadratureSpec()
    if spec.rule == "double_exponential":
        value, err, levels = _de_2d(g, spec, complement)
    else:
        value, err, levels = _iterated_2d(g, spec, complement)
    return QuadratureResult(float(value), float(err), int(levels))
