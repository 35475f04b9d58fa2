"""Grid sweeps of the margin checks, with deterministic reports.

A scan walks the box ``n_list x alpha x (angle | x)`` in row-major order
(n outermost).  Cells may run on a thread pool, but every aggregate is a
reduction over that canonical order, so reports do not depend on the
number of workers.
"""

from __future__ import annotations

import math
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

from . import inequalities as iq
from . import series
from .errors import BrannanError, DomainError, IoError, UnknownCheck
from .quadrature import QuadratureSpec

_SNAP = 1e-12
CSV_HEADER = "check,n,alpha,angle_or_x,lhs,rhs,margin,error_estimate"

Range = tuple[float, float, float]


def range_points(r: Range) -> list[float]:
    """Points of a closed range (lo, hi, step).

    hi is included when hi - lo is a whole number of steps to within 1e-12;
    otherwise the grid stops at the last lo + k*step below hi.
    """
    lo, hi, step = (float(v) for v in r)
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
        raise DomainError(f"range needs lo <= hi, got {r!r}")
    if not step > 0:
        raise DomainError(f"range step must be positive, got {r!r}")
    q = (hi - lo) / step
    k = round(q)
    if abs(q - k) <= _SNAP * max(1.0, k):
        return [lo + i * step for i in range(k)] + [hi]
    return [lo + i * step for i in range(math.floor(q) + 1)]


# ---------------------------------------------------------------- checks


@dataclass(frozen=True)
class CheckDef:
    axis: str  # "angle" or "x"
    first: str  # "alpha" or "t"
    uses_n: bool
    evaluate: Callable


def _brannan(grid, qspec, n, alpha, theta):
    q = series.SeriesQuery(alpha=alpha, m=2 * n - 1, theta=theta, beta=grid.beta)
    return iq.brannan_check(q)


def _phi_sq(grid, qspec, n, alpha, theta):
    return iq.phi_sq_check(alpha, 2 * n - 1, theta, qspec)


def _lemma3(part):
    def run(grid, qspec, n, alpha, theta):
        proof_form = grid.variant == "proof_form"
        return iq.lemma3_margin(part, alpha, n, theta, qspec, proof_form=proof_form)
    return run


def _lemma4(grid, qspec, n, t, theta):
    return iq.lemma4_margin(t, theta)


def _lemma5(part):
    def run(grid, qspec, n, alpha, theta):
        return iq.lemma5_margin(part, grid.variant or "stated_27_50", alpha, n, theta, qspec)
    return run


def _theorem3(grid, qspec, n, alpha, x):
    return iq.theorem3_margin(alpha, n, x, qspec)


def _conjecture(grid, qspec, n, alpha, x):
    return iq.conjecture_margin(alpha, n, x, qspec)


CHECKS: dict[str, CheckDef] = {
    "brannan": CheckDef("angle", "alpha", True, _brannan),
    "phi_sq_diff": CheckDef("angle", "alpha", True, _phi_sq),
    "lemma3a": CheckDef("angle", "alpha", True, _lemma3("a")),
    "lemma3b": CheckDef("angle", "alpha", True, _lemma3("b")),
    "lemma4": CheckDef("angle", "t", False, _lemma4),
    "lemma5a": CheckDef("angle", "alpha", True, _lemma5("a")),
    "lemma5b": CheckDef("angle", "alpha", True, _lemma5("b")),
    "theorem3": CheckDef("x", "alpha", True, _theorem3),
    "conjecture": CheckDef("x", "alpha", True, _conjecture),
}

VARIANTS = {
    "lemma3b": (None, "proof_form"),
    "lemma5a": (None, "stated_27_50", "proof_12_25"),
    "lemma5b": (None, "stated_27_50", "proof_12_25"),
}


def check_def(name: str) -> CheckDef:
    try:
        return CHECKS[name]
    except KeyError:
        raise UnknownCheck(f"unknown check {name!r}; known: {', '.join(sorted(CHECKS))}") from None


# ---------------------------------------------------------------- grid


@dataclass(frozen=True)
class GridSpec:
    """A scan box.  ``n_list`` always holds n; the series index is m = 2n - 1.

    ``lemma4`` is pointwise in (t, theta) and takes ``t_range`` in place of
    ``alpha_range``; its n axis is a single placeholder 0.
    """

    check: str
    alpha_range: Range | None = None
    n_list: tuple[int, ...] = ()
    angle_range: Range | None = None
    x_range: Range | None = None
    t_range: Range | None = None
    near_violation_threshold: float = 1e-6
    violation_tolerance: float = 1e-12
    beta: float = 1.0
    variant: str | None = None

    def __post_init__(self):
        d = check_def(self.check)
        object.__setattr__(self, "n_list", tuple(sorted(int(n) for n in self.n_list)))
        if d.axis == "angle":
            if self.angle_range is None or self.x_range is not None:
                raise DomainError(f"{self.check} scans need angle_range and no x_range")
        elif self.x_range is None or self.angle_range is not None:
            raise DomainError(f"{self.check} scans need x_range and no angle_range")
        if d.first == "t":
            if self.t_range is None or self.alpha_range is not None:
                raise DomainError(f"{self.check} scans need t_range and no alpha_range")
        elif self.alpha_range is None or self.t_range is not None:
            raise DomainError(f"{self.check} scans need alpha_range and no t_range")
        if d.uses_n:
            if not self.n_list or any(n < 1 for n in self.n_list):
                raise DomainError("n_list must hold positive integers")
            if len(set(self.n_list)) != len(self.n_list):
                raise DomainError("n_list has duplicates")
        if not self.near_violation_threshold > 0:
            raise DomainError("near_violation_threshold must be positive")
        if not self.violation_tolerance >= 0:
            raise DomainError("violation_tolerance must be nonnegative")
        if self.variant not in VARIANTS.get(self.check, (None,)):
            raise DomainError(f"variant {self.variant!r} does not apply to {self.check}")
        for r in (self.alpha_range, self.angle_range, self.x_range, self.t_range):
            if r is not None:
                range_points(r)

    @property
    def definition(self) -> CheckDef:
        return CHECKS[self.check]

    def axes(self) -> tuple[list[int], list[float], list[float]]:
        d = self.definition
        ns = list(self.n_list) if d.uses_n else [0]
        first = range_points(self.alpha_range if d.first == "alpha" else self.t_range)
        last = range_points(self.angle_range if d.axis == "angle" else self.x_range)
        return ns, first, last

    def cells(self) -> list[tuple[int, float, float]]:
        ns, first, last = self.axes()
        return [(n, a, v) for n in ns for a in first for v in last]


# ---------------------------------------------------------------- report


@dataclass(frozen=True)
class Cell:
    index: int
    n: int
    alpha: float
    angle_or_x: float
    lhs: float
    rhs: float
    margin: float
    error_estimate: float
    flags: tuple[str, ...] = ()
    reason: str | None = None

    @property
    def params(self) -> dict:
        return {"index": self.index, "n": self.n, "alpha": self.alpha, "angle_or_x": self.angle_or_x}


@dataclass(frozen=True)
class CheckReport:
    grid: GridSpec
    cells_evaluated: int
    min_margin: float
    argmin: dict | None
    violations: tuple[tuple[dict, float], ...]
    near_violations: tuple[tuple[dict, float], ...]
    quadrature: QuadratureSpec
    wall_time_seconds: float
    cells: tuple[Cell, ...] = field(default=(), repr=False)

    @property
    def failed(self) -> bool:
        return bool(self.violations)


def _evaluate(grid: GridSpec, qspec: QuadratureSpec, index: int, cell) -> Cell:
    n, a, v = cell
    try:
        r = grid.definition.evaluate(grid, qspec, n, a, v)
    except BrannanError as exc:
        nan = float("nan")
        reason = f"{type(exc).__name__}: {exc}"
        return Cell(index, n, a, v, nan, nan, nan, float(getattr(exc, "error_estimate", nan)), (), reason)
    return Cell(index, n, a, v, r.lhs, r.rhs, r.margin, r.error_estimate, r.flags)


def _is_violation(c: Cell, grid: GridSpec) -> bool:
    if c.reason is not None:
        return True
    return c.margin < -(grid.violation_tolerance + 2.0 * c.error_estimate)


def _params(c: Cell) -> dict:
    p = c.params
    if c.reason is not None:
        p["reason"] = c.reason
    return p


def scan(grid: GridSpec, qspec: QuadratureSpec | None = None, threads: int = 1) -> CheckReport:
    """Evaluate every cell once and reduce in canonical order.

    Cell failures (non-convergence, singular points) become violations
    carrying a reason; they never abort the scan.
    """
    qspec = qspec or QuadratureSpec()
    cells = grid.cells()
    if not cells:
        raise DomainError("grid is empty")
    start = time.perf_counter()
    if threads <= 1 or len(cells) == 1:
        results = [_evaluate(grid, qspec, i, c) for i, c in enumerate(cells)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunk = max(1, len(cells) // (threads * 8))
            results = list(pool.map(lambda ic: _evaluate(grid, qspec, *ic), enumerate(cells),
                                    chunksize=chunk))
    elapsed = time.perf_counter() - start

    best = None
    violations, near = [], []
    for c in results:
        if math.isfinite(c.margin) and (best is None or c.margin < best.margin):
            best = c
        if _is_violation(c, grid):
            violations.append((_params(c), c.margin))
            near.append((_params(c), c.margin))
        elif c.margin < grid.near_violation_threshold:
            near.append((_params(c), c.margin))
    return CheckReport(
        grid=grid,
        cells_evaluated=len(results),
        min_margin=best.margin if best else float("nan"),
        argmin=best.params if best else None,
        violations=tuple(violations),
        near_violations=tuple(near),
        quadrature=qspec,
        wall_time_seconds=elapsed,
        cells=tuple(results),
    )


# ---------------------------------------------------------------- output


def fmt_number(x) -> str:
    """17 significant digits; integers stay integers, nan and inf become null."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return "%.17g" % x


def _csv_number(x) -> str:
    if isinstance(x, int) and not isinstance(x, bool):
        return str(x)
    x = float(x)
    return "nan" if math.isnan(x) else "%.17g" % x


def _json(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, str):
        out = value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
        return f'"{out}"'
    if isinstance(value, (int, float)):
        return fmt_number(value)
    if isinstance(value, dict):
        return "{" + ",".join(f"{_json(str(k))}:{_json(v)}" for k, v in value.items()) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_json(v) for v in value) + "]"
    raise TypeError(f"cannot serialise {type(value).__name__}")


def report_dict(report: CheckReport, include_cells: bool = False,
                include_timing: bool = False) -> dict:
    out = {
        "check": report.grid.check,
        "grid": asdict(report.grid),
        "cells_evaluated": report.cells_evaluated,
        "min_margin": report.min_margin,
        "argmin": report.argmin,
        "violations": [dict(p, margin=m) for p, m in report.violations],
        "near_violations": [dict(p, margin=m) for p, m in report.near_violations],
        "quadrature": asdict(report.quadrature),
    }
    if include_timing:
        out["wall_time_seconds"] = report.wall_time_seconds
    if include_cells:
        out["cells"] = [asdict(c) for c in report.cells]
    return out


def render_json(report: CheckReport, include_cells: bool = False,
                include_timing: bool = False) -> str:
    """JSON text of a report.  Wall time is left out unless asked for, so
    repeated runs give byte-identical output."""
    return _json(report_dict(report, include_cells, include_timing)) + "\n"


def render_csv(report: CheckReport) -> str:
    lines = [CSV_HEADER]
    for c in report.cells:
        nums = (c.lhs, c.rhs, c.margin, c.error_estimate)
        lines.append(",".join([report.grid.check, str(c.n), _csv_number(c.alpha),
                               _csv_number(c.angle_or_x)] + [_csv_number(v) for v in nums]))
    return "\n".join(lines) + "\n"


def render_human(report: CheckReport) -> str:
    g = report.grid
    lines = [
        f"check            {g.check}",
        f"cells evaluated  {report.cells_evaluated}",
        f"min margin       {fmt_number(report.min_margin)}",
    ]
    if report.argmin is not None:
        a = report.argmin
        lines.append(f"argmin           n={a['n']} alpha={fmt_number(a['alpha'])} "
                     f"angle_or_x={fmt_number(a['angle_or_x'])}")
    lines.append(f"violations       {len(report.violations)}")
    lines.append(f"near violations  {len(report.near_violations)} (threshold {g.near_violation_threshold:g})")
    for p, m in report.violations[:20]:
        extra = f"  [{p['reason']}]" if "reason" in p else ""
        lines.append(f"  n={p['n']} alpha={fmt_number(p['alpha'])} "
                     f"angle_or_x={fmt_number(p['angle_or_x'])} margin={fmt_number(m)}{extra}")
    q = report.quadrature
    lines.append(f"quadrature       {q.rule} abs_tol={q.abs_tol:g} rel_tol={q.rel_tol:g} "
                 f"max_levels={q.max_levels}")
    return "\n".join(lines) + "\n"


def write_text(text: str, destination=None) -> None:
    """Write to a path atomically (temp file then rename), or to stdout."""
    if destination is None or destination == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = os.fspath(destination)
    directory = os.path.dirname(os.path.abspath(path))
    tmp = None
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        if tmp is not None and os.path.exists(tmp):
            os.unlink(tmp)
        raise IoError(f"cannot write {path}: {exc}") from exc


def emit(report: CheckReport, fmt: str = "json", destination=None, *,
         include_cells: bool = False, include_timing: bool = False) -> None:
    """Serialise a report as ``csv``, ``json`` or ``human`` text."""
    if fmt == "csv":
        text = render_csv(report)
    elif fmt == "json":
        text = render_json(report, include_cells, include_timing)
    elif fmt == "human":
        text = render_human(report)
    else:
        raise DomainError(f"unknown format {fmt!r}")
    write_text(text, destination)


def results_report(check: str, rows: Sequence[tuple[int, float, float, "iq.MarginResult"]],
                   qspec: QuadratureSpec | None, violation_tolerance: float = 1e-12,
                   near_violation_threshold: float = 1e-6) -> "PointReport":
    """Wrap already computed margins so single-point commands share the emitters."""
    cells = tuple(Cell(i, n, a, v, r.lhs, r.rhs, r.margin, r.error_estimate, r.flags)
                  for i, (n, a, v, r) in enumerate(rows))
    return PointReport(check, cells, qspec, violation_tolerance, near_violation_threshold)


@dataclass(frozen=True)
class PointReport:
    check: str
    cells: tuple[Cell, ...]
    quadrature: QuadratureSpec | None
    violation_tolerance: float = 1e-12
    near_violation_threshold: float = 1e-6

    @property
    def violations(self) -> list[Cell]:
        tol = self.violation_tolerance
        return [c for c in self.cells if not c.margin >= -(tol + 2.0 * c.error_estimate)]

    @property
    def failed(self) -> bool:
        return bool(self.violations)


def render_points(report: PointReport, fmt: str, names: Sequence[str] | None = None) -> str:
    """Text for a :class:`PointReport`; ``names`` label rows in human output."""
    if fmt == "csv":
        lines = [CSV_HEADER]
        for c in report.cells:
            nums = (c.lhs, c.rhs, c.margin, c.error_estimate)
            lines.append(",".join([report.check, str(c.n), _csv_number(c.alpha),
                                   _csv_number(c.angle_or_x)] + [_csv_number(v) for v in nums]))
        return "\n".join(lines) + "\n"
    if fmt == "json":
        rows = []
        for i, c in enumerate(report.cells):
            row = {"name": names[i] if names else report.check}
            row.update({k: v for k, v in asdict(c).items() if k != "reason"})
            rows.append(row)
        body = {
            "check": report.check,
            "results": rows,
            "violations": [dict(c.params, margin=c.margin) for c in report.violations],
            "quadrature": asdict(report.quadrature) if report.quadrature else None,
        }
        return _json(body) + "\n"
    if fmt == "human":
        out = []
        for i, c in enumerate(report.cells):
            label = names[i] if names else report.check
            flag = f"  [{', '.join(c.flags)}]" if c.flags else ""
            out.append(f"{label}: lhs={fmt_number(c.lhs)} rhs={fmt_number(c.rhs)} "
                       f"margin={fmt_number(c.margin)} err={fmt_number(c.error_estimate)}{flag}")
        return "\n".join(out) + "\n"
    raise DomainError(f"unknown format {fmt!r}")


def format_complex(z: complex, fmt: str = "human") -> str:
    if fmt == "human":
        sign = "-" if math.copysign(1.0, z.imag) < 0 else "+"
        return f"{z.real:.17g} {sign} {abs(z.imag):.17g}i\n"
    if fmt == "json":
        return _json({"re": z.real, "im": z.imag, "abs": abs(z)}) + "\n"
    if fmt == "csv":
        return f"re,im,abs\n{_csv_number(z.real)},{_csv_number(z.imag)},{_csv_number(abs(z))}\n"
    raise DomainError(f"unknown format {fmt!r}")
