"""Acceptance criteria 1-11, at their stated tolerances and time limits.

Each criterion prints one PASS/FAIL line; under pytest the lines are also
repeated in the terminal summary.  Run standalone with
``python3 tests/test_acceptance.py``.
"""

import math
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from brannan import inequalities as iq
from brannan import scanner as sc
from brannan.integral_rep import KernelPoint, kernel_BC, kernel_direct, phi_quadrature, phi_series, weight_F

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # standalone run
    ACCEPTANCE_LINES = []

PI = math.pi
THREADS = 8


def report(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start


def criterion_1():
    def run():
        rng = np.random.default_rng(20240601)
        worst = 0.0
        for _ in range(200):
            t = float(rng.uniform(0.0, 0.999))
            theta = float(rng.uniform(-PI, PI))
            n = int(rng.integers(1, 61))
            B, C = kernel_BC(KernelPoint(t, theta, n))
            worst = max(worst, abs(complex(B, C) - kernel_direct(t, theta, n)))
        return worst

    worst, secs = timed(run)
    return worst <= 1e-12 and secs < 1.0, f"kernel identity: max error {worst:.2e} (<= 1e-12), {secs:.2f} s (< 1 s)"


def criterion_2():
    def run():
        worst = 0.0
        for alpha in (0.1, 0.3, 0.5, 0.7, 0.9):
            for m in (3, 9, 53, 103):
                for theta in (0.0, PI / 4, PI / 2, 2 * PI / 3, 0.99 * PI):
                    q = phi_quadrature(alpha, m, theta).value
                    s = phi_series(alpha, m, theta).value
                    worst = max(worst, abs(q - s) / abs(s))
        return worst

    worst, secs = timed(run)
    return worst <= 1e-7 and secs < 60, f"Phi quadrature vs series: max rel diff {worst:.2e} (<= 1e-7), {secs:.2f} s (< 60 s)"


def criterion_3():
    worst = 0.0
    for t in (0.01, 0.1, 0.5, 0.9, 0.999):
        exact = 2 * math.sqrt((1 - t) / t)
        worst = max(worst, abs(weight_F(t, 0.5) - exact) / exact)
    return worst <= 1e-9, f"F at alpha = 1/2 vs 2 sqrt((1-t)/t): max rel diff {worst:.2e} (<= 1e-9)"


def criterion_4():
    grid = sc.GridSpec("brannan", alpha_range=(0.02, 0.98, 0.04), n_list=range(2, 27),
                       angle_range=(0, PI, PI / 256))
    rep, secs = timed(lambda: sc.scan(grid, threads=THREADS))
    ok = rep.min_margin >= -1e-12 and not rep.violations and secs < 300 and rep.cells_evaluated == 25 * 25 * 257
    return ok, (f"brannan scan m = 3..51: {rep.cells_evaluated} cells, min margin {rep.min_margin:.3e} "
                f"(>= -1e-12), {secs:.1f} s (< 300 s)")


def criterion_5():
    grid = sc.GridSpec("phi_sq_diff", alpha_range=(0.1, 0.9, 0.4), n_list=(52, 60),
                       angle_range=(0, 2 * PI / 3, PI / 64))
    rep, secs = timed(lambda: sc.scan(grid, threads=THREADS))
    bad = [c for c in rep.cells if not c.margin >= -2 * c.error_estimate]
    ok = not bad and secs < 600
    return ok, (f"phi_sq_diff scan n in {{52, 60}}: {rep.cells_evaluated} cells, {len(bad)} below -2*err, "
                f"min margin {rep.min_margin:.3e}, {secs:.1f} s (< 600 s)")


def criterion_6():
    grid = sc.GridSpec("lemma4", t_range=(0, 1, 0.005),
                       angle_range=(PI / 2, 2 * PI / 3, (2 * PI / 3 - PI / 2) / 200))
    rep = sc.scan(grid)
    g_float = iq.lemma4_auxiliary(13 / 5)
    g_exact = iq.lemma4_auxiliary(Fraction(13, 5))
    ok = (rep.min_margin >= -1e-12 and not rep.violations and rep.cells_evaluated == 201 * 201
          and abs(g_float - 31 / 250) <= 1e-15 and g_exact == Fraction(31, 250))
    return ok, (f"Lemma 4 grid: {rep.cells_evaluated} cells, min margin {rep.min_margin:.4f}; "
                f"g(13/5) = {g_exact} (|float - 31/250| = {abs(g_float - 31 / 250):.1e})")


def criterion_7():
    worst_margin = math.inf
    worst_collapse = 0.0
    for alpha in (1 / 3, 0.5, 0.7, 0.9):
        for n in (27, 40, 53):
            for x in (0.5, 0.75, 1.0):
                r = iq.theorem3_margin(alpha, n, x)
                worst_margin = min(worst_margin, r.margin)
                if x == 1.0:
                    P = iq.product_one_minus(alpha, 2 * n - 1)
                    worst_collapse = max(worst_collapse, abs(r.rhs - P) / P)
    ok = worst_margin >= 0 and worst_collapse <= 1e-10
    return ok, (f"Theorem 3 grid: min margin {worst_margin:.4f} (>= 0), "
                f"x = 1 collapse max rel diff {worst_collapse:.1e} (<= 1e-10)")


def criterion_8():
    p53 = 6 * iq.product_one_minus(1 / 3, 53)
    p27 = 6 * iq.product_one_minus(1 / 3, 27)
    e53 = 6 * math.prod((1 - Fraction(1, 3 * k) for k in range(1, 54)), start=Fraction(1))
    e27 = 6 * math.prod((1 - Fraction(1, 3 * k) for k in range(1, 28)), start=Fraction(1))
    four_thirds = Fraction(4, 3)
    ok = (p53 < 4 / 3 and p27 > 4 / 3 and e53 < four_thirds and e27 > four_thirds
          and abs(p53 - float(e53)) <= 1e-14 and abs(p27 - float(e27)) <= 1e-14)
    return ok, f"6*prod to 53 = {p53:.6f} < 4/3, 6*prod to 27 = {p27:.6f} > 4/3 (exact rationals agree)"


def criterion_9():
    r = {x.name: x.margin for x in iq.proof_constant_checks(27)}
    first = next(n for n in range(1, 1000) if iq.proof_constant_checks(n)[4].margin > 0)
    ln2 = math.log(2)
    ok = (r["lemma3_log_constant"] > 0
          and abs(r["lemma3_log_constant"] - (1.5 * ln2 - 1 - 2 * ln2 / 55)) <= 1e-15
          and r["lemma5_root_constant"] > 0 and abs(r["lemma5_root_constant"] - (27 / 50 - 1 / 2 - 2 / 55)) <= 1e-15
          and r["lemma5_cubic_constant"] < 0 and abs(r["lemma5_cubic_constant"] - (5 / 12 - 12 / 27)) <= 1e-15
          and first == 29)
    return ok, (f"n = 27: log constant {r['lemma3_log_constant']:.5f} > 0, root constant "
                f"{r['lemma5_root_constant']:.5f} > 0, cubic constant {r['lemma5_cubic_constant']:.5f} < 0; "
                f"cubic first positive at n = {first}")


def criterion_10():
    grid = sc.GridSpec("conjecture", alpha_range=(0.05, 0.30, 0.05), n_list=(27, 52, 100),
                       x_range=(0.5, 1.0, 0.025))
    rep, secs = timed(lambda: sc.scan(grid, threads=THREADS))
    failed = [c for c in rep.cells if c.reason is not None]
    worst_err = max(c.error_estimate for c in rep.cells)
    ok = (not failed and worst_err < 1e-8 and secs < 600 and rep.cells_evaluated == 6 * 3 * 21)
    a = rep.argmin
    return ok, (f"conjecture scan: {rep.cells_evaluated} cells, min margin {rep.min_margin:.6f} at "
                f"n={a['n']} alpha={a['alpha']:.2f} x={a['angle_or_x']:.3f}, {len(rep.violations)} violations, "
                f"max error estimate {worst_err:.1e} (< 1e-8), {secs:.1f} s (< 600 s)")


def criterion_11():
    grids = [
        sc.GridSpec("phi_sq_diff", alpha_range=(0.1, 0.9, 0.2), n_list=(5, 52),
                    angle_range=(0, 2 * PI / 3, PI / 16)),
        sc.GridSpec("theorem3", alpha_range=(1 / 3, 0.9, 0.1), n_list=(27, 40), x_range=(0.5, 1.0, 0.05)),
        sc.GridSpec("brannan", alpha_range=(0.02, 0.98, 0.08), n_list=(2, 9, 26), angle_range=(0, PI, PI / 64)),
        sc.GridSpec("lemma5b", alpha_range=(0.2, 0.8, 0.3), n_list=(27,), angle_range=(PI / 2, 2 * PI / 3, PI / 24),
                    variant="proof_12_25"),
    ]
    same = 0
    for g in grids:
        one = sc.render_json(sc.scan(g, threads=1), include_cells=True)
        many = sc.render_json(sc.scan(g, threads=8), include_cells=True)
        same += one == many
    return same == len(grids), f"1 vs 8 threads: {same}/{len(grids)} JSON reports byte-identical"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11]


@pytest.mark.parametrize("number", range(1, 12))
def test_criterion(number):
    ok, detail = CRITERIA[number - 1]()
    report(number, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    results = []
    for i, fn in enumerate(CRITERIA, start=1):
        ok, detail = fn()
        report(i, ok, detail)
        results.append(ok)
    sys.exit(0 if all(results) else 1)
