import json
import math
import os

import pytest
from hypothesis import given
from hypothesis import strategies as st

from brannan import scanner as sc
from brannan.errors import DomainError, IoError, UnknownCheck
from brannan.quadrature import QuadratureSpec

PI = math.pi


def brannan_grid(**kw):
    base = dict(check="brannan", alpha_range=(0.1, 0.9, 0.2), n_list=(2, 5), angle_range=(0, PI, PI / 8))
    base.update(kw)
    return sc.GridSpec(**base)


@pytest.mark.parametrize("r,count,last", [
    ((0.0, 1.0, 0.25), 5, 1.0),
    ((0.0, 1.0, 0.3), 4, 0.8999999999999999),
    ((0.5, 0.5, 1.0), 1, 0.5),
    ((0.0, PI, PI / 256), 257, PI),
    ((0.02, 0.98, 0.04), 25, 0.98),
    ((0.0, 1.0, 0.005), 201, 1.0),
    ((PI / 2, 2 * PI / 3, (2 * PI / 3 - PI / 2) / 200), 201, 2 * PI / 3),
])
def test_range_points(r, count, last):
    pts = sc.range_points(r)
    assert len(pts) == count
    assert pts[0] == r[0]
    assert pts[-1] == pytest.approx(last, abs=1e-15)


@pytest.mark.parametrize("r", [(1.0, 0.0, 0.1), (0.0, 1.0, 0.0), (0.0, 1.0, -1.0), (0.0, math.inf, 1.0)])
def test_range_validation(r):
    with pytest.raises(DomainError):
        sc.range_points(r)


def test_single_cell_scan():
    g = sc.GridSpec("brannan", alpha_range=(0.5, 0.5, 1), n_list=[2], angle_range=(0, 0, 1))
    rep = sc.scan(g)
    assert rep.cells_evaluated == 1
    assert rep.min_margin == 0.0
    assert rep.argmin == {"index": 0, "n": 2, "alpha": 0.5, "angle_or_x": 0.0}
    assert rep.violations == ()


def test_known_regime_scan():
    g = sc.GridSpec("brannan", alpha_range=(0.02, 0.98, 0.04), n_list=[2, 11, 26],
                    angle_range=(0, PI, PI / 256))
    rep = sc.scan(g, threads=4)
    assert rep.cells_evaluated == 3 * 25 * 257
    assert rep.min_margin >= -1e-12
    assert not rep.violations


def test_lemma4_full_box():
    g = sc.GridSpec("lemma4", t_range=(0, 1, 0.005),
                    angle_range=(PI / 2, 2 * PI / 3, (2 * PI / 3 - PI / 2) / 200))
    rep = sc.scan(g)
    assert rep.cells_evaluated == 201 * 201
    assert rep.violations == ()
    assert rep.min_margin > 0


def test_cell_count_and_order():
    g = brannan_grid()
    rep = sc.scan(g)
    assert rep.cells_evaluated == 2 * 5 * 9
    assert [c.index for c in rep.cells] == list(range(90))
    assert rep.cells[0].n == 2 and rep.cells[-1].n == 5
    assert rep.cells[1].angle_or_x == pytest.approx(PI / 8)


def test_min_margin_matches_cells():
    rep = sc.scan(brannan_grid())
    assert rep.min_margin == min(c.margin for c in rep.cells)
    first = next(c for c in rep.cells if c.margin == rep.min_margin)
    assert rep.argmin["index"] == first.index


@given(st.permutations([2, 5, 9, 14]))
def test_n_order_does_not_matter(perm):
    a = sc.scan(brannan_grid(n_list=perm))
    b = sc.scan(brannan_grid(n_list=[2, 5, 9, 14]))
    assert sc.render_json(a) == sc.render_json(b)


@pytest.mark.parametrize("threads", [2, 8])
def test_thread_count_does_not_change_report(threads):
    g = sc.GridSpec("phi_sq_diff", alpha_range=(0.2, 0.8, 0.3), n_list=[3, 8], angle_range=(0, 2.0, 0.5))
    one = sc.render_json(sc.scan(g, threads=1), include_cells=True)
    many = sc.render_json(sc.scan(g, threads=threads), include_cells=True)
    assert one == many


def test_near_violations_contain_violations():
    g = sc.GridSpec("theorem3", alpha_range=(0.4, 0.4, 1), n_list=[27], x_range=(0.5, 1, 0.25),
                    near_violation_threshold=10.0)
    rep = sc.scan(g)
    assert len(rep.near_violations) == 3
    assert rep.violations == ()


def test_failures_are_recorded_not_raised():
    # lemma 3 is only defined up to pi/2, so the theta = 2 cell fails
    g = sc.GridSpec("lemma3a", alpha_range=(0.5, 0.5, 1), n_list=[27], angle_range=(1.0, 2.0, 0.5))
    rep = sc.scan(g)
    assert rep.cells_evaluated == 3
    bad = [p for p, m in rep.violations]
    assert len(bad) == 1 and bad[0]["index"] == 2 and all("DomainError" in p["reason"] for p in bad)
    assert math.isfinite(rep.min_margin)
    assert '"margin":null' in sc.render_json(rep)


@pytest.mark.parametrize("kw", [
    dict(check="brannan", alpha_range=(0.1, 0.2, 0.1), n_list=[2], x_range=(0.5, 1, 0.1)),
    dict(check="theorem3", alpha_range=(0.4, 0.5, 0.1), n_list=[27], angle_range=(0, 1, 0.1)),
    dict(check="brannan", alpha_range=(0.1, 0.2, 0.1), n_list=[], angle_range=(0, 1, 0.1)),
    dict(check="brannan", alpha_range=(0.1, 0.2, 0.1), n_list=[2, 2], angle_range=(0, 1, 0.1)),
    dict(check="lemma4", alpha_range=(0.1, 0.2, 0.1), angle_range=(1.6, 2, 0.1)),
    dict(check="brannan", alpha_range=(0.1, 0.2, 0.1), n_list=[2], angle_range=(0, 1, 0.1),
         near_violation_threshold=0.0),
    dict(check="lemma5a", alpha_range=(0.1, 0.2, 0.1), n_list=[27], angle_range=(1.6, 2, 0.1),
         variant="proof_form"),
])
def test_grid_validation(kw):
    with pytest.raises(DomainError):
        sc.GridSpec(**kw)


def test_unknown_check():
    with pytest.raises(UnknownCheck):
        sc.GridSpec("lemma9", alpha_range=(0.1, 0.2, 0.1), n_list=[2], angle_range=(0, 1, 0.1))


def test_json_schema_and_round_trip(tmp_path):
    rep = sc.scan(brannan_grid())
    path = tmp_path / "r.json"
    sc.emit(rep, "json", path)
    data = json.loads(path.read_text())
    assert data["violations"] == []
    assert data["min_margin"] == rep.min_margin
    assert data["cells_evaluated"] == 90
    assert data["quadrature"]["abs_tol"] == 1e-10
    assert "wall_time_seconds" not in data
    timed = json.loads(sc.render_json(rep, include_timing=True))
    assert timed["wall_time_seconds"] >= 0


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_number_format_round_trips(x):
    assert float(sc.fmt_number(x)) == x


def test_csv_single_cell(capsys):
    g = sc.GridSpec("brannan", alpha_range=(0.5, 0.5, 1), n_list=[2], angle_range=(PI, PI, 1))
    sc.emit(sc.scan(g), "csv")
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "check,n,alpha,angle_or_x,lhs,rhs,margin,error_estimate"
    assert len(lines) == 2
    fields = lines[1].split(",")
    assert fields[:2] == ["brannan", "2"]
    assert float(fields[6]) == pytest.approx(1.125)


def test_emit_human_and_bad_format(capsys):
    rep = sc.scan(brannan_grid())
    sc.emit(rep, "human")
    assert "cells evaluated  90" in capsys.readouterr().out
    with pytest.raises(DomainError):
        sc.emit(rep, "xml")


def test_emit_io_error(tmp_path):
    rep = sc.scan(brannan_grid())
    with pytest.raises(IoError):
        sc.emit(rep, "json", tmp_path / "missing" / "r.json")
    assert os.listdir(tmp_path) == []


def test_emit_atomic_overwrite(tmp_path):
    path = tmp_path / "r.csv"
    path.write_text("old")
    sc.emit(sc.scan(brannan_grid()), "csv", path)
    assert path.read_text().startswith("check,")
    assert sorted(os.listdir(tmp_path)) == ["r.csv"]


def test_quadrature_echo():
    q = QuadratureSpec(abs_tol=1e-9, rel_tol=1e-8, max_levels=10)
    rep = sc.scan(sc.GridSpec("conjecture", alpha_range=(0.1, 0.1, 1), n_list=[27], x_range=(0.5, 0.5, 1)), q)
    assert json.loads(sc.render_json(rep))["quadrature"]["max_levels"] == 10
