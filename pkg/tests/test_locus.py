import csv
import io

import numpy as np
import pytest

from hopfwatt import locus
from hopfwatt.hopf import HopfError
from hopfwatt.wgss import g1_polynomial


def test_classify_codim():
    assert locus.classify_codim((0.1, 1.0)) == 1
    assert locus.classify_codim((1e-9, 0.3, 1.0)) == 2
    assert locus.classify_codim((0.0, 0.0, 0.0, -3.7)) == 4


def test_scan_rows_csv_and_agreement():
    scan = locus.scan_l1_surface((0.3, 0.9), (0.2, 1.5), (0.0, 0.5), (2, 2, 2), order=1, workers=1)
    rows = list(csv.reader(io.StringIO(scan.to_csv())))
    assert rows[0][:8] == list(locus.CSV_COLUMNS)
    assert len(rows) == 9
    agree, total = scan.ladder_agreement()
    assert agree == total == 8


def test_parallel_scan_matches_serial():
    kw = dict(beta_range=(0.5, 0.95), alpha_range=(0.3, 1.2), kappa_range=(0.0, 0.6), shape=(4, 3, 2), order=2)
    a = locus.scan_l1_surface(workers=1, **kw)
    b = locus.scan_l1_surface(workers=2, **kw)
    assert a.to_csv() == b.to_csv()


def test_mesh_vertices_lie_on_l1_zero():
    scan = locus.scan_l1_surface((0.5, 0.95), (0.3, 1.5), (0.0, 0.8), (12, 6, 3), order=0, workers=1)
    assert scan.vertices and scan.faces
    for b, a, k in scan.vertices:
        assert abs(g1_polynomial(b, a, k)) < 1e-9
    mesh = scan.mesh_json()
    assert all(max(f) < len(mesh["vertices"]) for f in mesh["faces"])


def test_traced_points_satisfy_both_conditions():
    pts = locus.trace_l2_zero_curve(locus.SEEDS["C2"], [0.0, 0.1, 0.2])
    assert [p.kappa for p in pts] == [0.0, 0.1, 0.2]
    for p in pts:
        assert abs(p.l[0]) < 1e-9 and abs(p.l[1]) < 1e-9
        assert p.codim == 3


def test_codim4_point_is_regular():
    point, report = locus.find_codim4_point()
    assert point.codim == 4
    assert point.l[3] < 0
    assert report.regular
    assert report.crossing_speed < 0
    assert report.as_dict()["variables"] == ["beta", "kappa", "alpha"]


def test_newton_failure_carries_history():
    with pytest.raises(locus.NewtonDivergence) as info:
        locus.find_codim4_point(dict(kappa=0.1, beta=0.3, alpha=0.2), max_iter=5)
    assert len(info.value.history) >= 1


def test_degenerate_seed_reports_math_error():
    with pytest.raises((locus.NewtonDivergence, HopfError)):
        locus.curve_point(0.5, 0.2, 3.0)


@pytest.mark.parametrize("beta,label", [(0.71, "S1"), (0.8, "U1"), (0.95, "S2")])
def test_l2_regions_on_l1_surface(beta, label):
    c1, c2 = 0.71770, 0.90042  # curve betas at kappa = 0.5
    p = locus.surface_point(beta, 0.5)
    assert abs(p.l[0]) < 1e-12
    assert locus.l2_region(p, c1, c2) == label
    assert np.sign(p.l[1]) == (1 if label == "U1" else -1)


def test_l2_changes_sign_at_the_curves():
    c1 = locus.curve_point(0.5, 0.71770, 0.42968)
    c2 = locus.curve_point(0.5, 0.90042, 0.97602)
    below = [locus.surface_point(c1.beta - d, 0.5).l[1] for d in (1e-3, 5e-3)]
    above = [locus.surface_point(c2.beta + d, 0.5).l[1] for d in (1e-3, 5e-3)]
    between = locus.surface_point(0.5 * (c1.beta + c2.beta), 0.5).l[1]
    assert max(below) < 0 < between and max(above) < 0


def test_workers_env(monkeypatch):
    monkeypatch.setenv("HOPFWATT_WORKERS", "3")
    assert locus.default_workers() == 3


def test_curves_json_schema():
    pts = {"C2": locus.trace_l2_zero_curve(locus.SEEDS["C2"], [0.0])}
    text = locus.curves_json(pts)
    assert '"schema": "hopfwatt.curves/1"' in text
