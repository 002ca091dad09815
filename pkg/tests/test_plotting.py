import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from metacare.harness import ExpectedRegretCurve
from metacare.plotting import EmptyInput, Series, render_svg, series_vs_N, series_vs_T

NS = "{http://www.w3.org/2000/svg}"


def curve(learner, n, cps, mean, mech="alternating"):
    return ExpectedRegretCurve(learner, mech, n, 2, 0, np.array(cps), np.array(mean, float),
                               np.zeros(len(cps)), 1)


def polylines(svg):
    return ET.fromstring(svg.encode()).findall(f"{NS}polyline")


def test_two_point_series():
    svg = render_svg([Series("a", np.array([1.0, 100.0]), np.array([1.0, 10.0]))], xlabel="T")
    lines = polylines(svg)
    assert len(lines) == 1
    assert len(lines[0].get("points").split()) == 2


def test_three_learners_three_polylines():
    cs = [curve(name, 16, [1, 10, 100], [0.5, 3, 9]) for name in ("dhedge", "ftrl-care", "meta-care")]
    svg = render_svg(series_vs_T(cs), xlabel="T")
    assert len(polylines(svg)) == 3
    for name in ("dhedge", "ftrl-care", "meta-care"):
        assert name in svg


def test_svg_header_and_determinism():
    cs = [curve("dhedge", 16, [1, 10, 100], [0.5, 3, 9])]
    a = render_svg(series_vs_T(cs), xlabel="T", title="x & y")
    b = render_svg(series_vs_T(cs), xlabel="T", title="x & y")
    assert a == b
    root = ET.fromstring(a.encode())
    assert root.get("viewBox") == "0 0 1000 700" and root.get("version") == "1.1"
    assert "x &amp; y" in a


def test_log_axes_positions():
    # points one decade apart are equally spaced on both axes
    svg = render_svg([Series("a", np.array([1.0, 10.0, 100.0]), np.array([1.0, 10.0, 100.0]))], xlabel="T")
    pts = [tuple(map(float, p.split(","))) for p in polylines(svg)[0].get("points").split()]
    dx = [pts[1][0] - pts[0][0], pts[2][0] - pts[1][0]]
    dy = [pts[1][1] - pts[0][1], pts[2][1] - pts[1][1]]
    assert dx[0] == pytest.approx(dx[1], abs=0.02) and dy[0] == pytest.approx(dy[1], abs=0.02)
    assert dy[0] < 0  # larger values are drawn higher


def test_nonpositive_dropped_and_empty():
    svg = render_svg([Series("a", np.array([1.0, 2.0, 3.0]), np.array([0.0, 1.0, 2.0]))], xlabel="T")
    assert len(polylines(svg)[0].get("points").split()) == 2
    with pytest.raises(EmptyInput):
        render_svg([Series("a", np.array([1.0]), np.array([-1.0]))], xlabel="T")


def test_series_vs_n():
    cs = [curve(name, n, [10, 100], [n, 2 * n]) for name in ("dhedge", "ftrl-care") for n in (4, 16, 256)]
    ss = series_vs_N(cs)
    assert [s.label for s in ss] == ["dhedge T=100", "ftrl-care T=100"]
    assert ss[0].x.tolist() == [2.0, 4.0, 8.0]
    assert ss[0].y.tolist() == [8.0, 32.0, 512.0]
    assert len(series_vs_N(cs, [10, 100])) == 4
    svg = render_svg(ss, xlabel="log2 N")
    assert re.search(r">log2 N<", svg)
