import xml.etree.ElementTree as ET

import numpy as np
import pytest

from tdsentropy.core import expand_dominance
from tdsentropy.errors import DomainError, NoDataError
from tdsentropy.estimators import NO_DATA, CurvePoint, EntropyCurve
from tdsentropy.report import (
    curve_features,
    curve_svg,
    moving_average,
    render_svg,
    tds_curves,
)
from tdsentropy.simulate import default_config, generate_panel

from conftest import dataset, measurement

SVG = "{http://www.w3.org/2000/svg}"


def curve(values, flags=None):
    flags = flags or [()] * len(values)
    return EntropyCurve("s", "chao-shen", "active",
                        [CurvePoint(float(t), float(v), f)
                         for t, (v, f) in enumerate(zip(values, flags))])


class TestTdsCurves:
    def test_single_attribute(self):
        grid = expand_dominance(dataset([measurement([(2, 0.0)])]), "s")
        tds = tds_curves(grid)
        assert len(tds.series) == 8
        assert tds.series[2].values == [1.0] * 101
        assert all(s.values == [0.0] * 101 for i, s in enumerate(tds.series)
                   if i != 2)

    def test_chance(self):
        grid = expand_dominance(dataset([measurement([(2, 0.0)])]), "s")
        tds = tds_curves(grid)
        assert tds.chance_level == 0.125
        chance = tds.chance_series()
        assert chance.is_chance and chance.values == [0.125] * 101

    def test_staggered_sum(self):
        ms = [measurement([(i, 10.0 * (i + 1))], panelist=f"p{i}")
              for i in range(3)]
        grid = expand_dominance(dataset(ms), "s")
        total = np.sum([s.values for s in tds_curves(grid).series], axis=0)
        assert np.allclose(total, grid.totals / grid.panel_denominator,
                           atol=1e-15)
        assert np.all(total <= 1)

    def test_simulated_panel_sum(self):
        grid = expand_dominance(generate_panel(default_config(), "s"), "s")
        total = np.sum([s.values for s in tds_curves(grid).series], axis=0)
        assert np.allclose(total, grid.totals / 30, atol=1e-12)


class TestFeatures:
    def test_constant(self):
        f = curve_features(curve([0.4] * 101))
        assert f.h_max == 0.4 and f.tau_argmax == 0.0
        assert not f.rise_then_fall

    def test_tent(self):
        tau = np.arange(101)
        h = np.where(tau <= 50, tau / 50, 1 - 0.5 * (tau - 50) / 50)
        f = curve_features(curve(h))
        assert f.tau_argmax == 50 and f.h_max == 1.0
        assert f.h_swallow == 0.5 and f.h_first == 0.0
        assert f.rise_then_fall

    def test_ties_smallest_tau(self):
        f = curve_features(curve([0.1, 0.6, 0.3, 0.6, 0.2]))
        assert f.tau_argmax == 1

    def test_skips_no_data(self):
        values = [0.0] * 5 + [0.2, 0.7, 0.4]
        flags = [(NO_DATA,)] * 5 + [()] * 3
        f = curve_features(curve(values, flags))
        assert f.first_defined_tau == 5 and f.h_first == 0.2

    def test_appending_no_data_invariant(self):
        base = curve([0.2, 0.7, 0.4])
        more = EntropyCurve("s", "chao-shen", "active",
                            list(base.points) + [CurvePoint(3.0, 0.0, (NO_DATA,))])
        assert curve_features(more) == curve_features(base)

    def test_all_no_data(self):
        with pytest.raises(NoDataError):
            curve_features(curve([0.0] * 3, [(NO_DATA,)] * 3))


class TestMovingAverage:
    def test_constant_unchanged(self):
        pts = curve([0.3] * 11).points
        assert [p.value for p in moving_average(pts, 5)] == \
            pytest.approx([0.3] * 11)

    def test_window(self):
        pts = curve([0, 0, 1, 0, 0]).points
        assert [p.value for p in moving_average(pts, 3)] == \
            pytest.approx([0, 1 / 3, 1 / 3, 1 / 3, 0])

    def test_skips_no_data(self):
        pts = curve([0, 0.6, 0.3], [(NO_DATA,), (), ()]).points
        out = moving_average(pts, 3)
        assert out[0] == pts[0]
        assert out[1].value == pytest.approx(0.45)

    @pytest.mark.parametrize("w", [0, 2, -1])
    def test_window_validation(self, w):
        with pytest.raises(DomainError):
            moving_average(curve([0.1]).points, w)


def polylines(svg):
    root = ET.fromstring(svg.encode("utf-8"))
    return root, root.findall(f".//{SVG}polyline")


class TestRenderSvg:
    def test_one_series(self):
        svg = render_svg([("H", [(0, 0.5), (100, 0.5)])], 1.0, "flat")
        root, lines = polylines(svg)
        assert root.tag == f"{SVG}svg"
        assert len(lines) == 1
        assert "% mastication time" in svg

    def test_deterministic(self):
        series = [("H", [(t, t / 100) for t in range(101)])]
        assert render_svg(series, 1.0, "x") == render_svg(series, 1.0, "x")

    def test_tds_nine_lines(self):
        grid = expand_dominance(generate_panel(default_config(), "s"), "s")
        rates = tds_curves(grid).all_series()
        svg = curve_svg(rates, 1.0, "s", [r.label for r in rates])
        root, lines = polylines(svg)
        assert len(lines) == 9
        legend = root.find(f".//{SVG}g[@class='legend']")
        labels = [t.text for t in legend.findall(f"{SVG}text")]
        assert labels == list(grid.attributes) + ["chance"]
        assert "stroke-dasharray" in ET.tostring(lines[-1]).decode()

    def test_escaping(self):
        svg = render_svg([("a<b & c", [(0, 0.1)])], 0.25, 'x "<y>"')
        polylines(svg)  # parses

    def test_y_axis_scaling(self):
        svg = render_svg([("C", [(0, 0.25), (100, 0.0)])], 0.25, "C")
        _, (line,) = polylines(svg)
        pts = [tuple(map(float, p.split(","))) for p in
               line.get("points").split()]
        assert pts[0][1] == 40.0  # top of the plot area
        assert pts[1][1] == 350.0  # bottom

    def test_errors(self):
        with pytest.raises(DomainError):
            render_svg([], 1.0, "x")
        with pytest.raises(DomainError):
            render_svg([("a", [])], 1.0, "x")
