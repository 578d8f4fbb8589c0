import math
import re
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from annni_battery.errors import DomainError
from annni_battery.svg import Band, Series, emit_figure_svg, nice_ticks, render_svg

GOLDEN = Path(__file__).parent / "data" / "golden_sweep.svg"
NS = "{http://www.w3.org/2000/svg}"


def golden_figure():
    xs = [0.0, 0.25, 0.5, 0.75, 1.0]
    return render_svg(
        [Series("P_max/L", xs, [0.002, 0.004, 0.011, 0.006, 0.002])],
        bands=[Band(0.225, 0.325, "H1 to H0 critical")],
        xlabel="kappa", ylabel="P_max/L",
    )


def polyline_points(svg):
    root = ET.fromstring(svg)
    lines = root.findall(f"{NS}polyline")
    return [[tuple(map(float, p.split(","))) for p in pl.get("points").split()] for pl in lines]


def test_golden_file():
    assert golden_figure() == GOLDEN.read_text()


def test_deterministic():
    assert golden_figure() == golden_figure()


def test_well_formed_with_one_polyline_per_series():
    svg = golden_figure()
    root = ET.fromstring(svg)
    assert root.tag == f"{NS}svg"
    (points,) = polyline_points(svg)
    assert len(points) == 5
    assert len(root.findall(f"{NS}rect[@class='band']")) == 1


def test_geometry_monotone_in_data():
    (points,) = polyline_points(golden_figure())
    xs = [p[0] for p in points]
    assert xs == sorted(xs)
    # SVG y grows downward: the tallest value has the smallest y
    ys = [p[1] for p in points]
    assert ys.index(min(ys)) == 2


def test_two_series():
    svg = render_svg([Series("a", [0, 1], [0, 1]), Series("b", [0, 1], [1, 0])])
    assert len(polyline_points(svg)) == 2


def test_nan_points_skipped():
    (points,) = polyline_points(render_svg([Series("a", [0, 1, 2], [0, math.nan, 1])]))
    assert len(points) == 2


def test_degenerate_range_is_padded():
    (points,) = polyline_points(render_svg([Series("flat", [0, 1, 2], [3.0, 3.0, 3.0])]))
    ys = {p[1] for p in points}
    assert len(ys) == 1 and all(math.isfinite(y) for y in ys)


def test_text_is_escaped():
    svg = render_svg([Series("a<b & c", [0, 1], [0, 1])], title="<x>")
    ET.fromstring(svg)
    assert "a&lt;b &amp; c" in svg


@pytest.mark.parametrize(
    "series",
    [[], [Series("one", [0.0], [1.0])], [Series("nan", [0.0, 1.0], [math.nan, math.nan])]],
)
def test_rejects_empty(series):
    with pytest.raises(DomainError):
        render_svg(series)


def test_length_mismatch():
    with pytest.raises(DomainError):
        Series("x", [0, 1], [0])


def test_nice_ticks():
    assert nice_ticks(0.0, 1.0) == [0.0, 0.2, 0.4, 0.6000000000000001, 0.8, 1.0]
    ticks = nice_ticks(0.2, 2.0)
    assert ticks[0] >= 0.2 and ticks[-1] <= 2.0 and len(ticks) >= 4


def test_band_outside_range_dropped():
    svg = render_svg([Series("a", [0, 1], [0, 1])], bands=[Band(2.0, 3.0)])
    assert 'class="band"' not in svg


def test_emit_writes_file(tmp_path):
    path = emit_figure_svg([Series("a", [0, 1], [0, 1])], tmp_path / "sub" / "f.svg", xlabel="x")
    assert re.search(r"<polyline", path.read_text())
