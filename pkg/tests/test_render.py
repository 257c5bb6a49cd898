import xml.etree.ElementTree as ET

import pytest

from slitsurf.end_space import parse_descriptor
from slitsurf.render import RenderError, Window, parse_window, render_svg
from slitsurf.surface_complex import ComplexBuilder, add_plane, empty_complex, icosagon_surgery
from slitsurf.tree_grafting import graft

NS = "{http://www.w3.org/2000/svg}"


def two_planes():
    b = ComplexBuilder()
    b.add_plane("A").add_plane("B")
    b.slit("a", "A", (0, 0), (1, 0))
    b.slit("b", "B", (0, 0), (1, 0))
    return b.glue("a", "b").freeze()


def test_two_planes_two_panels_one_color_pair():
    root = ET.fromstring(render_svg(two_planes()))
    panels = root.findall(f"{NS}g")
    assert [p.get("id") for p in panels] == ["A", "B"]
    colors = [ln.get("stroke") for p in panels for ln in p.findall(f"{NS}line")]
    assert len(colors) == 2 and len(set(colors)) == 1
    labels = [t.text for p in panels for t in p.findall(f"{NS}text")]
    assert labels.count("4π") == 4


def test_graft_window_shows_ladder():
    c = graft(parse_descriptor("w+1"), 3, 4)
    svg = render_svg(c, parse_window("P0", "0..20", "-2..2"))
    root = ET.fromstring(svg)
    [panel] = root.findall(f"{NS}g")
    names = {t.text for t in panel.findall(f"{NS}text")}
    assert {"s(0,0)", "t(0,0)", "t'(0,0)", "s(0,1)", "t(0,3)"} <= names


def test_icosagon_outline_with_pairing_marks():
    c = icosagon_surgery(add_plane(empty_complex(), "P"), "P", (0, 0))
    root = ET.fromstring(render_svg(c))
    [panel] = root.findall(f"{NS}g")
    assert len(panel.findall(f"{NS}line")) == 20
    marks = [t.text for t in panel.findall(f"{NS}text") if t.get("fill") == "#555555"]
    assert sorted(marks) == sorted([str(j) for j in range(10)] * 2)


def test_deterministic():
    c = graft(parse_descriptor("w^2+1"), 4, 4)
    assert render_svg(c) == render_svg(c)


def test_empty_window_rejected():
    with pytest.raises(RenderError, match="empty window"):
        render_svg(two_planes(), Window(planes=()))
    with pytest.raises(RenderError, match="unknown plane"):
        render_svg(two_planes(), Window(planes=("Z",)))
    with pytest.raises(RenderError):
        render_svg(empty_complex())
    with pytest.raises(RenderError):
        parse_window(x="3..1")
