import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stabhull.cli import EXIT_INFINITE, EXIT_NONCONVERGENCE, EXIT_OK, EXIT_PARSE, main
from stabhull.geom_core import ConvexObject
from stabhull.io import Instance, ParseError, Result, emit_instance, load_result, parse_instance
from stabhull.svg import render_svg

from conftest import FIXTURES, three_ray_tour_length


def _run(tmp_path, *args, name="out"):
    out = tmp_path / f"{name}.json"
    svg = tmp_path / f"{name}.svg"
    rc = main(list(args) + ["-o", str(out), "--svg", str(svg)])
    res = out.read_text() if out.exists() else None
    pic = svg.read_text() if svg.exists() else None
    return rc, res, pic


def test_parse_examples():
    inst = parse_instance('{"objects":[{"kind":"segment","a":[0,0],"b":[1,0]}]}')
    assert len(inst.objects) == 1 and inst.objects[0].kind == "segment"
    with pytest.raises(ParseError, match="empty instance"):
        parse_instance('{"objects":[]}')
    inst = parse_instance((FIXTURES / "three_rays.json").read_text())
    assert [o.kind for o in inst.objects] == ["ray"] * 3
    # r1 starts on y = 4/5 x + 4/5 and points downward along it
    r1 = inst.objects[0]
    assert math.isclose(r1.pts[0][1], 0.8 * r1.pts[0][0] + 0.8, abs_tol=1e-12)
    assert r1.direction[1] < 0 and math.isclose(r1.direction[1] / r1.direction[0], 0.8)


@pytest.mark.parametrize("text,line,col", [
    ('{"objects": [\n  {"kind": "blob", "p": [0, 0]}\n]}', 2, 3),
    ('{"objects": [\n  {"kind": "point", "p": [0, 0]},\n  {"kind": "segment", "a": [1, 1], "b": [1, 1]}\n]}', 3, 3),
    ('{"objects": [\n  {"kind": "point", "p": [0, 0],}\n]}', 2, 33),
    ('{"objects": [{"kind": "point", "p": [0, 0]}],\n "colour": 1}', 2, 12),
])
def test_parse_errors_carry_position(text, line, col):
    with pytest.raises(ParseError) as ei:
        parse_instance(text)
    assert (ei.value.line, ei.value.column) == (line, col)


@pytest.mark.parametrize("text", [
    '{"objects":[{"kind":"point","p":[NaN,0]}]}',
    '{"objects":[{"kind":"point","p":[Infinity,0]}]}',
    '{"objects":[{"kind":"point","p":[1e999,0]}]}',
    '{"objects":[{"kind":"point","p":[0,0],"q":1}]}',
    '{"objects":[{"kind":"ray","origin":[0,0],"direction":[0,0]}]}',
    '{"objects":[{"kind":"point","p":[0,0]}],"config":{"speed":2}}',
    '{"objects":[{"kind":"point","p":[0,0]}],"schema":"stabhull/2"}',
    '[1, 2]',
])
def test_parse_rejects(text):
    with pytest.raises(ParseError):
        parse_instance(text)


coord = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
pt = st.tuples(coord, coord)


@st.composite
def objects(draw):
    kind = draw(st.sampled_from(["point", "segment", "ray", "line", "polygon"]))
    if kind == "point":
        return ConvexObject.point(draw(pt))
    a = np.array(draw(pt))
    d = np.array(draw(pt))
    if np.hypot(*d) < 1e-3:
        d = np.array([1.0, 0.0])
    if kind == "segment":
        return ConvexObject.segment(a, a + d)
    if kind == "ray":
        return ConvexObject.ray(a, d)
    if kind == "line":
        return ConvexObject.line(a, d)
    r = draw(st.floats(0.1, 10))
    k = draw(st.integers(3, 7))
    ang = np.linspace(0, 2 * np.pi, k, endpoint=False)
    return ConvexObject.polygon(a + r * np.c_[np.cos(ang), np.sin(ang)])


@settings(max_examples=60, deadline=None)
@given(st.lists(objects(), min_size=1, max_size=5),
       st.dictionaries(st.sampled_from(["tol", "eps"]), st.floats(1e-9, 0.9)))
def test_round_trip(objs, config):
    inst = Instance(objs, config)
    back = parse_instance(emit_instance(inst))
    assert back.config == config
    assert len(back.objects) == len(objs)
    for a, b in zip(objs, back.objects):
        assert a.kind == b.kind
        assert np.allclose(a.pts, b.pts, atol=1e-9)
        if a.kind in ("ray", "line"):
            assert np.allclose(a.direction / np.hypot(*a.direction),
                               b.direction / np.hypot(*b.direction), atol=1e-12)


def test_perimeter_and_exact_on_triangle(tmp_path):
    tri = str(FIXTURES / "triangle.json")
    rc, out, svg = _run(tmp_path, "perimeter", "--eps", "0.25", "-i", tri)
    assert rc == EXIT_OK
    res = json.loads(out)
    assert res["status"] == "ok" and 1.5 - 1e-9 <= res["value"] <= 1.875
    rc, out, _ = _run(tmp_path, "exact", "-i", tri)
    assert rc == EXIT_OK and abs(json.loads(out)["value"] - 1.5) <= 1e-6
    # result files re-verify against the instance on load
    inst = parse_instance((FIXTURES / "triangle.json").read_text())
    assert load_result(out, inst).objective == "perimeter"
    assert svg.count("<path ") == 1


def test_exact_on_common_point(tmp_path):
    rc, out, _ = _run(tmp_path, "exact", "-i", str(FIXTURES / "common_point.json"))
    assert rc == EXIT_OK and abs(json.loads(out)["value"]) <= 1e-12


def test_tpp_three_rays(tmp_path):
    app = str(FIXTURES / "three_rays.json")
    rc, out, _ = _run(tmp_path, "tpp", "-i", app, "--order", "1,2,3", "--eps-ray", "0.05")
    assert rc == EXIT_OK
    assert abs(json.loads(out)["value"] - three_ray_tour_length(0.05)) <= 1e-6
    rc, out, _ = _run(tmp_path, "tpp", "-i", app, "--order", "1,2,3", "--eps-ray", "0.05", "--pseudo")
    assert rc == EXIT_OK and abs(json.loads(out)["value"] - 2.1) <= 1e-6


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"objects": [')
    assert main(["perimeter", "-i", str(bad)]) == EXIT_PARSE
    assert main(["perimeter", "-i", str(tmp_path / "missing.json")]) == EXIT_PARSE
    poly = tmp_path / "poly.json"
    poly.write_text(json.dumps({"objects": [{"kind": "polygon", "vertices": [[0, 0], [1, 0], [0, 1]]},
                                            {"kind": "point", "p": [3, 3]}]}))
    assert main(["exact", "-i", str(poly)]) == EXIT_PARSE
    assert main(["tpp", "-i", str(poly), "--order", "1"]) == EXIT_PARSE
    assert main(["tpp", "-i", str(FIXTURES / "three_rays.json"), "--order", "1,9"]) == EXIT_PARSE
    # parallel lines have no bounded intersecting polygon
    par = tmp_path / "par.json"
    par.write_text(json.dumps({"objects": [{"kind": "line", "point": [0, 0], "direction": [1, 0]},
                                           {"kind": "line", "point": [0, 1], "direction": [1, 0]},
                                           {"kind": "point", "p": [0, 5]}]}))
    rc, out, svg = _run(tmp_path, "perimeter", "-i", str(par), "--eps", "0.5", name="par")
    assert rc in (EXIT_OK, EXIT_INFINITE)


def test_nonconvergence_exit_code(monkeypatch):
    import stabhull.tpp_halfplanes as tpp

    def stuck(*a, **k):
        raise tpp.TourNonConvergence("tour solver hit its iteration cap", None)

    monkeypatch.setattr(tpp, "tour", stuck)
    rc = main(["tpp", "-i", str(FIXTURES / "three_rays.json"), "--order", "1,2,3", "--eps-ray", "0.05"])
    assert rc == EXIT_NONCONVERGENCE


def test_infinite_result_draws_banner():
    inst = Instance([ConvexObject.ray((0, 0), (1, 0)), ConvexObject.ray((0, 1), (1, 0))])
    svg = render_svg(Result("infinite", "perimeter", math.inf, None, {}), inst)
    assert "no solution" in svg and "<path" not in svg


def test_svg_triangle_has_three_vertices(tmp_path):
    _, _, svg = _run(tmp_path, "exact", "-i", str(FIXTURES / "triangle.json"))
    d = svg.split('<path id="solution" d="')[1].split('"')[0]
    assert d.count("M") + d.count("L") == 3 and d.endswith("Z")


def test_svg_golden(tmp_path):
    inst = parse_instance((FIXTURES / "triangle.json").read_text())
    res = Result("ok", "perimeter", 1.5,
                 np.array([[0.5, 0.0], [0.75, 0.4330127018922193], [0.25, 0.4330127018922193]]),
                 {0: (0.5, 0.0), 1: (0.75, 0.4330127018922193), 2: (0.25, 0.4330127018922193)})
    svg = render_svg(res, inst)
    golden = (FIXTURES / "triangle_golden.svg").read_text()
    assert svg == golden


@pytest.mark.parametrize("args", [
    ["perimeter", "--eps", "0.25", "-i", str(FIXTURES / "triangle.json")],
    ["area", "--eps", "0.25", "-i", str(FIXTURES / "triangle.json")],
    ["exact", "-i", str(FIXTURES / "common_point.json")],
    ["tpp", "--order", "1,2,3", "--eps-ray", "0.05", "-i", str(FIXTURES / "three_rays.json")],
])
def test_byte_identical_across_runs_and_threads(tmp_path, args):
    a = _run(tmp_path, *args, "--threads", "1", name="a")
    b = _run(tmp_path, *args, "--threads", "1", name="b")
    c = _run(tmp_path, *args, "--threads", "8", name="c")
    assert a[0] == EXIT_OK
    assert a == b == c
