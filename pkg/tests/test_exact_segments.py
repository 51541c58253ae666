import math

import numpy as np
import pytest

import stabhull.exact_segments as ex
from stabhull.exact_segments import (
    dp_exact,
    o_star,
    psi_prefix_sets,
    solve_exact,
    subroutine_I,
    subroutine_II,
    three_ray_angles,
)
from stabhull.fptas_perimeter import solve_perimeter
from stabhull.geom_core import ConvexObject, intersects
from stabhull.oracle import oracle_perimeter

from conftest import random_segments, segment_instances


def test_subroutine_II_examples():
    val, W = subroutine_II((0, 0), (0, 0), [ConvexObject.segment((1, -1), (1, 1))])
    assert math.isclose(val, 2.0, abs_tol=1e-9)
    assert np.allclose(W.max(axis=0), (1, 0), atol=1e-7)
    val, W = subroutine_II((0, 0), (0, 0), [ConvexObject.segment((1, 2), (1, 3))])
    assert math.isinf(val) and W is None


def test_subroutine_II_matches_hull_oracle():
    # segments above the line through u and v: the best chain is the hull
    # of u, v and one point per segment, minus the edge uv
    rng = np.random.default_rng(0)
    finite = 0
    for _ in range(40):
        u = np.array([rng.uniform(0, 1), -0.2])
        v = np.array([rng.uniform(0, 1), -0.2])
        if u[0] > v[0]:
            u, v = v, u
        objs = [ConvexObject.segment(rng.random(2), rng.random(2)) for _ in range(3)]
        val, W = subroutine_II(u, v, objs)
        if math.isinf(val):
            continue
        ov = oracle_perimeter(objs + [ConvexObject.point(u), ConvexObject.point(v)])
        ref = ov.value - float(np.hypot(*(v - u)))
        assert abs(val - ref) <= 0.005 * ref
        finite += 1
    assert finite >= 3


def test_subroutine_I_triangle(triangle):
    val, poly = subroutine_I(triangle)
    assert abs(val - 1.5) <= 1e-6
    mids = np.array([[0.5, 0.0], [0.75, math.sqrt(3) / 4], [0.25, math.sqrt(3) / 4]])
    for m in mids:
        assert np.min(np.hypot(*(poly.vertices - m).T)) <= 1e-6


def _acute_triangle(rng):
    while True:
        P = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 0.866]]) + rng.normal(size=(3, 2)) * 0.08
        a = [P[(i + 1) % 3] - P[i] for i in range(3)]
        ang = [math.acos(np.dot(-a[i - 1], a[i]) / (np.hypot(*a[i - 1]) * np.hypot(*a[i]))) for i in range(3)]
        if max(ang) < math.pi / 2 - 0.1:
            return P


def test_endpoint_free_optimum_is_the_orthic_triangle():
    # for edges of an acute triangle the shortest inscribed triangle has its
    # vertices at the feet of the altitudes, away from every endpoint
    rng = np.random.default_rng(4)
    for _ in range(5):
        P = _acute_triangle(rng)
        objs = [ConvexObject.segment(P[i], P[(i + 1) % 3]) for i in range(3)]
        a, b, c = (np.hypot(*(P[(i + 1) % 3] - P[i])) for i in range(3))
        e1, e2 = P[1] - P[0], P[2] - P[0]
        area = abs(e1[0] * e2[1] - e1[1] * e2[0]) / 2
        R = a * b * c / (4 * area)
        orthic = 2 * area / R
        heights = [2 * area / s for s in (a, b, c)]
        expect = min(orthic, 2 * min(heights))
        val, _ = subroutine_I(objs)
        assert abs(val - expect) <= 1e-6
        assert abs(solve_exact(objs).value - expect) <= 1e-6


def test_psi_prefix_examples():
    p_bot = np.zeros(2)
    w = np.array([0.0, 1.0])
    far = [ConvexObject.segment((5, 5), (6, 5))]
    ctx = psi_prefix_sets(w, p_bot, far)
    assert ctx.Psi_w == [] and ctx.prefix_sets == [frozenset()]
    two = [ConvexObject.segment((-1, 2), (1, 2.5)), ConvexObject.segment((-1, 3.5), (1, 3))]
    ctx = psi_prefix_sets(w, p_bot, two)
    assert len(ctx.Psi_w) == 2
    assert [len(s) for s in ctx.prefix_sets] == [0, 1, 2]


def test_prefix_sets_match_threshold_definition():
    rng = np.random.default_rng(6)
    for trial in range(20):
        objs = random_segments(200 + trial, 5)
        p_bot = np.array([0.5, -0.3])
        w = rng.random(2)
        ctx = psi_prefix_sets(w, p_bot, objs)
        # direct recomputation: clockwise angle from ρ(w) to each segment
        # line, for segments meeting the ray beyond w
        d = w - p_bot
        ang = {}
        for i, o in enumerate(objs):
            a, b = o.pts
            M = np.column_stack([d, a - b])
            if abs(np.linalg.det(M)) < 1e-14:
                continue
            t, s = np.linalg.solve(M, a - p_bot)
            if t >= 1 and 0 <= s <= 1:
                e = b - a
                th = math.atan2(e[0] * d[1] - e[1] * d[0], e @ d) % math.pi
                ang[i] = th
        assert len(ctx.Psi_w) == len(set(np.round(list(ang.values()), 10)))
        for j, y in enumerate(ctx.Psi_w, start=1):
            want = frozenset(i for i, x in ang.items() if x <= y + 1e-9)
            assert ctx.prefix_sets[j] == want


def test_o_star_crossing_segment_is_member():
    objs = [ConvexObject.segment((-0.5, 1.0), (0.5, 1.0)), ConvexObject.segment((3, 5), (4, 5))]
    got = o_star(np.array([0.0, 2.0]), 0, np.zeros(2), math.pi, 0, objs)
    assert 0 in got
    assert o_star(None, 0, np.zeros(2), math.pi, 0, objs) == frozenset({0, 1})


def test_every_tangent_range_is_sound():
    # any single guess yields a feasible polygon no shorter than the optimum
    for objs in segment_instances(3, 3, 4, seed=9):
        best = solve_exact(objs).value
        Y = ex.endpoints(objs)
        for pb in Y[:3]:
            for ang in three_ray_angles():
                fr = ex._Frame(pb, ang, objs, ex.working_box(objs))
                for j in range(len(fr.Psi) + 1):
                    val, poly = dp_exact(pb, ang, j, objs)
                    if poly is None:
                        continue
                    assert val >= best - 1e-7
                    assert poly.perimeter <= val + 1e-7
                    assert all(intersects(o, poly, 1e-7) for o in objs)


def test_solve_examples(triangle):
    assert abs(solve_exact(triangle).value - 1.5) <= 1e-6
    star = [ConvexObject.segment((-1, -1), (1, 1)), ConvexObject.segment((-1, 1), (1, -1))]
    assert solve_exact(star).value == 0
    par = [ConvexObject.segment((0, 0), (1, 0)), ConvexObject.segment((0, 1), (1, 1)),
           ConvexObject.segment((0.5, -0.5), (0.5, 1.5))]
    sol = solve_exact(par)
    assert abs(sol.value - 2.0) <= 1e-7
    ov = oracle_perimeter(par)
    assert abs(ov.value - 2.0) <= ov.slack + 1e-9
    with pytest.raises(ValueError):
        solve_exact([])
    with pytest.raises(ValueError):
        solve_exact([ConvexObject.polygon([(0, 0), (1, 0), (0, 1)])])


@pytest.mark.parametrize("seed", range(4))
def test_solve_matches_oracle(seed):
    objs = segment_instances(1, 3, 4, seed=40 + seed)[0]
    sol = solve_exact(objs)
    ov = oracle_perimeter(objs)
    assert abs(sol.value - ov.value) <= max(0.005 * ov.value, ov.slack)
    assert all(intersects(o, sol.polygon, 1e-7) for o in objs)


def test_exact_never_above_fptas():
    for objs in segment_instances(3, 3, 4, seed=2):
        e = solve_exact(objs).value
        p = solve_perimeter(objs, 0.5).value
        assert e <= p + 1e-9 and p <= 1.5 * e + 1e-9


def test_prefix_sets_nested_during_solve(monkeypatch):
    seen = []
    orig = ex._Frame.prefix

    def spy(self, w, hits=None):
        ctx = orig(self, w, hits)
        seen.append(ctx.prefix_sets)
        return ctx

    monkeypatch.setattr(ex._Frame, "prefix", spy)
    solve_exact(random_segments(11, 4))
    assert seen
    for sets in seen:
        assert sets[0] == frozenset()
        assert all(a <= b for a, b in zip(sets, sets[1:]))
