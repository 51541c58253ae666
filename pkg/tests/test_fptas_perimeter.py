import itertools
import math

import numpy as np
import pytest

from stabhull.geom_core import (
    ConvexObject,
    ConvexPolygon,
    convex_hull,
    convex_sets_intersect,
    intersects,
    working_box,
)
from stabhull.locate import Square
from stabhull.fptas_perimeter import (
    _AnchorTables,
    _Incumbent,
    _shapes,
    angular_order,
    build_grid,
    chain_dp,
    classify_objects,
    dp_perimeter,
    run_anchor_dps,
    solve_perimeter,
)
from stabhull.exact_segments import solve_exact

from conftest import random_segments


def test_build_grid_examples():
    sq = Square(np.zeros(2), 0.0, 12.0)
    g = build_grid(sq, 1.0, 0.5)
    assert g.cols == g.rows == 192 and g.cell_edge <= 1 / 16 + 1e-15
    g8 = build_grid(sq, 1.0, 8.0)
    assert g8.cell_edge <= 1.0 and g8.cols * g8.cell_edge >= 12 - 1e-12
    g3 = build_grid(Square(np.array([1.0, 2.0]), 0.4, 7.0), 0.3, 0.7)
    n = round(7.0 / g3.cell_edge)
    assert g3.point_count == (n + 1) ** 2
    corners = g3.to_plane(np.array([[0, 0], [g3.cols, g3.rows]]))
    assert math.isclose(np.hypot(*(corners[1] - corners[0])), 7 * math.sqrt(2), rel_tol=1e-12)


def test_rounding_to_touched_cells_adds_at_most_a_small_square():
    rng = np.random.default_rng(4)
    for _ in range(20):
        P = convex_hull(rng.uniform(1, 9, size=(int(rng.integers(3, 8)), 2)))
        h = rng.uniform(0.2, 1.0)
        k = int(math.ceil(10 / h))
        corners = []
        for i in range(k):
            for j in range(k):
                cell = ConvexPolygon(h * np.array([[i, j], [i + 1, j], [i + 1, j + 1], [i, j + 1]], float))
                if convex_sets_intersect(P.vertices, cell.vertices, 0.0):
                    corners.extend(cell.vertices)
        H = convex_hull(np.array(corners))
        assert H.perimeter <= P.perimeter + 8 * h + 1e-9


def _vectorized_members(order, objs, v_row, w_col):
    box = working_box(objs)
    tb = _AnchorTables(order, [o.shape(box) for o in objs], 1e-9)
    bits = int(tb.O[v_row, w_col])
    return {i for i in range(len(objs)) if bits >> i & 1}


def test_classification_examples():
    a = np.zeros(2)
    pts = np.array([[1.0, 1.0], [-1.0, 2.0]])
    order = angular_order(a, pts)
    crossing = ConvexObject.segment((0.5, -1.0), (0.5, 2.0))  # crosses a-(1,1)
    far = ConvexObject.segment((5.0, -3.0), (6.0, -3.0))  # right of ρ(w), below the anchor
    objs = [crossing, far]
    w = np.array([1.0, 1.0])
    got = classify_objects(a, w, order, objs)
    assert 0 in got and 1 not in got


def test_classification_scalar_matches_vectorized():
    rng = np.random.default_rng(12)
    checked = 0
    for trial in range(6):
        objs = random_segments(100 + trial, 4)
        pts = rng.integers(0, 6, size=(14, 2)).astype(float) / 5
        pts = np.unique(pts, axis=0)
        a = pts[np.lexsort((pts[:, 0], pts[:, 1]))[0]]
        order = angular_order(a, pts)
        box = working_box(objs)
        tb = _AnchorTables(order, [o.shape(box) for o in objs], 1e-9)
        N = len(order)
        rows = [(N, a)] + [(i, order.vertices[i]) for i in range(N)]
        for vi, v in rows:
            for wi in range(N + 1):
                if wi < N and vi < N and order.groups[wi] <= order.groups[vi]:
                    continue
                w = None if wi == N else order.vertices[wi]
                scalar = classify_objects(v, w, order, objs, 1e-9, box)
                bits = int(tb.O[vi, wi])
                assert scalar == {i for i in range(len(objs)) if bits >> i & 1}, (trial, vi, wi)
                checked += 1
    assert checked > 100


def brute_force(anchor, pts, objs, objective):
    """Best convex polygon on anchor + a subset of pts with the anchor as lowest vertex."""
    best = math.inf
    m = len(pts)
    for r in range(1, m + 1):
        for sub in itertools.combinations(range(m), r):
            H = convex_hull(np.vstack([anchor, pts[list(sub)]]))
            low = H.vertices[np.lexsort((H.vertices[:, 0], H.vertices[:, 1]))[0]]
            if not np.array_equal(low, anchor):
                continue
            val = H.perimeter if objective == "perimeter" else H.area
            if val >= best:
                continue
            if all(intersects(o, H, 1e-9) for o in objs):
                best = val
    return best


def small_case(seed, m=11):
    rng = np.random.default_rng(seed)
    objs = [ConvexObject.segment(rng.uniform(0, 8, 2), rng.uniform(0, 8, 2)) for _ in range(4)]
    P = np.unique(rng.integers(0, 9, size=(m + 4, 2)).astype(float), axis=0)
    rng.shuffle(P)
    P = P[:m + 1]
    a = P[np.lexsort((P[:, 0], P[:, 1]))[0]]
    rest = np.array([p for p in P if not np.array_equal(p, a)])
    return objs, a, rest


@pytest.mark.parametrize("seed", range(8))
def test_dp_perimeter_matches_exhaustive_enumeration(seed):
    objs, a, rest = small_case(seed)
    value, chain = dp_perimeter(angular_order(a, rest), objs)
    expect = brute_force(a, rest, objs, "perimeter")
    if math.isinf(expect):
        assert math.isinf(value)
    else:
        assert math.isclose(value, expect, rel_tol=1e-9, abs_tol=1e-9)
        H = convex_hull(chain)
        assert all(intersects(o, H, 1e-7) for o in objs)


def test_dp_doubled_segment_and_infeasible_anchor():
    objs = [ConvexObject.segment((-1, 1), (1, 1)), ConvexObject.segment((-1, 2), (1, 2))]
    order = angular_order(np.zeros(2), np.array([[0.0, 3.0]]))
    value, chain = dp_perimeter(order, objs)
    assert math.isclose(value, 6.0)
    below = objs + [ConvexObject.segment((-1, -2), (1, -2))]
    value, _ = dp_perimeter(angular_order(np.zeros(2), np.array([[0.0, 3.0], [2.0, 2.0]])), below)
    assert math.isinf(value)


def test_anchor_iteration_order_does_not_change_the_minimum():
    objs, a, rest = small_case(3, m=14)
    U = np.vstack([a, rest])
    shapes = _shapes(objs)
    from stabhull.geom_core import set_distances

    dist = np.column_stack([set_distances(U, S) for S in shapes])
    v1 = run_anchor_dps(U, shapes, dist, "perimeter", _Incumbent(math.inf))
    perm = np.random.default_rng(0).permutation(len(U))
    v2 = run_anchor_dps(U[perm], shapes, dist[perm], "perimeter", _Incumbent(math.inf))
    assert v1[0] == v2[0]


def test_solve_triangle_edges(triangle):
    sol = solve_perimeter(triangle, 0.25)
    assert 1.5 - 1e-9 <= sol.value <= 1.875


def test_solve_common_point():
    objs = [ConvexObject.segment((-1, -1), (1, 1)), ConvexObject.segment((-1, 1), (1, -1))]
    sol = solve_perimeter(objs, 0.25)
    assert sol.value == 0 and sol.method["branch"] == "common_point"


@pytest.mark.parametrize("seed", range(3))
def test_solve_within_factor_of_exact(seed):
    objs = random_segments(seed, 5)
    sol = solve_perimeter(objs, 0.25)
    ex = solve_exact(objs)
    assert ex.value - 1e-9 <= sol.value <= 1.25 * ex.value
    for o, w in zip(objs, sol.witnesses):
        assert o.distance(w) <= 1e-7 and sol.polygon.contains(w, 1e-7)


def test_solve_rejects_bad_input():
    with pytest.raises(ValueError):
        solve_perimeter([], 0.25)
    with pytest.raises(ValueError):
        solve_perimeter(random_segments(0, 3), 1.5)
