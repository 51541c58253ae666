import itertools
import math

import numpy as np
import pytest
from scipy.optimize import linprog

from stabhull.geom_core import ConvexObject, intersects, segment_intersections
from stabhull.locate import (
    OrientedRect,
    arrangement_vertices,
    candidate_grids,
    grid_side_count,
    localization_square,
    min_area_ellipse,
    min_perimeter_rect,
)
from stabhull.oracle import oracle_perimeter

from conftest import random_segments


def _sweep_lp(objs, theta):
    """Minimum half-perimeter axis-fixed rectangle in the frame rotated by theta.

    Each segment contributes a parameter t with a + t(b - a) inside the box,
    so the problem is an exact LP; solved with HiGHS.
    """
    c, s = math.cos(theta), math.sin(theta)
    R = np.array([[c, s], [-s, c]])
    n = len(objs)
    A, b = [], []
    for i, o in enumerate(objs):
        p, q = R @ o.pts[0], R @ o.pts[1]
        for ax, (lo, hi) in ((0, (0, 1)), (1, (2, 3))):
            row = np.zeros(4 + n)
            row[lo], row[4 + i] = 1, -(q[ax] - p[ax])
            A.append(row), b.append(p[ax])
            row = np.zeros(4 + n)
            row[hi], row[4 + i] = -1, q[ax] - p[ax]
            A.append(row), b.append(-p[ax])
    cost = np.zeros(4 + n)
    cost[[0, 2]], cost[[1, 3]] = -2, 2
    res = linprog(cost, A_ub=np.array(A), b_ub=b, bounds=[(None, None)] * 4 + [(0, 1)] * n,
                  method="highs")
    return res.fun


def test_rect_two_points():
    objs = [ConvexObject.point((0, 0)), ConvexObject.point((1, 1))]
    R = min_perimeter_rect(objs, 0.01)
    assert R.perimeter <= 4 / math.pi * 1.01 * 2 * math.sqrt(2) + 1e-9
    assert R.perimeter >= 2 * math.sqrt(2) - 1e-9


def test_rect_common_point_is_degenerate():
    objs = [ConvexObject.segment((-1, 0), (1, 0)), ConvexObject.segment((0, -1), (0, 1)),
            ConvexObject.segment((-1, -1), (1, 1))]
    R = min_perimeter_rect(objs, 0.01)
    assert R.perimeter <= 1e-9
    assert np.allclose(R.center, 0, atol=1e-9)


def test_rect_meets_every_object_and_records_witnesses():
    for seed in range(10):
        objs = random_segments(seed, 6)
        R = min_perimeter_rect(objs, 0.05)
        P = R.polygon()
        assert len(R.witnesses) == len(objs)
        for o, w in zip(objs, R.witnesses):
            assert o.distance(w) <= 1e-8
            assert P.contains(w, 1e-8)
            assert intersects(o, P, 1e-8)


def test_rect_within_factor_of_dense_orientation_sweep():
    eps1 = 0.01
    objs = random_segments(1, 5)
    R = min_perimeter_rect(objs, eps1)
    best = min(_sweep_lp(objs, k * (math.pi / 2) / 10 ** 4) for k in range(10 ** 4))
    assert best <= R.perimeter + 1e-9
    assert R.perimeter <= (1 + eps1) * best + 1e-9


def test_rect_within_four_over_pi_of_optimum():
    eps1 = 0.01
    for seed in range(5):
        objs = random_segments(seed, 5)
        R = min_perimeter_rect(objs, eps1)
        ov = oracle_perimeter(objs)
        assert R.perimeter <= 4 / math.pi * (1 + eps1) * (ov.value + ov.slack) + 1e-9


def test_localization_square_examples():
    R = OrientedRect(np.array([2.0, -1.0]), 0.3, 0.5, 0.5)
    S = localization_square(R)
    assert S.side == 12.0 and S.axis_angle == 0.3 and np.array_equal(S.center, R.center)
    seg = OrientedRect(np.zeros(2), 0.0, 1.25, 0.0)
    assert localization_square(seg).side == 6 * 2.5
    for seed in range(10):
        objs = random_segments(seed, 5)
        R = min_perimeter_rect(objs, 0.05)
        S = localization_square(R)
        assert S.side == 3.0 * R.perimeter
        assert math.isclose(S.diameter, 3 * math.sqrt(2) * R.perimeter, rel_tol=1e-9)


def test_arrangement_vertex_counts():
    cross = [ConvexObject.segment((-1, 0), (1, 0)), ConvexObject.segment((0, -1), (0, 1))]
    assert len(arrangement_vertices(cross)) == 5
    apart = [ConvexObject.segment((0, 0), (1, 0)), ConvexObject.segment((0, 1), (1, 1))]
    assert len(arrangement_vertices(apart)) == 4


def test_arrangement_matches_pairwise_enumeration():
    for seed in range(5):
        objs = random_segments(seed, 6)
        X = arrangement_vertices(objs)
        pts = [p for o in objs for p in o.pts]
        for o1, o2 in itertools.combinations(objs, 2):
            (a, b), (c, d) = o1.pts, o2.pts
            M = np.column_stack([b - a, c - d])
            if abs(np.linalg.det(M)) < 1e-14:
                continue
            t, u = np.linalg.solve(M, c - a)
            if 0 <= t <= 1 and 0 <= u <= 1:
                pts.append(a + t * (b - a))
        assert len(X) == len(pts)
        for p in pts:
            assert np.min(np.hypot(*(X - p).T)) <= 1e-9


def _primal_ellipse_area(P):
    """Minimum covering ellipse by SLSQP on the primal: A = L Lᵀ, maximize det L."""
    from scipy.optimize import minimize

    c0 = P.mean(axis=0)
    r0 = np.hypot(*(P - c0).T).max()
    x0 = np.array([c0[0], c0[1], 1 / r0, 0.0, 1 / r0])

    def cons(x):
        L = np.array([[x[2], 0.0], [x[3], x[4]]])
        return 1.0 - np.sum(((P - x[:2]) @ L) ** 2, axis=1)

    res = minimize(lambda x: -math.log(x[2]) - math.log(x[4]), x0, method="SLSQP",
                   constraints=[{"type": "ineq", "fun": cons}],
                   bounds=[(None, None)] * 2 + [(1e-9, None), (None, None), (1e-9, None)],
                   options={"ftol": 1e-15, "maxiter": 1000})
    return math.pi / (res.x[2] * res.x[4])


def test_ellipse_examples():
    tri = np.array([[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]])
    E = min_area_ellipse(tri)
    assert np.allclose(E.center, tri.mean(axis=0), atol=1e-9)
    assert np.allclose(E.semi_axes, 1 / math.sqrt(3), atol=1e-9)
    ang = np.array([0.1, 1.3, 2.0, 3.5, 5.0])
    circ = np.column_stack([2 + 3 * np.cos(ang), -1 + 3 * np.sin(ang)])
    E = min_area_ellipse(circ)
    assert np.allclose(E.center, (2, -1), atol=1e-7) and np.allclose(E.semi_axes, 3, atol=1e-7)
    with pytest.raises(ValueError):
        min_area_ellipse([(0, 0), (1, 1), (2, 2)])


def test_ellipse_matches_primal_solve_and_covers():
    rng = np.random.default_rng(8)
    for _ in range(5):
        P = rng.normal(size=(20, 2))
        E = min_area_ellipse(P)
        assert abs(E.area - _primal_ellipse_area(P)) <= 1e-7 * E.area
        r = np.einsum("ij,jk,ik->i", P - E.center, E.shape_matrix, P - E.center)
        assert r.max() <= 1 + 1e-7
        assert 2 <= len(E.support) <= 5


def test_grid_count_and_resolution():
    assert grid_side_count(0.5, None) == 524288
    assert grid_side_count(0.5, 2048) == 2048
    rng = np.random.default_rng(2)
    X = rng.random((6, 2))
    grids = candidate_grids([], 0.5, k_max=None, X=X)
    assert 0 < len(grids) <= 41
    for g in grids:
        diag = math.hypot(*(np.linalg.inv(g.ellipse.from_unit()) @ g.axes @ np.ones(2)))
        assert diag < 0.5 ** 2 / 2 ** 9
        # support points land on the unit circle of the frame
        S = X[list(g.subset)]
        U = (S - g.ellipse.center) @ g.ellipse.to_unit().T
        assert np.allclose(np.hypot(*U.T), 1, atol=1e-7)


def test_grids_from_segments_and_small_inputs():
    assert candidate_grids([ConvexObject.segment((0, 0), (1, 0))], 0.5) == []
    objs = random_segments(4, 3)
    grids = candidate_grids(objs, 0.5, k_max=64)
    assert grids and all(g.cols == 64 for g in grids)
    with pytest.raises(ValueError):
        candidate_grids(objs, 1.5)
