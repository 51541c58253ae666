"""Locating an optimum: an approximately optimal rectangle, the square it
induces, arrangement vertices, minimum-area ellipses and the grids built
from them.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .geom_core import (
    TOL,
    ConvexObject,
    ConvexPolygon,
    convex_hull,
    segment_intersections,
    working_box,
)
from .lp import linprog

log = logging.getLogger(__name__)


def _rot(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True, eq=False)
class OrientedRect:
    center: np.ndarray
    axis_angle: float
    half_width: float
    half_height: float
    witnesses: tuple = ()

    @property
    def perimeter(self) -> float:
        return 2.0 * ((2.0 * self.half_width) + (2.0 * self.half_height))

    def corners(self) -> np.ndarray:
        R = _rot(self.axis_angle)
        hw, hh = self.half_width, self.half_height
        loc = np.array([[-hw, -hh], [hw, -hh], [hw, hh], [-hw, hh]])
        return loc @ R.T + self.center

    def polygon(self) -> ConvexPolygon:
        return convex_hull(self.corners())


@dataclass(frozen=True, eq=False)
class Square:
    center: np.ndarray
    axis_angle: float
    side: float

    @property
    def diameter(self) -> float:
        return self.side * math.sqrt(2.0)

    def corners(self) -> np.ndarray:
        R = _rot(self.axis_angle)
        h = 0.5 * self.side
        loc = np.array([[-h, -h], [h, -h], [h, h], [-h, h]])
        return loc @ R.T + self.center


@dataclass(frozen=True, eq=False)
class Ellipse:
    """{x : (x - c)ᵀ Q (x - c) ≤ 1} with semi-axes a ≥ b > 0 rotated by angle."""

    center: np.ndarray
    semi_axes: tuple
    angle: float
    support: tuple = ()

    @property
    def area(self) -> float:
        return math.pi * self.semi_axes[0] * self.semi_axes[1]

    @property
    def shape_matrix(self) -> np.ndarray:
        R = _rot(self.angle)
        a, b = self.semi_axes
        return R @ np.diag([1.0 / (a * a), 1.0 / (b * b)]) @ R.T

    def to_unit(self) -> np.ndarray:
        """Linear part L⁻¹ of the map x ↦ L⁻¹(x - c) onto the unit disk."""
        R = _rot(self.angle)
        a, b = self.semi_axes
        return np.diag([1.0 / a, 1.0 / b]) @ R.T

    def from_unit(self) -> np.ndarray:
        R = _rot(self.angle)
        a, b = self.semi_axes
        return R @ np.diag([a, b])


@dataclass(frozen=True, eq=False)
class GridSpec:
    """Lattice (i, j), 0 ≤ i ≤ cols, 0 ≤ j ≤ rows, mapped by origin + axes @ (i, j)."""

    origin: np.ndarray
    axes: np.ndarray
    cols: int
    rows: int
    ellipse: Optional[Ellipse] = None
    subset: tuple = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if abs(np.linalg.det(self.axes)) <= 0:
            raise ValueError("grid frame is singular")
        if self.cols < 1 or self.rows < 1:
            raise ValueError("grid needs at least one cell per axis")

    def to_plane(self, ij) -> np.ndarray:
        ij = np.asarray(ij, dtype=float)
        return ij @ self.axes.T + self.origin

    def to_lattice(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return (p - self.origin) @ np.linalg.inv(self.axes).T

    @property
    def cell_edge(self) -> float:
        return float(np.hypot(*self.axes[:, 0]))

    @property
    def point_count(self) -> int:
        return (self.cols + 1) * (self.rows + 1)


# ----------------------------------------------------------------------
# rectangle algorithm


def _rect_lp(objects, theta, box):
    """Minimum half-perimeter axis-parallel rectangle in the frame rotated by theta.

    Variables x1, x2, y1, y2 and, per object, the parameters of a witness
    point inside the object; the witness must lie in the rectangle.
    """
    R = _rot(-theta)
    nv = 4
    wit = []  # per object: (base (2,), basis (2, m), bounds list, eq rows)
    for o in objects:
        if o.kind == "point":
            wit.append((R @ o.pts[0], np.zeros((2, 0)), [], None))
        elif o.kind == "segment":
            a, b = R @ o.pts[0], R @ o.pts[1]
            wit.append((a, (b - a).reshape(2, 1), [(0.0, 1.0)], None))
        elif o.kind in ("ray", "line"):
            a, d = R @ o.pts[0], R @ o.direction
            wit.append((a, d.reshape(2, 1), [(0.0 if o.kind == "ray" else None, None)], None))
        else:
            V = o.pts @ R.T
            m = len(V)
            wit.append((np.zeros(2), V.T, [(0.0, None)] * m, "simplex"))
    offsets = []
    for base, B, bnds, _ in wit:
        offsets.append(nv)
        nv += B.shape[1]
    c = np.zeros(nv)
    c[[0, 2]] = -1.0
    c[[1, 3]] = 1.0
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    bounds = [(None, None)] * 4
    for (base, B, bnds, kind), off in zip(wit, offsets):
        bounds += bnds
        m = B.shape[1]
        for axis, (lo_var, hi_var) in enumerate(((0, 1), (2, 3))):
            # lo ≤ base[axis] + B[axis] z ≤ hi
            row = np.zeros(nv)
            row[lo_var] = 1.0
            row[off:off + m] = -B[axis]
            A_ub.append(row)
            b_ub.append(base[axis])
            row = np.zeros(nv)
            row[hi_var] = -1.0
            row[off:off + m] = B[axis]
            A_ub.append(row)
            b_ub.append(-base[axis])
        if kind == "simplex":
            row = np.zeros(nv)
            row[off:off + m] = 1.0
            A_eq.append(row)
            b_eq.append(1.0)
    res = linprog(c, np.array(A_ub), np.array(b_ub),
                  np.array(A_eq) if A_eq else None, np.array(b_eq) if b_eq else None, bounds)
    if res.status != 0:
        return None
    x = res.x
    x1, x2, y1, y2 = x[:4]
    wits = []
    Rb = _rot(theta)
    for (base, B, bnds, kind), off in zip(wit, offsets):
        m = B.shape[1]
        w = base + B @ x[off:off + m]
        w = np.clip(w, [x1, y1], [x2, y2])
        wits.append(Rb @ w)
    return (x2 - x1) + (y2 - y1), (x1, x2, y1, y2), tuple(wits)


def min_perimeter_rect(objects: Sequence[ConvexObject], eps1: float) -> OrientedRect:
    """Best rectangle over ⌈π/(4 eps1)⌉ equally spaced orientations in [0, π/2).

    Rotating the optimal rectangle by at most π/(4K) keeps it inside a
    rectangle at most (1 + eps1) times longer, so the best sampled
    orientation is within 1 + eps1 of the best orientation overall.
    """
    if eps1 <= 0:
        raise ValueError("eps1 must be positive")
    if not objects:
        raise ValueError("empty object list")
    K = max(1, math.ceil(math.pi / (4.0 * eps1)))
    box = working_box(objects)
    best = None
    for k in range(K):
        theta = k * (math.pi / 2.0) / K
        out = _rect_lp(objects, theta, box)
        if out is None:
            continue
        val = out[0]
        if best is None or val < best[0] - 1e-12 * max(1.0, abs(val)):
            best = (val, theta, out[1], out[2])
    if best is None:
        raise RuntimeError("rectangle LP failed for every orientation")
    _, theta, (x1, x2, y1, y2), wits = best
    cx, cy = 0.5 * (x1 + x2), 0.5 * (y1 + y2)
    center = _rot(theta) @ np.array([cx, cy])
    return OrientedRect(center, theta, max(0.0, 0.5 * (x2 - x1)), max(0.0, 0.5 * (y2 - y1)), wits)


def localization_square(R: OrientedRect) -> Square:
    return Square(np.array(R.center, dtype=float), R.axis_angle, 3.0 * R.perimeter)


# ----------------------------------------------------------------------
# arrangement vertices


def _boundary_pieces(o: ConvexObject, box):
    if o.kind == "point":
        return []
    if o.kind == "polygon":
        v = o.pts
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]
    S = o.shape(box)
    if len(S) < 2:
        return []
    return [(S[0], S[1])]


def dedup_points(P, tol: float = TOL) -> np.ndarray:
    out = []
    for p in P:
        if not any(abs(p[0] - q[0]) <= tol and abs(p[1] - q[1]) <= tol for q in out):
            out.append(np.asarray(p, dtype=float))
    return np.array(out).reshape(-1, 2)


def arrangement_vertices(objects: Sequence[ConvexObject], tol: float = TOL) -> np.ndarray:
    """Object vertices plus pairwise boundary intersections, deduplicated."""
    box = working_box(objects)
    pts = [p for o in objects for p in o.defining_vertices()]
    pieces = [_boundary_pieces(o, box) for o in objects]
    for i in range(len(objects)):
        for j in range(i + 1, len(objects)):
            for a, b in pieces[i]:
                for c, d in pieces[j]:
                    pts.extend(segment_intersections(a, b, c, d, tol))
    return dedup_points(pts, tol)


# ----------------------------------------------------------------------
# minimum-area ellipse


def _mvee_weights(P: np.ndarray, tol: float = 1e-12, max_iter: int = 100000):
    """Dual weights of the minimum-volume enclosing ellipse.

    Frank-Wolfe on the log-det dual with away steps: each step moves weight
    toward the point of largest Mahalanobis value, or away from the
    supported point of smallest value, with the exact line-search step.
    """
    n, d = P.shape
    Q = np.hstack([P, np.ones((n, 1))])  # lifted points
    u = np.full(n, 1.0 / n)
    dim = d + 1
    for _ in range(max_iter):
        X = (Q * u[:, None]).T @ Q
        M = np.einsum("ij,jk,ik->i", Q, np.linalg.inv(X), Q)
        j = int(np.argmax(M))
        sup = np.nonzero(u > 0)[0]
        kk = int(sup[np.argmin(M[sup])])
        up = M[j] / dim - 1.0
        down = 1.0 - M[kk] / dim
        if max(up, down) <= tol:
            break
        if up >= down:
            beta = (M[j] - dim) / (dim * (M[j] - 1.0))
            u *= 1.0 - beta
            u[j] += beta
        else:
            beta = (dim - M[kk]) / (dim * (M[kk] - 1.0))
            beta = min(beta, u[kk] / (1.0 - u[kk]))
            u *= 1.0 + beta
            u[kk] -= beta
            u[u < 0] = 0.0
    return u, M


def min_area_ellipse(points, tol: float = 1e-12) -> Ellipse:
    P = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(P) < 3:
        raise ValueError("need at least three points")
    c0 = P.mean(axis=0)
    scale = float(np.abs(P - c0).max())
    if scale == 0 or np.linalg.matrix_rank((P - c0) / scale, tol=1e-10) < 2:
        raise ValueError("points are collinear; the covering ellipse is degenerate")
    Ps = (P - c0) / scale
    u, M = _mvee_weights(Ps, tol)
    c = u @ Ps
    S = (Ps * u[:, None]).T @ Ps - np.outer(c, c)
    A = np.linalg.inv(S) / 2.0
    # scale so every point is inside
    r = np.einsum("ij,jk,ik->i", Ps - c, A, Ps - c)
    A /= max(1.0, float(r.max()))
    w, V = np.linalg.eigh(A)  # ascending: largest semi-axis first
    a, b = 1.0 / math.sqrt(w[0]), 1.0 / math.sqrt(w[1])
    angle = math.atan2(V[1, 0], V[0, 0])
    r = np.einsum("ij,jk,ik->i", Ps - c, A, Ps - c)
    support = tuple(int(i) for i in np.nonzero(np.abs(r - 1.0) <= 1e-7)[0])
    return Ellipse(c * scale + c0, (a * scale, b * scale), angle, support)


# ----------------------------------------------------------------------
# candidate grids


def grid_side_count(eps: float, k_max: Optional[int] = 2048) -> int:
    k = math.floor(2.0 ** 16 / eps ** 3)
    if k_max is not None and k > k_max:
        log.warning("grid resolution %d capped at %d", k, k_max)
        k = k_max
    return max(1, k)


def candidate_grids(objects: Sequence[ConvexObject], eps: float, k_max: Optional[int] = 2048,
                    budget: Optional[int] = None, X=None) -> list:
    """Grids built on minimum ellipses of 3- to 5-subsets of arrangement vertices.

    A subset counts when its minimum ellipse passes through all of its
    points. The grid covers [-32/eps, 32/eps]² of the frame that maps that
    ellipse onto the unit circle, with k cells per side. Subsets are
    visited in lexicographic index order; ``budget`` caps how many are
    examined.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if X is None:
        X = arrangement_vertices(objects)
    X = np.asarray(X, dtype=float).reshape(-1, 2)
    if len(X) < 3:
        return []
    k = grid_side_count(eps, k_max)
    half = 32.0 / eps
    cell = 2.0 * half / k
    grids = []
    seen = set()
    examined = 0
    for size in (3, 4, 5):
        for sub in itertools.combinations(range(len(X)), size):
            if budget is not None and examined >= budget:
                return grids
            examined += 1
            S = X[list(sub)]
            try:
                E = min_area_ellipse(S)
            except ValueError:
                continue
            if len(E.support) != size:
                continue
            key = (
                round(E.center[0], 7), round(E.center[1], 7),
                round(E.semi_axes[0], 7), round(E.semi_axes[1], 7),
                round(math.fmod(E.angle + 2 * math.pi, math.pi), 6),
            )
            if key in seen:
                continue
            seen.add(key)
            Lf = E.from_unit()
            origin = E.center + Lf @ np.array([-half, -half])
            grids.append(GridSpec(origin, Lf * cell, k, k, E, tuple(sub),
                                  {"half_width": half, "cell": cell}))
    return grids
