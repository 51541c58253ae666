"""Planar primitives shared by every solver.

Points are numpy float arrays of shape (2,). Convex sets are either
``ConvexObject`` (the input objects: points, segments, rays, lines, convex
polygons) or ``ConvexPolygon`` (a bounded, possibly degenerate solution
polygon). All predicates treat sets as closed and use one absolute
tolerance band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

TOL = 1e-9

KINDS = ("point", "segment", "ray", "line", "polygon")


def as_point(p) -> np.ndarray:
    a = np.asarray(p, dtype=float).reshape(2)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"non-finite coordinate {p!r}")
    return a


def cross(a, b) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


def perp(d) -> np.ndarray:
    """Left normal (counterclockwise rotation by 90 degrees)."""
    return np.array([-d[1], d[0]], dtype=float)


def unit(d) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    n = math.hypot(d[0], d[1])
    if n == 0.0:
        raise ValueError("zero direction vector")
    return d / n


def orientation(p, q, r, tol: float = TOL, exact: bool = False) -> int:
    """Sign of det(q - p, r - p); 0 inside the tolerance band.

    With ``exact=True`` the determinant is evaluated in rationals over the
    exact binary values of the inputs and ``tol`` is ignored.
    """
    if exact:
        px, py = Fraction(float(p[0])), Fraction(float(p[1]))
        d = (Fraction(float(q[0])) - px) * (Fraction(float(r[1])) - py) - (
            Fraction(float(q[1])) - py
        ) * (Fraction(float(r[0])) - px)
        return (d > 0) - (d < 0)
    d = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    if abs(d) <= tol:
        return 0
    return 1 if d > 0 else -1


@dataclass(frozen=True, eq=False)
class ConvexPolygon:
    """Bounded convex polygon given by its CCW vertices (1 or 2 allowed)."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float).reshape(-1, 2)
        if len(v) == 0:
            raise ValueError("polygon needs at least one vertex")
        object.__setattr__(self, "vertices", v)

    def __len__(self):
        return len(self.vertices)

    @property
    def perimeter(self) -> float:
        v = self.vertices
        if len(v) == 1:
            return 0.0
        d = np.roll(v, -1, axis=0) - v
        return float(np.hypot(d[:, 0], d[:, 1]).sum())

    @property
    def area(self) -> float:
        v = self.vertices
        if len(v) < 3:
            return 0.0
        x, y = v[:, 0], v[:, 1]
        return float(0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))

    def contains(self, p, tol: float = TOL) -> bool:
        return point_set_distance(as_point(p), self.vertices) <= tol

    def is_convex(self, tol: float = TOL) -> bool:
        v = self.vertices
        k = len(v)
        if k < 3:
            return True
        scale = max(1.0, float(np.abs(v).max()))
        return all(
            orientation(v[i], v[(i + 1) % k], v[(i + 2) % k], tol * scale * scale) >= 0
            for i in range(k)
        )


@dataclass(frozen=True, eq=False)
class ConvexObject:
    """One input object.

    ``pts`` holds the defining points: point -> [p]; segment -> [a, b];
    ray -> [origin]; line -> [a point on it]; polygon -> CCW vertices.
    ``direction`` is the unit direction of rays and lines.
    """

    kind: str
    pts: np.ndarray
    direction: Optional[np.ndarray] = None

    # constructors -------------------------------------------------------
    @staticmethod
    def point(p) -> "ConvexObject":
        return ConvexObject("point", as_point(p).reshape(1, 2))

    @staticmethod
    def segment(a, b) -> "ConvexObject":
        a, b = as_point(a), as_point(b)
        if np.array_equal(a, b):
            raise ValueError("segment endpoints coincide")
        return ConvexObject("segment", np.vstack([a, b]))

    @staticmethod
    def ray(origin, direction) -> "ConvexObject":
        return ConvexObject("ray", as_point(origin).reshape(1, 2), unit(as_point(direction)))

    @staticmethod
    def line(point, direction) -> "ConvexObject":
        return ConvexObject("line", as_point(point).reshape(1, 2), unit(as_point(direction)))

    @staticmethod
    def polygon(vertices) -> "ConvexObject":
        v = np.asarray(vertices, dtype=float).reshape(-1, 2)
        if len(v) < 3 or not np.all(np.isfinite(v)):
            raise ValueError("polygon needs at least three finite vertices")
        hull = convex_hull(v).vertices
        if len(hull) < 3:
            raise ValueError("polygon vertices are collinear")
        # every input vertex must lie on the hull boundary, otherwise the
        # list was not convex
        for p in v:
            if _boundary_distance(p, hull) > 1e-9 * max(1.0, float(np.abs(v).max())):
                raise ValueError("polygon vertices are not in convex position")
        return ConvexObject("polygon", hull)

    # basic queries ------------------------------------------------------
    @property
    def bounded(self) -> bool:
        return self.kind in ("point", "segment", "polygon")

    def defining_vertices(self) -> np.ndarray:
        """Finite vertices of the object (endpoints, origin, corners)."""
        if self.kind == "line":
            return np.zeros((0, 2))
        return self.pts

    def supporting_line(self):
        """(point, unit direction) of the line carrying a 1-dimensional object."""
        if self.kind == "segment":
            return self.pts[0], unit(self.pts[1] - self.pts[0])
        if self.kind in ("ray", "line"):
            return self.pts[0], self.direction
        raise ValueError(f"{self.kind} has no supporting line")

    def shape(self, box=None) -> np.ndarray:
        """Vertex array of the bounded convex set (clipped to box when unbounded)."""
        if self.bounded:
            return self.pts
        if box is None:
            raise ValueError("unbounded object needs a clipping box")
        seg = clip_unbounded(self, box)
        if seg is None:
            return np.zeros((0, 2))
        return seg

    def contains(self, p, tol: float = TOL) -> bool:
        return self.distance(p) <= tol

    def distance(self, p) -> float:
        p = as_point(p)
        if self.kind == "point":
            return float(np.hypot(*(p - self.pts[0])))
        if self.kind == "segment":
            return _point_segment_distance(p, self.pts[0], self.pts[1])
        if self.kind in ("ray", "line"):
            o, d = self.pts[0], self.direction
            t = float(np.dot(p - o, d))
            if self.kind == "ray":
                t = max(t, 0.0)
            return float(np.hypot(*(p - o - t * d)))
        return point_set_distance(p, self.pts)

    def transformed(self, M, t) -> "ConvexObject":
        """Image under the affine map p -> M p + t (M invertible)."""
        M = np.asarray(M, dtype=float)
        t = np.asarray(t, dtype=float)
        pts = self.pts @ M.T + t
        if self.kind == "polygon":
            if np.linalg.det(M) < 0:
                pts = pts[::-1]
            return ConvexObject("polygon", convex_hull(pts).vertices)
        if self.direction is not None:
            return ConvexObject(self.kind, pts, unit(M @ self.direction))
        return ConvexObject(self.kind, pts)

    def __repr__(self):
        body = np.array2string(self.pts, precision=4, separator=",").replace("\n", "")
        if self.direction is not None:
            return f"ConvexObject({self.kind}, {body}, dir={self.direction.round(4).tolist()})"
        return f"ConvexObject({self.kind}, {body})"


def bounding_box(objects: Sequence[ConvexObject], pad: float = 0.0):
    """Box (xmin, ymin, xmax, ymax) around all finite defining points."""
    pts = [o.defining_vertices() for o in objects]
    pts = [p for p in pts if len(p)]
    if not pts:
        return (-1.0 - pad, -1.0 - pad, 1.0 + pad, 1.0 + pad)
    a = np.vstack(pts)
    lo, hi = a.min(axis=0), a.max(axis=0)
    return (lo[0] - pad, lo[1] - pad, hi[0] + pad, hi[1] + pad)


def working_box(objects: Sequence[ConvexObject], factor: float = 10.0):
    """Generous box used to clip rays and lines.

    Any polygon worth considering lies inside it: the box contains every
    finite defining point with a margin of ``factor`` times their spread.
    """
    xmin, ymin, xmax, ymax = bounding_box(objects)
    span = max(xmax - xmin, ymax - ymin, 1.0)
    m = factor * span
    return (xmin - m, ymin - m, xmax + m, ymax + m)


def clip_unbounded(o: ConvexObject, box) -> Optional[np.ndarray]:
    """Clip a ray or line to an axis-parallel box; returns a (2,2) or (1,2) array."""
    xmin, ymin, xmax, ymax = box
    p, d = o.pts[0], o.direction
    lo, hi = (0.0 if o.kind == "ray" else -math.inf), math.inf
    for k, (a, b) in enumerate(((xmin, xmax), (ymin, ymax))):
        if abs(d[k]) < 1e-300:
            if p[k] < a or p[k] > b:
                return None
            continue
        t1, t2 = (a - p[k]) / d[k], (b - p[k]) / d[k]
        if t1 > t2:
            t1, t2 = t2, t1
        lo, hi = max(lo, t1), min(hi, t2)
    if lo > hi:
        return None
    a, b = p + lo * d, p + hi * d
    if hi - lo <= 0.0:
        return a.reshape(1, 2)
    return np.vstack([a, b])


# ----------------------------------------------------------------------
# hulls and polygons


def convex_hull(points, tol: float = 0.0) -> ConvexPolygon:
    """Monotone-chain hull, CCW, starting at the lexicographically smallest point.

    Collinear boundary points are dropped. Degenerate inputs give a one- or
    two-vertex polygon.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise ValueError("convex hull of an empty point set")
    pts = np.unique(pts, axis=0)  # sorted lexicographically
    if len(pts) <= 2:
        return ConvexPolygon(pts)

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2:
                a, b = out[-2], out[-1]
                c = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
                if c <= tol:
                    out.pop()
                else:
                    break
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    hull = np.array(lower[:-1] + upper[:-1])
    if len(hull) < 2:
        hull = np.vstack([pts[0], pts[-1]])
    return ConvexPolygon(hull)


def _point_segment_distance(p, a, b) -> float:
    ab = b - a
    L = float(np.dot(ab, ab))
    t = 0.0 if L == 0.0 else min(1.0, max(0.0, float(np.dot(p - a, ab)) / L))
    q = a + t * ab
    return float(math.hypot(p[0] - q[0], p[1] - q[1]))


def _boundary_distance(p, verts) -> float:
    k = len(verts)
    if k == 1:
        return float(np.hypot(*(p - verts[0])))
    return min(_point_segment_distance(p, verts[i], verts[(i + 1) % k]) for i in range(k))


def point_set_distance(p, verts) -> float:
    """Distance from p to the convex hull of CCW vertices ``verts``."""
    verts = np.asarray(verts, dtype=float).reshape(-1, 2)
    k = len(verts)
    if k >= 3:
        e = np.roll(verts, -1, axis=0) - verts
        c = e[:, 0] * (p[1] - verts[:, 1]) - e[:, 1] * (p[0] - verts[:, 0])
        if np.all(c >= 0):
            return 0.0
    return _boundary_distance(p, verts)


# ----------------------------------------------------------------------
# intersection tests


def _axes(verts: np.ndarray) -> list:
    k = len(verts)
    out = []
    if k == 1:
        return out
    for i in range(k if k > 2 else 1):
        e = verts[(i + 1) % k] - verts[i]
        n = math.hypot(e[0], e[1])
        if n > 0:
            e = e / n
            out.append(np.array([-e[1], e[0]]))
            if k == 2:
                out.append(e)
    return out


def convex_sets_intersect(A: np.ndarray, B: np.ndarray, tol: float = TOL) -> bool:
    """Separating-axis test for the convex hulls of two small vertex arrays.

    Candidate axes are the edge normals of both sets, the directions of
    degenerate (segment) sets, and the difference of two single points.
    Every separating direction of the Minkowski difference is among them.
    """
    A = np.asarray(A, dtype=float).reshape(-1, 2)
    B = np.asarray(B, dtype=float).reshape(-1, 2)
    if len(A) == 0 or len(B) == 0:
        return False
    axes = _axes(A) + _axes(B)
    d = B[0] - A[0]
    n = math.hypot(d[0], d[1])
    if n > 0:
        axes.append(d / n)
    for ax in axes:
        pa = A @ ax
        pb = B @ ax
        if pa.min() > pb.max() + tol or pb.min() > pa.max() + tol:
            return False
    return True


def intersects(o: ConvexObject, C, tol: float = TOL) -> bool:
    """Closed-set test o ∩ C ≠ ∅ for an object and a bounded convex polygon."""
    if isinstance(C, ConvexObject):
        Cv = C.shape()
    else:
        Cv = C.vertices
    if o.bounded:
        return convex_sets_intersect(o.pts, Cv, tol)
    lo, hi = Cv.min(axis=0), Cv.max(axis=0)
    pad = 1.0 + float(np.abs(hi - lo).max())
    seg = clip_unbounded(o, (lo[0] - pad, lo[1] - pad, hi[0] + pad, hi[1] + pad))
    if seg is None:
        return False
    return convex_sets_intersect(seg, Cv, tol)


def objects_intersect(a: ConvexObject, b: ConvexObject, tol: float = TOL) -> bool:
    box = working_box([a, b], factor=4.0)
    return convex_sets_intersect(a.shape(box), b.shape(box), tol)


def segment_intersections(a, b, c, d, tol: float = TOL) -> list:
    """Intersection points of closed segments ab and cd.

    Returns [] for disjoint segments, one point for a proper or touching
    crossing, and the two overlap endpoints for collinear overlaps.
    """
    a, b, c, d = (np.asarray(x, dtype=float) for x in (a, b, c, d))
    r, s = b - a, d - c
    den = cross(r, s)
    qp = c - a
    scale = max(1.0, math.hypot(*r), math.hypot(*s))
    if abs(den) > tol * scale * scale:
        t = cross(qp, s) / den
        u = cross(qp, r) / den
        et = tol / max(math.hypot(*r), 1e-300)
        eu = tol / max(math.hypot(*s), 1e-300)
        if -et <= t <= 1 + et and -eu <= u <= 1 + eu:
            t = min(1.0, max(0.0, t))
            return [a + t * r]
        return []
    if abs(cross(qp, r)) > tol * scale * scale:
        return []
    rr = float(np.dot(r, r))
    if rr == 0.0:
        return [a] if _point_segment_distance(a, c, d) <= tol else []
    t0 = float(np.dot(c - a, r)) / rr
    t1 = float(np.dot(d - a, r)) / rr
    lo, hi = max(0.0, min(t0, t1)), min(1.0, max(t0, t1))
    if lo > hi + tol / math.sqrt(rr):
        return []
    if hi - lo <= 0:
        return [a + lo * r]
    return [a + lo * r, a + hi * r]


# ----------------------------------------------------------------------
# Minkowski sums


def minkowski_sum(P: ConvexPolygon, Q: ConvexPolygon) -> ConvexPolygon:
    """P ⊕ Q by merging edge sequences sorted by polar angle."""
    A, B = P.vertices, Q.vertices
    if len(A) < 3 or len(B) < 3:
        sums = (A[:, None, :] + B[None, :, :]).reshape(-1, 2)
        return convex_hull(sums)

    def start(v):
        return int(np.lexsort((v[:, 0], v[:, 1]))[0])

    A = np.roll(A, -start(A), axis=0)
    B = np.roll(B, -start(B), axis=0)
    n, m = len(A), len(B)
    out = []
    i = j = 0
    while i < n or j < m:
        out.append(A[i % n] + B[j % m])
        c = cross(A[(i + 1) % n] - A[i % n], B[(j + 1) % m] - B[j % m])
        if c >= 0 and i < n:
            i += 1
        if c <= 0 and j < m:
            j += 1
    return convex_hull(np.array(out))


# ----------------------------------------------------------------------
# first hit along a ray


def _ccw_angle(a, b) -> float:
    ang = math.atan2(cross(a, b), float(np.dot(a, b)))
    return ang if ang >= 0 else ang + 2 * math.pi


def first_hit_tangent(ray, o: ConvexObject, tol: float = TOL):
    """First point of ``o`` met by the ray and a supporting line of ``o`` there.

    ``ray`` is (origin, direction). Returns ``(point, (line_point, line_dir))``
    or None. At a polygon vertex the line of the incident edge met first when
    turning counterclockwise from the ray direction is used. For a point
    object, or a hit at the ray origin inside the object, the line through
    the hit point perpendicular to the ray is returned.
    """
    org, d = as_point(ray[0]), unit(as_point(ray[1]))
    if o.kind == "point":
        p = o.pts[0]
        s = float(np.dot(p - org, d))
        if s >= -tol and abs(cross(d, p - org)) <= tol:
            return p.copy(), (p.copy(), perp(d))
        return None
    if o.kind in ("segment", "ray", "line"):
        if o.kind == "segment":
            a, e = o.pts[0], o.pts[1] - o.pts[0]
            lo, hi = 0.0, 1.0
        else:
            a, e = o.pts[0], o.direction
            lo, hi = (0.0 if o.kind == "ray" else -math.inf), math.inf
        den = cross(d, e)
        w = a - org
        le = math.hypot(*e)
        if abs(den) > tol * le:
            s = cross(w, e) / den
            t = cross(w, d) / den
            et = tol / le
            if s >= -tol and lo - et <= t <= hi + et:
                q = org + max(s, 0.0) * d
                return q, (q.copy(), e / le)
            return None
        if abs(cross(w, d)) > tol:
            return None
        # collinear: parameters of the object's extent along the ray
        t0 = float(np.dot(a - org, d))
        tdir = float(np.dot(e, d))
        cand = []
        for t in (lo, hi):
            if math.isfinite(t):
                cand.append(t0 + t * tdir)
            else:
                cand.append(math.copysign(math.inf, t * tdir) if tdir != 0 else t0)
        smin, smax = min(cand), max(cand)
        if smax < -tol:
            return None
        s = max(smin, 0.0)
        q = org + s * d
        return q, (q.copy(), e / le)
    # polygon: Cyrus-Beck clipping
    v = o.pts
    k = len(v)
    s_in, s_out = 0.0, math.inf
    entry = []
    for i in range(k):
        e = v[(i + 1) % k] - v[i]
        n = np.array([e[1], -e[0]])  # outward for CCW order
        num = float(np.dot(n, v[i] - org))
        den = float(np.dot(n, d))
        if abs(den) <= 1e-15 * math.hypot(*n):
            if num < -tol * math.hypot(*n):
                return None
            continue
        s = num / den
        if den < 0:
            if s > s_in + tol:
                s_in, entry = s, [i]
            elif s >= s_in - tol:
                entry.append(i)
        else:
            s_out = min(s_out, s)
    if s_in > s_out + tol:
        return None
    q = org + s_in * d
    if not entry:
        return q, (q.copy(), perp(d))
    if len(entry) == 1:
        i = entry[0]
        e = v[(i + 1) % k] - v[i]
        return q, (q.copy(), unit(e))
    # hit at a vertex shared by two entering edges
    i, j = entry[0], entry[1]
    if (i + 1) % k == j:
        vi = (i + 1) % k
    elif (j + 1) % k == i:
        vi = (j + 1) % k
    else:
        i = entry[0]
        return q, (q.copy(), unit(v[(i + 1) % k] - v[i]))
    vert = v[vi]
    a = v[(vi - 1) % k] - vert
    b = v[(vi + 1) % k] - vert
    line = unit(a) if _ccw_angle(d, a) <= _ccw_angle(d, b) else unit(b)
    return vert.copy(), (vert.copy(), line)


# ----------------------------------------------------------------------
# common point


def object_constraints(o: ConvexObject):
    """Rows (a, b) with unit a such that o = {p : a·p - b ≤ 0 for all rows}."""
    rows = []
    if o.kind == "point":
        p = o.pts[0]
        for a in ((1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)):
            a = np.array(a)
            rows.append((a, float(a @ p)))
        return rows
    if o.kind == "polygon":
        v = o.pts
        k = len(v)
        for i in range(k):
            e = unit(v[(i + 1) % k] - v[i])
            n = np.array([e[1], -e[0]])
            rows.append((n, float(n @ v[i])))
        return rows
    p, d = o.supporting_line()
    n = perp(d)
    rows.append((n, float(n @ p)))
    rows.append((-n, float(-n @ p)))
    if o.kind in ("segment", "ray"):
        rows.append((-d, float(-d @ p)))
    if o.kind == "segment":
        q = o.pts[1]
        rows.append((d, float(d @ q)))
    return rows


def common_point_check(objects: Sequence[ConvexObject], tol: float = TOL):
    """A point lying in every object, or None.

    Solves min t subject to a·p - b ≤ t over all object constraint rows, a
    two-variable LP; the objects share a point iff the optimum is ≤ tol.
    """
    from .lp import linprog

    if not objects:
        raise ValueError("empty object list")
    rows = [r for o in objects for r in object_constraints(o)]
    A = np.array([[a[0], a[1], -1.0] for a, _ in rows])
    b = np.array([bb for _, bb in rows])
    scale = max(1.0, float(np.abs(b).max()))
    res = linprog(
        np.array([0.0, 0.0, 1.0]),
        A_ub=A,
        b_ub=b / scale,
        bounds=[(None, None)] * 3,
    )
    if res.status != 0 or res.fun * scale > tol * scale:
        return None
    p = res.x[:2] * scale
    if all(o.distance(p) <= 10 * tol * scale for o in objects):
        return p
    return None


# ----------------------------------------------------------------------
# witnesses


def witness_point(o: ConvexObject, C: ConvexPolygon, tol: float = TOL):
    """A point of o closest to C (inside C whenever they intersect)."""
    Cv = C.vertices
    lo, hi = Cv.min(axis=0), Cv.max(axis=0)
    pad = 1.0 + float(np.abs(hi - lo).max())
    S = o.shape((lo[0] - pad, lo[1] - pad, hi[0] + pad, hi[1] + pad))
    if len(S) == 0:
        return None
    best, bestd = None, math.inf
    for p in S:
        dd = point_set_distance(p, Cv)
        if dd < bestd:
            best, bestd = p.copy(), dd
    if bestd <= 0.0:
        return best
    # a vertex of C inside o
    for q in Cv:
        if point_set_distance(q, S) <= 0.0:
            return q.copy()
    # edge crossings and closest points between boundaries
    es = _edges(S)
    ec = _edges(Cv)
    for a, b in es:
        for c, d in ec:
            pts = segment_intersections(a, b, c, d, tol=0.0)
            if pts:
                return pts[0]
    for q in Cv:
        for a, b in es:
            ab = b - a
            L = float(ab @ ab)
            t = 0.0 if L == 0 else min(1.0, max(0.0, float((q - a) @ ab) / L))
            p = a + t * ab
            dd = point_set_distance(p, Cv)
            if dd < bestd:
                best, bestd = p, dd
    return best


def _edges(v):
    k = len(v)
    if k == 1:
        return [(v[0], v[0])]
    if k == 2:
        return [(v[0], v[1])]
    return [(v[i], v[(i + 1) % k]) for i in range(k)]


def check_witnesses(objects, polygon: ConvexPolygon, witnesses, tol: float) -> bool:
    for o, w in zip(objects, witnesses):
        if w is None:
            return False
        w = np.asarray(w, dtype=float)
        if o.distance(w) > tol or point_set_distance(w, polygon.vertices) > tol:
            return False
    return True


def point_distances(P: np.ndarray, o: ConvexObject, box=None) -> np.ndarray:
    """Vectorized distance from each row of P to object o."""
    P = np.asarray(P, dtype=float).reshape(-1, 2)
    S = o.shape(box) if not o.bounded else o.pts
    return set_distances(P, S)


def set_distances(P: np.ndarray, S: np.ndarray) -> np.ndarray:
    """Distance from each row of P to the convex hull of CCW vertices S."""
    P = np.asarray(P, dtype=float).reshape(-1, 2)
    S = np.asarray(S, dtype=float).reshape(-1, 2)
    k = len(S)
    if k == 1:
        return np.hypot(P[:, 0] - S[0, 0], P[:, 1] - S[0, 1])
    edges = [(S[0], S[1])] if k == 2 else [(S[i], S[(i + 1) % k]) for i in range(k)]
    best = np.full(len(P), np.inf)
    inside = np.ones(len(P), dtype=bool)
    for a, b in edges:
        ab = b - a
        L = float(ab @ ab)
        t = np.clip(((P - a) @ ab) / L, 0.0, 1.0)
        q = a + t[:, None] * ab
        best = np.minimum(best, np.hypot(P[:, 0] - q[:, 0], P[:, 1] - q[:, 1]))
        if k >= 3:
            inside &= ab[0] * (P[:, 1] - a[1]) - ab[1] * (P[:, 0] - a[0]) >= 0
    if k >= 3:
        best[inside] = 0.0
    return best


def polygon_from_points(points: Iterable) -> ConvexPolygon:
    return convex_hull(np.asarray(list(points), dtype=float).reshape(-1, 2))


# ----------------------------------------------------------------------
# vectorized predicates for the chain DPs


def ray_clip(D, S, tol):
    """Parameter interval [s_in, s_out] of rays s·D (s ≥ 0) inside shape S.

    Returns s_in, s_out, nonempty mask and the unit tangent direction of the
    supporting line at the entry point. S is relative to the ray origin.
    """
    M = len(D)
    k = len(S)
    s_in = np.zeros(M)
    s_out = np.full(M, np.inf)
    ok = np.ones(M, dtype=bool)
    tang = np.zeros((M, 2))
    Dn = np.hypot(D[:, 0], D[:, 1])
    if k == 1:
        p = S[0]
        cr = D[:, 0] * p[1] - D[:, 1] * p[0]
        s = (D @ p) / (Dn * Dn)
        ok = (np.abs(cr) <= tol * Dn) & (s >= -tol / Dn)
        s = np.maximum(s, 0.0)
        tang = np.column_stack([-D[:, 1], D[:, 0]]) / Dn[:, None]
        return s, s, ok, tang
    if k == 2:
        a, b = S
        e = b - a
        le = math.hypot(*e)
        den = D[:, 0] * e[1] - D[:, 1] * e[0]
        ca = a[0] * e[1] - a[1] * e[0]
        par = np.abs(den) <= 1e-13 * Dn * le
        with np.errstate(divide="ignore", invalid="ignore"):
            s = ca / den
            t = (a[0] * D[:, 1] - a[1] * D[:, 0]) / den
        et = tol / le
        hit = (~par) & (s >= -tol / Dn) & (t >= -et) & (t <= 1 + et)
        s_in = np.where(hit, np.maximum(s, 0.0), np.inf)
        s_out = s_in.copy()
        # collinear with the ray line
        col = par & (np.abs(a[0] * D[:, 1] - a[1] * D[:, 0]) <= tol * Dn)
        if np.any(col):
            sa = (D[col] @ a) / Dn[col] ** 2
            sb = (D[col] @ b) / Dn[col] ** 2
            lo, hi = np.minimum(sa, sb), np.maximum(sa, sb)
            good = hi >= -tol / Dn[col]
            s_in[col] = np.where(good, np.maximum(lo, 0.0), np.inf)
            s_out[col] = np.where(good, hi, -np.inf)
            hit = hit | (col & np.isfinite(s_in) & (s_out >= s_in - tol))
        tang[:] = e / le
        return s_in, s_out, hit, tang
    # polygon, CCW
    E = np.roll(S, -1, axis=0) - S
    N = np.column_stack([E[:, 1], -E[:, 0]])  # outward normals
    c = np.einsum("ij,ij->i", N, S)  # inside: N·x ≤ c
    den = D @ N.T  # (M, k)
    nn = np.hypot(N[:, 0], N[:, 1])
    par = np.abs(den) <= 1e-13 * Dn[:, None] * nn[None, :]
    bad = par & (c[None, :] < -tol * nn[None, :])
    ok = ~bad.any(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = c[None, :] / den
    ent = np.where((den < 0) & ~par, r, -np.inf)
    ext = np.where((den > 0) & ~par, r, np.inf)
    s_in = np.maximum(ent.max(axis=1), 0.0)
    s_out = ext.min(axis=1)
    ok &= s_in <= s_out + tol / Dn
    arg = np.argmax(ent, axis=1)
    tang = E[arg] / np.hypot(E[arg, 0], E[arg, 1])[:, None]
    # vertex ties: pick the incident edge met first counterclockwise from the ray
    top = ent.max(axis=1)
    ntie = ((ent >= top[:, None] - 1e-12 * np.maximum(1.0, np.abs(top))[:, None]) & (ent > -np.inf)).sum(axis=1)
    for m in np.nonzero((ntie > 1) & ok & (top > 0))[0]:
        q = top[m] * D[m]
        vi = int(np.argmin(np.hypot(S[:, 0] - q[0], S[:, 1] - q[1])))
        pa = S[(vi - 1) % k] - S[vi]
        pb = S[(vi + 1) % k] - S[vi]

        def ccw(x):
            ang = math.atan2(D[m, 0] * x[1] - D[m, 1] * x[0], D[m] @ x)
            return ang if ang >= 0 else ang + 2 * math.pi

        pick = pa if ccw(pa) <= ccw(pb) else pb
        tang[m] = pick / math.hypot(*pick)
    return s_in, s_out, ok, tang


def triangle_hits(P, Wp, S, tol):
    """Mask (N, M): does triangle (0, P[v], Wp[w]) meet shape S? (SAT, vectorized)"""
    B = P[:, None, :]
    C = Wp[None, :, :]
    shp = (len(P), len(Wp))
    zero = np.zeros(shp + (2,))
    Bf = np.broadcast_to(B, shp + (2,))
    Cf = np.broadcast_to(C, shp + (2,))
    tri = [zero, Bf, Cf]
    axes = []
    for X, Y in ((zero, Bf), (Bf, Cf), (Cf, zero)):
        e = Y - X
        n = np.hypot(e[..., 0], e[..., 1])
        n = np.where(n > 0, n, 1.0)
        e = e / n[..., None]
        axes.append(np.stack([-e[..., 1], e[..., 0]], axis=-1))
        axes.append(e)
    k = len(S)
    fixed = []
    if k >= 2:
        Es = [(S[1] - S[0])] if k == 2 else [S[(i + 1) % k] - S[i] for i in range(k)]
        for e in Es:
            e = e / math.hypot(*e)
            fixed.append(np.array([-e[1], e[0]]))
            if k == 2:
                fixed.append(e)
    sep = np.zeros(shp, dtype=bool)
    for ax in axes:
        pt = [np.einsum("...i,...i->...", X, ax) for X in tri]
        tmin = np.minimum(np.minimum(pt[0], pt[1]), pt[2])
        tmax = np.maximum(np.maximum(pt[0], pt[1]), pt[2])
        ps = np.einsum("...i,ki->...k", ax, S)
        sep |= (ps.min(axis=-1) > tmax + tol) | (ps.max(axis=-1) < tmin - tol)
    for ax in fixed:
        pt = [X @ ax for X in tri]
        tmin = np.minimum(np.minimum(pt[0], pt[1]), pt[2])
        tmax = np.maximum(np.maximum(pt[0], pt[1]), pt[2])
        ps = S @ ax
        sep |= (ps.min() > tmax + tol) | (ps.max() < tmin - tol)
    return ~sep
