"""(1+ε)-approximate minimum-perimeter intersecting polygon.

Outline: a rectangle within (4/π)(1+ε₁) of optimal fixes the scale and a
square σ that holds an optimum; σ is cut into a grid fine enough that
rounding an optimum outward to grid cells costs at most ε·opt; for every
grid point taken as the lowest vertex, a DP over the clockwise angular
order of grid points finds the shortest convex grid polygon that meets
all objects.

The DP only needs grid points that are corners of cells meeting an object
boundary: every vertex of an optimum lies on some object boundary (cutting
off a vertex that touches no boundary keeps all intersections), so the
rounded optimum uses only such corners.
"""

from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .geom_core import (
    TOL,
    ConvexObject,
    ConvexPolygon,
    common_point_check,
    convex_hull,
    first_hit_tangent,
    intersects,
    ray_clip,
    set_distances,
    triangle_hits,
    witness_point,
)
from .locate import GridSpec, OrientedRect, Square, localization_square, min_perimeter_rect

INF = math.inf


@dataclass
class Solution:
    objective: str
    value: float
    polygon: ConvexPolygon
    witnesses: list
    method: dict = field(default_factory=dict)


def make_solution(objective, polygon: ConvexPolygon, objects, method, value=None) -> Solution:
    wits = [witness_point(o, polygon) for o in objects]
    if value is None:
        value = polygon.perimeter if objective == "perimeter" else polygon.area
    return Solution(objective, float(value), polygon, wits, dict(method))


# ----------------------------------------------------------------------
# grids


def build_grid(sigma: Square, lb_opt: float, eps: float) -> GridSpec:
    """Grid over σ with cell edge at most (eps/8)·lb_opt."""
    if lb_opt <= 0 or eps <= 0:
        raise ValueError("lb_opt and eps must be positive")
    target = (eps / 8.0) * lb_opt
    cells = max(1, math.ceil(sigma.side / target - 1e-9))
    edge = sigma.side / cells
    c, s = math.cos(sigma.axis_angle), math.sin(sigma.axis_angle)
    R = np.array([[c, -s], [s, c]])
    origin = sigma.center + R @ np.array([-0.5 * sigma.side, -0.5 * sigma.side])
    return GridSpec(origin, R * edge, cells, cells)


def _liang_barsky(a, b, box):
    xmin, ymin, xmax, ymax = box
    d = b - a
    t0, t1 = 0.0, 1.0
    for p, q in ((-d[0], a[0] - xmin), (d[0], xmax - a[0]), (-d[1], a[1] - ymin), (d[1], ymax - a[1])):
        if p == 0:
            if q < 0:
                return None
            continue
        r = q / p
        if p < 0:
            t0 = max(t0, r)
        else:
            t1 = min(t1, r)
    if t0 > t1:
        return None
    return a + t0 * d, a + t1 * d


def _segment_cells(a, b, cols, rows):
    """Cells (i, j) of the unit lattice whose closed square meets segment ab."""
    clip = _liang_barsky(a, b, (0.0, 0.0, float(cols), float(rows)))
    if clip is None:
        return set()
    a, b = clip
    d = b - a
    ts = [0.0, 1.0]
    for k in range(2):
        if d[k] != 0:
            lo, hi = sorted((a[k], b[k]))
            for g in range(math.ceil(lo), math.floor(hi) + 1):
                t = (g - a[k]) / d[k]
                if 0 < t < 1:
                    ts.append(t)
    ts = sorted(set(ts))
    cells = set()

    def add(p):
        i = min(cols - 1, max(0, math.floor(p[0])))
        j = min(rows - 1, max(0, math.floor(p[1])))
        cells.add((i, j))

    add(a)
    add(b)
    for t0, t1 in zip(ts[:-1], ts[1:]):
        add(a + 0.5 * (t0 + t1) * d)
    return cells


def boundary_corners(shapes, cols, rows) -> np.ndarray:
    """Corners of lattice cells meeting the boundary of any shape (lattice coords)."""
    cells = set()
    for S in shapes:
        k = len(S)
        if k == 0:
            continue
        if k == 1:
            p = S[0]
            if 0 <= p[0] <= cols and 0 <= p[1] <= rows:
                cells.add((min(cols - 1, math.floor(p[0])), min(rows - 1, math.floor(p[1]))))
            continue
        edges = [(S[0], S[1])] if k == 2 else [(S[i], S[(i + 1) % k]) for i in range(k)]
        for a, b in edges:
            cells |= _segment_cells(a, b, cols, rows)
    pts = set()
    for i, j in cells:
        pts.update(((i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)))
    return np.array(sorted(pts), dtype=np.int64).reshape(-1, 2)


# ----------------------------------------------------------------------
# angular order around an anchor


@dataclass
class AngularVertexOrder:
    """Points of the closed upper half-plane of the anchor (minus ρ₀) in clockwise order.

    ρ₀ is the leftward horizontal ray from the anchor; φ(v) is the clockwise
    angle from ρ₀ to the ray toward v. Points at equal angle share a group
    id and are sorted by distance. The sentinel (the anchor again, reached
    along the rightward ray) comes after every vertex.
    """

    anchor: np.ndarray
    vertices: np.ndarray
    groups: np.ndarray
    phi: np.ndarray
    index: np.ndarray = None  # positions of the vertices in the input array

    def __len__(self):
        return len(self.vertices)


def angular_order(anchor, points, tol: float = 0.0) -> AngularVertexOrder:
    anchor = np.asarray(anchor, dtype=float)
    P = np.asarray(points, dtype=float).reshape(-1, 2)
    d = P - anchor
    keep = (d[:, 1] > tol) | ((np.abs(d[:, 1]) <= tol) & (d[:, 0] > tol))
    idx = np.nonzero(keep)[0]
    d = d[idx]
    integral = np.all(d == np.round(d)) and np.abs(d).max(initial=0) < 2 ** 40
    if integral and len(d):
        di = d.astype(np.int64)
        g = np.gcd(np.abs(di[:, 0]), np.abs(di[:, 1]))
        red = di // g[:, None]
        phi = np.arctan2(red[:, 1].astype(float), -red[:, 0].astype(float))
    else:
        phi = np.arctan2(d[:, 1], -d[:, 0])
        phi = np.where(np.abs(d[:, 1]) <= tol, math.pi, phi)
    dist = np.hypot(d[:, 0], d[:, 1])
    order = np.lexsort((dist, phi))
    phi = phi[order]
    idx = idx[order]
    groups = np.zeros(len(phi), dtype=np.int64)
    for i in range(1, len(phi)):
        same = phi[i] == phi[i - 1] if integral else abs(phi[i] - phi[i - 1]) <= 1e-12
        groups[i] = groups[i - 1] + (0 if same else 1)
    return AngularVertexOrder(anchor, P[idx], groups, phi, idx)


# ----------------------------------------------------------------------
# classification of objects for a chain edge (v, w)


def _wedge_contains_vertex(S_rel, phi_w, tol):
    for x in S_rel:
        if x[1] < -tol:
            continue
        if abs(x[0]) <= tol and abs(x[1]) <= tol:
            return True
        ph = math.atan2(max(x[1], 0.0), -x[0])
        if ph <= phi_w + 1e-12:
            return True
    return False


def classify_objects(v, w, order: AngularVertexOrder, objects: Sequence[ConvexObject],
                     tol: float = TOL, box=None) -> set:
    """Indices of objects in O(v, w); ``w=None`` stands for the sentinel.

    An object belongs when (i) it meets the closed clockwise wedge from ρ₀
    to ρ(w) but not ρ(w), (ii) it meets the segment from the anchor to w, or
    (iii) it meets ρ*(w) (the part of ρ(w) beyond w), and the supporting
    line at the first point hit there meets the half-line from w through v.
    """
    a = order.anchor
    v = np.asarray(v, dtype=float)
    if w is None:
        dw = np.array([1.0, 0.0])
        wp = a.copy()
        phi_w = math.pi
    else:
        wp = np.asarray(w, dtype=float)
        dw = wp - a
        phi_w = math.atan2(dw[1], -dw[0])
    if box is None:
        from .geom_core import working_box

        box = working_box(list(objects))
    out = set()
    for i, o in enumerate(objects):
        seg = ConvexPolygon(np.array([a, wp]) if w is not None else a.reshape(1, 2))
        if intersects(o, seg, tol):
            out.add(i)
            continue
        hit_rho = first_hit_tangent((a, dw), o, tol) is not None
        hit_rho0 = first_hit_tangent((a, np.array([-1.0, 0.0])), o, tol) is not None
        S = o.shape(box) - a
        if not hit_rho and (hit_rho0 or _wedge_contains_vertex(S, phi_w, tol)):
            out.add(i)
            continue
        start = wp if w is not None else a
        hit = first_hit_tangent((start, dw), o, tol)
        if hit is None:
            continue
        q, (lp, ld) = hit
        num = (q[0] - wp[0]) * ld[1] - (q[1] - wp[1]) * ld[0]
        den = (v[0] - wp[0]) * ld[1] - (v[1] - wp[1]) * ld[0]
        if abs(num) <= tol or num * den > 0:
            out.add(i)
    return out


# ----------------------------------------------------------------------
# vectorized tables for one anchor


class _AnchorTables:
    """O(v, w) and triangle masks for one anchor, vertices relative to it."""

    def __init__(self, order: AngularVertexOrder, shapes, tol):
        a = order.anchor
        P = order.vertices - a
        N = len(P)
        self.N = N
        self.P = P
        n = len(shapes)
        self.n = n
        self.full = np.uint64((1 << n) - 1) if n < 64 else np.uint64(0xFFFFFFFFFFFFFFFF)
        D = np.vstack([P, [[1.0, 0.0]]])  # targets: vertices then the sentinel
        Wpos = np.vstack([P, [[0.0, 0.0]]])
        seg_end = np.r_[np.ones(N), 0.0]
        star0 = np.r_[np.ones(N), 0.0]
        phi_w = np.r_[order.phi, math.pi]
        Vrows = np.vstack([P, [[0.0, 0.0]]])  # v: vertices then the anchor
        maskA = np.zeros(N + 1, dtype=np.uint64)
        segmask = np.zeros(N + 1, dtype=np.uint64)
        O = np.zeros((N + 1, N + 1), dtype=np.uint64)
        self.shapes = []
        for j, S0 in enumerate(shapes):
            S = np.asarray(S0, dtype=float) - a
            self.shapes.append(S)
            bit = np.uint64(1 << j)
            s_in, s_out, ok, tang = ray_clip(D, S, tol)
            Dn = np.hypot(D[:, 0], D[:, 1])
            et = tol / Dn
            hit_seg = ok & (s_in <= seg_end + et) & (s_out >= -et)
            hit_ray = ok & (s_out >= -et)
            hit_star = ok & (s_out >= star0 - et)
            r0 = ray_clip(np.array([[-1.0, 0.0]]), S, tol)
            hit_rho0 = bool(r0[2][0] and r0[1][0] >= -tol)
            vin = np.zeros(N + 1, dtype=bool)
            up = S[S[:, 1] >= -tol]
            if len(up):
                at0 = np.any((np.abs(up[:, 0]) <= tol) & (np.abs(up[:, 1]) <= tol))
                ph = np.arctan2(np.maximum(up[:, 1], 0.0), -up[:, 0])
                vin = (ph.min() <= phi_w + 1e-12) | at0
            cond_i = (vin | hit_rho0) & ~hit_ray
            memberA = cond_i | hit_seg
            maskA |= np.where(memberA, bit, np.uint64(0))
            segmask |= np.where(hit_seg, bit, np.uint64(0))
            cand = hit_star & ~hit_seg & ~memberA
            if np.any(cand):
                idx = np.nonzero(cand)[0]
                q = np.maximum(s_in[idx], star0[idx])[:, None] * D[idx]
                T = tang[idx]
                wq = q - Wpos[idx]
                num = wq[:, 0] * T[:, 1] - wq[:, 1] * T[:, 0]
                # den[v, w] = cross(v - w, T_w)
                dv = Vrows[:, None, :] - Wpos[idx][None, :, :]
                den = dv[..., 0] * T[None, :, 1] - dv[..., 1] * T[None, :, 0]
                sc = np.maximum(1.0, np.abs(Wpos[idx]).max(axis=1))
                mem = (np.abs(num)[None, :] <= tol * sc[None, :]) | (num[None, :] * den > 0)
                O[:, idx] |= np.where(mem, bit, np.uint64(0))
        O |= maskA[None, :]
        self.O = O
        self.segmask = segmask
        self.Wpos = Wpos
        self.tol = tol

    def triangle_masks(self, v, widx):
        """Objects meeting triangle (anchor, P[v], Wpos[w]) for w in widx."""
        out = np.zeros(len(widx), dtype=np.uint64)
        Pv = self.P[v:v + 1]
        Wp = self.Wpos[widx]
        for j, S in enumerate(self.shapes):
            hit = triangle_hits(Pv, Wp, S, self.tol)[0]
            out |= np.where(hit, np.uint64(1 << j), np.uint64(0))
        return out


@dataclass
class ChainResult:
    value: float
    chain: np.ndarray  # anchor, v_1, …, v_m (anchor coordinates as given)
    anchor_index: int = -1


def chain_dp(order: AngularVertexOrder, shapes, objective: str = "perimeter",
             bound: float = INF, tol: float = 1e-9) -> ChainResult:
    """Shortest (or smallest-area) convex chain from the anchor around to the sentinel.

    A[v, w] is the best value of a chain anchor, …, v, w whose polygon meets
    every object of O(v, w). Entries that cannot finish at or below
    ``bound`` are dropped; this never changes a result of value ≤ bound.
    """
    N = len(order)
    if N == 0:
        return ChainResult(INF, order.anchor.reshape(1, 2))
    tb = _AnchorTables(order, shapes, tol)
    P, O, g = tb.P, tb.O, order.groups
    Wpos = tb.Wpos
    norms = np.hypot(Wpos[:, 0], Wpos[:, 1])
    slack = 1e-9 * max(1.0, bound if math.isfinite(bound) else 1.0)
    perim = objective == "perimeter"
    A = np.full((N, N + 1), INF)
    pred = np.full((N, N + 1), -2, dtype=np.int64)
    zero = np.uint64(0)
    base = np.full(N, INF)
    okb = (O[N, :N] & ~tb.segmask[:N]) == zero
    base[okb] = norms[:N][okb] if perim else 0.0
    if perim:
        base[2 * norms[:N] > bound + slack] = INF
    best = (INF, -1)
    for v in range(N):
        earlier = np.nonzero((g < g[v]) & np.isfinite(A[:, v]))[0]
        vals = np.r_[base[v], A[earlier, v]]
        if not np.any(np.isfinite(vals)):
            continue
        U_O = np.r_[O[N, v], O[earlier, v]]
        U_pos = np.vstack([[0.0, 0.0], P[earlier]])
        U_id = np.r_[-1, earlier]
        later = np.r_[np.nonzero(g > g[v])[0], N]
        R = O[v, later] & ~tb.triangle_masks(v, later)
        pv = P[v]
        du = pv - U_pos  # (U, 2)
        dw = Wpos[later] - pv  # (W, 2)
        cr = du[None, :, 0] * dw[:, None, 1] - du[None, :, 1] * dw[:, None, 0]
        ok = cr < 0
        ok[-1, 0] |= cr[-1, 0] == 0  # doubled segment: anchor, v, sentinel
        ok &= (R[:, None] & ~U_O[None, :]) == zero
        cand = np.where(ok, vals[None, :], INF)
        j = np.argmin(cand, axis=1)
        bestu = cand[np.arange(len(later)), j]
        if perim:
            step = np.hypot(dw[:, 0], dw[:, 1])
        else:
            step = 0.5 * np.abs(pv[0] * Wpos[later, 1] - pv[1] * Wpos[later, 0])
        newv = step + bestu
        if perim:
            newv[newv + norms[later] > bound + slack] = INF
        else:
            newv[newv > bound + slack] = INF
        A[v, later] = newv
        pred[v, later] = U_id[j]
        if np.isfinite(newv[-1]) and O[v, N] == tb.full and newv[-1] < best[0]:
            best = (float(newv[-1]), v)
    if best[1] < 0:
        return ChainResult(INF, order.anchor.reshape(1, 2))
    chain = []
    v, w = best[1], N
    while v >= 0:
        chain.append(order.vertices[v])
        u = int(pred[v, w])
        v, w = u, v
    chain.append(order.anchor)
    return ChainResult(best[0], np.array(chain[::-1]))


def dp_perimeter(order: AngularVertexOrder, objects: Sequence[ConvexObject], tol: float = 1e-9):
    """Minimum perimeter of a convex polygon on the order's points with the anchor as lowest vertex."""
    shapes = _shapes(objects)
    res = chain_dp(order, shapes, "perimeter", INF, tol)
    return res.value, res.chain


def _shapes(objects, box=None):
    from .geom_core import working_box

    if box is None:
        box = working_box(list(objects))
    return [o.shape(box) for o in objects]


# ----------------------------------------------------------------------
# driver


class _Incumbent:
    def __init__(self, value):
        self.value = value
        self.lock = threading.Lock()

    def offer(self, value):
        with self.lock:
            if value < self.value:
                self.value = value

    def get(self):
        with self.lock:
            return self.value


def lattice_frame(grid: GridSpec):
    Minv = np.linalg.inv(grid.axes)
    return Minv, -Minv @ grid.origin


def run_anchor_dps(universe, shapes_lat, dist, objective, incumbent: _Incumbent,
                   threads: int = 1, tol: float = 1e-9, anchor_filter=None, vertex_filter=None):
    """Run the chain DP for every universe point as anchor; returns (value, anchor idx, chain).

    ``dist[p, i]`` is the lattice distance from universe point p to object i.
    Anchors are visited in lexicographic (y, x) order. Anchors and vertices
    that cannot be part of a polygon at most the incumbent are skipped;
    ``vertex_filter(a, points, bound)`` may drop further vertices per anchor.
    """
    U = np.asarray(universe, dtype=float)
    order_idx = np.lexsort((U[:, 0], U[:, 1]))
    maxd = dist.max(axis=1) if dist.shape[1] else np.zeros(len(U))
    ytop = np.array([S[:, 1].max() for S in shapes_lat]) if shapes_lat else np.zeros(0)
    results = {}

    def work(rank):
        ai = order_idx[rank]
        a = U[ai]
        bound = incumbent.get()
        if objective == "perimeter" and 2 * maxd[ai] > bound * (1 + 1e-9):
            return
        if len(ytop) and np.any(ytop < a[1] - tol):
            return
        if anchor_filter is not None and not anchor_filter(a):
            return
        dv = U - a
        upper = (dv[:, 1] > 0) | ((dv[:, 1] == 0) & (dv[:, 0] > 0))
        if objective == "perimeter":
            need = np.hypot(dv[:, 0], dv[:, 1]) + (dist + dist[ai][None, :]).max(axis=1)
            upper &= need <= bound * (1 + 1e-9)
        if vertex_filter is not None:
            upper &= vertex_filter(a, U, bound)
        cand = np.nonzero(upper)[0]
        order = angular_order(a, U[cand])
        order.index = cand[order.index]
        res = chain_dp(order, shapes_lat, objective, bound, tol)
        if math.isfinite(res.value):
            incumbent.offer(res.value)
            results[rank] = res

    ranks = range(len(U))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            list(ex.map(work, ranks))
    else:
        for r in ranks:
            work(r)
    best = None
    for rank in sorted(results):
        res = results[rank]
        if best is None or res.value < best[0]:
            best = (res.value, rank, res.chain)
    return best


def solve_perimeter(objects: Sequence[ConvexObject], eps: float, tol: float = TOL,
                    threads: int = 1) -> Solution:
    if not objects:
        raise ValueError("empty instance")
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    objects = list(objects)
    p = common_point_check(objects, tol)
    if p is not None:
        return make_solution("perimeter", ConvexPolygon(p.reshape(1, 2)), objects,
                             {"branch": "common_point", "eps": eps})
    eps1 = eps / (2.0 + eps)
    R = min_perimeter_rect(objects, eps1)
    sigma = localization_square(R)
    lb = R.perimeter * math.pi / (4.0 * (1.0 + eps1))
    method = {"eps": eps, "eps1": eps1, "rect_perimeter": R.perimeter, "lower_bound": lb}
    Rpoly = R.polygon()
    if lb <= 0:
        return make_solution("perimeter", Rpoly, objects, {**method, "branch": "rectangle"})
    grid = build_grid(sigma, lb, eps)
    Minv, t = lattice_frame(grid)
    cols = grid.cols
    pad = float(cols)
    box = (-pad, -pad, cols + pad, cols + pad)
    lat_objs = [o.transformed(Minv, t) for o in objects]
    shapes = [o.shape(box) for o in lat_objs]
    if any(len(S) == 0 for S in shapes):
        return make_solution("perimeter", Rpoly, objects, {**method, "branch": "rectangle"})
    universe = boundary_corners(shapes, cols, cols)
    edge = grid.cell_edge
    U0 = R.perimeter / edge
    dist = np.column_stack([set_distances(universe.astype(float), S) for S in shapes])
    keep = 2 * dist.max(axis=1) <= U0 * (1 + 1e-9)
    universe = universe[keep]
    dist = dist[keep]
    inc = _Incumbent(U0)
    best = run_anchor_dps(universe, shapes, dist, "perimeter", inc, threads, 1e-9)
    method.update({"grid_cells": cols, "cell_edge": edge, "universe": int(len(universe))})
    if best is None:
        return make_solution("perimeter", Rpoly, objects, {**method, "branch": "rectangle"})
    val, rank, chain = best
    world = grid.to_plane(chain)
    poly = convex_hull(world)
    if poly.perimeter >= R.perimeter or not all(intersects(o, poly, 1e-7 * max(1.0, R.perimeter)) for o in objects):
        return make_solution("perimeter", Rpoly, objects, {**method, "branch": "rectangle"})
    return make_solution("perimeter", poly, objects, {**method, "branch": "grid_dp"})
