"""Independent reference values for testing.

Nothing here shares code with the solvers: only numpy, scipy and the plain
object types are used. Every routine returns a value together with a slack
such that the true optimum lies in [value - slack, value].
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from .geom_core import ConvexObject


@dataclass
class OracleValue:
    value: float
    slack: float
    points: np.ndarray  # witness points (or tour waypoints)

    @property
    def lower(self):
        return self.value - self.slack


def _extent(objects):
    pts = np.vstack([np.atleast_2d(o.pts) for o in objects])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = max(float((hi - lo).max()), 1.0)
    return lo - 10 * span, hi + 10 * span


def _param_form(o: ConvexObject, lo, hi):
    """Witness p = base + G·z, with z in a polytope {z: H z ≤ h, z ≥ 0 or free}.

    Returns (base, G, H, h, bounds). Unbounded kinds are cut to a large box.
    """
    if o.kind == "point":
        return o.pts[0], np.zeros((2, 0)), np.zeros((0, 0)), np.zeros(0), []
    if o.kind == "segment":
        a, b = o.pts
        return a, (b - a).reshape(2, 1), np.zeros((0, 1)), np.zeros(0), [(0.0, 1.0)]
    if o.kind in ("ray", "line"):
        p, d = o.pts[0], np.asarray(o.direction, float)
        T = 4.0 * float(np.hypot(*(hi - lo))) / float(np.hypot(*d))
        return p, d.reshape(2, 1), np.zeros((0, 1)), np.zeros(0), [(0.0 if o.kind == "ray" else -T, T)]
    V = np.asarray(o.pts, float)
    k = len(V)
    # convex combination: p = Σ λ_j V_j, Σλ = 1, λ ≥ 0
    return np.zeros(2), V.T, np.ones((1, k)), np.ones(1), [(0.0, 1.0)] * k


def oracle_perimeter(objects, grid_n: int = 512) -> OracleValue:
    """Minimum perimeter via an LP over the support function in M = 4·grid_n directions.

    The LP picks witnesses and support values h_m ≥ u_m·p_i; its value is the
    perimeter of the circumscribed M-gon of the witnesses' hull, which is
    at least the optimum and at most optimum / cos(π/M).
    """
    objs = list(objects)
    M = 4 * int(grid_n)
    ang = 2 * np.pi * np.arange(M) / M
    U = np.column_stack([np.cos(ang), np.sin(ang)])
    lo, hi = _extent(objs)
    forms = [_param_form(o, lo, hi) for o in objs]
    nz = [f[1].shape[1] for f in forms]
    nv = M + sum(nz)
    c = np.zeros(nv)
    c[:M] = 2 * np.tan(np.pi / M)
    rows, rhs = [], []
    eq_rows, eq_rhs = [], []
    bounds = [(None, None)] * M
    off = M
    for (base, G, H, h, bd), k in zip(forms, nz):
        # u_m·(base + G z) - h_m ≤ 0
        blk = np.zeros((M, nv))
        blk[np.arange(M), np.arange(M)] = -1.0
        if k:
            blk[:, off:off + k] = U @ G
        rows.append(blk)
        rhs.append(-(U @ base))
        if len(h):
            r = np.zeros((len(h), nv))
            r[:, off:off + k] = H
            eq_rows.append(r)
            eq_rhs.append(h)
        bounds += bd
        off += k
    res = linprog(c, A_ub=np.vstack(rows), b_ub=np.concatenate(rhs),
                  A_eq=np.vstack(eq_rows) if eq_rows else None,
                  b_eq=np.concatenate(eq_rhs) if eq_rhs else None,
                  bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError("oracle LP failed: " + res.message)
    x = res.x
    pts = []
    off = M
    for (base, G, H, h, bd), k in zip(forms, nz):
        pts.append(base + G @ x[off:off + k])
        off += k
    V = float(res.fun)
    return OracleValue(V, V * (1 - math.cos(math.pi / M)), np.array(pts))


# ----------------------------------------------------------------------
# area


def _hull_area_perim(P):
    P = np.unique(np.round(P, 15), axis=0)
    if len(P) < 3:
        per = 2 * float(np.hypot(*(P[-1] - P[0]))) if len(P) == 2 else 0.0
        return 0.0, per
    try:
        h = ConvexHull(P)
    except QhullError:
        d = P - P.mean(axis=0)
        _, _, vt = np.linalg.svd(d)
        s = d @ vt[0]
        return 0.0, 2 * float(s.max() - s.min())
    return float(h.volume), float(h.area)


class _Region:
    """A witness region: sub-interval of a 1D object, a point, or a polygon piece."""

    def __init__(self, kind, data):
        self.kind = kind
        self.data = data
        if kind == "pt":
            self.corners = np.asarray(data, float).reshape(1, 2)
        elif kind == "seg":
            self.corners = np.array(data, dtype=float).reshape(2, 2)
        else:
            self.corners = np.asarray(data, float)
        self.center = self.corners.mean(axis=0)
        self.radius = float(np.hypot(*(self.corners - self.center).T).max())

    def split(self):
        if self.kind == "seg":
            a, b = self.data
            m = 0.5 * (a + b)
            return [_Region("seg", (a, m)), _Region("seg", (m, b))]
        V = self.data
        d = V - self.center
        _, _, vt = np.linalg.svd(d)
        n = vt[0]
        c = float(self.center @ n)
        out = []
        for sgn in (1, -1):
            piece = _clip_halfplane(V, sgn * n, sgn * c)
            if len(piece) >= 3:
                out.append(_Region("poly", piece))
        return out


def _clip_halfplane(V, n, c):
    """Part of polygon V with n·x ≤ c."""
    out = []
    k = len(V)
    for i in range(k):
        p, q = V[i], V[(i + 1) % k]
        fp, fq = p @ n - c, q @ n - c
        if fp <= 0:
            out.append(p)
        if fp * fq < 0:
            t = fp / (fp - fq)
            out.append(p + t * (q - p))
    return np.array(out).reshape(-1, 2)


def _initial_region(o: ConvexObject, lo, hi):
    if o.kind == "point":
        return _Region("pt", o.pts[0])
    if o.kind == "segment":
        return _Region("seg", (np.asarray(o.pts[0], float), np.asarray(o.pts[1], float)))
    if o.kind in ("ray", "line"):
        p, d = o.pts[0], np.asarray(o.direction, float)
        T = 4.0 * float(np.hypot(*(hi - lo))) / float(np.hypot(*d))
        return _Region("seg", (p - (0 if o.kind == "ray" else T) * d, p + T * d))
    return _Region("poly", np.asarray(o.pts, float))


def _cycles(n):
    """Index cycles on 3 and 4 objects; 4-cycles in all three cyclic orders."""
    out = {3: [], 4: []}
    for S in itertools.combinations(range(n), 3):
        out[3].append(S)
    for a, b, c, d in itertools.combinations(range(n), 4):
        out[4].extend([(a, b, c, d), (a, c, b, d), (a, b, d, c)])
    return {q: np.array(v, dtype=int).reshape(-1, q) for q, v in out.items()}


def _signed_area_bounds(C, cyc):
    """min and max of the signed area of each cycle over all corner choices.

    C has shape (n, m, 2) (corners padded by repetition). The signed area
    is affine in each witness separately, so the extremes over the product
    of convex regions are attained at corners.
    """
    q = cyc.shape[1]
    m = C.shape[1]
    comb = np.array(list(itertools.product(range(m), repeat=q)), dtype=int)  # (K, q)
    P = C[cyc[:, None, :], comb[None, :, :]]  # (T, K, q, 2)
    x, y = P[..., 0], P[..., 1]
    s = 0.5 * (x * np.roll(y, -1, axis=2) - np.roll(x, -1, axis=2) * y).sum(axis=2)
    return s.min(axis=1), s.max(axis=1)


def oracle_area(objects, grid_n: int = 512, max_nodes: int = 400000) -> OracleValue:
    """Minimum area of the hull of one witness per object, by branch and bound.

    Each object gets a witness region, refined by halving. The hull of the
    witnesses has area at least |signed area| of any triangle or
    quadrilateral through some of them (a 4-gon winds at most once), and
    that signed area is bounded over the regions exactly through their
    corners. Upper bounds come from the hull of the region centers. The
    search stops when the gap falls under 8·diam²/grid_n².
    """
    objs = list(objects)
    n = len(objs)
    lo, hi = _extent(objs)
    regs = [_initial_region(o, lo, hi) for o in objs]
    core = np.vstack([np.atleast_2d(o.pts) for o in objs])
    diam = float(np.hypot(*(core.max(axis=0) - core.min(axis=0))))
    target = 8.0 * diam ** 2 / grid_n ** 2
    if n < 3:
        C = np.array([r.center for r in regs])
        return OracleValue(0.0, 0.0, C)
    cycles = _cycles(n)

    def bound(rs):
        m = max(len(r.corners) for r in rs)
        C = np.stack([np.resize(r.corners, (m, 2)) if len(r.corners) != m else r.corners
                      for r in rs])
        lb = 0.0
        for cyc in cycles.values():
            if len(cyc) == 0:
                continue
            smin, smax = _signed_area_bounds(C, cyc)
            v = np.where(smin > 0, smin, np.where(smax < 0, -smax, 0.0))
            lb = max(lb, float(v.max()))
        centers = np.array([r.center for r in rs])
        ub, _ = _hull_area_perim(centers)
        return lb, ub, centers

    lb, ub, C = bound(regs)
    best_ub, best_pts = ub, C
    cnt = itertools.count()
    heap = [(lb, next(cnt), regs)]
    nodes = 0
    while heap:
        lb, _, rs = heapq.heappop(heap)
        if best_ub - lb <= target:
            heapq.heappush(heap, (lb, next(cnt), rs))
            break
        nodes += 1
        if nodes > max_nodes:
            heapq.heappush(heap, (lb, next(cnt), rs))
            break
        cand = [i for i in range(n) if rs[i].radius > 0]
        if not cand:
            continue
        i = max(cand, key=lambda j: (rs[j].radius, -j))
        for piece in rs[i].split():
            nr = list(rs)
            nr[i] = piece
            l2, u2, C2 = bound(nr)
            if u2 < best_ub:
                best_ub, best_pts = u2, C2
            if l2 < best_ub - target:
                heapq.heappush(heap, (l2, next(cnt), nr))
    # discarded nodes had bounds within target of the incumbent
    global_lb = min([h[0] for h in heap] + [best_ub - target])
    global_lb = max(global_lb, 0.0)
    return OracleValue(best_ub, best_ub - global_lb, best_pts)


# ----------------------------------------------------------------------
# touring


def _set_samples(s, h, lo, hi):
    """Boundary samples of a tour set at spacing ≤ h, with a membership test.

    Sets: ("halfplane", normal, offset) meaning normal·x ≥ offset, or a ConvexObject
    of kind point/segment/ray/line.
    """
    if isinstance(s, tuple) and s[0] == "halfplane":
        nrm, off = np.asarray(s[1], float), float(s[2])
        nn = np.hypot(*nrm)
        p0 = nrm * off / nn ** 2
        d = np.array([-nrm[1], nrm[0]]) / nn
        R = float(np.hypot(*(hi - lo)))
        ts = np.arange(-R, R + h, h)
        samples = p0 + ts[:, None] * d

        def inside(P):
            return P @ nrm >= off - 1e-9 * nn * max(1.0, R)

        return samples, inside
    o: ConvexObject = s
    if o.kind == "point":
        return o.pts.reshape(1, 2), lambda P: np.hypot(*(P - o.pts[0]).T) <= 1e-9
    if o.kind == "segment":
        a, b = o.pts
    else:
        p, d = o.pts[0], np.asarray(o.direction, float) / np.hypot(*o.direction)
        R = float(np.hypot(*(hi - lo)))
        a, b = (p if o.kind == "ray" else p - R * d), p + R * d
    L = float(np.hypot(*(b - a)))
    m = max(1, math.ceil(L / h))
    samples = a + np.linspace(0, 1, m + 1)[:, None] * (b - a)

    def inside(P):
        t = np.clip(((P - a) @ (b - a)) / L ** 2, 0, 1)
        q = a + t[:, None] * (b - a)
        return np.hypot(*(P - q).T) <= 1e-9 * max(1.0, L)

    return samples, inside


_BLOCK = 4_000_000  # distance entries per block


def oracle_tour(start, sets, end, spacing: float = 1e-3) -> OracleValue:
    """Shortest path start → sets in order → end over boundary samples.

    Each layer is the samples of one set plus "carried" copies of the previous
    layer's points that already lie in the set. Snapping each bend to its
    nearest sample moves it at most ``spacing``, so the value exceeds the
    optimum by at most 2·k·spacing.
    """
    start = np.asarray(start, float)
    end = np.asarray(end, float)
    pts = [start, end]
    for s in sets:
        if isinstance(s, ConvexObject):
            pts.append(np.atleast_2d(s.pts))
        else:
            pts.append(np.asarray(s[1], float) * 0)
    allp = np.vstack([np.atleast_2d(p) for p in pts])
    span = max(float((allp.max(0) - allp.min(0)).max()), 1.0)
    lo, hi = allp.min(0) - 2 * span, allp.max(0) + 2 * span
    P = start.reshape(1, 2)
    D = np.zeros(1)
    back = []
    for s in sets:
        S, inside = _set_samples(s, spacing, lo, hi)
        arg = np.empty(len(S), dtype=int)
        nd = np.empty(len(S))
        step = max(1, _BLOCK // max(len(P), 1))
        for a in range(0, len(S), step):
            blk = S[a:a + step]
            d = np.hypot(blk[:, None, 0] - P[None, :, 0], blk[:, None, 1] - P[None, :, 1]) + D[None, :]
            arg[a:a + step] = np.argmin(d, axis=1)
            nd[a:a + step] = d[np.arange(len(blk)), arg[a:a + step]]
        carry = np.nonzero(inside(P))[0]
        newP = np.vstack([S, P[carry]])
        newD = np.r_[nd, D[carry]]
        back.append((P, np.r_[arg, carry]))
        P, D = newP, newD
    tot = D + np.hypot(*(P - end).T)
    j = int(np.argmin(tot))
    path = [end, P[j]]
    for Pprev, arg in reversed(back):
        j = int(arg[j])
        path.append(Pprev[j])
    path = np.array(path[::-1])
    return OracleValue(float(tot.min()), 2 * len(sets) * spacing, path)
