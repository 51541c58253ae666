"""Exact minimum-perimeter intersecting polygon for segments, rays, lines and points.

Two kinds of candidates are combined:

* polygons none of whose vertices is a segment endpoint: the boundary is the
  shortest closed tour of one half-plane per object in cyclic normal order
  (``subroutine_I``);
* polygons with an endpoint p_bot as a vertex: a DP over the other endpoints
  in angular order around p_bot, where consecutive endpoints on the boundary
  are joined by shortest tours through half-planes (``subroutine_II``).

All tours come from :func:`stabhull.tpp_halfplanes.tour`; every candidate is validated
(convex, meets its objects, no bends at endpoints) and rejected otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .fptas_perimeter import Solution, make_solution
from .geom_core import (
    TOL,
    ConvexObject,
    ConvexPolygon,
    common_point_check,
    convex_hull,
    cross,
    intersects,
    ray_clip,
    triangle_hits,
    working_box,
)
from .locate import min_perimeter_rect
from .tpp_halfplanes import halfplane_of, order_halfplanes, tour

INF = math.inf
SUPPORTED = ("segment", "ray", "line", "point")


def endpoints(objects) -> np.ndarray:
    """Real endpoints: segment ends, ray origins and point objects, deduplicated."""
    pts = []
    for o in objects:
        if o.kind == "segment":
            pts.extend(o.pts)
        elif o.kind in ("ray", "point"):
            pts.append(o.pts[0])
    if not pts:
        return np.zeros((0, 2))
    out = []
    for p in pts:
        if not any(np.hypot(*(p - q)) <= TOL for q in out):
            out.append(np.asarray(p, dtype=float))
    return np.array(out)


def _near_Y(p, Y, tol):
    return len(Y) > 0 and float(np.min(np.hypot(*(Y - p).T))) <= tol


def _validate_chain(W, closed, objs, Y, scale, all_vertices=False):
    """Convexity, feasibility and no bend at an endpoint.

    Open chains must turn clockwise; closed ones may run either way. Only
    interior bends are checked against Y unless ``all_vertices``.
    """
    W = np.asarray(W, dtype=float)
    tol = 1e-9 * scale * scale
    P = W[:-1] if closed else W
    m = len(P)
    if m >= 3:
        turns = [cross(P[i] - P[i - 1], P[(i + 1) % m] - P[i]) for i in range(m)]
        if closed:
            if max(turns) > tol and min(turns) < -tol:
                return False
        elif max(turns) > tol:
            return False
    check = P if all_vertices else W[1:-1]
    if any(_near_Y(b, Y, 1e-7 * scale) for b in check):
        return False
    poly = ConvexPolygon(P) if m <= 2 else convex_hull(P)
    return all(intersects(o, poly, 1e-8 * scale) for o in objs)


def _chain_length(W):
    W = np.asarray(W, dtype=float)
    return float(np.hypot(*np.diff(W, axis=0).T).sum()) if len(W) > 1 else 0.0


def subroutine_II(u, v, objs: Sequence[ConvexObject], Y=None, tol: float = TOL) -> Tuple[float, np.ndarray]:
    """Shortest convex chain u → v (clockwise, left of u→v) whose polygon with uv meets objs.

    Bends other than u and v may not be endpoints in Y. Returns (∞, None)
    when the tour through the objects' half-planes is not such a chain.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    Y = np.zeros((0, 2)) if Y is None else np.asarray(Y, dtype=float).reshape(-1, 2)
    objs = list(objs)
    base = np.array([u, v]) if not np.allclose(u, v, atol=tol) else u.reshape(1, 2)
    seg = ConvexPolygon(base)
    rest = [o for o in objs if not intersects(o, seg, tol)]
    if not rest:
        return _chain_length(base), base
    refs = np.vstack([base] + [np.atleast_2d(o.pts) for o in objs])
    scale = max(1.0, float(np.abs(refs - refs.mean(axis=0)).max()))
    if len(base) == 2:
        hps, src = [], []
        for i, o in enumerate(rest):
            if o.kind == "point":
                continue
            h = halfplane_of(o, u, v, tol)
            hps.append(h)
            src.append(i)
        if not hps:
            return INF, None
        d = v - u
        seq = order_halfplanes(hps, src, start=(d[1], -d[0]))
        path = tour(u, seq, v)
        W = path.waypoints
        if not np.allclose(W[0], u):
            W = np.vstack([u, W])
        if not np.allclose(W[-1], v):
            W = np.vstack([W, v])
        ok = _validate_chain(W, False, objs, Y, scale)
        # chain must stay left of u → v
        if ok and len(W) > 2:
            ok = all(cross(d, b - u) >= -1e-9 * scale * scale for b in W[1:-1])
        return (path.length, W) if ok else (INF, None)
    # u = v: a closed tour from u back to u; try every cut of the cyclic order
    hps, src = [], []
    for i, o in enumerate(rest):
        if o.kind == "point":
            continue
        h = halfplane_of(o, u, u, tol)
        if h is None:
            continue  # line(o) passes through u; checked after the tour
        hps.append(h)
        src.append(i)
    if not hps:
        return INF, None
    seq = order_halfplanes(hps, src)
    items = list(seq.items)
    best = (INF, None)
    seen = set()
    for r in range(len(items)):
        key = round(math.atan2(items[r][0].normal[1], items[r][0].normal[0]), 12)
        if key in seen:
            continue
        seen.add(key)
        rot = items[r:] + items[:r]
        path = tour(u, [h for h, _ in rot], u)
        W = path.waypoints
        if not np.allclose(W[0], u):
            W = np.vstack([u, W])
        if not np.allclose(W[-1], u):
            W = np.vstack([W, u])
        if path.length < best[0] and _validate_chain(W, True, objs, Y, scale):
            best = (path.length, W)
    return best


# ----------------------------------------------------------------------
# endpoint-free candidates


def _line_arrangement_points(lines, scale):
    """One reference point in every cell of the arrangement of the given lines."""
    pts = []
    k = len(lines)
    delta = 1e-4 * scale
    verts: Dict[tuple, list] = {}
    for i in range(k):
        for j in range(i + 1, k):
            (a, d), (b, e) = lines[i], lines[j]
            den = cross(d, e)
            if abs(den) <= 1e-12:
                continue
            t = cross(b - a, e) / den
            p = a + t * d
            key = tuple(np.round(p / (1e-9 * scale)).astype(np.int64))
            verts.setdefault(key, [p, set()])[1].update((i, j))
    for p, ids in verts.values():
        angs = sorted({math.atan2(s * lines[i][1][1], s * lines[i][1][0]) for i in ids for s in (1, -1)})
        for x, y in zip(angs, angs[1:] + [angs[0] + 2 * math.pi]):
            m = 0.5 * (x + y)
            for r in (delta, 1e-3 * delta):
                pts.append(p + r * np.array([math.cos(m), math.sin(m)]))
    if not verts:
        # all lines parallel: points between and beyond them
        if k == 0:
            return [np.zeros(2)]
        d = lines[0][1]
        n = np.array([-d[1], d[0]])
        offs = sorted({float(n @ a) for a, _ in lines})
        base = lines[0][0] - float(n @ lines[0][0]) * n
        cuts = [offs[0] - 1.0] + [0.5 * (x + y) for x, y in zip(offs, offs[1:])] + [offs[-1] + 1.0]
        pts = [base + c * n for c in cuts]
    return pts


def subroutine_I(objects: Sequence[ConvexObject], tol: float = TOL):
    """Best feasible closed tour of per-object half-planes, over all arrangement cells.

    The half-plane of an object is the side of its supporting line away from
    a reference point; this depends only on the cell of the supporting-line
    arrangement containing the point, so one point per cell is tried. An
    optimum without endpoint vertices is found from any cell meeting its
    interior. Returns (value, polygon) or (∞, None).
    """
    objs = list(objects)
    Y = endpoints(objs)
    lines = []
    idx = []
    for i, o in enumerate(objs):
        if o.kind == "point":
            continue
        a, d = o.supporting_line()
        lines.append((np.asarray(a, float), np.asarray(d, float) / math.hypot(*d)))
        idx.append(i)
    refs = np.vstack([np.atleast_2d(o.pts) for o in objs])
    scale = max(1.0, float(np.abs(refs - refs.mean(axis=0)).max()))
    if not lines:
        return INF, None
    seen = set()
    best = (INF, None)
    for c in _line_arrangement_points(lines, scale):
        signs = tuple(int(np.sign(cross(d, c - a))) for a, d in lines)
        if 0 in signs or signs in seen:
            continue
        seen.add(signs)
        hps = [halfplane_of(objs[i], c, c, tol) for i in idx]
        seq = order_halfplanes(hps, idx)
        path = tour(None, seq, None, closed=True)
        if path.length >= best[0]:
            continue
        W = path.waypoints
        P = W[:-1] if len(W) > 1 and np.allclose(W[0], W[-1]) else W
        if _validate_chain(np.vstack([P, P[:1]]), True, objs, Y, scale, all_vertices=True):
            poly = convex_hull(P) if len(P) >= 3 else ConvexPolygon(np.unique(P, axis=0))
            best = (path.length, poly)
    return best


# ----------------------------------------------------------------------
# the DP around an endpoint p_bot


@dataclass
class PrefixContext:
    w: np.ndarray
    Psi_w: list
    prefix_sets: list  # O(w, j) as frozensets of object indices, j = 0..|Ψ(w)|


def _clockwise_line_angle(ref, d):
    """Clockwise angle in [0, π) turning direction ref until parallel to d."""
    ang = math.atan2(cross(d, ref), float(np.dot(ref, d)))
    ang %= math.pi
    if ang >= math.pi - 1e-13:
        ang = 0.0
    return ang


def _distinct(vals, tol=1e-12):
    out = []
    for x in sorted(vals):
        if not out or x - out[-1] > tol:
            out.append(x)
    return out


def _rank(x, Psi, tol=1e-12):
    for r, y in enumerate(Psi, start=1):
        if abs(x - y) <= tol:
            return r
    raise ValueError("angle not in Ψ")


class _Frame:
    """Geometry of the objects seen from p_bot with ρ₀ rotated to point left."""

    def __init__(self, p_bot, ray_angle, objects, box, tol=TOL):
        self.p = np.asarray(p_bot, dtype=float)
        self.tol = tol
        al = math.pi - ray_angle
        c, s = math.cos(al), math.sin(al)
        self.R = np.array([[c, -s], [s, c]])
        self.objects = list(objects)
        self.shapes = [self.to_frame(o.shape(box)) for o in self.objects]
        self.dirs = [None if o.kind == "point" else self.R @ np.asarray(o.supporting_line()[1], float)
                     for o in self.objects]
        left = np.array([[-1.0, 0.0]])
        self.hit_rho0 = []
        for S in self.shapes:
            si, so, ok, _ = ray_clip(left, S, tol)
            self.hit_rho0.append(bool(ok[0] and so[0] >= -tol))
        self.psi = [None if d is None else _clockwise_line_angle(np.array([-1.0, 0.0]), d) for d in self.dirs]
        self.Psi = _distinct([x for x in self.psi if x is not None])

    def to_frame(self, P):
        return (np.asarray(P, dtype=float).reshape(-1, 2) - self.p) @ self.R.T

    def rho0_split(self, j):
        """(O(ρ₀)⁺, O(ρ₀)⁻) for the tangent range [ψ_j, ψ_{j+1}]."""
        plus, minus = set(), set()
        for i, h in enumerate(self.hit_rho0):
            if not h or self.psi[i] is None:
                continue
            r = _rank(self.psi[i], self.Psi)
            (minus if r <= j else plus).add(i)
        return plus, minus

    def ray_hits(self, w):
        """Per object: meets ρ(w), meets segment p_bot w, meets ρ*(w)."""
        D = np.asarray(w, dtype=float).reshape(1, 2)
        n = float(np.hypot(*D[0]))
        et = self.tol / n
        out = []
        for S in self.shapes:
            si, so, ok, _ = ray_clip(D, S, self.tol)
            ok = bool(ok[0])
            out.append((ok and so[0] >= -et, ok and si[0] <= 1 + et and so[0] >= -et, ok and so[0] >= 1 - et))
        return out

    def prefix(self, w, hits=None) -> PrefixContext:
        hits = self.ray_hits(w) if hits is None else hits
        wd = np.asarray(w, dtype=float)
        ang = {}
        for i, (_, _, star) in enumerate(hits):
            if star and self.dirs[i] is not None:
                ang[i] = _clockwise_line_angle(wd, self.dirs[i])
        Psi = _distinct(ang.values())
        sets = [frozenset()]
        for y in Psi:
            sets.append(frozenset(i for i, a in ang.items() if a <= y + 1e-12))
        for a, b in zip(sets, sets[1:]):
            assert a <= b, "prefix sets must be nested"
        return PrefixContext(wd, Psi, sets)

    def phi(self, x):
        a = math.atan2(x[1], -x[0])
        return a if a >= 0 else a + 2 * math.pi

    def o_star(self, w, j, minus, hits=None, ctx=None):
        hits = self.ray_hits(w) if hits is None else hits
        ctx = self.prefix(w, hits) if ctx is None else ctx
        phw = self.phi(w)
        out = set(ctx.prefix_sets[j])
        for i, (ray, seg, star) in enumerate(hits):
            if seg:
                out.add(i)
                continue
            if ray:
                continue
            if self.hit_rho0[i]:
                if i not in minus:
                    out.add(i)
            elif self.phi(self.shapes[i][0]) < phw:
                out.add(i)
        return frozenset(out)


def psi_prefix_sets(w, p_bot, objs, ray_angle: float = math.pi) -> PrefixContext:
    """Ψ(w) and the prefix sets O(w, j); w and p_bot in world coordinates."""
    objs = list(objs)
    fr = _Frame(p_bot, ray_angle, objs, working_box(objs))
    ctx = fr.prefix(fr.to_frame(w)[0])
    ctx.w = np.asarray(w, dtype=float)
    return ctx


def o_star(w, j, p_bot, ray_angle, range_index, objs) -> frozenset:
    """O*(w, j) in world coordinates; w=None stands for the copy of p_bot that closes the polygon."""
    objs = list(objs)
    if w is None:
        return frozenset(range(len(objs)))
    fr = _Frame(p_bot, ray_angle, objs, working_box(objs))
    wf = fr.to_frame(w)[0]
    if np.hypot(*wf) <= TOL:
        return frozenset()
    _, minus = fr.rho0_split(range_index)
    return fr.o_star(wf, j, minus)


@dataclass
class ExactStats:
    dps: int = 0
    tours: int = 0
    cache_hits: int = 0
    pruned: int = 0
    notes: list = field(default_factory=list)


class _LCache:
    def __init__(self, objects, Y, stats):
        self.objects = objects
        self.Y = Y
        self.stats = stats
        self.table = {}

    def get(self, ui, vi, u, v, mask):
        key = (ui, vi, mask)
        if key in self.table:
            self.stats.cache_hits += 1
            return self.table[key]
        self.stats.tours += 1
        res = subroutine_II(u, v, [self.objects[i] for i in sorted(mask)], self.Y)
        self.table[key] = res
        return res


def _rotational_feasible(frame: _Frame, active) -> bool:
    """Is there a half-plane with p_bot on its boundary meeting every active object?"""
    pts = [x for i in active for x in frame.shapes[i]]
    cands = []
    for x in pts:
        n = np.array([-x[1], x[0]])
        if np.hypot(*n) > 0:
            cands += [n, -n]
    if not cands:
        return True
    tol = 1e-9 * max(1.0, max(float(np.hypot(*x)) for x in pts))
    for n in cands:
        n = n / np.hypot(*n)
        if all(float((frame.shapes[i] @ n).max()) >= -tol for i in active):
            return True
    return False


def triangle_table(p_bot, Y, shapes):
    """T[a][b]: objects meeting the triangle (p_bot, Y[a], Y[b]) (degenerate when an index is p_bot)."""
    p = np.asarray(p_bot, dtype=float)
    Yr = np.asarray(Y, dtype=float) - p
    bits = np.zeros((len(Yr), len(Yr)), dtype=np.int64)
    for i, S in enumerate(shapes):
        hit = triangle_hits(Yr, Yr, np.asarray(S, dtype=float) - p, TOL)
        bits |= np.where(hit, np.int64(1) << i, np.int64(0))
    memo = {}

    def fs(m):
        if m not in memo:
            memo[m] = frozenset(i for i in range(len(shapes)) if m >> i & 1)
        return memo[m]

    return [[fs(int(m)) for m in row] for row in bits]


def dp_exact(p_bot, ray_angle: float, range_index: int, objs: Sequence[ConvexObject],
             bound: float = INF, cache: Optional[_LCache] = None, Y=None, box=None,
             stats: Optional[ExactStats] = None, tri_table=None):
    """A[p̄_bot, 0] for one endpoint, one excluded ray ρ₀ and one tangent range.

    Returns (value, polygon); the polygon is the hull of all chains and is
    checked to meet every object. Transitions that cannot finish below
    ``bound`` are skipped.
    """
    objs = list(objs)
    p_bot = np.asarray(p_bot, dtype=float)
    Y = endpoints(objs) if Y is None else Y
    box = working_box(objs) if box is None else box
    stats = ExactStats() if stats is None else stats
    cache = _LCache(objs, Y, stats) if cache is None else cache
    stats.dps += 1
    fr = _Frame(p_bot, ray_angle, objs, box)
    active = [i for i, o in enumerate(objs) if not o.contains(p_bot, TOL)]
    if not active:
        return 0.0, ConvexPolygon(p_bot.reshape(1, 2))
    for i in active:
        if objs[i].kind == "point" and fr.hit_rho0[i]:
            return INF, None
    if not _rotational_feasible(fr, active):
        return INF, None
    if range_index > len(fr.Psi):
        raise ValueError("range index out of bounds")
    _, minus = fr.rho0_split(range_index)
    act = frozenset(active)
    # endpoints other than p_bot and off ρ₀, in angular order
    Yf = fr.to_frame(Y)
    gid = {}
    cand = []
    for k, (yw, yf) in enumerate(zip(Y, Yf)):
        r = float(np.hypot(*yf))
        if r <= TOL:
            continue
        if abs(yf[1]) <= TOL * max(1.0, r) and yf[0] < 0:
            continue
        cand.append((fr.phi(yf), r, k))
    cand.sort()
    pbot_id = -1
    for k, y in enumerate(Y):
        if np.hypot(*(y - p_bot)) <= TOL:
            pbot_id = k
    if pbot_id < 0:
        raise ValueError("p_bot must be an endpoint")
    nodes = []  # (global id, world point, frame point, group, contexts)
    g = -1
    last = None
    for ph, r, k in cand:
        if last is None or ph - last > 1e-12:
            g += 1
            last = ph
        yf = Yf[k]
        hits = fr.ray_hits(yf)
        ctx = fr.prefix(yf, hits)
        stars = [fr.o_star(yf, j, minus, hits, ctx) & act for j in range(len(ctx.Psi_w) + 1)]
        nodes.append((k, Y[k], yf, g, stars))
    # A entries: dict (node index, j) -> (value, pred key, chain)
    A: Dict[tuple, tuple] = {("bot", 0): (0.0, None, None)}
    slack = 1e-9 * max(1.0, bound if math.isfinite(bound) else 1.0)

    if tri_table is None:
        tri_table = triangle_table(p_bot, Y, [o.shape(box) for o in objs])

    order_keys = []
    for ni, node in enumerate(nodes):
        for j in range(len(node[4])):
            order_keys.append(((ni, j), node[3]))
    order_keys.append((("top", 0), math.inf))
    entries_by_group: Dict[int, list] = {}
    for key, grp in order_keys:
        if key == ("top", 0):
            wk, ww, wf, wstar, wid = "top", p_bot, None, act, pbot_id
        else:
            ni, j = key
            wk = key
            wid, ww, wf, _, stars = nodes[ni]
            wstar = stars[j]
        wdist = float(np.hypot(*(ww - p_bot)))
        best = (INF, None, None)
        cand_preds = [(("bot", 0), p_bot, None, frozenset(), pbot_id)]
        for gg, lst in entries_by_group.items():
            if gg < grp:
                cand_preds.extend(lst)
        for pk, pw, pf, pstar, pid in cand_preds:
            if pk not in A:
                continue
            av = A[pk][0]
            lb = av + float(np.hypot(*(ww - pw))) + (wdist if wk != "top" else 0.0)
            if lb > bound + slack or lb >= best[0] + (wdist if wk != "top" else 0.0):
                stats.pruned += 1
                continue
            mask = wstar - (pstar | tri_table[pid][wid])
            L, chain = cache.get(pid, wid, pw, ww, mask)
            val = av + L
            if val < best[0]:
                best = (val, pk, chain)
        if math.isfinite(best[0]):
            A[wk] = best
            if wk != "top":
                entries_by_group.setdefault(grp, []).append((wk, ww, wf, wstar, wid))
    if "top" not in A:
        return INF, None
    # reconstruct
    pts = [p_bot.reshape(1, 2)]
    k = "top"
    while k is not None and k != ("bot", 0):
        val, pk, chain = A[k]
        if chain is not None:
            pts.append(np.asarray(chain))
        k = pk
    allp = np.vstack(pts)
    poly = convex_hull(allp) if len(np.unique(np.round(allp, 12), axis=0)) >= 3 else ConvexPolygon(np.unique(allp, axis=0))
    refs = np.vstack([np.atleast_2d(o.pts) for o in objs])
    scale = max(1.0, float(np.abs(refs - refs.mean(axis=0)).max()))
    if not all(intersects(o, poly, 1e-7 * scale) for o in objs):
        stats.notes.append("reconstructed hull failed the feasibility check")
        return INF, None
    return min(A["top"][0], poly.perimeter), poly


def three_ray_angles(theta0: float = math.pi + 0.1234):
    return [theta0 + k * 2 * math.pi / 3 for k in range(3)]


def solve_exact(objects: Sequence[ConvexObject], tol: float = TOL) -> Solution:
    objs = list(objects)
    if not objs:
        raise ValueError("empty instance")
    for o in objs:
        if o.kind not in SUPPORTED:
            raise ValueError(f"exact solver does not handle {o.kind} objects")
    p = common_point_check(objs, tol)
    if p is not None:
        return make_solution("perimeter", ConvexPolygon(p.reshape(1, 2)), objs, {"branch": "common_point"})
    stats = ExactStats()
    R = min_perimeter_rect(objs, 0.01)
    best_val, best_poly, branch = R.perimeter, R.polygon(), "rectangle"
    v1, poly1 = subroutine_I(objs, tol)
    if v1 < best_val and poly1 is not None:
        best_val, best_poly, branch = poly1.perimeter, poly1, "subroutine_I"
    Y = endpoints(objs)
    box = working_box(objs)
    cache = _LCache(objs, Y, stats)
    shapes = [o.shape(box) for o in objs]
    for k, pb in enumerate(Y):
        tt = triangle_table(pb, Y, shapes)
        for ang in three_ray_angles():
            fr = _Frame(pb, ang, objs, box)
            for j in range(len(fr.Psi) + 1):
                val, poly = dp_exact(pb, ang, j, objs, best_val, cache, Y, box, stats, tt)
                if poly is not None and poly.perimeter < best_val - 1e-12 * max(1.0, best_val):
                    best_val, best_poly, branch = poly.perimeter, poly, "dp_exact"
    method = {"branch": branch, "dps": stats.dps, "tours": stats.tours, "cache_hits": stats.cache_hits,
              "subroutine_I": "arrangement cells"}
    if stats.notes:
        method["notes"] = sorted(set(stats.notes))
    return make_solution("perimeter", best_poly, objs, method)
