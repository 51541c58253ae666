"""(1+ε)-approximate minimum-area intersecting polygon.

Two branches are combined and the smaller area wins:

* constant size: polygons with at most 8 vertices placed on object sides,
  found by multi-start local search inside a binary search over the area
  levels μ = (1+ε)^z (a line meeting every object is the k = 2 case and
  gives area 0);
* grid: for every candidate ellipse E (minimum ellipse of 3 to 5
  arrangement vertices) the frame mapping E to the unit circle carries a
  grid, and the chain DP of the perimeter module, run with triangle areas,
  finds the smallest convex grid polygon meeting all objects.

A polygon on an ellipse grid only matters if it contains E/2 (the
half-size copy of E around its center). With an incumbent area U this
bounds how far any vertex can be from the center, which restricts both the
grid and the anchors.
"""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .geom_core import (
    TOL,
    ConvexObject,
    ConvexPolygon,
    common_point_check,
    convex_hull,
    cross,
    intersects,
    set_distances,
    working_box,
)
from .locate import GridSpec, arrangement_vertices, candidate_grids, grid_side_count
from .fptas_perimeter import (
    INF,
    AngularVertexOrder,
    Solution,
    _Incumbent,
    _shapes,
    boundary_corners,
    chain_dp,
    lattice_frame,
    make_solution,
    run_anchor_dps,
)

log = logging.getLogger(__name__)

AREA_K = 1.0 / 32.0


# ----------------------------------------------------------------------
# k = 2: stabbing lines


def _line_meets(o: ConvexObject, p, d, tol: float) -> bool:
    """Does the line p + t·d meet object o?"""
    def side(q):
        return cross(d, q - p)

    if o.kind in ("point", "segment", "polygon"):
        s = np.array([side(q) for q in o.pts])
        return bool(s.min() <= tol and s.max() >= -tol)
    s0 = side(o.pts[0])
    if abs(s0) <= tol:
        return True
    c = cross(d, o.direction)
    if o.kind == "line":
        return abs(c) > 0.0
    return c * s0 < 0


def line_stab(objects: Sequence[ConvexObject], tol: float = TOL):
    """A line (point, unit direction) meeting every object, or None.

    If some line meets all objects, it can be rotated and translated while
    it still does until it passes through two object vertices, or through
    one vertex parallel to an unbounded object; those candidates are
    tested exhaustively.
    """
    objects = list(objects)
    if not objects:
        raise ValueError("empty object list")
    V = [o.defining_vertices() for o in objects]
    V = np.vstack([v for v in V if len(v)]) if any(len(v) for v in V) else np.zeros((0, 2))
    V = np.unique(np.round(V, 12), axis=0)
    scale = max(1.0, float(np.abs(V).max()) if len(V) else 1.0)
    t = tol * scale
    dirs = [o.direction for o in objects if o.direction is not None]
    # distinct directions of unbounded objects (up to sign)
    ud = []
    for d in dirs:
        d = d if (d[1] > 0 or (d[1] == 0 and d[0] > 0)) else -d
        if not any(abs(cross(d, e)) <= 1e-12 for e in ud):
            ud.append(d)

    def ok(p, d):
        return all(_line_meets(o, p, d, t) for o in objects)

    for i in range(len(V)):
        for j in range(i + 1, len(V)):
            d = V[j] - V[i]
            d = d / math.hypot(*d)
            if ok(V[i], d):
                return V[i].copy(), d
    for p in V:
        for d in ud:
            if ok(p, d):
                return p.copy(), d.copy()
    for o in objects:
        if o.kind == "line" and ok(o.pts[0], o.direction):
            return o.pts[0].copy(), o.direction.copy()
    if len(V) == 1:
        for d in [np.array([1.0, 0.0])] + ud:
            if ok(V[0], d):
                return V[0].copy(), d
    return None


def _stab_segment(objects, p, d, tol: float = TOL) -> ConvexPolygon:
    """The shortest piece of the line p + t·d that meets every object."""
    box = working_box(objects)
    ts_lo, ts_hi = [], []
    n = np.array([-d[1], d[0]])
    for o in objects:
        S = o.shape(box)
        s = (S - p) @ n
        u = (S - p) @ d
        if len(S) == 1:
            lo = hi = float(u[0])
        else:
            # parameters along the line where the object's shape is crossed
            cand = []
            k = len(S)
            edges = [(0, 1)] if k == 2 else [(i, (i + 1) % k) for i in range(k)]
            for a, b in edges:
                if abs(s[a]) <= tol:
                    cand.append(u[a])
                if abs(s[b]) <= tol:
                    cand.append(u[b])
                if s[a] * s[b] < 0:
                    lam = s[a] / (s[a] - s[b])
                    cand.append(u[a] + lam * (u[b] - u[a]))
            if not cand:
                cand = [float(u[np.argmin(np.abs(s))])]
            lo, hi = min(cand), max(cand)
        ts_lo.append(lo)
        ts_hi.append(hi)
    a = min(ts_hi)
    b = max(ts_lo)
    if b <= a:
        return ConvexPolygon((p + a * d).reshape(1, 2))
    return ConvexPolygon(np.vstack([p + a * d, p + b * d]))


# ----------------------------------------------------------------------
# lower bound


def area_lower_bound(n: int, c: float) -> float:
    """K / n^(8c): positive area lower bound for integer inputs on an n^c × n^c grid.

    A positive-area optimum has a vertex whose distance to the line through
    some edge is at least 1/(4·n^{4c}) and an edge of length at least that
    much (both come from determinants of integer points divided by norms
    at most 2n^c, nested twice). The triangle spanned is inside the
    polygon, so its area (1/2)·(1/(4n^{4c}))² = 1/(32·n^{8c}) is a bound.
    """
    if n < 1 or c < 1:
        raise ValueError("need n >= 1 and c >= 1")
    return AREA_K / float(n) ** (8.0 * c)


def rescaled_lower_bound(objects: Sequence[ConvexObject]) -> float:
    """Termination bound for real inputs: the integer bound after snapping to a grid.

    Coordinates are treated as integers in units of the smallest nonzero
    coordinate difference; the bound is converted back to world area.
    """
    V = np.vstack([o.pts for o in objects])
    spread = float(np.ptp(V, axis=0).max()) if len(V) > 1 else 1.0
    diffs = np.abs(np.diff(np.unique(np.round(V.ravel(), 12))))
    diffs = diffs[diffs > 1e-12 * max(spread, 1.0)]
    q = float(diffs.min()) if len(diffs) else max(spread, 1.0)
    spread = max(spread, q)
    n = max(2, len(objects))
    c = max(1.0, math.log(spread / q + 1.0) / math.log(n))
    lb = area_lower_bound(n, c) * q * q
    return max(lb, 1e-300)


# ----------------------------------------------------------------------
# area DP


def dp_area(order: AngularVertexOrder, objects: Sequence[ConvexObject], tol: float = 1e-9):
    """Minimum area of a convex polygon on the order's points with the anchor as lowest vertex."""
    shapes = _shapes(objects)
    res = chain_dp(order, shapes, "area", INF, tol)
    return res.value, res.chain


# ----------------------------------------------------------------------
# constant-size branch


def _sides(objects, box):
    """(object index, p, s) for every object side; a point is a side with s = 0."""
    out = []
    for i, o in enumerate(objects):
        S = o.shape(box)
        if len(S) == 0:
            continue
        if len(S) == 1:
            out.append((i, S[0].copy(), np.zeros(2)))
        elif len(S) == 2:
            out.append((i, S[0].copy(), S[1] - S[0]))
        else:
            for j in range(len(S)):
                out.append((i, S[j].copy(), S[(j + 1) % len(S)] - S[j]))
    return out


def _hull(pts):
    """Convex hull (CCW list of tuples) of a few points, monotone chain."""
    P = sorted(set(pts))
    if len(P) < 3:
        return P

    def half(seq):
        h = []
        for p in seq:
            while len(h) >= 2 and ((h[-1][0] - h[-2][0]) * (p[1] - h[-2][1])
                                   - (h[-1][1] - h[-2][1]) * (p[0] - h[-2][0])) <= 0:
                h.pop()
            h.append(p)
        return h

    return half(P)[:-1] + half(P[::-1])[:-1]


def _area(H) -> float:
    if len(H) < 3:
        return 0.0
    s = 0.0
    for i in range(len(H)):
        x0, y0 = H[i - 1]
        x1, y1 = H[i]
        s += x0 * y1 - x1 * y0
    return 0.5 * abs(s)


def _pt_seg(p, a, b) -> float:
    dx, dy = b[0] - a[0], b[1] - a[1]
    L = dx * dx + dy * dy
    t = 0.0 if L == 0 else min(1.0, max(0.0, ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / L))
    return math.hypot(p[0] - a[0] - t * dx, p[1] - a[1] - t * dy)


def _seg_seg(a, b, c, d) -> float:
    def orient(p, q, r):
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    if ((o1 > 0) != (o2 > 0)) and o1 != 0 and o2 != 0 and ((o3 > 0) != (o4 > 0)) and o3 != 0 and o4 != 0:
        return 0.0
    return min(_pt_seg(a, c, d), _pt_seg(b, c, d), _pt_seg(c, a, b), _pt_seg(d, a, b))


def _inside(p, H) -> bool:
    if len(H) < 3:
        return False
    for i in range(len(H)):
        a, b = H[i - 1], H[i]
        if (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) < 0:
            return False
    return True


def _edge_list(H):
    if len(H) == 1:
        return [(H[0], H[0])]
    if len(H) == 2:
        return [(H[0], H[1])]
    return [(H[i - 1], H[i]) for i in range(len(H))]


def _gap(S, H) -> float:
    """Distance between two small convex vertex lists (0 when they meet)."""
    if any(_inside(p, H) for p in S) or any(_inside(q, S) for q in H):
        return 0.0
    return min(_seg_seg(a, b, c, d) for a, b in _edge_list(S) for c, d in _edge_list(H))


class _AssignmentSearch:
    """Local search for one side assignment: minimize hull area with a penalty for missed objects."""

    def __init__(self, sides, shapes, scale, starts, rng):
        self.p = [tuple(map(float, s[1])) for s in sides]
        self.s = [tuple(map(float, s[2])) for s in sides]
        covered = {s[0] for s in sides}
        self.others = [[tuple(map(float, q)) for q in S] for i, S in enumerate(shapes)
                       if i not in covered]
        self.rho = 4.0 * scale
        self.scale = scale
        self.starts = starts
        self.rng = rng
        self.k = len(sides)

    def points(self, lam):
        out = []
        for (px, py), (sx, sy), t in zip(self.p, self.s, lam):
            t = min(1.0, max(0.0, float(t)))
            out.append((px + t * sx, py + t * sy))
        return out

    def penalty(self, H):
        return sum(_gap(S, H) for S in self.others)

    def f(self, lam):
        H = _hull(self.points(lam))
        a = _area(H)
        if not self.others:
            return a
        return a + self.rho * self.penalty(H)

    def run(self):
        k = self.k
        if 4 ** k <= 1024:
            cands = np.array(list(itertools.product(np.linspace(0, 1, 4), repeat=k)))
        else:
            cands = self.rng.random((512, k))
        fv = np.array([self.f(c) for c in cands])
        picks = cands[np.argsort(fv, kind="stable")[: self.starts]]
        extra = self.rng.random((max(1, self.starts // 3), k))
        best = (INF, None)
        bounds = [(0.0, 1.0)] * k
        for x0 in np.vstack([picks, extra]):
            r = minimize(self.f, x0, method="Powell", bounds=bounds,
                         options={"xtol": 1e-6, "ftol": 1e-12, "maxfev": 200 * k})
            x = np.clip(r.x, 0.0, 1.0)
            if r.fun < best[0]:
                best = (float(r.fun), x)
        # polish the winner
        r = minimize(self.f, best[1], method="Nelder-Mead", bounds=bounds,
                     options={"xatol": 1e-12, "fatol": 1e-16, "maxfev": 400 * k})
        lam = np.clip(r.x, 0.0, 1.0) if r.fun <= best[0] else best[1]
        H = _hull(self.points(lam))
        return _area(H), np.array(H, dtype=float).reshape(-1, 2), (self.penalty(H) if self.others else 0.0)


def _assignments(sides, n_objects, budget: int, rng):
    """Side tuples to search, sizes 3 … min(8, #sides); full when small, else sampled."""
    m = len(sides)
    kmax = min(8, m)
    full = []
    total = sum(math.comb(m, k) for k in range(3, kmax + 1))
    if (n_objects <= 12 and kmax <= 4) or total <= budget:
        for k in range(3, kmax + 1):
            full.extend(itertools.combinations(range(m), k))
        return full, False
    # sampled: prefer one side per object, sizes spread over 3 … kmax
    seen = set()
    tries = 0
    while len(seen) < budget and tries < 50 * budget:
        tries += 1
        k = int(rng.integers(3, kmax + 1))
        pick = tuple(sorted(rng.choice(m, size=k, replace=False).tolist()))
        seen.add(pick)
    return sorted(seen, key=lambda t: (len(t), t)), True


def constant_size_area(objects: Sequence[ConvexObject], eps: float, seed: int = 0,
                       budget: int = 200, starts: int = 6, threads: int = 1,
                       tol: float = TOL) -> Solution:
    """Smallest polygon with at most 8 vertices found by side-assignment search.

    Returns a Solution with value ∞ and no polygon when nothing feasible
    is found. The feasibility decision for a level μ is answered by local
    search, so this branch is a heuristic.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    objects = list(objects)
    p = common_point_check(objects, tol)
    if p is not None:
        return make_solution("area", ConvexPolygon(p.reshape(1, 2)), objects,
                             {"branch": "common_point", "k": 1})
    ln = line_stab(objects, tol)
    if ln is not None:
        poly = _stab_segment(objects, *ln)
        return make_solution("area", poly, objects, {"branch": "line_stab", "k": 2}, value=0.0)
    box = working_box(objects, factor=1.0)
    shapes = [o.shape(box) for o in objects]
    sides = _sides(objects, box)
    V = np.vstack([S for S in shapes if len(S)])
    scale = max(float(np.ptp(V, axis=0).max()), 1e-12)
    rng = np.random.default_rng([seed, 0])
    assigns, sampled = _assignments(sides, len(objects), budget, rng)

    def search(idx):
        a = assigns[idx]
        task_rng = np.random.default_rng([seed, 1, idx])
        res = _AssignmentSearch([sides[i] for i in a], shapes, scale, starts, task_rng).run()
        return idx, res

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = dict(ex.map(search, range(len(assigns))))
    else:
        results = dict(map(search, range(len(assigns))))

    feas_tol = 1e-9 * scale
    found = []
    for idx in range(len(assigns)):
        a, H, pen = results[idx]
        if len(H) < 3 or pen > feas_tol:
            continue
        poly = ConvexPolygon(H)
        if all(intersects(o, poly, feas_tol) for o in objects):
            found.append((a, idx, poly))

    method = {"branch": "constant_size", "eps": eps, "assignments": len(assigns),
              "sampled_assignments": sampled, "heuristic": True}
    if not found:
        return Solution("area", INF, None, [], {**method, "feasible": False})

    # binary search over levels μ = (1+ε)^z; a level is feasible when some
    # assignment reached area ≤ μ
    def decide(mu):
        return any(a <= mu for a, _, _ in found)

    base = 1.0 + eps
    lb = rescaled_lower_bound(objects)
    ub = scale * scale * 4.0
    z_lo = math.floor(math.log(lb) / math.log(base))
    z_hi = math.ceil(math.log(max(ub, lb * base)) / math.log(base))
    while not decide(base ** z_hi):
        z_hi += 1
    while z_hi - z_lo > 1:
        z = (z_lo + z_hi) // 2
        if decide(base ** z):
            z_hi = z
        else:
            z_lo = z
    mu = base ** z_hi
    a, idx, poly = min(found, key=lambda t: (t[0], t[1]))
    return make_solution("area", poly, objects, {**method, "k": len(poly), "level": mu,
                                                 "assignment": list(assigns[idx])})


# ----------------------------------------------------------------------
# grid branch


def _cap_area(r0: float, d: float) -> float:
    """Area of the convex hull of a disk of radius r0 and a point at distance d ≥ r0."""
    if d <= r0:
        return math.pi * r0 * r0
    return r0 * math.sqrt(d * d - r0 * r0) + r0 * r0 * (math.pi - math.acos(r0 / d))


def _reach(U: float, r0: float) -> float:
    """Largest distance from the center a vertex can have in a polygon ⊇ disk(r0) of area ≤ U."""
    lo, hi = r0, r0 + 2.0 * U / r0 + 1.0
    if _cap_area(r0, hi) <= U:
        return hi
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if _cap_area(r0, mid) <= U:
            lo = mid
        else:
            hi = mid
    return hi


def _pair_area_bound(a, W, c, r0):
    """Lower bound on the area of hull(a, w, disk(c, r0)) for each row w of W."""
    d = W - a
    L = np.hypot(d[:, 0], d[:, 1])
    h = np.abs(d[:, 0] * (c[1] - a[1]) - d[:, 1] * (c[0] - a[0])) / np.where(L > 0, L, 1.0)
    tri = 0.5 * L * (h + r0)
    dw = np.hypot(W[:, 0] - c[0], W[:, 1] - c[1])
    caps = np.array([_cap_area(r0, x) for x in dw])
    return np.maximum(np.maximum(tri, caps), _cap_area(r0, math.hypot(*(a - c))))


def _inside_fraction(E, poly: Optional[ConvexPolygon], m: int = 32) -> float:
    if poly is None or len(poly) < 3:
        return 0.0
    th = np.linspace(0, 2 * math.pi, m, endpoint=False)
    pts = E.center + (0.5 * np.c_[np.cos(th), np.sin(th)]) @ E.from_unit().T
    return float(np.mean(set_distances(pts, poly.vertices) <= 0.0))


def _refined_grid(E, U: float, eps: float, k_max: int):
    """Grid around E/2 covering every vertex of a polygon ⊇ E/2 with area ≤ U."""
    L = E.from_unit()
    det = abs(float(np.linalg.det(L)))
    U_unit = U / det
    if U_unit < math.pi * 0.25 * (1 - 1e-12):
        return None
    D = min(_reach(U_unit, 0.5), 32.0 / eps * math.sqrt(2.0))
    fine = 64.0 / eps / grid_side_count(eps, None)
    cell = max(fine, 2.0 * D / k_max)
    k = max(2, int(math.ceil(2.0 * D / cell - 1e-9)))
    origin = E.center + L @ np.array([-D, -D])
    return GridSpec(origin, L * cell, k, k, E, (), {"reach": D, "cell": cell,
                                                   "capped": cell > fine})


def _grid_branch(objects, grid: GridSpec, U: float, threads: int, tol: float):
    Minv, t = lattice_frame(grid)
    k = grid.cols
    box = (-float(k), -float(k), 2.0 * k, 2.0 * k)
    lat = [o.transformed(Minv, t) for o in objects]
    shapes = [o.shape(box) for o in lat]
    if any(len(S) == 0 for S in shapes):
        return None
    cell = grid.meta["cell"]
    r0 = 0.5 / cell
    D = grid.meta["reach"] / cell
    c = np.array([D, D])
    universe = boundary_corners(shapes, k, k)
    if len(universe) == 0:
        return None
    uf = universe.astype(float)
    universe = universe[np.hypot(uf[:, 0] - c[0], uf[:, 1] - c[1]) <= D * (1 + 1e-9) + 1e-9]
    if len(universe) < 3:
        return None, int(len(universe))
    det = abs(float(np.linalg.det(grid.axes)))
    inc = _Incumbent(U / det)
    ymax = c[1] - r0 + 1e-9

    def anchor_ok(a):
        return a[1] <= ymax and _cap_area(r0, math.hypot(*(a - c))) <= inc.get() * (1 + 1e-9)

    def vertex_ok(a, W, bound):
        return _pair_area_bound(a, W, c, r0) <= bound * (1 + 1e-9)

    best = run_anchor_dps(universe, shapes, np.zeros((len(universe), 0)), "area", inc,
                          threads, 1e-9, anchor_filter=anchor_ok, vertex_filter=vertex_ok)
    if best is None:
        return None, int(len(universe))
    val, rank, chain = best
    return convex_hull(grid.to_plane(chain)), int(len(universe))


def _trivial_area(objects, tol):
    p = common_point_check(objects, tol)
    if p is not None:
        return make_solution("area", ConvexPolygon(p.reshape(1, 2)), objects,
                             {"branch": "common_point", "k": 1})
    ln = line_stab(objects, tol)
    if ln is not None:
        return make_solution("area", _stab_segment(objects, *ln), objects,
                             {"branch": "line_stab", "k": 2}, value=0.0)
    return Solution("area", INF, None, [], {"branch": "constant_size", "skipped": True})


def solve_area(objects: Sequence[ConvexObject], eps: float, tol: float = TOL, threads: int = 1,
               seed: int = 0, k_max: int = 32, max_grids: int = 2, subset_budget: Optional[int] = None,
               assign_budget: int = 200, constant_size: bool = True) -> Solution:
    """Smaller of the constant-size branch and the grid DPs over candidate ellipses.

    ``k_max`` caps the cells per grid side and ``max_grids`` the number of
    ellipse grids searched; both are recorded in the returned metadata.
    ``constant_size=False`` skips the local search (the grid branch then
    starts from the hull of one point per object).
    Grids are tried in order of how much of E/2 the incumbent covers,
    then by ellipse area, then by defining subset.
    """
    if not objects:
        raise ValueError("empty instance")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    objects = list(objects)
    if constant_size:
        cs = constant_size_area(objects, eps, seed=seed, budget=assign_budget, threads=threads, tol=tol)
    else:
        cs = _trivial_area(objects, tol)
    if cs.method.get("branch") in ("common_point", "line_stab"):
        return cs
    method = {"eps": eps, "k_max": k_max, "max_grids": max_grids,
              "constant_size_value": cs.value, "constant_size_heuristic": True}
    best_poly, best_branch = cs.polygon, "constant_size"
    if cs.polygon is not None:
        U = cs.value
    else:
        box = working_box(objects, factor=1.0)
        V = []
        for o in objects:
            S = o.shape(box)
            V.append(S.mean(axis=0))
        best_poly = convex_hull(np.array(V))
        best_branch = "witness_hull"
        U = best_poly.area
    X = arrangement_vertices(objects)
    grids = candidate_grids(objects, eps, k_max=None, budget=subset_budget, X=X)
    scored = []
    for g in grids:
        E = g.ellipse
        if U < E.area / 4.0 * (1 - 1e-12):
            continue
        scored.append((-_inside_fraction(E, best_poly), -E.area, g.subset, g))
    scored.sort(key=lambda s: s[:3])
    tried = []
    capped = False
    for _, _, subset, g in scored[:max_grids]:
        rg = _refined_grid(g.ellipse, U, eps, k_max)
        if rg is None:
            continue
        capped |= rg.meta["capped"]
        out = _grid_branch(objects, rg, U, threads, tol)
        poly, size = (None, 0) if out is None else out
        tried.append({"subset": list(subset), "cells": rg.cols, "universe": size,
                      "found": poly is not None})
        if poly is None:
            continue
        scale = max(1.0, float(np.abs(poly.vertices).max()))
        if poly.area < U and all(intersects(o, poly, 1e-7 * scale) for o in objects):
            best_poly, best_branch, U = poly, "grid_dp", poly.area
    method.update({"grids_available": len(scored), "grids_tried": tried,
                   "grid_resolution_capped": capped,
                   "grid_budget_hit": len(scored) > max_grids})
    method["branch"] = best_branch
    return make_solution("area", best_poly, objects, method)
