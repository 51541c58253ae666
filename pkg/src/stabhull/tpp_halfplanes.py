"""Shortest paths that visit an ordered sequence of convex sets.

The visit sets are closed half-planes or 1-dimensional objects (points,
segments, rays, lines). The length functional is convex, so a smoothed
version is minimized with L-BFGS-B under box bounds on per-set
parameters, with the smoothing driven to zero. The contact pattern of the
numeric path is then read off and the path rebuilt exactly by reflection
unfolding; the exact path replaces the numeric one when it verifies.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .geom_core import TOL, ConvexObject, as_point, clip_unbounded, cross, perp, unit


@dataclass(frozen=True, eq=False)
class HalfPlane:
    """Closed half-plane {p : normal·p ≥ offset} with a unit normal."""

    normal: np.ndarray
    offset: float

    @staticmethod
    def through(point, normal) -> "HalfPlane":
        n = unit(as_point(normal))
        return HalfPlane(n, float(n @ as_point(point)))

    def signed(self, p) -> float:
        return float(self.normal @ np.asarray(p, dtype=float) - self.offset)

    def contains(self, p, tol: float = TOL) -> bool:
        return self.signed(p) >= -tol

    def line(self):
        n = self.normal
        return self.offset * n, np.array([-n[1], n[0]])

    def __repr__(self):
        return f"HalfPlane(n={self.normal.round(6).tolist()}, c={self.offset:.6g})"


@dataclass(frozen=True)
class OrderedHalfPlanes:
    items: tuple  # of (HalfPlane, source index)

    @property
    def halfplanes(self):
        return [h for h, _ in self.items]

    @property
    def sources(self):
        return [s for _, s in self.items]

    def __len__(self):
        return len(self.items)


@dataclass
class TourPath:
    waypoints: np.ndarray  # polyline from s to t (bends only)
    length: float
    visits: np.ndarray  # one visit point per set, in order
    contacts: tuple  # "touch" or "pass" per set
    exact: bool = False
    grazing: bool = False
    trace: list = field(default_factory=list)
    iterations: int = 0


class TourNonConvergence(RuntimeError):
    def __init__(self, msg, best: Optional[TourPath] = None):
        super().__init__(msg)
        self.best = best


# ----------------------------------------------------------------------
# half-planes of objects relative to (u, v)


def halfplane_of(o: ConvexObject, u, v, tol: float = TOL) -> Optional[HalfPlane]:
    """Side of line(o) a chain from u to v must reach to meet o.

    (i) u off line(o): the closed side not containing u.
    (ii) u on line(o): the side containing v.
    (iii) both on line(o), u ≠ v: the side to the left of u→v, i.e. the
    upper half-plane once u→v is rotated onto the positive x-axis.
    Returns None when u = v lies on line(o), where no side is determined.
    """
    u, v = as_point(u), as_point(v)
    a, d = o.supporting_line()
    n = perp(d)
    su = float(n @ (u - a))
    if abs(su) > tol:
        m = -n if su > 0 else n
        return HalfPlane(m, float(m @ a))
    sv = float(n @ (v - a))
    if abs(sv) > tol:
        m = n if sv > 0 else -n
        return HalfPlane(m, float(m @ a))
    if np.allclose(u, v, atol=tol, rtol=0):
        return None
    m = perp(unit(v - u))
    return HalfPlane(m, float(m @ u))


def clockwise_angle(frm, to) -> float:
    """Clockwise rotation angle in [0, 2π) carrying direction frm onto to."""
    ang = math.atan2(cross(to, frm), float(np.dot(frm, to)))
    return ang if ang >= 0 else ang + 2 * math.pi


def order_halfplanes(hps: Sequence[HalfPlane], sources=None, start=(0.0, -1.0)) -> OrderedHalfPlanes:
    """Stable sort by clockwise angle of the normal measured from ``start``."""
    if sources is None:
        sources = list(range(len(hps)))
    st = unit(as_point(start))
    keys = [clockwise_angle(st, h.normal) for h in hps]
    idx = sorted(range(len(hps)), key=lambda i: keys[i])
    return OrderedHalfPlanes(tuple((hps[i], sources[i]) for i in idx))


# ----------------------------------------------------------------------
# parametrization of visit sets


def _as_sets(seq, pseudo=False):
    if isinstance(seq, OrderedHalfPlanes):
        seq = seq.halfplanes
    out = []
    for S in seq:
        if pseudo and isinstance(S, ConvexObject) and S.kind in ("ray", "segment"):
            a, d = S.supporting_line()
            S = ConvexObject.line(a, d)
        if isinstance(S, ConvexObject) and S.kind == "polygon":
            raise NotImplementedError("polygon visit sets are not supported")
        out.append(S)
    return out


def _param(S):
    """(base, 2x2 basis, bounds) with p = base + basis @ z."""
    inf = None
    if isinstance(S, HalfPlane):
        n = S.normal
        B = np.column_stack([perp(n), n])
        return S.offset * n, B, [(inf, inf), (0.0, inf)]
    k = S.kind
    if k == "point":
        return S.pts[0].copy(), np.zeros((2, 2)), [(0.0, 0.0), (0.0, 0.0)]
    if k == "segment":
        a, b = S.pts
        return a.copy(), np.column_stack([b - a, [0.0, 0.0]]), [(0.0, 1.0), (0.0, 0.0)]
    d = S.direction
    lo = 0.0 if k == "ray" else inf
    return S.pts[0].copy(), np.column_stack([d, [0.0, 0.0]]), [(lo, inf), (0.0, 0.0)]


def _project_z(S, p):
    """Parameters of the point of S nearest to p."""
    if isinstance(S, HalfPlane):
        n = S.normal
        return np.array([float(perp(n) @ p), max(0.0, float(n @ p) - S.offset)])
    k = S.kind
    if k == "point":
        return np.zeros(2)
    if k == "segment":
        a, b = S.pts
        e = b - a
        return np.array([min(1.0, max(0.0, float((p - a) @ e) / float(e @ e))), 0.0])
    t = float((p - S.pts[0]) @ S.direction)
    if k == "ray":
        t = max(t, 0.0)
    return np.array([t, 0.0])


def _line_of(S):
    if isinstance(S, HalfPlane):
        return S.line()
    if S.kind == "point":
        return None
    return S.supporting_line()


def _fixed_points(S):
    if isinstance(S, HalfPlane):
        return []
    return list(S.defining_vertices())


def _set_distance(S, p) -> float:
    if isinstance(S, HalfPlane):
        return max(0.0, -S.signed(p))
    return S.distance(p)


# ----------------------------------------------------------------------
# numeric solve


class _Chain:
    def __init__(self, sets, s, t, closed):
        self.k = len(sets)
        par = [_param(S) for S in sets]
        self.base = np.array([p[0] for p in par]).reshape(self.k, 2)
        self.B = np.array([p[1] for p in par]).reshape(self.k, 2, 2)
        self.bounds = [b for p in par for b in p[2]]
        self.s, self.t, self.closed = s, t, closed
        self.mu = 0.0

    def points(self, z):
        Z = z.reshape(self.k, 2)
        return self.base + np.einsum("kij,kj->ki", self.B, Z)

    def full(self, P):
        if self.closed:
            return np.vstack([P, P[:1]])
        return np.vstack([self.s[None], P, self.t[None]])

    def fg(self, z):
        P = self.points(z)
        Q = self.full(P)
        D = np.diff(Q, axis=0)
        r = np.sqrt((D * D).sum(axis=1) + self.mu * self.mu)
        U = D / r[:, None]
        if self.closed:
            dP = U[np.arange(self.k) - 1] - U[: self.k]
        else:
            dP = U[:-1] - U[1:]
        g = np.einsum("kij,ki->kj", self.B, dP).reshape(-1)
        return float(r.sum()), g

    def length(self, z):
        D = np.diff(self.full(self.points(z)), axis=0)
        return float(np.hypot(D[:, 0], D[:, 1]).sum())


def _numeric(sets, s, t, closed, init, scale, max_iter):
    ch = _Chain(sets, s, t, closed)
    z = np.concatenate([_project_z(S, p) for S, p in zip(sets, init)])
    best_z, best_len = z.copy(), ch.length(z)
    trace = [best_len]
    used = 0
    ok = True
    for mu in (1e-2, 1e-4, 1e-6, 1e-8, 1e-10):
        ch.mu = mu * scale
        budget = max(10, max_iter - used)
        res = minimize(
            ch.fg, z, jac=True, method="L-BFGS-B", bounds=ch.bounds,
            options={"maxiter": min(budget, 2000), "ftol": 1e-16, "gtol": 1e-13 * scale,
                     "maxcor": 20},
        )
        used += int(res.nit)
        z = res.x
        L = ch.length(z)
        if L < best_len:
            best_z, best_len = z.copy(), L
        trace.append(best_len)
        if used >= max_iter:
            ok = False
            break
    return ch.points(best_z), best_len, trace, used, ok


# ----------------------------------------------------------------------
# exact reconstruction


def _reflect(p, line):
    a, d = line
    w = p - a
    return a + 2 * float(w @ d) * d - w


def _line_hit(p, q, line):
    """Parameter and point where segment p→q meets the line (None if parallel)."""
    a, d = line
    e = q - p
    den = cross(e, d)
    if abs(den) < 1e-300:
        return None, None
    lam = cross(a - p, d) / den
    return lam, p + lam * e


def _unfold(A, B, lines, eps):
    """Shortest path A → line_1 → … → line_r → B by reflection; None if invalid."""
    images = [B]
    for ln in reversed(lines):
        images.append(_reflect(images[-1], ln))
    images = images[::-1]  # images[j] corresponds to lines[j:], images[-1] = B
    pts = []
    cur = A
    for j, ln in enumerate(lines):
        lam, q = _line_hit(cur, images[j], ln)
        if lam is None or lam < -eps or lam > 1 + eps:
            return None
        pts.append(q)
        cur = q
    return pts


def _unfold_some(A, B, pending, eps):
    """Shortest valid unfolding A → B that still visits every pending set.

    A numeric path can look bent next to a boundary it only grazes; such
    reflections make the unfolding invalid. Subsets of the reflection
    lines are tried, keeping those whose path visits all pending sets in
    order, and the shortest is returned.
    """
    lines = [ln for ln, _ in pending]
    mid = _unfold(A, B, lines, eps)
    if mid is not None or len(pending) > 6:
        return mid
    sets = [S for _, ss in pending for S in ss]
    scale = max(1.0, float(np.abs(np.vstack([A, B])).max()))
    best = None
    for r in range(len(pending) - 1, -1, -1):
        for keep in itertools.combinations(range(len(pending)), r):
            m = _unfold(A, B, [lines[i] for i in keep], eps)
            if m is None:
                continue
            W = np.vstack([A] + m + [B])
            L = _polyline_length(W)
            if best is not None and L >= best[0]:
                continue
            if assign_visits(W, sets, 1e-9 * scale) is not None:
                best = (L, m)
    return None if best is None else best[1]


def _closed_reflections(lines, guess, eps):
    """Shortest closed path reflecting on lines[0], …, lines[-1] cyclically."""
    a, d = lines[0]
    # T = R_1 ∘ … ∘ R_{r-1} on the remaining lines (apply the last first)
    M = np.eye(2)
    b = np.zeros(2)
    for ln in reversed(lines[1:]):
        la, ld = ln
        R = 2 * np.outer(ld, ld) - np.eye(2)
        M, b = R @ M, R @ (b - la) + la
    I_M = np.eye(2) - M
    c1 = I_M @ d
    c0 = I_M @ a - b
    den = float(c1 @ c1)
    lam = -float(c0 @ c1) / den if den > 1e-24 else float((guess - a) @ d)
    x = a + lam * d
    rest = _unfold(x, x, lines[1:], eps)
    if rest is None:
        return None
    return [x] + rest


def _first_visit(a, b, tau0, S, tol, box):
    """First parameter τ ≥ τ0 on segment a→b whose point lies in S (within tol)."""
    e = b - a
    if isinstance(S, HalfPlane):
        g0 = S.signed(a + tau0 * e)
        if g0 >= -tol:
            return tau0
        g1 = S.signed(b)
        if g1 < -tol:
            return None
        return tau0 + (1 - tau0) * (-tol - g0) / (g1 - g0) if g1 != g0 else 1.0
    L2 = float(e @ e)
    start = a + tau0 * e
    if S.kind == "point":
        p = S.pts[0]
        if L2 == 0:
            return tau0 if np.hypot(*(p - a)) <= tol else None
        tau = min(1.0, max(tau0, float((p - a) @ e) / L2))
        return tau if np.hypot(*(a + tau * e - p)) <= tol else None
    if S.kind == "segment":
        c, d = S.pts
    else:
        seg = clip_unbounded(S, box)
        if seg is None:
            return None
        c, d = seg[0], seg[-1]
    if S.distance(start) <= tol:
        return tau0
    if L2 == 0:
        return None
    # distance to a convex set is convex along the segment: locate the
    # minimum, then the first point within tol before it
    lo, hi = tau0, 1.0
    f = lambda tau: S.distance(a + tau * e)
    for _ in range(80):
        m1 = lo + (hi - lo) / 3
        m2 = hi - (hi - lo) / 3
        if f(m1) <= f(m2):
            hi = m2
        else:
            lo = m1
    tmin = 0.5 * (lo + hi)
    if f(tmin) > tol:
        return None
    lo, hi = tau0, tmin
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if f(mid) <= tol:
            hi = mid
        else:
            lo = mid
    return hi


def assign_visits(poly, sets, tol, box=None):
    """Greedy earliest ordered visit points along a polyline, or None."""
    if box is None:
        lo, hi = poly.min(axis=0), poly.max(axis=0)
        pad = 10.0 * (1.0 + float(np.abs(hi - lo).max()))
        box = (lo[0] - pad, lo[1] - pad, hi[0] + pad, hi[1] + pad)
    seg, tau = 0, 0.0
    visits = []
    nseg = len(poly) - 1
    for S in sets:
        found = None
        while seg < max(nseg, 1):
            a = poly[seg]
            b = poly[seg + 1] if nseg > 0 else poly[seg]
            r = _first_visit(a, b, tau, S, tol, box)
            if r is not None:
                found = a + r * (b - a)
                tau = r
                break
            seg += 1
            tau = 0.0
        if found is None:
            return None
        visits.append(found)
    return np.array(visits).reshape(-1, 2)


def _polyline_length(W):
    D = np.diff(W, axis=0)
    return float(np.hypot(D[:, 0], D[:, 1]).sum())


def _simplify(W, eps):
    """Drop repeated points and straight-through vertices of a polyline."""
    out = [W[0]]
    for p in W[1:]:
        if np.hypot(*(p - out[-1])) > eps:
            out.append(p)
    if len(out) == 1 and len(W) > 1:
        out.append(W[-1])
    res = [out[0]]
    for i in range(1, len(out) - 1):
        a, c, b = res[-1], out[i], out[i + 1]
        u, v = c - a, b - c
        nu, nv = math.hypot(*u), math.hypot(*v)
        if nu > eps and nv > eps and abs(cross(u, v)) / (nu * nv) < 1e-9 and float(u @ v) > 0:
            continue
        res.append(c)
    res.append(out[-1])
    return np.array(res)


def _rebuild(s, t, sets, P, closed, scale, dclu=1e-6, dfix=1e-5):
    """Exact path from the contact pattern of a numeric solution, or None.

    ``dclu`` (merge radius for consecutive points) and ``dfix`` (distance
    at which a point counts as touching a boundary) are relative to scale.
    """
    k = len(sets)
    dclu *= scale
    dfix *= scale
    if closed:
        nodes = [(P[i], [i]) for i in range(k)]
    else:
        nodes = [(s, ["s"])] + [(P[i], [i]) for i in range(k)] + [(t, ["t"])]
    # cluster consecutive coincident points
    clusters = []
    for p, mem in nodes:
        if clusters and np.hypot(*(p - clusters[-1][0])) <= dclu:
            clusters[-1][1].extend(mem)
        else:
            clusters.append([p, list(mem)])
    if closed and len(clusters) > 1 and np.hypot(*(clusters[0][0] - clusters[-1][0])) <= dclu:
        last = clusters.pop()
        clusters[0][1] = last[1] + clusters[0][1]
    if closed and len(clusters) == 1:
        return None
    m = len(clusters)
    kinds = []  # ("anchor", point) | ("reflect", line) | None
    for ci, (c, mem) in enumerate(clusters):
        if "s" in mem:
            kinds.append(("anchor", s))
            continue
        if "t" in mem:
            kinds.append(("anchor", t))
            continue
        if closed:
            a, b = clusters[ci - 1][0], clusters[(ci + 1) % m][0]
        else:
            a, b = clusters[ci - 1][0], clusters[ci + 1][0]
        u, v = c - a, b - c
        nu, nv = math.hypot(*u), math.hypot(*v)
        bend = nu <= dclu or nv <= dclu or abs(cross(u, v)) / (nu * nv) > 1e-7 or float(u @ v) < 0
        if not bend:
            kinds.append(None)
            continue
        fixed = None
        for i in mem:
            for q in _fixed_points(sets[i]):
                if np.hypot(*(q - c)) <= dfix:
                    fixed = q
                    break
            if fixed is not None:
                break
        if fixed is not None:
            kinds.append(("anchor", np.array(fixed, dtype=float)))
            continue
        lines = []
        for i in mem:
            ln = _line_of(sets[i])
            if ln is None:
                continue
            la, ld = ln
            if abs(cross(c - la, ld)) <= dfix:
                lines.append((np.asarray(la, float), np.asarray(ld, float)))
        if not lines:
            if all(_set_distance(sets[i], c) <= 0 and _line_of(sets[i]) is not None
                   and abs(cross(c - _line_of(sets[i])[0], _line_of(sets[i])[1])) > dfix
                   for i in mem):
                # strictly inside every set here: a shortest path cannot
                # bend, the apparent bend is numeric noise
                kinds.append(None)
                continue
            return None
        corner = None
        for i in range(len(lines)):
            for j in range(i + 1, len(lines)):
                if abs(cross(lines[i][1], lines[j][1])) > 1e-6:
                    lam, q = _line_hit(lines[i][0], lines[i][0] + lines[i][1], lines[j])
                    if q is not None and np.hypot(*(q - c)) <= 10 * dfix:
                        corner = q
                        break
            if corner is not None:
                break
        if corner is not None:
            kinds.append(("anchor", corner))
        else:
            kinds.append(("reflect", lines[0], [sets[i] for i in mem]))
    eps = 1e-9
    if closed:
        anchors = [i for i, kd in enumerate(kinds) if kd and kd[0] == "anchor"]
        if anchors:
            r0 = anchors[0]
            order = [(r0 + j) % m for j in range(m)] + [r0]
        else:
            refl = [i for i, kd in enumerate(kinds) if kd]
            if len(refl) < 2:
                return None
            lines = [kinds[i][1] for i in refl]
            pts = _closed_reflections(lines, clusters[refl[0]][0], eps)
            if pts is None:
                return None
            return np.array(pts + [pts[0]])
    else:
        order = list(range(m))
    W = []
    cur_anchor = None
    pending = []
    for idx in order:
        kd = kinds[idx]
        if kd is None:
            continue
        if kd[0] == "reflect":
            pending.append((kd[1], kd[2]))
            continue
        pt = kd[1]
        if cur_anchor is None:
            W.append(pt)
        else:
            mid = _unfold_some(cur_anchor, pt, pending, eps)
            if mid is None:
                return None
            W.extend(mid)
            W.append(pt)
        cur_anchor = pt
        pending = []
    if pending:
        return None
    return np.array(W)


# contact-pattern tolerances tried in turn; every candidate is re-verified
_REBUILD_TOLS = ((1e-6, 1e-5), (1e-5, 1e-5), (1e-4, 1e-4))


def tour(s, seq, t, tol: float = TOL, max_iter: int = 100000, init=None, pseudo: bool = False,
         closed: bool = False) -> TourPath:
    """Shortest path from s to t visiting the sets of ``seq`` in order.

    ``closed=True`` asks for the shortest closed path through the sets in
    cyclic order (s and t are ignored). Raises TourNonConvergence when the
    iteration cap is hit.
    """
    sets = _as_sets(seq, pseudo)
    k = len(sets)
    s = None if s is None else as_point(s)
    t = None if t is None else as_point(t)
    if k == 0:
        if closed:
            raise ValueError("closed tour needs at least one set")
        W = np.vstack([s, t]) if not np.array_equal(s, t) else s.reshape(1, 2)
        return TourPath(W, float(np.hypot(*(t - s))), np.zeros((0, 2)), (), True, False, [0.0])
    refs = [b for S in sets for b in (_fixed_points(S) or [_param(S)[0]])]
    if s is not None:
        refs += [s, t]
    refs = np.array(refs)
    scale = max(1.0, float(np.abs(refs - refs.mean(axis=0)).max()))
    if init is None:
        if closed:
            c = refs.mean(axis=0)
            init = [c] * k
        else:
            init = [s + (i + 1) / (k + 1) * (t - s) for i in range(k)]
    P, num_len, trace, used, ok = _numeric(sets, s, t, closed, init, scale, max_iter)
    W_num = np.vstack([P, P[:1]]) if closed else np.vstack([s, P, t])
    vtol = max(tol, 1e-9 * scale)
    best = None
    for dclu, dfix in _REBUILD_TOLS:
        W = _rebuild(s, t, sets, P, closed, scale, dclu, dfix)
        if W is None:
            continue
        Wl = _polyline_length(W)
        if Wl <= num_len + 1e-7 * scale and (best is None or Wl < best[1]):
            V = _visits(W, sets, closed, vtol)
            if V is not None:
                best = (W, Wl, V, True)
    if best is None:
        V = _visits(W_num, sets, closed, max(vtol, 1e-7 * scale))
        if V is None:
            V = P.copy()
        best = (W_num, num_len, V, False)
    W, length, V, exact = best
    if not ok and not exact:
        path = _finish(W, length, V, sets, exact, trace, used, tol, scale)
        raise TourNonConvergence("tour solver hit its iteration cap", path)
    return _finish(W, length, V, sets, exact, trace, used, tol, scale)


def _visits(W, sets, closed, tol):
    if closed:
        # a closed path visits the sets cyclically from some start; try the
        # cut at the first bend, then every rotation
        n = len(W) - 1
        for r in range(max(n, 1)):
            Wr = np.vstack([W[r:n], W[: r + 1]]) if n > 0 else W
            V = assign_visits(Wr, sets, tol)
            if V is not None:
                return V
        return None
    return assign_visits(W, sets, tol)


def _finish(W, length, V, sets, exact, trace, used, tol, scale):
    Ws = _simplify(W, 1e-12 * scale)
    contacts = []
    grazing = False
    bends = Ws[1:-1] if len(Ws) > 2 else np.zeros((0, 2))
    for S, v in zip(sets, V):
        ln = _line_of(S)
        touch = False
        if ln is not None and len(bends):
            la, ld = ln
            dl = abs(cross(v - la, ld))
            onbend = np.min(np.hypot(*(bends - v).T)) <= 1e-7 * scale
            touch = onbend and dl <= 1e-7 * scale
            for b in bends:
                db = abs(cross(b - la, ld))
                if tol <= db < 10 * tol:
                    grazing = True
        elif ln is None and len(bends):
            touch = np.min(np.hypot(*(bends - v).T)) <= 1e-7 * scale
        contacts.append("touch" if touch else "pass")
    trace = list(trace)
    if length < trace[-1]:
        trace.append(length)
    return TourPath(Ws, float(length), np.asarray(V), tuple(contacts), exact, grazing, trace, used)


# ----------------------------------------------------------------------
# ordered witnesses along a path


def order_witness(path, seq, tol: float = 1e-9) -> list:
    """Index-ordered visit points t_i ∈ H_i along a path through half-planes.

    Walks the polyline until the first exit from a half-plane still in the
    queue; all queued half-planes up to the largest index exited there get
    that point. When the path ends, the rest get the end point. Raises
    ValueError naming the first half-plane the result does not lie in.
    """
    hps = seq.halfplanes if isinstance(seq, OrderedHalfPlanes) else list(seq)
    W = path.waypoints if isinstance(path, TourPath) else np.asarray(path, dtype=float)
    k = len(hps)
    out = [None] * k
    queue = list(range(k))
    seg, tau = 0, 0.0
    nseg = len(W) - 1
    while queue:
        hit = None
        while seg < nseg:
            a, b = W[seg], W[seg + 1]
            p0 = a + tau * (b - a)
            best_t = math.inf
            exits = []
            for i in queue:
                fa = hps[i].signed(p0)
                fb = hps[i].signed(b)
                if fa >= -tol and fb < -tol:
                    x = tau + (1 - tau) * (fa / (fa - fb))
                    if x < best_t - 1e-15:
                        best_t, exits = x, [i]
                    elif x <= best_t + 1e-15:
                        exits.append(i)
            if exits:
                hit = (best_t, max(exits))
                break
            seg += 1
            tau = 0.0
        if hit is None:
            for i in queue:
                out[i] = W[-1].copy()
            break
        x, kk = hit
        pt = W[seg] + x * (W[seg + 1] - W[seg])
        done = [i for i in queue if i <= kk]
        for i in done:
            out[i] = pt.copy()
        queue = [i for i in queue if i > kk]
        tau = x
    for i in range(k):
        if not hps[i].contains(out[i], tol):
            raise ValueError(f"path does not visit half-plane {i} in order")
    return out
