"""Small dense two-phase simplex for the LPs used by the solvers.

Interface mirrors the usual ``linprog`` call: minimize c·x subject to
A_ub x ≤ b_ub, A_eq x = b_eq and per-variable bounds (default x ≥ 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class LPResult:
    x: np.ndarray
    fun: float
    status: int  # 0 optimal, 1 iteration limit, 2 infeasible, 3 unbounded
    message: str
    nit: int


class _Tableau:
    """Tableau rows [A | b] with a basis list; the objective row is kept apart."""

    def __init__(self, A, b, basis, tol):
        self.T = np.hstack([A, b[:, None]]).astype(float)
        self.basis = list(basis)
        self.tol = tol
        self.nit = 0

    def pivot(self, r, c):
        T = self.T
        T[r] /= T[r, c]
        col = T[:, c].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        self.basis[r] = c
        self.nit += 1

    def optimize(self, cost, allowed, max_iter):
        """Minimize cost over columns in ``allowed``; returns a status code."""
        T = self.T
        m = T.shape[0]
        degenerate_run = 0
        while True:
            if self.nit >= max_iter:
                return 1
            cb = cost[self.basis]
            reduced = cost - cb @ T[:, :-1]
            reduced[~allowed] = 0.0
            reduced[self.basis] = 0.0
            cand = np.nonzero(reduced < -self.tol)[0]
            if len(cand) == 0:
                return 0
            # Dantzig rule, Bland's rule once degenerate pivots pile up
            if degenerate_run > 50:
                c = int(cand[0])
            else:
                c = int(cand[np.argmin(reduced[cand])])
            col = T[:, c]
            pos = col > self.tol
            if not np.any(pos):
                return 3
            ratios = np.full(m, np.inf)
            ratios[pos] = T[pos, -1] / col[pos]
            best = ratios.min()
            ties = np.nonzero(ratios <= best + self.tol * max(1.0, abs(best)))[0]
            r = int(min(ties, key=lambda i: self.basis[i]))
            degenerate_run = degenerate_run + 1 if best <= self.tol else 0
            self.pivot(r, c)


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=None,
            tol: float = 1e-10, max_iter: int = 20000) -> LPResult:
    c = np.asarray(c, dtype=float)
    n = len(c)
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).reshape(-1)
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).reshape(-1)
    if bounds is None:
        bounds = [(0.0, None)] * n
    elif isinstance(bounds, tuple) and len(bounds) == 2 and not isinstance(bounds[0], (tuple, list)):
        bounds = [bounds] * n

    # x = shift + M y with y ≥ 0
    cols = []  # per original variable: list of (new column index, coefficient)
    shift = np.zeros(n)
    extra_ub = []  # (new col, upper value) rows y_col ≤ value
    k = 0
    for i, (lo, hi) in enumerate(bounds):
        lo = -np.inf if lo is None else float(lo)
        hi = np.inf if hi is None else float(hi)
        if np.isfinite(lo):
            shift[i] = lo
            cols.append([(k, 1.0)])
            if np.isfinite(hi):
                extra_ub.append((k, hi - lo))
            k += 1
        elif np.isfinite(hi):
            shift[i] = hi
            cols.append([(k, -1.0)])
            k += 1
        else:
            cols.append([(k, 1.0), (k + 1, -1.0)])
            k += 2
    M = np.zeros((n, k))
    for i, lst in enumerate(cols):
        for j, a in lst:
            M[i, j] = a
    cy = c @ M
    Aub = A_ub @ M
    bub = b_ub - A_ub @ shift
    Aeq = A_eq @ M
    beq = b_eq - A_eq @ shift
    if extra_ub:
        R = np.zeros((len(extra_ub), k))
        for r, (j, v) in enumerate(extra_ub):
            R[r, j] = 1.0
        Aub = np.vstack([Aub, R])
        bub = np.concatenate([bub, [v for _, v in extra_ub]])

    m_ub, m_eq = len(bub), len(beq)
    m = m_ub + m_eq
    # columns: y (k) | slacks (m_ub) | artificials (m)
    A = np.zeros((m, k + m_ub + m))
    b = np.zeros(m)
    A[:m_ub, :k] = Aub
    A[:m_ub, k:k + m_ub] = np.eye(m_ub)
    b[:m_ub] = bub
    A[m_ub:, :k] = Aeq
    b[m_ub:] = beq
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1
    basis = []
    art0 = k + m_ub
    for r in range(m):
        if r < m_ub and not neg[r]:
            basis.append(k + r)  # slack is a valid basic variable
        else:
            A[r, art0 + r] = 1.0
            basis.append(art0 + r)
    used_art = np.array([basis[r] >= art0 for r in range(m)])
    ntot = A.shape[1]
    tab = _Tableau(A, b, basis, tol)
    allowed = np.ones(ntot, dtype=bool)
    allowed[art0:] = False
    for r in range(m):
        if used_art[r]:
            allowed[art0 + r] = True
    if used_art.any():
        cost1 = np.zeros(ntot)
        cost1[art0:] = 1.0
        st = tab.optimize(cost1, allowed, max_iter)
        if st == 1:
            return LPResult(np.full(n, np.nan), np.nan, 1, "iteration limit", tab.nit)
        infeas = float(cost1[tab.basis] @ tab.T[:, -1])
        if infeas > max(tol, 1e-9) * max(1.0, float(np.abs(b).max())):
            return LPResult(np.full(n, np.nan), np.nan, 2, "infeasible", tab.nit)
        # drive artificials out of the basis
        keep = []
        for r in range(m):
            if tab.basis[r] >= art0:
                row = tab.T[r, :art0]
                j = np.nonzero(np.abs(row) > 1e-9)[0]
                if len(j):
                    tab.pivot(r, int(j[0]))
                    keep.append(r)
                # otherwise the row is redundant; drop it below
            else:
                keep.append(r)
        tab.T = tab.T[keep]
        tab.basis = [tab.basis[r] for r in keep]
    allowed = np.ones(ntot, dtype=bool)
    allowed[art0:] = False
    cost2 = np.zeros(ntot)
    cost2[:k] = cy
    st = tab.optimize(cost2, allowed, max_iter)
    if st == 1:
        return LPResult(np.full(n, np.nan), np.nan, 1, "iteration limit", tab.nit)
    if st == 3:
        return LPResult(np.full(n, np.nan), -np.inf, 3, "unbounded", tab.nit)
    y = np.zeros(ntot)
    y[tab.basis] = tab.T[:, -1]
    x = shift + M @ y[:k]
    return LPResult(x, float(c @ x), 0, "optimal", tab.nit)
