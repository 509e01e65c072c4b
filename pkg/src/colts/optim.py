"""Linear programming over the action polytope, plus the two derived solvers:
the safe-mixing line search and the cutting-plane handling of second-order-cone
rows used by the conservative baseline.

The LP core is a dense two-phase tableau simplex with Bland's anti-cycling
rule, so results are deterministic functions of their inputs.  Sizes here are
desk scale (tens of variables, up to ~1000 rows), where a dense tableau is
both simple and fast enough.
"""

import math
from dataclasses import dataclass

import numpy as np

_PIV_EPS = 1e-11


class UnboundedProgramError(RuntimeError):
    """The LP is unbounded, which violates the compact-domain precondition."""


class SimplexCycleError(RuntimeError):
    """The pivot iteration cap was exceeded."""


@dataclass
class LpResult:
    status: str  # "optimal" | "infeasible"
    x: np.ndarray | None
    value: float
    n_cuts: int = 0
    degraded: bool = False

    @property
    def optimal(self):
        return self.status == "optimal"


_INT_MAX = np.iinfo(np.int64).max


def _pivot(T, basis, r, j, obj=None):
    piv = T[r, j]
    row = T[r] * (1.0 / piv)
    col = T[:, j].copy()
    col[r] = 0.0
    T -= col[:, None] * row[None, :]
    T[r] = row
    T[:, j] = 0.0
    T[r, j] = 1.0
    if obj is not None:
        f = obj[j]
        if f != 0.0:
            obj -= f * row
        obj[j] = 0.0
    basis[r] = j


def _pivot_loop(T, obj, basis, tol, max_iter, forbid=-1):
    """Run Bland-rule pivots until no reduced cost is below -tol.

    Entering: lowest-index column with reduced cost < -tol.  Leaving: minimum
    ratio, ties broken by lowest basis index.  Raises on unboundedness or on
    hitting the iteration cap.
    """
    ncols = T.shape[1] - 1
    objv = obj[:ncols]
    for _ in range(max_iter):
        neg = objv < -tol
        if forbid >= 0:
            neg[forbid] = False
        j = int(neg.argmax())
        if not neg[j]:
            return
        col = T[:, j]
        mask = col > _PIV_EPS
        if not mask.any():
            raise UnboundedProgramError("LP is unbounded; the domain must be compact")
        rhs = T[:, -1]
        safe = np.where(mask, col, 1.0)
        ratios = np.where(mask, np.maximum(rhs, 0.0) / safe, np.inf)
        rmin = ratios.min()
        tie = ratios <= rmin * (1.0 + 1e-9) + 1e-12
        r = int(np.where(tie, basis, _INT_MAX).argmin())
        _pivot(T, basis, r, j, obj)
    raise SimplexCycleError("simplex did not terminate within the iteration cap")


def _simplex_max(A, b, c, tol, max_iter=None):
    """Maximise c @ y subject to A y <= b, y >= 0.

    Returns (status, y).  Phase 1 uses a single artificial column pivoted in
    at the most negative right-hand side, which makes every rhs nonnegative
    in one step.
    """
    m, n = A.shape
    if max_iter is None:
        max_iter = 500 + 40 * (m + n)
    total = n + m
    has_art = m > 0 and float(b.min()) < 0.0
    ncols = total + (1 if has_art else 0)
    T = np.zeros((m, ncols + 1))
    T[:, :n] = A
    if m:
        T[np.arange(m), n + np.arange(m)] = 1.0
        T[:, -1] = b
    basis = n + np.arange(m, dtype=np.int64)

    if has_art:
        art = total
        T[b < 0.0, art] = -1.0
        r = int(np.argmin(b))
        _pivot(T, basis, r, art)
        obj = -T[r].copy()
        obj[art] += 1.0
        _pivot_loop(T, obj, basis, tol, max_iter, forbid=art)
        feas_thr = 1e-8 * max(1.0, float(np.abs(b).max()))
        art_rows = np.nonzero(basis == art)[0]
        if art_rows.size:
            r = int(art_rows[0])
            if T[r, -1] > feas_thr:
                return "infeasible", None
            # drive the artificial out, or drop its (redundant) row
            nz = np.nonzero(np.abs(T[r, :total]) > _PIV_EPS)[0]
            if nz.size:
                _pivot(T, basis, r, int(nz[0]))
            else:
                keep = np.ones(m, dtype=bool)
                keep[r] = False
                T = T[keep]
                basis = basis[keep]
                m -= 1
        T = np.delete(T, art, axis=1)

    c_ext = np.zeros(total + 1)
    c_ext[:n] = c
    if has_art:
        cb = c_ext[basis] if m else np.zeros(0)
        obj = (cb @ T if m else np.zeros(total + 1)) - c_ext
    else:
        obj = -c_ext  # slack basis has zero cost
    _pivot_loop(T, obj, basis, tol, max_iter)

    y = np.zeros(total)
    if m:
        y[basis] = T[:, -1]
    return "optimal", y[:n]


def _domain_parts(dom):
    """Standard-form pieces of the domain, cached on the polytope.

    Coordinates with a finite lower bound are shifted to nonnegative
    variables; coordinates without one are split into positive and negative
    parts (the P matrix maps solver variables back to domain coordinates).
    """
    parts = getattr(dom, "_lp_parts", None)
    if parts is None:
        up_idx = np.nonzero(np.isfinite(dom.upper))[0]
        Ub = np.zeros((up_idx.size, dom.dim))
        Ub[np.arange(up_idx.size), up_idx] = 1.0
        A_stat = np.vstack([dom.ineq_lhs, Ub])
        b_stat = np.concatenate([dom.ineq_rhs, dom.upper[up_idx]])
        fin = np.isfinite(dom.lower)
        offset = np.where(fin, dom.lower, 0.0)
        if offset.any():
            b_stat = b_stat - A_stat @ offset
        P = None
        if not fin.all():
            cols = []
            for i in range(dom.dim):
                cols.append((i, 1.0))
                if not fin[i]:
                    cols.append((i, -1.0))
            P = np.zeros((dom.dim, len(cols)))
            for jj, (i, s) in enumerate(cols):
                P[i, jj] = s
            A_stat = A_stat @ P
        parts = (offset, A_stat, b_stat, P)
        object.__setattr__(dom, "_lp_parts", parts)
    return parts


def solve_lp(c, dom, extra_lhs=None, extra_rhs=None, tol=1e-9):
    """Maximise c @ a over dom intersected with {extra_lhs a <= extra_rhs}.

    Returns an LpResult whose x, when optimal, is a basic feasible solution
    (a vertex reached by the fixed Bland pivot rule).
    """
    d = dom.dim
    c = np.asarray(c, dtype=float).reshape(d)
    offset, A_stat, b_stat, P = _domain_parts(dom)
    if extra_lhs is None:
        A, b = A_stat, b_stat
    else:
        E = np.asarray(extra_lhs, dtype=float).reshape(-1, d)
        e_rhs = np.asarray(extra_rhs, dtype=float).reshape(E.shape[0])
        if offset.any():
            e_rhs = e_rhs - E @ offset
        if P is not None:
            E = E @ P
        k = A_stat.shape[0]
        A = np.empty((k + E.shape[0], A_stat.shape[1]))
        A[:k] = A_stat
        A[k:] = E
        b = np.concatenate([b_stat, e_rhs])
    cc = c if P is None else c @ P
    status, y = _simplex_max(A, b, cc, tol)
    if status != "optimal":
        return LpResult("infeasible", None, -math.inf)
    x = offset + (y if P is None else P @ y)
    return LpResult("optimal", x, float(c @ x))


def feasible_point(dom, tol=1e-9):
    """A deterministic feasible point of the polytope (phase-1 vertex)."""
    res = solve_lp(np.zeros(dom.dim), dom, tol=tol)
    if not res.optimal:
        raise ValueError("polytope is empty")
    return res.x


def validate_polytope(dom):
    """Raise ValueError unless dom is nonempty and bounded in every coordinate."""
    res = solve_lp(np.zeros(dom.dim), dom)
    if not res.optimal:
        raise ValueError("polytope is empty (phase-1 infeasible)")
    for i in range(dom.dim):
        if np.isfinite(dom.lower[i]) and np.isfinite(dom.upper[i]):
            continue
        e = np.zeros(dom.dim)
        for sign in (1.0, -1.0):
            e[i] = sign
            try:
                solve_lp(e, dom)
            except UnboundedProgramError:
                raise ValueError(f"polytope is unbounded in coordinate {i}") from None
        e[i] = 0.0


def max_scaling_rho(phi_hat, alpha, omega, V_inv, a_safe, b_t, tol=1e-9):
    """Largest rho in [0,1] such that the mixture (1-rho) a_safe + rho b_t
    satisfies the pessimistic constraint phi_hat a + omega ||a||_{V^-1} <= alpha.

    g(rho) = max_i (phi_hat a(rho) - alpha)_i + omega ||a(rho)||_{V^-1} is
    convex in rho, so {g <= 0} is an interval containing 0 (the caller
    guarantees g(0) <= 0).  Bisection returns the lower endpoint of the final
    bracket, so the returned mixture certifiably satisfies the constraint.
    """
    a_safe = np.asarray(a_safe, dtype=float)
    b_t = np.asarray(b_t, dtype=float)
    u = phi_hat @ a_safe - alpha
    v = phi_hat @ b_t - alpha - u
    diff = b_t - a_safe
    Vs = V_inv @ a_safe
    Vd = V_inv @ diff
    q0 = float(a_safe @ Vs)
    q1 = float(diff @ Vs)
    q2 = float(diff @ Vd)

    def g(rho):
        quad = q0 + 2.0 * q1 * rho + q2 * rho * rho
        return float(np.max(u + rho * v)) + omega * math.sqrt(max(quad, 0.0))

    if g(0.0) > tol:
        raise ValueError("safe anchor violates the pessimistic constraint (precondition)")
    if g(1.0) <= 0.0:
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    return lo


def solve_soc(c, dom, phi_hat, alpha, omega, V_inv_sqrt, tol=1e-6, cut_cap=200):
    """Maximise c @ a over dom subject to the m cone rows
    phi_hat^i a + omega ||a||_{V^-1} <= alpha^i, via cutting planes.

    Each iteration solves the current LP outer approximation; if the true
    cone constraint is violated at the optimum beyond tol, the supporting
    direction u = W x / ||W x|| (W = V^-1/2) is added as linear rows
    phi_hat^i a + omega u^T W a <= alpha^i for the violated i, and the LP is
    re-solved.  Cuts never exclude cone-feasible points since u^T W a <= ||W a||.

    On hitting cut_cap, the last iterate is shrunk toward the origin (assumed
    cone-feasible) until feasible, and the result is flagged degraded.
    """
    d = dom.dim
    c = np.asarray(c, dtype=float).reshape(d)
    phi_hat = np.asarray(phi_hat, dtype=float).reshape(-1, d)
    alpha = np.asarray(alpha, dtype=float).reshape(phi_hat.shape[0])
    cut_lhs = [phi_hat]
    cut_rhs = [alpha]
    n_cuts = 0
    while True:
        res = solve_lp(c, dom, np.vstack(cut_lhs), np.concatenate(cut_rhs), tol=1e-9)
        if not res.optimal:
            return LpResult("infeasible", None, -math.inf, n_cuts=n_cuts)
        x = res.x
        w = V_inv_sqrt @ x
        nrm = float(np.linalg.norm(w))
        viol = phi_hat @ x + omega * nrm - alpha
        worst = float(viol.max())
        if worst <= tol:
            return LpResult("optimal", x, float(c @ x), n_cuts=n_cuts)
        if n_cuts >= cut_cap:
            denom = phi_hat @ x + omega * nrm
            pos = denom > 0.0
            sigma = 1.0
            if pos.any():
                sigma = min(1.0, float(np.min(alpha[pos] / denom[pos])))
            sigma = max(sigma, 0.0)
            xs = sigma * x
            return LpResult("optimal", xs, float(c @ xs), n_cuts=n_cuts, degraded=True)
        u = w / nrm
        shift = omega * (V_inv_sqrt @ u)
        mask = viol > tol
        cut_lhs.append(phi_hat[mask] + shift[None, :])
        cut_rhs.append(alpha[mask])
        n_cuts += 1
