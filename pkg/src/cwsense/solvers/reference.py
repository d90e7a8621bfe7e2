"""Independent slow solvers used to check the ADMM engine on small problems.

Nothing here shares code with :mod:`cwsense.solvers.admm`; every routine
works on an explicit dense matrix.

* ``reference_solve(..., method="socp")`` writes the program in epigraph
  form (one second-order cone per group plus the residual cone) and hands it
  to an interior-point conic solver through cvxpy.
* ``reference_solve(..., method="subgradient")`` runs projected subgradient
  descent with exact projection onto the residual ball, diminishing steps,
  best-iterate tracking and restarts.
* :func:`exhaustive_support` enumerates group supports of increasing size
  and fits each by least squares (an l0 oracle for noiseless instances).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ReferenceResult",
    "exhaustive_support",
    "project_residual_ball",
    "reference_solve",
]

MAX_REFERENCE_N = 64


@dataclass
class ReferenceResult:
    objective: float
    solution: np.ndarray
    method: str


def _as_groups(groups, n: int) -> list[np.ndarray]:
    """Accept None (singletons), a group-id array, or a list of index arrays / (start, len)."""
    if groups is None:
        return [np.array([i]) for i in range(n)]
    if isinstance(groups, np.ndarray) and groups.ndim == 1 and groups.shape[0] == n:
        return [np.flatnonzero(groups == g) for g in np.unique(groups)]
    out = []
    for g in groups:
        if isinstance(g, tuple) and len(g) == 2:
            start, length = g
            out.append(np.arange(start, start + length))
        else:
            out.append(np.asarray(g, dtype=int))
    return out


def _group_objective(r, groups) -> float:
    return float(sum(np.linalg.norm(r[g]) for g in groups))


def reference_solve(
    program: str,
    A: np.ndarray,
    y: np.ndarray,
    groups=None,
    bound: float = 0.0,
    method: str = "socp",
    seed: int = 0,
) -> ReferenceResult:
    """Solve ``min sum_g ||r_g|| s.t. ||A r - y|| <= bound`` on a dense `A`.

    For ``program`` in ``("bp", "block_l2l1")`` the constraint is the exact
    equality ``A r = y`` and `bound` is ignored. Only for ``N <= 64``.
    """
    A = np.asarray(A, dtype=complex)
    y = np.asarray(y, dtype=complex)
    m, n = A.shape
    if n > MAX_REFERENCE_N:
        raise ValueError(f"reference solver is limited to N <= {MAX_REFERENCE_N}, got {n}")
    equality = program in ("bp", "block_l2l1")
    if equality:
        bound = 0.0
    grp = _as_groups(groups, n)

    if np.linalg.norm(y) <= bound or not np.any(y):
        return ReferenceResult(0.0, np.zeros(n, dtype=complex), method)
    if method == "socp":
        r = _socp(A, y, grp, bound, equality)
    elif method == "subgradient":
        r = _subgradient(A, y, grp, bound, equality, seed)
    else:
        raise ValueError(f"unknown method {method!r}")
    return ReferenceResult(_group_objective(r, grp), r, method)


def _socp(A, y, groups, bound, equality) -> np.ndarray:
    import cvxpy as cp

    n = A.shape[1]
    r = cp.Variable(n, complex=True)
    t = cp.Variable(len(groups), nonneg=True)
    cons = [cp.norm(r[g], 2) <= t[i] for i, g in enumerate(groups)]
    if equality:
        cons.append(A @ r == y)
    else:
        cons.append(cp.norm(A @ r - y, 2) <= bound)
    prob = cp.Problem(cp.Minimize(cp.sum(t)), cons)
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-10, tol_gap_rel=1e-10, tol_feas=1e-10)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise RuntimeError(f"conic solver returned status {prob.status!r}")
    return np.asarray(r.value)


def project_residual_ball(v, A, y, bound, svd=None) -> np.ndarray:
    """Exact projection of `v` onto ``{r : ||A r - y|| <= bound}``.

    Uses the thin SVD ``A = U S V^H``; the KKT point is
    ``r = (I + lam A^H A)^{-1} (v + lam A^H y)`` with ``lam >= 0`` found by
    bisection on the monotone residual. ``bound = 0`` gives the affine
    projection.
    """
    if svd is None:
        svd = np.linalg.svd(A, full_matrices=False)
    U, s, Vh = svd
    keep = s > s[0] * 1e-12
    U, s, Vh = U[:, keep], s[keep], Vh[keep]
    beta = U.conj().T @ y
    y_perp2 = max(float(np.linalg.norm(y) ** 2 - np.linalg.norm(beta) ** 2), 0.0)
    c = Vh @ v
    gap = s * c - beta  # residual in the range of U

    if float(np.linalg.norm(gap) ** 2) + y_perp2 <= bound**2:
        return np.array(v, dtype=complex)
    if bound == 0.0:
        return v - Vh.conj().T @ (gap / s)

    target = bound**2 - y_perp2
    if target <= 0:
        raise ValueError("constraint set is empty")

    # Newton on 1/||res(lam)|| - 1/sqrt(target), which is close to linear in lam
    w = np.abs(gap) ** 2
    s2 = s**2
    lam = 0.0
    inv_t = 1.0 / math.sqrt(target)
    for _ in range(100):
        d = 1.0 + lam * s2
        f2 = float(np.sum(w / d**2))
        df2 = float(np.sum(-2.0 * w * s2 / d**3))
        f = math.sqrt(f2)
        phi = 1.0 / f - inv_t
        if abs(phi) <= 1e-13 * inv_t:
            break
        dphi = -0.5 * df2 / f2**1.5
        step = phi / dphi
        lam = max(lam - step, 0.5 * lam)
        if abs(step) <= 1e-13 * max(lam, 1e-300):
            break
    hi = lam
    c_new = c - hi * s * gap / (1 + hi * s**2)
    return v + Vh.conj().T @ (c_new - c)


def _subgradient(A, y, groups, bound, equality, seed, iters=1500, restarts=2) -> np.ndarray:
    n = A.shape[1]
    rng = np.random.default_rng(seed)
    svd = np.linalg.svd(A, full_matrices=False)
    gid = np.empty(n, dtype=int)
    for i, g in enumerate(groups):
        gid[g] = i
    k = len(groups)

    def proj(v):
        return project_residual_ball(v, A, y, bound, svd)

    def objective(v):
        return float(np.sum(np.sqrt(np.bincount(gid, np.abs(v) ** 2, minlength=k))))

    x0 = proj(np.zeros(n, dtype=complex))
    scale = max(float(np.linalg.norm(x0)), 1e-300)
    starts = [x0]
    for _ in range(restarts - 1):
        g = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        starts.append(proj(x0 + 0.5 * scale * g / np.linalg.norm(g)))

    best, best_obj = x0, objective(x0)
    for x in starts:
        step = 0.2 * scale
        # stages restart from the best point found so far with a smaller step
        for stage in range(5):
            for it in range(iters):
                norms = np.sqrt(np.bincount(gid, np.abs(x) ** 2, minlength=k))
                with np.errstate(divide="ignore", invalid="ignore"):
                    inv = np.where(norms > 0, 1.0 / norms, 0.0)
                g = inv[gid] * x
                gn = np.linalg.norm(g)
                if gn == 0:
                    break
                x = proj(x - (step / math.sqrt(it + 1)) * g / gn)
                obj = objective(x)
                if obj < best_obj:
                    best, best_obj = x, obj
            x = best
            step *= 0.3
    return best


def exhaustive_support(
    A: np.ndarray,
    y: np.ndarray,
    groups=None,
    max_groups: int = 4,
    tol: float = 1e-9,
) -> tuple[np.ndarray, float, tuple[int, ...]] | None:
    """Sparsest group support that explains `y` exactly.

    Tries every combination of 1..`max_groups` groups in order of size and
    fits each by least squares. Among supports of the smallest size whose
    relative residual is below `tol`, returns the one with the smallest
    group-norm objective as ``(solution, objective, group_indices)``.
    Returns None when no support of size <= `max_groups` fits.
    """
    A = np.asarray(A, dtype=complex)
    y = np.asarray(y, dtype=complex)
    n = A.shape[1]
    grp = _as_groups(groups, n)
    y_norm = np.linalg.norm(y)
    if y_norm == 0:
        return np.zeros(n, dtype=complex), 0.0, ()

    singletons = all(len(g) == 1 for g in grp)
    for k in range(1, max_groups + 1):
        combos = np.array(list(itertools.combinations(range(len(grp)), k)))
        if singletons:
            cols = np.array([g[0] for g in grp])[combos]
            fits = _batched_lstsq(A, y, cols)
        else:
            fits = []
            for combo in combos:
                idx = np.concatenate([grp[c] for c in combo])
                coef, *_ = np.linalg.lstsq(A[:, idx], y, rcond=None)
                fits.append((idx, coef, np.linalg.norm(A[:, idx] @ coef - y)))
        found = []
        for combo, (idx, coef, res) in zip(combos, fits):
            if res <= tol * y_norm:
                r = np.zeros(n, dtype=complex)
                r[idx] = coef
                found.append((r, _group_objective(r, grp), tuple(int(c) for c in combo)))
        if found:
            return min(found, key=lambda item: item[1])
    return None


def _batched_lstsq(A, y, cols):
    """Least squares on every column subset in `cols` (shape ``(n_sets, k)``)."""
    sub = A[:, cols].transpose(1, 0, 2)  # (n_sets, m, k)
    q, rr = np.linalg.qr(sub)
    rhs = np.einsum("smk,m->sk", q.conj(), y)
    coef = np.linalg.solve(rr, rhs[..., None])[..., 0]
    res = np.linalg.norm(np.einsum("smk,sk->sm", sub, coef) - y, axis=1)
    return [(c, co, rs) for c, co, rs in zip(cols, coef, res)]
