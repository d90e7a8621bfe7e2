"""Group-sparse recovery under an l2 residual bound, solved by ADMM.

All four programs share one form::

    minimize    sum_g ||r_g||_2
    subject to  ||A r - y||_2 <= bound

``bp`` and ``lasso`` use singleton groups, ``block_l2l1`` equal blocks of
length ``d0``, and ``mndo`` the variable-length sections of a band plan.
Equality-constrained programs (``bp``, ``block_l2l1``) use the tiny bound
``max(1e-9, 1e-8 * ||y||)``.

The splitting is ``z = r``, ``w = A r`` with the group prox on ``z`` and the
ball projection on ``w``. The r-update solves ``(I + A^H A) r = b`` which
does not depend on ``rho``, so residual balancing is free. Internally the
problem is rescaled to ``||y|| = 1``; all programs are positively
homogeneous, so the tolerances act as relative ones.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from ..bandplan import BandPlan
from ..sampling import SensingMap
from .prox import group_norms, project_l2_ball, prox_groups, soft_threshold

__all__ = [
    "PROGRAMS",
    "SolveResult",
    "SolverConfig",
    "equality_bound",
    "groups_for",
    "solve",
    "solve_block_l2l1",
    "solve_bp",
    "solve_grouped",
    "solve_lasso",
    "solve_mndo",
]

log = logging.getLogger(__name__)

PROGRAMS = ("bp", "lasso", "block_l2l1", "mndo")

# residual balancing (Boyd et al., ADMM monograph, sec. 3.4.1)
_BALANCE_MU = 10.0
_BALANCE_TAU = 2.0
# rho is revisited every _BALANCE_EVERY iterations and changed at most
# _BALANCE_MAX_CHANGES times; unbounded switching can stall convergence
_BALANCE_EVERY = 10
_BALANCE_MAX_CHANGES = 20
_FEASIBILITY_SLACK = 1e-6


@dataclass(frozen=True)
class SolverConfig:
    """Program choice, its bound, and ADMM controls.

    `epsilon` is the LASSO residual bound and `eta` the MNDO one. With
    ``relative=True`` (default) both are multiples of ``||y||_2``.
    """

    program: str = "mndo"
    epsilon: float = 0.0
    eta: float = 0.0
    relative: bool = True
    d0: int | None = None
    max_iters: int = 5000
    abs_tol: float = 1e-6
    rel_tol: float = 1e-5
    rho: float = 1.0
    adaptive_rho: bool = True

    def __post_init__(self):
        if self.program not in PROGRAMS:
            raise ValueError(f"unknown program {self.program!r}; expected one of {PROGRAMS}")
        if not (self.epsilon >= 0 and self.eta >= 0):
            raise ValueError("epsilon and eta must be >= 0")
        if not self.rho > 0:
            raise ValueError("rho must be > 0")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.program == "block_l2l1" and (self.d0 is None or self.d0 < 1):
            raise ValueError("block_l2l1 needs a positive block length d0")

    def bound(self, y_norm: float) -> float:
        """Absolute residual bound for a measurement vector of norm `y_norm`.

        Never below the equality bound: a zero radius cannot be met in
        floating point, so ``epsilon = 0`` means the same as basis pursuit.
        """
        if self.program in ("bp", "block_l2l1"):
            return equality_bound(y_norm)
        value = self.epsilon if self.program == "lasso" else self.eta
        value = value * y_norm if self.relative else value
        return max(value, equality_bound(y_norm))


@dataclass
class SolveResult:
    """Recovered spectrum and diagnostics.

    `primal_residual`, `dual_residual` and `rho` refer to the internally
    rescaled problem (``||y|| = 1``).
    """

    r_hat: np.ndarray
    objective: float
    residual_norm: float
    bound: float
    iterations: int
    converged: bool
    primal_residual: float
    dual_residual: float
    rho: float

    @property
    def feasible(self) -> bool:
        return self.residual_norm <= self.bound * (1 + _FEASIBILITY_SLACK)


def equality_bound(y_norm: float) -> float:
    return max(1e-9, 1e-8 * y_norm)


def groups_for(program: str, n: int, plan: BandPlan | None = None, d0: int | None = None):
    """Return ``(group_ids, n_groups)``; ``group_ids`` is None for singletons."""
    if program in ("bp", "lasso"):
        return None, n
    if program == "block_l2l1":
        if d0 is None or d0 < 1 or n % d0:
            raise ValueError(f"block length d0={d0!r} must divide N={n}")
        return np.arange(n) // d0, n // d0
    if program == "mndo":
        if plan is None:
            raise ValueError("mndo needs a band plan")
        if plan.n_bins != n:
            raise ValueError(f"band plan has {plan.n_bins} bins, operator has N={n}")
        return plan.group_ids(), plan.n_sections
    raise ValueError(f"unknown program {program!r}")


def _objective(r, group_ids, n_groups) -> float:
    if group_ids is None:
        return float(np.sum(np.abs(r)))
    return float(np.sum(group_norms(r, group_ids, n_groups)))


def solve_grouped(
    A: SensingMap,
    y: np.ndarray,
    group_ids: np.ndarray | None,
    n_groups: int,
    bound: float,
    cfg: SolverConfig = SolverConfig(),
    polish: bool = False,
) -> SolveResult:
    """ADMM for ``min sum_g ||r_g|| s.t. ||A r - y|| <= bound``.

    `group_ids` gives the group of every entry of ``r``; ``None`` selects the
    elementwise (l1) prox. With `polish`, the result is refitted by least
    squares on its own support when that lowers the residual (used for the
    equality-constrained programs, whose tiny bound only stands in for
    ``A r = y``).
    """
    m, n = A.shape
    y = np.asarray(y, dtype=complex)
    if y.shape != (m,):
        raise ValueError(f"measurement vector has shape {y.shape}, expected ({m},)")
    if bound < 0:
        raise ValueError("bound must be >= 0")

    y_norm = float(np.linalg.norm(y))
    if y_norm <= bound:
        # zero is feasible and has zero objective
        return SolveResult(np.zeros(n, dtype=complex), 0.0, y_norm, bound, 0, True, 0.0, 0.0, cfg.rho)

    if group_ids is None:
        def prox(v, t):
            return soft_threshold(v, t)
    else:
        group_ids = np.asarray(group_ids)

        def prox(v, t):
            return prox_groups(v, group_ids, n_groups, t)

    yn = y / y_norm
    eta = bound / y_norm
    rho = cfg.rho

    r = A.adjoint(yn)
    z = r.copy()
    w = A.forward(r)
    u = np.zeros(n, dtype=complex)
    v = np.zeros(m, dtype=complex)
    a_w = A.adjoint(w)
    a_v = np.zeros(n, dtype=complex)

    sqrt_pri = math.sqrt(n + m)
    sqrt_dual = math.sqrt(n)
    converged = False
    primal = dual = math.inf
    changes = 0
    it = 0
    for it in range(1, cfg.max_iters + 1):
        r, a_r = A.solve_shifted(z - u + a_w - a_v)
        z_old, a_w_old = z, a_w
        z = prox(r + u, 1.0 / rho)
        w = project_l2_ball(a_r + v, yn, eta)
        res_z = r - z
        res_w = a_r - w
        u += res_z
        v += res_w
        a_w = A.adjoint(w)
        a_v = A.adjoint(v)

        primal = math.hypot(np.linalg.norm(res_z), np.linalg.norm(res_w))
        dual = rho * float(np.linalg.norm(z - z_old + a_w - a_w_old))
        eps_pri = sqrt_pri * cfg.abs_tol + cfg.rel_tol * max(
            math.hypot(np.linalg.norm(r), np.linalg.norm(a_r)),
            math.hypot(np.linalg.norm(z), np.linalg.norm(w)),
        )
        eps_dual = sqrt_dual * cfg.abs_tol + cfg.rel_tol * rho * float(np.linalg.norm(u + a_v))
        if primal <= eps_pri and dual <= eps_dual:
            converged = True
            break

        if cfg.adaptive_rho and it % _BALANCE_EVERY == 0 and changes < _BALANCE_MAX_CHANGES:
            if primal > _BALANCE_MU * dual:
                scale = _BALANCE_TAU
            elif dual > _BALANCE_MU * primal:
                scale = 1.0 / _BALANCE_TAU
            else:
                continue
            rho *= scale
            u /= scale
            v /= scale
            a_v /= scale
            changes += 1

    if not converged:
        log.debug("ADMM stopped at max_iters=%d (primal %.3g, dual %.3g)", cfg.max_iters, primal, dual)

    # z carries the exact group sparsity; nudge it into the constraint set
    r_hat = z
    a_z = A.forward(z)
    if np.linalg.norm(a_z - yn) > eta:
        target = project_l2_ball(a_z, yn, eta)
        r_hat = z + A.least_norm_correction(target - a_z)

    if polish:
        r_hat = _polish_on_support(A, r_hat, np.flatnonzero(z), yn)

    r_hat = r_hat * y_norm
    return SolveResult(
        r_hat=r_hat,
        objective=_objective(r_hat, group_ids, n_groups),
        residual_norm=float(np.linalg.norm(A.forward(r_hat) - y)),
        bound=bound,
        iterations=it,
        converged=converged,
        primal_residual=primal,
        dual_residual=dual,
        rho=rho,
    )


def _polish_on_support(A: SensingMap, r: np.ndarray, support: np.ndarray, y: np.ndarray):
    m, n = A.shape
    if support.size == 0 or support.size > m:
        return r
    eye = np.zeros((n, support.size), dtype=complex)
    eye[support, np.arange(support.size)] = 1.0
    cols = A.forward(eye)
    coef, *_ = np.linalg.lstsq(cols, y, rcond=None)
    if np.linalg.norm(cols @ coef - y) >= np.linalg.norm(A.forward(r) - y):
        return r
    out = np.zeros_like(r)
    out[support] = coef
    return out


def solve_bp(A: SensingMap, y, cfg: SolverConfig = SolverConfig(program="bp")) -> SolveResult:
    """Basis pursuit: ``min ||r||_1 s.t. A r = y``."""
    y = np.asarray(y, dtype=complex)
    return solve_grouped(A, y, None, A.shape[1], equality_bound(np.linalg.norm(y)), cfg, polish=True)


def solve_lasso(A: SensingMap, y, cfg: SolverConfig) -> SolveResult:
    """Constrained LASSO: ``min ||r||_1 s.t. ||A r - y|| <= epsilon``."""
    cfg = replace(cfg, program="lasso") if cfg.program != "lasso" else cfg
    y = np.asarray(y, dtype=complex)
    return solve_grouped(A, y, None, A.shape[1], cfg.bound(np.linalg.norm(y)), cfg)


def solve_block_l2l1(A: SensingMap, y, cfg: SolverConfig) -> SolveResult:
    """Equal-block l2/l1: ``min sum_i ||r_block_i||_2 s.t. A r = y``."""
    y = np.asarray(y, dtype=complex)
    gid, k = groups_for("block_l2l1", A.shape[1], d0=cfg.d0)
    return solve_grouped(A, y, gid, k, equality_bound(np.linalg.norm(y)), cfg, polish=True)


def solve_mndo(A: SensingMap, y, plan: BandPlan, cfg: SolverConfig) -> SolveResult:
    """Sum of per-section l2 norms over the band plan, subject to the eta ball."""
    cfg = replace(cfg, program="mndo") if cfg.program != "mndo" else cfg
    y = np.asarray(y, dtype=complex)
    gid, k = groups_for("mndo", A.shape[1], plan=plan)
    return solve_grouped(A, y, gid, k, cfg.bound(np.linalg.norm(y)), cfg)


def solve(A: SensingMap, y, cfg: SolverConfig, plan: BandPlan | None = None) -> SolveResult:
    """Dispatch on ``cfg.program``."""
    if cfg.program == "bp":
        return solve_bp(A, y, cfg)
    if cfg.program == "lasso":
        return solve_lasso(A, y, cfg)
    if cfg.program == "block_l2l1":
        return solve_block_l2l1(A, y, cfg)
    return solve_mndo(A, y, plan, cfg)
