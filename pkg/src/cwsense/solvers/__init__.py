"""Sparse spectrum recovery programs and their verification oracles."""

from .admm import (
    PROGRAMS,
    SolveResult,
    SolverConfig,
    equality_bound,
    groups_for,
    solve,
    solve_block_l2l1,
    solve_bp,
    solve_grouped,
    solve_lasso,
    solve_mndo,
)
from .prox import group_norms, project_l2_ball, prox_group_l2, prox_groups, soft_threshold
from .reference import ReferenceResult, exhaustive_support, project_residual_ball, reference_solve

__all__ = [
    "PROGRAMS",
    "ReferenceResult",
    "SolveResult",
    "SolverConfig",
    "equality_bound",
    "exhaustive_support",
    "group_norms",
    "groups_for",
    "project_l2_ball",
    "project_residual_ball",
    "prox_group_l2",
    "prox_groups",
    "reference_solve",
    "soft_threshold",
    "solve",
    "solve_block_l2l1",
    "solve_bp",
    "solve_grouped",
    "solve_lasso",
    "solve_mndo",
]
