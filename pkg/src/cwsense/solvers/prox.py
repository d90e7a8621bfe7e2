"""Proximal operators and projections used by the ADMM engine."""

from __future__ import annotations

import numpy as np

__all__ = [
    "group_norms",
    "project_l2_ball",
    "prox_group_l2",
    "prox_groups",
    "soft_threshold",
]


def prox_group_l2(v, threshold: float) -> np.ndarray:
    """Block soft-thresholding, the prox of ``threshold * ||.||_2``.

    Returns ``max(0, 1 - threshold/||v||) * v``; exactly zero when
    ``||v|| <= threshold``. Works for complex `v`.

    >>> prox_group_l2(np.array([3.0, 4.0]), 2.5)
    array([1.5, 2. ])
    """
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    v = np.asarray(v)
    nrm = np.linalg.norm(v)
    if nrm <= threshold:
        return np.zeros_like(v)
    return (1.0 - threshold / nrm) * v


def soft_threshold(v: np.ndarray, threshold: float) -> np.ndarray:
    """Elementwise complex soft threshold (prox of ``threshold * ||.||_1``)."""
    mag = np.abs(v)
    scale = np.maximum(mag - threshold, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(mag > 0, scale / mag, 0.0)
    return scale * v


def group_norms(v: np.ndarray, group_ids: np.ndarray, n_groups: int) -> np.ndarray:
    """``||v_g||_2`` for every group; `group_ids` maps each entry to its group."""
    return np.sqrt(np.bincount(group_ids, weights=np.abs(v) ** 2, minlength=n_groups))


def prox_groups(
    v: np.ndarray,
    group_ids: np.ndarray,
    n_groups: int,
    threshold: float,
) -> np.ndarray:
    """Apply :func:`prox_group_l2` to every group of a partition at once."""
    norms = group_norms(v, group_ids, n_groups)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(norms > threshold, 1.0 - threshold / norms, 0.0)
    return scale[group_ids] * v


def project_l2_ball(v, center, radius: float) -> np.ndarray:
    """Euclidean projection of `v` onto ``{u : ||u - center|| <= radius}``."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    v = np.asarray(v)
    center = np.asarray(center)
    diff = v - center
    dist = np.linalg.norm(diff)
    if dist <= radius:
        return v.copy()
    return center + (radius / dist) * diff
