"""Per-subband energies, energy betterment ratio, and occupancy decisions.

Energies are section-restricted l2 norms ``e_k = ||r_k||_2`` of a recovered
spectrum. With ``normalize="total"`` they are divided by ``||r||_2`` so that
``sum_k e_k**2 == 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bandplan import BandPlan

__all__ = [
    "NORMALIZE_MODES",
    "DetectionReport",
    "SubbandEnergies",
    "calibrate_threshold",
    "detect_occupancy",
    "ebr",
    "normalize_energies",
    "per_bin_energy",
    "subband_energies",
]

NORMALIZE_MODES = ("raw", "total")


@dataclass(frozen=True)
class SubbandEnergies:
    values: np.ndarray
    mode: str = "raw"
    # True when normalization was requested for an all-zero spectrum
    degenerate: bool = False

    def __post_init__(self):
        if self.mode not in NORMALIZE_MODES:
            raise ValueError(f"unknown normalization {self.mode!r}; expected {NORMALIZE_MODES}")
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def __len__(self):
        return len(self.values)


def subband_energies(r_hat, plan: BandPlan, normalize: str = "total") -> SubbandEnergies:
    """Section-restricted l2 norms of `r_hat` (a SpectrumVector or array)."""
    values = np.asarray(getattr(r_hat, "values", r_hat))
    if values.shape != (plan.n_bins,):
        raise ValueError(f"spectrum has shape {values.shape}, plan has {plan.n_bins} bins")
    energies = np.sqrt(
        np.bincount(plan.group_ids(), weights=np.abs(values) ** 2, minlength=plan.n_sections)
    )
    raw = SubbandEnergies(energies, "raw")
    if normalize == "raw":
        return raw
    if normalize == "total":
        return normalize_energies(raw)
    raise ValueError(f"unknown normalization {normalize!r}; expected {NORMALIZE_MODES}")


def normalize_energies(e: SubbandEnergies) -> SubbandEnergies:
    """Scale so the squared energies sum to one (the norm of the full spectrum)."""
    total = float(np.sqrt(np.sum(e.values**2)))
    if total == 0.0:
        return SubbandEnergies(np.zeros_like(e.values), "total", degenerate=True)
    return SubbandEnergies(e.values / total, "total")


def _values(e) -> tuple[np.ndarray, str | None]:
    if isinstance(e, SubbandEnergies):
        return e.values, e.mode
    return np.asarray(e, dtype=float), None


def ebr(e_new, e_std, plan: BandPlan) -> np.ndarray:
    """Energy betterment ratio of `e_new` against `e_std`, in percent.

    Active sections score ``(new - std) / std``, inactive ones
    ``(std - new) / std``. A section with ``std == 0`` yields NaN.

    >>> from cwsense.bandplan import bandplan_from_bands
    >>> plan = bandplan_from_bands(0, 2, 2, [(1, 2)])
    >>> ebr([0.0, 0.3986], [0.1269, 0.4490], plan).round(1)
    array([100. , -11.2])
    """
    new, mode_new = _values(e_new)
    std, mode_std = _values(e_std)
    if mode_new is not None and mode_std is not None and mode_new != mode_std:
        raise ValueError(f"cannot compare {mode_new!r} energies against {mode_std!r} energies")
    if new.shape != std.shape or new.shape != (plan.n_sections,):
        raise ValueError("energies must both have one value per plan section")
    active = plan.active_mask
    diff = np.where(active, new - std, std - new)
    out = np.full(diff.shape, np.nan)
    ok = std != 0
    out[ok] = 100.0 * diff[ok] / std[ok]
    return out


def per_bin_energy(energies, plan: BandPlan) -> np.ndarray:
    """``e_k / sqrt(len_k)``, which makes sections of different widths comparable."""
    values, _ = _values(energies)
    return values / np.sqrt(plan.lengths)


@dataclass(frozen=True)
class DetectionReport:
    occupied: np.ndarray
    threshold: float
    truth: np.ndarray | None = None

    @property
    def true_positives(self) -> int:
        return int(np.sum(self.occupied & self.truth))

    @property
    def false_positives(self) -> int:
        return int(np.sum(self.occupied & ~self.truth))

    @property
    def true_negatives(self) -> int:
        return int(np.sum(~self.occupied & ~self.truth))

    @property
    def false_negatives(self) -> int:
        return int(np.sum(~self.occupied & self.truth))

    def confusion(self) -> dict[str, int] | None:
        if self.truth is None:
            return None
        return {
            "tp": self.true_positives,
            "fp": self.false_positives,
            "tn": self.true_negatives,
            "fn": self.false_negatives,
        }


def detect_occupancy(energies, plan: BandPlan, threshold: float) -> DetectionReport:
    """Declare section ``k`` occupied iff ``e_k / sqrt(len_k) > threshold``.

    Use raw (unnormalized) energies unless the threshold was calibrated on
    normalized ones.
    """
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    occupied = per_bin_energy(energies, plan) > threshold
    truth = None
    if all(s.active_truth is not None for s in plan.sections):
        truth = plan.active_mask
    return DetectionReport(occupied, float(threshold), truth)


def calibrate_threshold(noise_only_levels, false_alarm: float = 0.01) -> float:
    """Threshold exceeded by a fraction `false_alarm` of noise-only levels.

    `noise_only_levels` holds per-bin energies (see :func:`per_bin_energy`)
    from recoveries of pure-noise measurements, any shape.
    """
    if not 0.0 < false_alarm < 1.0:
        raise ValueError("false_alarm must lie in (0, 1)")
    levels = np.ravel(np.asarray(noise_only_levels, dtype=float))
    if levels.size == 0:
        raise ValueError("need at least one noise-only level")
    return float(np.quantile(levels, 1.0 - false_alarm, method="higher"))
