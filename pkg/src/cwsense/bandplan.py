"""Fixed primary-user frequency allocations.

A :class:`BandPlan` partitions the monitored band ``[f_min, f_max)`` into
contiguous sections whose edges sit on the bin grid of the length-``n_bins``
spectrum vector. Bin ``k`` covers ``[f_min + k*df, f_min + (k+1)*df)`` with
``df = (f_max - f_min) / n_bins``.

Band-plan files are TOML::

    f_min_hz = 0.0
    f_max_hz = 500e6
    n_bins = 500

    [[band]]
    f_lo_hz = 30e6
    f_hi_hz = 70e6
    label = "PU1"

Every ``[[band]]`` is an *active* allocation; the gaps between them become
inactive sections. Unknown keys are rejected.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = [
    "BandPlan",
    "BandPlanError",
    "Section",
    "bandplan_from_bands",
    "bandplan_from_dict",
    "load_bandplan",
    "section_index_ranges",
]

_GRID_TOL = 1e-9

PLAN_KEYS = {"f_min_hz", "f_max_hz", "n_bins", "band"}
BAND_KEYS = {"f_lo_hz", "f_hi_hz", "label"}


class BandPlanError(ValueError):
    """Raised for a band plan that violates the partition invariants."""


@dataclass(frozen=True)
class Section:
    f_lo: float
    f_hi: float
    label: str = ""
    # ground truth for the simulation harness only; solvers never see it
    active_truth: bool | None = None

    def __post_init__(self):
        if not self.f_lo < self.f_hi:
            raise BandPlanError(
                f"section {self.label!r}: f_lo={self.f_lo!r} must be < f_hi={self.f_hi!r}"
            )


@dataclass(frozen=True)
class BandPlan:
    """Immutable partition of the monitored band into allocation sections."""

    f_min: float
    f_max: float
    n_bins: int
    sections: tuple[Section, ...]
    _ranges: tuple[tuple[int, int], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "sections", tuple(self.sections))
        if not (math.isfinite(self.f_min) and math.isfinite(self.f_max)):
            raise BandPlanError("f_min and f_max must be finite")
        if not self.f_min < self.f_max:
            raise BandPlanError(f"f_min={self.f_min!r} must be < f_max={self.f_max!r}")
        if int(self.n_bins) != self.n_bins or self.n_bins < 1:
            raise BandPlanError(f"n_bins must be a positive integer, got {self.n_bins!r}")
        object.__setattr__(self, "n_bins", int(self.n_bins))
        if not self.sections:
            raise BandPlanError("a band plan needs at least one section")

        first, last = self.sections[0], self.sections[-1]
        if first.f_lo != self.f_min:
            raise BandPlanError(f"first section {first.label!r} must start at f_min={self.f_min!r}")
        if last.f_hi != self.f_max:
            raise BandPlanError(f"last section {last.label!r} must end at f_max={self.f_max!r}")
        for prev, cur in zip(self.sections, self.sections[1:]):
            if cur.f_lo != prev.f_hi:
                raise BandPlanError(
                    f"section {cur.label!r} starts at {cur.f_lo!r} but "
                    f"{prev.label!r} ends at {prev.f_hi!r}"
                )

        edges = [self._bin_of(s.f_lo, s.label) for s in self.sections]
        edges.append(self.n_bins)
        ranges = []
        for sec, lo, hi in zip(self.sections, edges, edges[1:]):
            if hi - lo < 1:
                raise BandPlanError(f"section {sec.label!r} is narrower than one bin")
            ranges.append((lo, hi - lo))
        object.__setattr__(self, "_ranges", tuple(ranges))

    def _bin_of(self, freq: float, label: str) -> int:
        k = (freq - self.f_min) * self.n_bins / (self.f_max - self.f_min)
        k_int = round(k)
        if abs(k - k_int) > _GRID_TOL * max(1.0, abs(k)):
            raise BandPlanError(
                f"edge {freq!r} Hz of {label!r} is not on the {self.bin_width!r} Hz bin grid"
            )
        return int(k_int)

    @property
    def bin_width(self) -> float:
        return (self.f_max - self.f_min) / self.n_bins

    @property
    def n_sections(self) -> int:
        return len(self.sections)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([n for _, n in self._ranges])

    @property
    def active_mask(self) -> np.ndarray:
        """Per-section ground truth; raises if any section lacks it."""
        if any(s.active_truth is None for s in self.sections):
            raise BandPlanError("band plan carries no ground-truth occupancy")
        return np.array([bool(s.active_truth) for s in self.sections])

    def bin_frequencies(self) -> np.ndarray:
        """Lower edge frequency of every bin."""
        return self.f_min + self.bin_width * np.arange(self.n_bins)

    def group_ids(self) -> np.ndarray:
        """Section index of every bin (length ``n_bins``)."""
        return np.repeat(np.arange(self.n_sections), self.lengths)

    def active_bands(self) -> list[tuple[float, float, str]]:
        return [(s.f_lo, s.f_hi, s.label) for s in self.sections if s.active_truth]

    def to_dict(self) -> dict:
        return {
            "f_min_hz": self.f_min,
            "f_max_hz": self.f_max,
            "n_bins": self.n_bins,
            "band": [
                {"f_lo_hz": lo, "f_hi_hz": hi, "label": label}
                for lo, hi, label in self.active_bands()
            ],
        }


def section_index_ranges(plan: BandPlan) -> list[tuple[int, int]]:
    """Return ``(start_bin, length)`` for every section, in order."""
    return list(plan._ranges)


def bandplan_from_bands(
    f_min: float,
    f_max: float,
    n_bins: int,
    active_bands: Iterable[Sequence],
) -> BandPlan:
    """Build the full partition from a sorted list of active allocations.

    Each entry of `active_bands` is ``(f_lo, f_hi)`` or ``(f_lo, f_hi, label)``.
    Gaps between active bands become inactive sections labelled ``gap<i>``.

    >>> plan = bandplan_from_bands(0.0, 4.0, 4, [(1.0, 4.0, "a")])
    >>> section_index_ranges(plan)
    [(0, 1), (1, 3)]
    """
    bands = []
    for i, band in enumerate(active_bands):
        if len(band) == 2:
            lo, hi = band
            label = f"band{i}"
        elif len(band) == 3:
            lo, hi, label = band
        else:
            raise BandPlanError(f"band #{i} must be (f_lo, f_hi[, label]), got {band!r}")
        bands.append((float(lo), float(hi), str(label)))

    sections = []
    cursor = float(f_min)
    n_gaps = 0
    for lo, hi, label in bands:
        if not lo < hi:
            raise BandPlanError(f"band {label!r}: f_lo={lo!r} must be < f_hi={hi!r}")
        if lo < f_min or hi > f_max:
            raise BandPlanError(
                f"band {label!r} [{lo!r}, {hi!r}) lies outside [{f_min!r}, {f_max!r}]"
            )
        if lo < cursor:
            raise BandPlanError(f"band {label!r} overlaps its predecessor or is out of order")
        if lo > cursor:
            sections.append(Section(cursor, lo, f"gap{n_gaps}", active_truth=False))
            n_gaps += 1
        sections.append(Section(lo, hi, label, active_truth=True))
        cursor = hi
    if cursor < f_max:
        sections.append(Section(cursor, float(f_max), f"gap{n_gaps}", active_truth=False))
    return BandPlan(float(f_min), float(f_max), n_bins, tuple(sections))


def bandplan_from_dict(data: dict) -> BandPlan:
    unknown = set(data) - PLAN_KEYS
    if unknown:
        raise BandPlanError(f"unknown band-plan field(s): {sorted(unknown)}")
    missing = {"f_min_hz", "f_max_hz", "n_bins"} - set(data)
    if missing:
        raise BandPlanError(f"missing band-plan field(s): {sorted(missing)}")
    bands = []
    for i, band in enumerate(data.get("band", [])):
        if not isinstance(band, dict):
            raise BandPlanError(f"band #{i} must be a table")
        unknown = set(band) - BAND_KEYS
        if unknown:
            raise BandPlanError(f"band #{i}: unknown field(s) {sorted(unknown)}")
        try:
            bands.append((band["f_lo_hz"], band["f_hi_hz"], band.get("label", f"band{i}")))
        except KeyError as exc:
            raise BandPlanError(f"band #{i}: missing field {exc.args[0]!r}") from None
    n_bins = data["n_bins"]
    if not isinstance(n_bins, int) or isinstance(n_bins, bool):
        raise BandPlanError(f"n_bins must be an integer, got {n_bins!r}")
    return bandplan_from_bands(float(data["f_min_hz"]), float(data["f_max_hz"]), n_bins, bands)


def load_bandplan(path: str | Path) -> BandPlan:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise BandPlanError(f"{path}: {exc}") from exc
    try:
        return bandplan_from_dict(data)
    except BandPlanError as exc:
        raise BandPlanError(f"{path}: {exc}") from exc
