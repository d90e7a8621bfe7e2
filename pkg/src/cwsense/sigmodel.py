"""Synthetic wideband signals with clustered-sparse spectra.

Conventions
-----------
* Spectrum bins follow standard DFT order ``0..N-1``.
* The time signal is the unitary inverse DFT of the spectrum,
  ``x = ifft(r, norm="ortho")``, so ``||x||_2 == ||r||_2``.
* The default mode is complex baseband: ``r`` is a free complex vector.
  ``real=True`` enforces conjugate symmetry ``r[(N-k) % N] == conj(r[k])``;
  this needs a plan whose active bins are closed under that mirror.
* Active bins get i.i.d. magnitudes ``U(low, high)`` and phases ``U(0, 2*pi)``.
* The PSD reported anywhere downstream is ``|r|`` (magnitude, not squared).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bandplan import BandPlan, section_index_ranges

__all__ = [
    "SignalSpec",
    "SpectrumVector",
    "TimeSignal",
    "add_awgn",
    "generate_spectrum",
    "noise_variance",
    "spectrum_to_time",
    "write_spectrum_csv",
]

# PSD magnitude ranges of the four primary signals in the reference scenario.
PAPER_PSD_RANGES = (
    (0.0277, 0.1126),
    (0.0157, 0.0988),
    (0.0588, 0.1294),
    (0.0381, 0.1201),
)

_SYMMETRY_TOL = 1e-9


@dataclass(frozen=True)
class SpectrumVector:
    values: np.ndarray
    plan: BandPlan
    real: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.plan.n_bins,):
            raise ValueError(
                f"spectrum length {values.shape} does not match n_bins={self.plan.n_bins}"
            )
        object.__setattr__(self, "values", values)

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)


@dataclass(frozen=True)
class TimeSignal:
    samples: np.ndarray
    sample_rate: float

    def __len__(self):
        return len(self.samples)

    @property
    def power(self) -> float:
        return float(np.mean(np.abs(self.samples) ** 2))


@dataclass(frozen=True)
class SignalSpec:
    """PSD ranges (one per active section, in plan order), SNR and seed."""

    psd_ranges: tuple[tuple[float, float], ...]
    snr_db: float = math.inf
    seed: int = 0
    real: bool = False

    def __post_init__(self):
        ranges = tuple((float(lo), float(hi)) for lo, hi in self.psd_ranges)
        for lo, hi in ranges:
            if not 0.0 <= lo <= hi:
                raise ValueError(f"PSD range ({lo}, {hi}) must satisfy 0 <= low <= high")
        if math.isnan(self.snr_db) or self.snr_db == -math.inf:
            raise ValueError(f"snr_db must be finite or +inf, got {self.snr_db!r}")
        object.__setattr__(self, "psd_ranges", ranges)


def mirror_bins(n: int) -> np.ndarray:
    return (-np.arange(n)) % n


def generate_spectrum(
    plan: BandPlan,
    spec: SignalSpec,
    rng: np.random.Generator | None = None,
) -> SpectrumVector:
    """Draw a spectrum that is nonzero only on the plan's active sections.

    Parameters
    ----------
    plan : BandPlan
        Allocation with ``active_truth`` set on every section.
    spec : SignalSpec
        ``spec.psd_ranges[i]`` applies to the i-th active section.
    rng : numpy.random.Generator, optional
        Overrides ``spec.seed`` (the harness passes per-trial streams).
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    active = plan.active_mask
    ranges = section_index_ranges(plan)
    active_ranges = [rg for rg, on in zip(ranges, active) if on]
    if len(spec.psd_ranges) < len(active_ranges):
        raise ValueError(
            f"{len(active_ranges)} active sections but only {len(spec.psd_ranges)} PSD ranges"
        )

    n = plan.n_bins
    r = np.zeros(n, dtype=complex)
    if spec.real:
        mirror = mirror_bins(n)
        on = np.zeros(n, dtype=bool)
        for start, length in active_ranges:
            on[start : start + length] = True
        if not np.array_equal(on, on[mirror]):
            raise ValueError("real-signal mode needs active bins closed under k -> N-k")

    for (start, length), (lo, hi) in zip(active_ranges, spec.psd_ranges):
        mag = rng.uniform(lo, hi, size=length)
        phase = rng.uniform(0.0, 2 * np.pi, size=length)
        r[start : start + length] = mag * np.exp(1j * phase)

    if spec.real:
        # keep the lower-index half of each mirror pair, overwrite the other
        k = np.arange(n)
        mirror = mirror_bins(n)
        upper = k > mirror
        r[upper] = np.conj(r[mirror[upper]])
        self_mirror = k == mirror
        r[self_mirror] = np.abs(r[self_mirror])
    return SpectrumVector(r, plan, real=spec.real)


def spectrum_to_time(r: SpectrumVector, sample_rate: float | None = None) -> TimeSignal:
    """Unitary inverse DFT; imaginary parts are dropped for symmetric spectra."""
    x = np.fft.ifft(r.values, norm="ortho")
    if r.real:
        scale = max(np.max(np.abs(x), initial=0.0), 1.0)
        if np.max(np.abs(x.imag), initial=0.0) > _SYMMETRY_TOL * scale:
            raise ValueError("spectrum flagged real is not conjugate-symmetric")
        x = x.real.copy()
    if sample_rate is None:
        sample_rate = r.plan.f_max - r.plan.f_min
    return TimeSignal(x, float(sample_rate))


def noise_variance(signal_energy: float, n: int, snr_db: float) -> float:
    """Per-sample noise variance giving ``snr_db`` for a signal of total energy."""
    return signal_energy / (n * 10.0 ** (snr_db / 10.0))


def add_awgn(
    x: TimeSignal,
    snr_db: float,
    rng: np.random.Generator | int | None = None,
) -> TimeSignal:
    """Add white Gaussian noise so that ``mean|x|^2 / sigma^2 == 10**(snr_db/10)``.

    Complex input gets circular complex noise (``sigma^2 / 2`` per component).
    ``snr_db = inf`` returns a copy of `x`.
    """
    if snr_db == math.inf:
        return TimeSignal(x.samples.copy(), x.sample_rate)
    if not math.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite or +inf, got {snr_db!r}")
    energy = float(np.vdot(x.samples, x.samples).real)
    if energy == 0.0:
        raise ValueError("cannot set a finite SNR on an all-zero signal")
    rng = np.random.default_rng(rng)
    sigma2 = noise_variance(energy, len(x), snr_db)
    return TimeSignal(x.samples + white_noise(len(x), sigma2, np.iscomplexobj(x.samples), rng),
                      x.sample_rate)


def white_noise(n: int, sigma2: float, complex_: bool, rng: np.random.Generator) -> np.ndarray:
    if complex_:
        s = math.sqrt(sigma2 / 2.0)
        return s * rng.standard_normal(n) + 1j * s * rng.standard_normal(n)
    return math.sqrt(sigma2) * rng.standard_normal(n)


def write_spectrum_csv(r: SpectrumVector, path) -> None:
    """Write ``bin_index,freq_hz,re,im`` rows."""
    import csv

    freqs = r.plan.bin_frequencies()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_index", "freq_hz", "re", "im"])
        for k, (f, v) in enumerate(zip(freqs, r.values)):
            w.writerow([k, repr(float(f)), repr(float(v.real)), repr(float(v.imag))])
