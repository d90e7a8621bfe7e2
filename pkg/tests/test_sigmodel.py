import math

import numpy as np
import pytest

from cwsense.bandplan import bandplan_from_bands
from cwsense.sigmodel import (
    PAPER_PSD_RANGES,
    SignalSpec,
    SpectrumVector,
    TimeSignal,
    add_awgn,
    generate_spectrum,
    mirror_bins,
    spectrum_to_time,
    write_spectrum_csv,
)

from helpers import paper_plan


def test_four_band_spectrum_support():
    plan = paper_plan()
    r = generate_spectrum(plan, SignalSpec(PAPER_PSD_RANGES, seed=4))
    # 40 + 60 + 40 + 40 active bins
    assert np.count_nonzero(r.values) == 180
    inactive = ~plan.active_mask[plan.group_ids()]
    assert not np.any(r.values[inactive])


def test_magnitudes_inside_ranges():
    plan = paper_plan()
    r = generate_spectrum(plan, SignalSpec(PAPER_PSD_RANGES, seed=1))
    gid = plan.group_ids()
    for (lo, hi), k in zip(PAPER_PSD_RANGES, [1, 3, 5, 7]):
        mag = np.abs(r.values[gid == k])
        assert mag.min() >= lo - 1e-15 and mag.max() <= hi + 1e-15


def test_no_active_sections_gives_zero():
    plan = bandplan_from_bands(0.0, 10.0, 10, [])
    r = generate_spectrum(plan, SignalSpec(()))
    assert not np.any(r.values)


def test_degenerate_range():
    plan = paper_plan()
    r = generate_spectrum(plan, SignalSpec([(0.05, 0.05)] * 4, seed=2))
    mag = np.abs(r.values[r.values != 0])
    np.testing.assert_allclose(mag, 0.05, rtol=0, atol=1e-16)


def test_determinism():
    plan = paper_plan()
    a = generate_spectrum(plan, SignalSpec(PAPER_PSD_RANGES, seed=9)).values
    b = generate_spectrum(plan, SignalSpec(PAPER_PSD_RANGES, seed=9)).values
    assert a.tobytes() == b.tobytes()


def test_spec_validation():
    with pytest.raises(ValueError):
        SignalSpec([(0.2, 0.1)])
    with pytest.raises(ValueError):
        SignalSpec([(-0.1, 0.1)])
    with pytest.raises(ValueError):
        SignalSpec([(0.1, 0.2)], snr_db=math.nan)


def test_impulse_gives_constant():
    plan = bandplan_from_bands(0.0, 16.0, 16, [])
    r = np.zeros(16, complex)
    r[0] = 1.0
    x = spectrum_to_time(SpectrumVector(r, plan))
    np.testing.assert_allclose(x.samples, 1 / 4, atol=1e-15)
    assert x.sample_rate == 16.0


def test_zero_spectrum_zero_signal():
    plan = paper_plan()
    x = spectrum_to_time(SpectrumVector(np.zeros(500, complex), plan))
    assert not np.any(x.samples)


def test_parseval():
    plan = paper_plan()
    rng = np.random.default_rng(0)
    r = rng.standard_normal(500) + 1j * rng.standard_normal(500)
    x = spectrum_to_time(SpectrumVector(r, plan))
    assert abs(np.linalg.norm(x.samples) - np.linalg.norm(r)) <= 1e-10 * np.linalg.norm(r)


def test_awgn_inf_is_identity():
    x = TimeSignal(np.arange(5.0) + 1j, 1.0)
    y = add_awgn(x, math.inf, 0)
    np.testing.assert_array_equal(y.samples, x.samples)
    assert y.samples is not x.samples


def test_awgn_zero_db_energy():
    rng = np.random.default_rng(5)
    x = TimeSignal(rng.standard_normal(64) + 1j * rng.standard_normal(64), 1.0)
    energy = np.linalg.norm(x.samples) ** 2
    noise = [np.linalg.norm(add_awgn(x, 0.0, rng).samples - x.samples) ** 2 for _ in range(10_000)]
    assert abs(np.mean(noise) / energy - 1) < 0.02


def test_awgn_13db_on_four_band_signal():
    plan = paper_plan()
    rng = np.random.default_rng(11)
    sig, noise = [], []
    for _ in range(1000):
        x = spectrum_to_time(generate_spectrum(plan, SignalSpec(PAPER_PSD_RANGES), rng))
        n = add_awgn(x, 13.0, rng).samples - x.samples
        sig.append(np.sum(np.abs(x.samples) ** 2))
        noise.append(np.sum(np.abs(n) ** 2))
    assert abs(10 * np.log10(np.sum(sig) / np.sum(noise)) - 13.0) < 0.3


def test_awgn_rejects_zero_signal():
    with pytest.raises(ValueError):
        add_awgn(TimeSignal(np.zeros(4), 1.0), 10.0, 0)


def test_real_mode_symmetric_plan():
    # active bins {1, 2} and their mirrors {6, 7} for N = 8
    plan = bandplan_from_bands(0.0, 8.0, 8, [(1.0, 3.0), (6.0, 8.0)])
    r = generate_spectrum(plan, SignalSpec([(0.1, 0.2)] * 2, seed=3, real=True))
    np.testing.assert_allclose(r.values, np.conj(r.values[mirror_bins(8)]))
    x = spectrum_to_time(r)
    assert not np.iscomplexobj(x.samples)


def test_real_mode_rejects_asymmetric_plan():
    with pytest.raises(ValueError, match="closed"):
        generate_spectrum(paper_plan(), SignalSpec(PAPER_PSD_RANGES, real=True))


def test_spectrum_csv(tmp_path):
    plan = bandplan_from_bands(0.0, 4.0, 4, [(1.0, 2.0)])
    r = SpectrumVector(np.array([0, 1 + 2j, 0, 0]), plan)
    path = write_spectrum_csv(r, tmp_path / "s.csv") or tmp_path / "s.csv"
    lines = path.read_text().splitlines()
    assert lines[0] == "bin_index,freq_hz,re,im"
    assert len(lines) == 5
