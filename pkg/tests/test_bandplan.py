import numpy as np
import pytest

from cwsense.bandplan import (
    BandPlan,
    BandPlanError,
    Section,
    bandplan_from_bands,
    bandplan_from_dict,
    load_bandplan,
    section_index_ranges,
)

from helpers import MHz, PAPER_BANDS, paper_plan


def test_four_band_plan_has_nine_sections():
    plan = paper_plan()
    edges = [(s.f_lo / MHz, s.f_hi / MHz) for s in plan.sections]
    assert edges == [
        (0, 30), (30, 70), (70, 120), (120, 180), (180, 300),
        (300, 340), (340, 420), (420, 460), (460, 500),
    ]
    assert plan.active_mask.tolist() == [False, True] * 4 + [False]


def test_four_band_plan_lengths():
    lengths = [n for _, n in section_index_ranges(paper_plan())]
    assert lengths == [30, 40, 50, 60, 120, 40, 80, 40, 40]
    assert sum(lengths) == 500


def test_full_band_single_section():
    plan = bandplan_from_bands(0.0, 500 * MHz, 500, [(0.0, 500 * MHz)])
    assert plan.n_sections == 1
    assert section_index_ranges(plan) == [(0, 500)]


def test_off_grid_edge_rejected():
    with pytest.raises(BandPlanError, match="71300000.0 Hz .* bin grid"):
        bandplan_from_bands(0.0, 500 * MHz, 500, [(30 * MHz, 71.3 * MHz)])


def test_smallest_partition():
    plan = bandplan_from_bands(0.0, 4.0, 4, [(1.0, 4.0)])
    assert section_index_ranges(plan) == [(0, 1), (1, 3)]


@pytest.mark.parametrize("bands", [
    [(50 * MHz, 40 * MHz)],                           # reversed
    [(30 * MHz, 70 * MHz), (60 * MHz, 80 * MHz)],     # overlap
    [(120 * MHz, 180 * MHz), (30 * MHz, 70 * MHz)],   # out of order
    [(450 * MHz, 510 * MHz)],                         # outside
])
def test_bad_band_lists(bands):
    with pytest.raises(BandPlanError):
        bandplan_from_bands(0.0, 500 * MHz, 500, bands)


def test_direct_construction_checks_contiguity():
    with pytest.raises(BandPlanError):
        BandPlan(0.0, 4.0, 4, (Section(0.0, 1.0), Section(2.0, 4.0)))
    with pytest.raises(BandPlanError):
        BandPlan(0.0, 4.0, 4, (Section(0.0, 1.0), Section(1.0, 3.0)))


def test_section_requires_ordered_edges():
    with pytest.raises(BandPlanError):
        Section(2.0, 1.0)


def test_round_trip_active_bands():
    assert paper_plan().active_bands() == [(lo, hi, lb) for lo, hi, lb in PAPER_BANDS]


def test_group_ids_and_bin_frequencies():
    plan = paper_plan()
    gid = plan.group_ids()
    assert gid.shape == (500,)
    assert gid[29] == 0 and gid[30] == 1 and gid[499] == 8
    f = plan.bin_frequencies()
    assert f[0] == 0.0 and f[1] == pytest.approx(1 * MHz)


def test_missing_truth_raises():
    plan = BandPlan(0.0, 2.0, 2, (Section(0.0, 1.0), Section(1.0, 2.0)))
    with pytest.raises(BandPlanError):
        plan.active_mask


def test_dict_round_trip_and_strictness():
    plan = paper_plan()
    assert bandplan_from_dict(plan.to_dict()) == plan
    with pytest.raises(BandPlanError, match="unknown"):
        bandplan_from_dict({**plan.to_dict(), "colour": 1})
    bad = plan.to_dict()
    bad["band"][0]["width"] = 3
    with pytest.raises(BandPlanError, match="width"):
        bandplan_from_dict(bad)


def test_load_bandplan_file(tmp_path):
    p = tmp_path / "plan.toml"
    p.write_text(
        "f_min_hz = 0.0\nf_max_hz = 8.0\nn_bins = 8\n"
        "[[band]]\nf_lo_hz = 2.0\nf_hi_hz = 4.0\nlabel = 'x'\n"
    )
    plan = load_bandplan(p)
    assert section_index_ranges(plan) == [(0, 2), (2, 2), (4, 4)]
    p.write_text("f_min_hz = [")
    with pytest.raises(BandPlanError, match="plan.toml"):
        load_bandplan(p)


def test_random_plans_partition():
    rng = np.random.default_rng(3)
    for _ in range(100):
        n = int(rng.integers(1, 60))
        cuts = np.sort(rng.choice(np.arange(1, n), size=min(n - 1, int(rng.integers(0, 6))),
                                  replace=False)) if n > 1 else np.array([], int)
        edges = [0, *cuts.tolist(), n]
        bands = [(edges[i], edges[i + 1]) for i in range(0, len(edges) - 1, 2)]
        plan = bandplan_from_bands(0.0, float(n), n, bands)
        covered = np.concatenate([np.arange(s, s + ln) for s, ln in section_index_ranges(plan)])
        np.testing.assert_array_equal(covered, np.arange(n))
