"""Projection readout, the alternating refinement search, and box consolidation."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import frame_of
from cramsim.errors import ConfigError
from cramsim.grid import BinaryFrame
from cramsim.projection import (
    Box,
    ProjectionConfig,
    RpConfig,
    boxes_from_json,
    boxes_to_json,
    iss,
    line_voltage,
    project,
    region_propose,
    rp_update,
    runs_from_bits,
)
from cramsim.timing import (
    CONTROLLER_FIXED,
    CONTROLLER_OBJECT,
    FULL_AXIS_PROJECTION,
    REGION_PROJECTION,
    trace_cycles,
)


# --- line voltage and detection


def test_line_voltage_frozen_values():
    cfg = ProjectionConfig()
    assert line_voltage(0, cfg) == 0.0
    assert abs(line_voltage(1, cfg) - (1.0 - math.exp(-1 / 0.7))) < 1e-15
    assert abs(line_voltage(1, cfg) - 0.7603490) < 1e-6
    assert line_voltage(50, cfg) > 0.999999
    with pytest.raises(ConfigError):
        line_voltage(-1, cfg)


def test_line_voltage_monotone():
    cfg = ProjectionConfig()
    volts = [line_voltage(n, cfg) for n in range(20)]
    assert all(a < b for a, b in zip(volts, volts[1:]))


def test_default_vref_detects_single_pixel():
    cfg = ProjectionConfig()
    assert cfg.vref == 7 / 15
    assert line_voltage(1, cfg) > cfg.vref  # one pixel is enough to trip a line


def test_projection_config_validation():
    with pytest.raises(ConfigError):
        ProjectionConfig(dac_code=16)
    with pytest.raises(ConfigError):
        ProjectionConfig(dac_code=-1)
    with pytest.raises(ConfigError):
        ProjectionConfig(line_charge_constant=0.0)


def test_project_rows_and_cols_with_mask():
    f = frame_of(
        """
        ....
        .##.
        ....
        #..#
        """
    )
    cfg = ProjectionConfig()
    assert project(f, "rows", range(4), cfg).tolist() == [0, 1, 0, 1]
    assert project(f, "cols", range(4), cfg).tolist() == [1, 1, 1, 1]
    # masking to the middle columns hides the row-3 corners
    assert project(f, "rows", [1, 2], cfg).tolist() == [0, 1, 0, 0]
    with pytest.raises(ConfigError):
        project(f, "rows", [], cfg)
    with pytest.raises(ConfigError):
        project(f, "rows", [4], cfg)
    with pytest.raises(ConfigError):
        project(f, "diag", [0], cfg)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_default_projection_equals_occupancy(data):
    """At the default DAC point a line trips iff it holds at least one 1."""
    h = data.draw(st.integers(1, 12))
    w = data.draw(st.integers(1, 12))
    bits = data.draw(st.lists(st.integers(0, 1), min_size=h * w, max_size=h * w))
    f = BinaryFrame(np.array(bits, dtype=np.uint8).reshape(h, w))
    got = project(f, "rows", range(w), ProjectionConfig())
    want = (f.pixels.sum(axis=1) > 0).astype(np.uint8)
    assert np.array_equal(got, want)


def test_high_vref_needs_more_charge():
    cfg = ProjectionConfig(dac_code=15)  # vref == 1.0, unreachable
    f = frame_of("##\n##")
    assert project(f, "rows", range(2), cfg).tolist() == [0, 0]


def test_runs_from_bits():
    assert runs_from_bits([0, 1, 1, 0, 1]) == [(1, 2), (4, 4)]
    assert runs_from_bits([1, 1, 1]) == [(0, 2)]
    assert runs_from_bits([0, 0]) == []
    assert runs_from_bits([]) == []


# --- Box


def test_box_geometry_and_validation():
    b = Box(2, 5, 3, 3)
    assert (b.height, b.width, b.area) == (4, 1, 4)
    assert b.union(Box(0, 1, 7, 9)) == Box(0, 5, 3, 9)
    with pytest.raises(ValueError):
        Box(3, 2, 0, 0)
    with pytest.raises(ValueError):
        Box(0, 0, -1, 0)


def test_box_gaps():
    a = Box(0, 3, 0, 3)
    assert a.col_gap(Box(0, 3, 6, 9)) == 2
    assert a.col_gap(Box(0, 3, 4, 9)) == 0  # adjacent, no free line
    assert a.row_gap(Box(2, 8, 0, 3)) == 0  # overlapping
    assert a.row_gap(Box(9, 9, 0, 3)) == 5


def test_boxes_json_roundtrip_and_order():
    boxes = [Box(5, 6, 0, 1), Box(0, 1, 9, 9), Box(0, 3, 2, 4)]
    text = boxes_to_json(boxes)
    back = boxes_from_json(text)
    assert back == sorted(boxes, key=lambda b: (b.r0, b.c0, b.r1, b.c1))
    assert '"x0"' in text and '"y0"' in text and text.endswith("\n")


# --- iterative search


def test_iss_empty_frame_single_projection():
    res = iss(BinaryFrame.zeros(16, 16), RpConfig())
    assert res.boxes == []
    assert res.iterations == 1
    assert trace_cycles(res.trace) == 8
    assert res.projection_cells == [256]


def test_iss_single_object_two_iterations():
    f = BinaryFrame.zeros(16, 16)
    f.pixels[3:7, 5:11] = 1
    res = iss(f, RpConfig())
    assert res.boxes == [Box(3, 6, 5, 10)]
    assert res.iterations == 2
    assert trace_cycles(res.trace) == 16
    # region projection senses only the row-band candidate
    assert res.projection_cells == [256, 4 * 16]


def test_iss_two_diagonal_objects():
    f = BinaryFrame.zeros(24, 24)
    f.pixels[0:4, 0:4] = 1
    f.pixels[8:12, 8:12] = 1
    res = iss(f, RpConfig())
    assert res.boxes == [Box(0, 3, 0, 3), Box(8, 11, 8, 11)]
    assert trace_cycles(res.trace) == 24


def test_iss_row_band_sharing_needs_third_iteration():
    """Two objects in one row band plus one below: counts 2 -> 3 -> 3."""
    f = BinaryFrame.zeros(16, 16)
    f.pixels[0:4, 0:4] = 1
    f.pixels[0:4, 8:12] = 1
    f.pixels[8:12, 0:4] = 1
    res = iss(f, RpConfig())
    assert res.iterations == 3
    assert sorted(res.boxes, key=lambda b: (b.r0, b.c0)) == [
        Box(0, 3, 0, 3),
        Box(0, 3, 8, 11),
        Box(8, 11, 0, 3),
    ]
    # 1 full-axis + 2 candidates refined + 3 candidates re-checked
    assert res.trace.total(FULL_AXIS_PROJECTION) == 1
    assert res.trace.total(REGION_PROJECTION) == 5


def test_iss_refinement_respects_candidate_extent():
    """A candidate's re-projection must not see other objects' rows."""
    # two boxes share columns; the right band also holds a second object
    f = BinaryFrame.zeros(20, 20)
    f.pixels[2:6, 2:6] = 1
    f.pixels[2:6, 10:14] = 1
    f.pixels[12:16, 10:14] = 1
    res = iss(f, RpConfig())
    assert sorted(res.boxes, key=lambda b: (b.r0, b.c0)) == [
        Box(2, 5, 2, 5),
        Box(2, 5, 10, 13),
        Box(12, 15, 10, 13),
    ]


def test_iss_iteration_cap():
    f = BinaryFrame.zeros(16, 16)
    f.pixels[0:4, 0:4] = 1
    f.pixels[0:4, 8:12] = 1
    f.pixels[8:12, 0:4] = 1
    res = iss(f, RpConfig(max_iters=2))
    assert res.iterations == 2
    # stopped before the column split resolved the top band
    assert len(res.boxes) == 3 or len(res.boxes) == 2


@settings(max_examples=25, deadline=None)
@given(st.data())
def test_iss_boxes_cover_all_ones(data):
    h = data.draw(st.integers(4, 20))
    w = data.draw(st.integers(4, 20))
    density = data.draw(st.floats(0.0, 0.4))
    seed = data.draw(st.integers(0, 10**6))
    rng = np.random.default_rng(seed)
    f = BinaryFrame((rng.random((h, w)) < density).astype(np.uint8))
    res = iss(f, RpConfig())
    covered = np.zeros((h, w), dtype=bool)
    for b in res.boxes:
        assert 0 <= b.r0 <= b.r1 < h and 0 <= b.c0 <= b.c1 < w
        block = f.pixels[b.r0:b.r1 + 1, b.c0:b.c1 + 1]
        assert block.any()  # no empty proposals
        covered[b.r0:b.r1 + 1, b.c0:b.c1 + 1] = True
    assert not (f.pixels.astype(bool) & ~covered).any()


# --- consolidation


def test_rp_update_merges_within_slot():
    a = Box(0, 3, 0, 3)
    b = Box(0, 3, 6, 9)  # column gap 2 < slot 4, row overlap
    cfg = RpConfig(size_min=1, slot_r=4, slot_c=4)
    assert rp_update([a, b], cfg) == [Box(0, 3, 0, 9)]


def test_rp_update_gap_equal_to_slot_stays_split():
    a = Box(0, 3, 0, 3)
    b = Box(0, 3, 8, 11)  # column gap 4 == slot 4
    cfg = RpConfig(size_min=1, slot_r=4, slot_c=4)
    assert rp_update([a, b], cfg) == [a, b]


def test_rp_update_needs_both_axes_within_slot():
    a = Box(0, 3, 0, 3)
    b = Box(9, 12, 0, 3)  # row gap 5 >= slot
    cfg = RpConfig(size_min=1, slot_r=4, slot_c=4)
    assert rp_update([a, b], cfg) == [a, b]


def test_rp_update_chain_merge_reaches_fixpoint():
    boxes = [Box(0, 3, 0 + 6 * i, 3 + 6 * i) for i in range(4)]  # gaps of 2
    cfg = RpConfig(size_min=1, slot_r=4, slot_c=4)
    assert rp_update(boxes, cfg) == [Box(0, 3, 0, 21)]


def test_rp_update_size_filter_area_vs_max_side():
    sliver = Box(0, 0, 0, 9)  # 1x10: area 10, max side 10
    dot = Box(5, 6, 5, 6)     # 2x2: area 4, max side 2
    area_cfg = RpConfig(size_min=4, slot_r=0, slot_c=0, size_metric="area")
    side_cfg = RpConfig(size_min=4, slot_r=0, slot_c=0, size_metric="max_side")
    assert rp_update([sliver, dot], area_cfg) == [sliver, dot]
    assert rp_update([sliver, dot], side_cfg) == [sliver]


def test_rp_update_filters_before_merging():
    # the speck would bridge the two big boxes if it survived the size filter
    big1 = Box(0, 5, 0, 5)
    big2 = Box(0, 5, 20, 25)
    speck = Box(2, 2, 9, 9)
    cfg = RpConfig(size_min=4, slot_r=4, slot_c=4)
    assert rp_update([big1, speck, big2], cfg) == [big1, big2]


def test_rp_update_zero_slot_never_merges_separated():
    a = Box(0, 3, 0, 3)
    b = Box(0, 3, 4, 7)  # adjacent: gap 0; slot 0 requires gap < 0, impossible
    cfg = RpConfig(size_min=1, slot_r=0, slot_c=0)
    assert rp_update([a, b], cfg) == [a, b]


boxes_strategy = st.lists(
    st.tuples(st.integers(0, 20), st.integers(0, 8), st.integers(0, 20), st.integers(0, 8)).map(
        lambda t: Box(t[0], t[0] + t[1], t[2], t[2] + t[3])
    ),
    min_size=0,
    max_size=8,
)


@settings(max_examples=60, deadline=None)
@given(boxes=boxes_strategy, perm_seed=st.integers(0, 999))
def test_rp_update_order_invariant_and_idempotent(boxes, perm_seed):
    cfg = RpConfig(size_min=2, slot_r=3, slot_c=3)
    merged = rp_update(boxes, cfg)
    rng = np.random.default_rng(perm_seed)
    shuffled = [boxes[i] for i in rng.permutation(len(boxes))]
    assert rp_update(shuffled, cfg) == merged
    assert rp_update(merged, cfg) == merged


@settings(max_examples=60, deadline=None)
@given(boxes=boxes_strategy)
def test_rp_update_output_pairwise_unmergeable(boxes):
    cfg = RpConfig(size_min=1, slot_r=3, slot_c=3)
    merged = rp_update(boxes, cfg)
    for a, b in itertools.combinations(merged, 2):
        assert a.row_gap(b) >= cfg.slot_r or a.col_gap(b) >= cfg.slot_c


# --- full proposal step


def test_region_propose_trace_composition():
    f = BinaryFrame.zeros(24, 24)
    for i in range(3):
        f.pixels[8 * i:8 * i + 4, 8 * i:8 * i + 4] = 1
    res = region_propose(f, RpConfig())
    assert len(res.boxes) == 3
    assert res.iss_boxes == res.boxes
    assert trace_cycles(res.trace) == 42
    assert res.trace.total(CONTROLLER_OBJECT) == 3
    assert res.trace.total(CONTROLLER_FIXED) == 1


def test_region_propose_controller_counts_raw_detections():
    """Consolidation may merge boxes, but the controller paid per raw detection."""
    f = BinaryFrame.zeros(16, 16)
    f.pixels[0:4, 0:4] = 1
    f.pixels[0:4, 6:10] = 1  # gap 2 < default slot 4
    res = region_propose(f, RpConfig())
    assert len(res.iss_boxes) == 2
    assert res.boxes == [Box(0, 3, 0, 9)]
    assert res.trace.total(CONTROLLER_OBJECT) == 2


def test_region_propose_empty_frame_has_no_object_entries():
    res = region_propose(BinaryFrame.zeros(8, 8), RpConfig())
    assert res.boxes == []
    assert res.trace.total(CONTROLLER_OBJECT) == 0
    assert trace_cycles(res.trace) == 12


def test_rp_config_validation():
    with pytest.raises(ConfigError):
        RpConfig(max_iters=1)
    with pytest.raises(ConfigError):
        RpConfig(size_min=-1)
    with pytest.raises(ConfigError):
        RpConfig(slot_r=-2)
    with pytest.raises(ConfigError):
        RpConfig(size_metric="volume")
