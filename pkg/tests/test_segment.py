import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from blpr.errors import BoxOutOfBoundsError, EmptyInputError
from blpr.platefind import BoxFilterConfig, component_boxes, filter_character_boxes
from blpr.segment import (
    Box2D,
    border_color,
    label_components,
    merge_matra,
    order_and_crop,
    split_lines,
)
from oracles import boxes_from_partition, canonical_partition, flood_fill_labels

masks = arrays(bool, st.tuples(st.integers(1, 16), st.integers(1, 16)))


# -- labeling ---------------------------------------------------------------


def test_empty_image():
    lm = label_components(np.zeros((4, 6), bool))
    assert lm.count == 0 and not lm.labels.any()


def test_diagonal_pair():
    m = np.array([[1, 0], [0, 1]], bool)
    assert label_components(m, 8).count == 1
    assert label_components(m, 4).count == 2


def test_u_shape_merges_late():
    # two arms meet only on the last row; raster labels must still be one id
    m = np.array([
        [1, 0, 1],
        [1, 0, 1],
        [1, 1, 1],
    ], bool)
    lm = label_components(m, 4)
    assert lm.count == 1
    assert set(np.unique(lm.labels[m])) == {1}


def test_raster_first_encounter_order():
    m = np.zeros((5, 6), bool)
    m[3, 0] = True     # lowest-leftmost component
    m[0, 5] = True     # first in raster order
    m[1, 2:4] = True
    lm = label_components(m)
    assert lm.labels[0, 5] == 1 and lm.labels[1, 2] == 2 and lm.labels[3, 0] == 3


def test_matra_bridge_joins_shapes():
    m = np.zeros((9, 13), bool)
    m[2:8, 1:5] = True
    m[2:8, 8:12] = True
    m[2, 5:8] = True  # one-pixel headline bridge
    assert label_components(m, 8).count == 1
    m[2, 6] = False
    assert label_components(m, 8).count == 2


@pytest.mark.parametrize("conn", [4, 8])
def test_random_masks_match_flood_fill(rng, conn):
    for density in (0.2, 0.5, 0.8):
        for _ in range(10):
            m = rng.random((24, 31)) < density
            lm = label_components(m, conn)
            ref = flood_fill_labels(m, conn)
            assert np.array_equal(canonical_partition(lm.labels), canonical_partition(ref))
            assert lm.count == ref.max()


@settings(max_examples=80, deadline=None)
@given(masks, st.sampled_from([4, 8]))
def test_labeling_invariants(m, conn):
    lm = label_components(m, conn)
    assert set(np.unique(lm.labels)) - {0} == set(range(1, lm.count + 1))
    assert (lm.labels > 0).sum() == m.sum()
    assert label_components(m.T, conn).count == lm.count


# -- component boxes and filtering -------------------------------------------


def test_component_boxes_simple():
    assert component_boxes(np.zeros((3, 3), bool)) == []
    m = np.zeros((8, 8), bool)
    m[0:2, 0:2] = True
    m[5:7, 5:7] = True
    assert [b.as_list() for b in component_boxes(m)] == [[0, 0, 2, 2], [5, 5, 2, 2]]


def test_component_boxes_match_oracle(rng):
    for _ in range(20):
        m = rng.random((20, 20)) < 0.3
        for conn in (4, 8):
            got = sorted(tuple(b.as_list()) for b in component_boxes(m, conn))
            ref = sorted(boxes_from_partition(flood_fill_labels(m, conn)))
            assert got == ref
            assert len(got) == label_components(m, conn).count


@settings(max_examples=60, deadline=None)
@given(masks)
def test_boxes_are_tight(m):
    lm = label_components(m)
    for i, b in enumerate(component_boxes(m)):
        comp = lm.labels[b.y : b.y2, b.x : b.x2]
        lab = np.bincount(comp[comp > 0]).argmax()
        sub = comp == lab
        assert sub[0].any() and sub[-1].any() and sub[:, 0].any() and sub[:, -1].any()


def test_filter_rejects_full_plate_and_keeps_order():
    assert filter_character_boxes([], 100, 50) == []
    boxes = [Box2D(0, 0, 100, 50), Box2D(10, 10, 8, 20)]
    assert filter_character_boxes(boxes, 100, 50) == [Box2D(10, 10, 8, 20)]


def test_filter_digits_and_specks():
    plate = np.zeros((60, 200), bool)
    digits = []
    for i in range(6):
        x = 10 + i * 30
        plate[20:45, x : x + 14] = True
        digits.append([x, 20, 14, 25])
    for y, x in [(5, 5), (55, 100), (10, 190)]:
        plate[y, x] = True
    kept = filter_character_boxes(component_boxes(plate), 200, 60)
    # hand check: digits are 25/60 = 0.42 tall and 14/200 = 0.07 wide, specks are 1 px
    assert sorted(b.as_list() for b in kept) == digits


def test_filter_idempotent_subset(rng):
    boxes = [Box2D(int(x), int(y), int(w), int(h)) for x, y, w, h in rng.integers(1, 40, (50, 4))]
    once = filter_character_boxes(boxes, 80, 80)
    assert set(once) <= set(boxes)
    assert filter_character_boxes(once, 80, 80) == once


def test_box_filter_parse_and_validation():
    cfg = BoxFilterConfig.parse("min_h_frac=0.2, max_w_frac=0.9,min_area_px=12")
    assert (cfg.min_h_frac, cfg.max_w_frac, cfg.min_area_px) == (0.2, 0.9, 12)
    merged = BoxFilterConfig.parse("min_area_px=3", base=cfg)
    assert (merged.min_h_frac, merged.min_area_px) == (0.2, 3)
    with pytest.raises(ValueError):
        BoxFilterConfig.parse("bogus=1")
    with pytest.raises(ValueError):
        BoxFilterConfig(min_h_frac=0.5, max_h_frac=0.4)


# -- lines, merging, cropping ------------------------------------------------


def test_split_lines_fixed_point_and_collapse():
    H = 100
    up, low = Box2D(0, 15, 5, 20), Box2D(10, 65, 5, 20)  # centers 25 and 75
    assert split_lines([low, up], H) == ([up], [low])
    same = [Box2D(i * 10, 40, 5, 20) for i in range(4)]
    assert split_lines(same, H) == (same, [])
    with pytest.raises(EmptyInputError):
        split_lines([], H)


def test_split_lines_plate_fixture():
    # hand-labeled: word line (tall word, metro, letter) over six digits
    H = 128
    upper = [Box2D(20, 14, 90, 40), Box2D(125, 16, 85, 38), Box2D(225, 15, 40, 40)]
    lower = [Box2D(20 + 40 * i, 70 + (i % 2), 30, 42) for i in range(6)]
    mixed = [lower[3], upper[1], lower[0], upper[2], lower[5], lower[1], upper[0], lower[4], lower[2]]
    l1, l2 = split_lines(mixed, H)
    assert set(l1) == set(upper) and set(l2) == set(lower)
    assert len(l1) + len(l2) == len(mixed)


def test_split_lines_unequal_heights():
    H = 100
    boxes = [Box2D(0, 5, 10, 10), Box2D(20, 40, 10, 55), Box2D(40, 42, 10, 53)]
    l1, l2 = split_lines(boxes, H)
    assert l1 == [boxes[0]] and l2 == boxes[1:]


def test_merge_matra():
    a, b = Box2D(0, 10, 20, 30), Box2D(22, 12, 20, 28)   # gap 2, heavy overlap
    c = Box2D(60, 10, 20, 30)                            # gap 18
    merged = merge_matra([c, b, a], median_width=20)
    assert merged == [Box2D(0, 10, 42, 30), c]
    # a fragment sitting above the line does not overlap vertically enough
    d = Box2D(21, 0, 10, 9)
    assert merge_matra([a, d], median_width=20) == [a, d]


def test_order_and_crop_identity(rng):
    plate = rng.integers(0, 256, (32, 32, 3), dtype=np.uint8)
    (g,) = order_and_crop(plate, [Box2D(0, 0, 32, 32)], [])
    assert np.array_equal(g.image, plate)
    assert (g.line_index, g.position_in_line) == (0, 0)


def test_order_and_crop_sorts_by_x(rng):
    plate = rng.integers(0, 256, (40, 40, 3), dtype=np.uint8)
    a, b = Box2D(20, 5, 8, 10), Box2D(5, 5, 8, 10)
    glyphs = order_and_crop(plate, [], [a, b])
    assert [(g.source_box, g.line_index, g.position_in_line) for g in glyphs] == [(b, 1, 0), (a, 1, 1)]
    assert all(g.image.shape == (32, 32, 3) for g in glyphs)


def test_order_and_crop_out_of_bounds():
    with pytest.raises(BoxOutOfBoundsError):
        order_and_crop(np.zeros((10, 10, 3), np.uint8), [Box2D(5, 5, 6, 2)], [])


def test_crop_pads_with_border_median():
    plate = np.full((20, 30, 3), 200, np.uint8)
    plate[5:15, 10:14] = 10
    assert border_color(plate).tolist() == [200, 200, 200]
    (g,) = order_and_crop(plate, [Box2D(10, 5, 4, 10)], [])
    # tall narrow crop: left and right columns are padding
    assert g.image[:, 0].tolist() == [[200, 200, 200]] * 32
    assert g.image[16, 16].tolist() == [10, 10, 10]
