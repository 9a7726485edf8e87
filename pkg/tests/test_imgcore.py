import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from blpr.errors import CorruptDataError, ImageIOError, UnsupportedFormatError, ZeroDimensionError
from blpr.imgcore import (
    gray_to_rgb,
    load_image,
    resize,
    round_half_away,
    save_image,
    to_grayscale,
)
from oracles import bilinear_pixel, luma


def test_round_half_away_differs_from_bankers():
    assert round_half_away(np.array([0.5, 1.5, 2.5, -0.5, -2.5])).tolist() == [1, 2, 3, -1, -3]


def test_load_one_pixel_ppm(tmp_path):
    p = tmp_path / "one.ppm"
    p.write_bytes(b"P6\n1 1\n255\n" + bytes([128, 128, 128]))
    img = load_image(p)
    assert img.shape == (1, 1, 3) and img.dtype == np.uint8
    assert img[0, 0].tolist() == [128, 128, 128]


def test_netpbm_header_comments_and_maxval(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_bytes(b"P5 # a comment\n2 1\n# another\n15\n" + bytes([0, 15]))
    img = load_image(p)
    assert img[0, :, 0].tolist() == [0, 255]
    assert (img[..., 0] == img[..., 2]).all()


def test_sixteen_bit_pgm(tmp_path):
    p = tmp_path / "w.pgm"
    p.write_bytes(b"P5\n2 1\n65535\n" + bytes([0, 0, 0xFF, 0xFF]))
    assert load_image(p)[0, :, 0].tolist() == [0, 255]


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_image(tmp_path / "nope.png")


def test_unsupported_and_corrupt(tmp_path):
    bad = tmp_path / "x.png"
    bad.write_bytes(b"GIF89a......")
    with pytest.raises(UnsupportedFormatError):
        load_image(bad)
    trunc = tmp_path / "t.ppm"
    trunc.write_bytes(b"P6\n4 4\n255\n" + bytes(10))
    with pytest.raises(CorruptDataError):
        load_image(trunc)
    png = tmp_path / "t.png"
    save_image(np.zeros((8, 8, 3), np.uint8), png)
    png.write_bytes(png.read_bytes()[:30])
    with pytest.raises(CorruptDataError):
        load_image(png)


@pytest.mark.parametrize("suffix", [".png", ".ppm"])
def test_rgb_round_trip(tmp_path, rng, suffix):
    img = rng.integers(0, 256, (8, 8, 3), dtype=np.uint8)
    p = tmp_path / f"img{suffix}"
    save_image(img, p)
    assert np.array_equal(load_image(p), img)


@pytest.mark.parametrize("suffix", [".png", ".pgm"])
def test_gray_round_trip(tmp_path, rng, suffix):
    gray = rng.integers(0, 256, (5, 7), dtype=np.uint8)
    p = tmp_path / f"g{suffix}"
    save_image(gray, p)
    assert np.array_equal(load_image(p), gray_to_rgb(gray))


def test_binary_saves_as_0_255(tmp_path):
    mask = np.array([[True, False], [False, True]])
    p = tmp_path / "m.pgm"
    save_image(mask, p)
    assert p.read_bytes().endswith(bytes([255, 0, 0, 255]))


def test_unwritable_path(tmp_path):
    with pytest.raises(ImageIOError):
        save_image(np.zeros((2, 2, 3), np.uint8), tmp_path / "no" / "such" / "dir.png")


def test_pgm_rejects_rgb(tmp_path):
    with pytest.raises(UnsupportedFormatError):
        save_image(np.zeros((2, 2, 3), np.uint8), tmp_path / "x.pgm")


def test_resize_identity_and_constant(rng):
    img = rng.integers(0, 256, (32, 32, 3), dtype=np.uint8)
    assert np.array_equal(resize(img, 32, 32), img)
    const = np.full((5, 9, 3), (17, 200, 99), np.uint8)
    out = resize(const, 13, 3)
    assert out.shape == (3, 13, 3)
    assert (out == np.array([17, 200, 99], np.uint8)).all()


def test_resize_checkerboard_matches_pointwise_oracle():
    board = np.array([[0, 255], [255, 0]], np.uint8)
    img = np.repeat(board[:, :, None], 3, axis=2)
    out = resize(img, 4, 4)
    expect = np.array([[bilinear_pixel(board, 4, 4, x, y) for x in range(4)] for y in range(4)])
    assert np.array_equal(out[:, :, 0], expect)
    # frozen values: quarter-pixel centers blend 3:1 at the inner ring
    assert expect.tolist() == [
        [0, 64, 191, 255],
        [64, 96, 159, 191],
        [191, 159, 96, 64],
        [255, 191, 64, 0],
    ]


def test_resize_random_matches_pointwise_oracle(rng):
    gray = rng.integers(0, 256, (7, 11), dtype=np.uint8)
    for ow, oh in [(3, 5), (20, 9), (11, 7), (1, 1)]:
        out = resize(gray, ow, oh)
        expect = [[bilinear_pixel(gray, ow, oh, x, y) for x in range(ow)] for y in range(oh)]
        assert out.tolist() == expect


def test_resize_zero_dimension(rng):
    with pytest.raises(ZeroDimensionError):
        resize(np.zeros((4, 4, 3), np.uint8), 0, 4)


@settings(max_examples=60, deadline=None)
@given(
    arrays(np.uint8, st.tuples(st.integers(1, 9), st.integers(1, 9), st.just(3))),
    st.integers(1, 20),
    st.integers(1, 20),
)
def test_resize_preserves_value_range(img, ow, oh):
    out = resize(img, ow, oh)
    assert out.shape == (oh, ow, 3)
    assert out.min() >= img.min() and out.max() <= img.max()


def test_grayscale_fixed_values():
    px = np.array([[[128, 128, 128], [255, 0, 0], [0, 255, 0], [0, 0, 255]]], np.uint8)
    assert to_grayscale(px).tolist() == [[128, 76, 150, 29]]


def test_grayscale_matches_per_pixel_formula(rng):
    img = rng.integers(0, 256, (16, 16, 3), dtype=np.uint8)
    out = to_grayscale(img)
    for y in range(16):
        for x in range(16):
            assert out[y, x] == luma(*map(int, img[y, x]))


@settings(max_examples=50, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(1, 6), st.integers(1, 6), st.just(3))))
def test_grayscale_idempotent_through_rgb(img):
    g = to_grayscale(img)
    assert np.array_equal(to_grayscale(gray_to_rgb(g)), g)
