import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sma.errors import ParseError
from sma.pnm import decode_pnm, encode_pnm, read_pnm, write_pnm


def test_decode_p5_example():
    img = decode_pnm(b"P5 2 2 255\n" + bytes([0, 255, 128, 64]))
    assert img.shape == (2, 2, 1)
    np.testing.assert_array_equal(img.ravel(), [0.0, 1.0, 128 / 255, 64 / 255])


def test_decode_p6_with_comment():
    data = b"P6\n# made by hand\n1 1\n255\n" + bytes([10, 20, 30])
    np.testing.assert_array_equal(decode_pnm(data).ravel(), np.array([10, 20, 30]) / 255)


@pytest.mark.parametrize("data, fragment", [
    (b"P3 1 1 255\n\x00", "magic"),
    (b"P5 1 1", "truncated"),
    (b"P5 2 2 255\n\x00\x01", "payload truncated"),
    (b"P5 1 1 65535\n\x00\x00", "maxval"),
    (b"P5 x 1 255\n\x00", "non-integer"),
])
def test_decode_errors_carry_name_and_offset(data, fragment):
    with pytest.raises(ParseError, match=fragment) as info:
        decode_pnm(data, "bad.pgm")
    assert "bad.pgm" in str(info.value) and "byte" in str(info.value)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from([1, 3]).flatmap(
    lambda c: arrays(np.uint8, st.tuples(st.integers(1, 6), st.integers(1, 6), st.just(c)))
))
def test_round_trip(raster):
    img = raster / 255.0
    np.testing.assert_array_equal(decode_pnm(encode_pnm(img)), img)


def test_file_round_trip(tmp_path):
    img = np.linspace(0, 1, 12).reshape(2, 2, 3)
    write_pnm(tmp_path / "x.ppm", img)
    np.testing.assert_allclose(read_pnm(tmp_path / "x.ppm"), img, atol=0.5 / 255)
