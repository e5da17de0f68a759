import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from sceneforge.errors import (
    DimensionOverflow,
    IoFailure,
    MalformedHeader,
    NonFiniteSample,
    UnsupportedBitDepth,
)
from sceneforge.imageio import (
    image_to_png_bytes,
    mask_from_png_bytes,
    mask_to_png_bytes,
    read_depth_png16,
    read_image,
    read_mask,
    read_pfm,
    read_pfm_bytes,
    write_depth_png16,
    write_image,
    write_mask,
    write_pfm,
    write_pfm_bytes,
)
from sceneforge.types import DepthMap, Mask, Raster


def pfm_bytes(width, height, samples, scale=-1.0, magic=b"Pf"):
    header = magic + b"\n" + f"{width} {height}\n{scale}\n".encode()
    dtype = "<f4" if scale < 0 else ">f4"
    return header + np.asarray(samples, dtype=np.float32).astype(dtype).tobytes()


class TestPfm:
    def test_small_map_round_trip(self, tmp_path):
        d = DepthMap(np.array([[0.1, 0.2], [0.3, 0.4]], dtype=np.float32))
        p = tmp_path / "d.pfm"
        write_pfm(d, p)
        again = read_pfm(p)
        assert np.array_equal(again.data, d.data)
        # Re-encoding is byte-identical, not merely value-identical.
        assert write_pfm_bytes(again) == p.read_bytes()

    def test_constant_map_body_is_identical_words(self):
        d = DepthMap(np.full((4, 4), 0.5, dtype=np.float32))
        body = write_pfm_bytes(d).split(b"\n", 3)[3]
        words = [body[i:i + 4] for i in range(0, len(body), 4)]
        assert len(words) == 16 and len(set(words)) == 1

    def test_bottom_up_row_order(self):
        # PFM stores rows bottom-up: the first stored row is the image's last.
        d = DepthMap(np.array([[0.0, 0.0], [1.0, 1.0]], dtype=np.float32))
        body = write_pfm_bytes(d).split(b"\n", 3)[3]
        first_row = np.frombuffer(body[:8], dtype="<f4")
        assert np.array_equal(first_row, [1.0, 1.0])

    def test_positive_scale_is_big_endian(self):
        payload = pfm_bytes(2, 1, [0.25, 0.75], scale=1.0)
        d = read_pfm_bytes(payload)
        assert np.allclose(d.data, [[0.25, 0.75]])

    def test_out_of_range_samples_clamped_and_flagged(self):
        d = read_pfm_bytes(pfm_bytes(2, 1, [1.5, 0.5]))
        assert d.clamped and d.data[0, 0] == 1.0 and d.data[0, 1] == 0.5

    def test_in_range_not_flagged(self):
        assert not read_pfm_bytes(pfm_bytes(2, 1, [0.5, 0.25])).clamped

    def test_three_channel_magic_rejected(self):
        with pytest.raises(MalformedHeader):
            read_pfm_bytes(pfm_bytes(1, 1, [0.5], magic=b"PF"))

    def test_garbage_magic_rejected(self):
        with pytest.raises(MalformedHeader):
            read_pfm_bytes(pfm_bytes(1, 1, [0.5], magic=b"Px"))

    def test_truncated_body_rejected(self):
        with pytest.raises(MalformedHeader):
            read_pfm_bytes(pfm_bytes(2, 2, [0.1, 0.2, 0.3, 0.4])[:-4])

    def test_zero_scale_rejected(self):
        payload = b"Pf\n1 1\n0.0\n" + np.float32(0.5).tobytes()
        with pytest.raises(MalformedHeader):
            read_pfm_bytes(payload)

    def test_non_numeric_dimensions_rejected(self):
        with pytest.raises(MalformedHeader):
            read_pfm_bytes(b"Pf\ntwo 2\n-1.0\n" + b"\0" * 16)

    def test_oversized_dimensions_rejected(self):
        with pytest.raises(DimensionOverflow):
            read_pfm_bytes(b"Pf\n100000 100000\n-1.0\n")

    def test_nan_samples_rejected(self):
        with pytest.raises(NonFiniteSample):
            read_pfm_bytes(pfm_bytes(1, 1, [np.nan]))

    def test_missing_file(self, tmp_path):
        with pytest.raises(IoFailure):
            read_pfm(tmp_path / "absent.pfm")

    @settings(max_examples=100, deadline=None)
    @given(hnp.arrays(
        dtype=np.float32,
        shape=hnp.array_shapes(min_dims=2, max_dims=2, min_side=1, max_side=24),
        elements=st.floats(0, 1, width=32, allow_nan=False),
    ))
    def test_round_trip_property(self, arr):
        d = DepthMap(arr)
        again = read_pfm_bytes(write_pfm_bytes(d))
        assert np.array_equal(again.data, d.data)


class TestPng:
    def test_rgb_lossless_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        r = Raster(rng.integers(0, 256, size=(16, 13, 3), dtype=np.uint8))
        p = tmp_path / "x.png"
        write_image(r, p)
        assert np.array_equal(read_image(p).data, r.data)

    def test_rgba_and_gray_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        for shape in [(8, 9, 4), (8, 9)]:
            r = Raster(rng.integers(0, 256, size=shape, dtype=np.uint8))
            p = tmp_path / "y.png"
            write_image(r, p)
            assert np.array_equal(read_image(p).data, r.data)

    def test_bytes_round_trip(self):
        r = Raster(np.arange(48, dtype=np.uint8).reshape(4, 4, 3))
        assert np.array_equal(read_image(image_to_png_bytes(r)).data, r.data)

    def test_float_raster_rejected_for_png(self):
        with pytest.raises(UnsupportedBitDepth):
            image_to_png_bytes(Raster(np.zeros((4, 4), dtype=np.float32)))

    def test_16bit_png_rejected_by_read_image(self, tmp_path):
        p = tmp_path / "d16.png"
        write_depth_png16(DepthMap(np.full((4, 4), 0.5, dtype=np.float32)), p)
        with pytest.raises(UnsupportedBitDepth):
            read_image(p)


class TestDepthPng16:
    def test_half_depth_quantizes_to_32768(self, tmp_path):
        p = tmp_path / "d.png"
        write_depth_png16(DepthMap(np.array([[0.5]], dtype=np.float32)), p)
        d = read_depth_png16(p)
        assert d.data[0, 0] == pytest.approx(32768 / 65535)

    def test_quantization_error_bound(self, tmp_path):
        rng = np.random.default_rng(3)
        arr = rng.random((32, 32)).astype(np.float32)
        p = tmp_path / "q.png"
        write_depth_png16(DepthMap(arr), p)
        err = np.abs(read_depth_png16(p).data.astype(np.float64) - arr)
        assert err.max() <= 1.0 / 65535 + 1e-12

    def test_read_rejects_8bit(self, tmp_path):
        p = tmp_path / "x.png"
        write_image(Raster(np.zeros((4, 4), dtype=np.uint8)), p)
        with pytest.raises(UnsupportedBitDepth):
            read_depth_png16(p)


class TestMaskIo:
    def test_binary_written_as_0_255(self, tmp_path):
        m = Mask(np.array([[0, 1], [1, 0]], dtype=np.uint8))
        p = tmp_path / "m.png"
        write_mask(m, p)
        raw = read_image(p)
        assert set(np.unique(raw.data)) == {0, 255}
        again = read_mask(p)
        assert again.binary and np.array_equal(again.data, m.data)

    def test_soft_mask_round_trips_as_soft(self, tmp_path):
        m = Mask(np.array([[0.0, 0.5], [0.25, 1.0]], dtype=np.float32))
        p = tmp_path / "s.png"
        write_mask(m, p)
        again = read_mask(p)
        assert not again.binary
        assert np.abs(again.data - m.data).max() <= 0.5 / 255 + 1e-6

    def test_mask_byte_helpers(self):
        m = Mask(np.array([[1, 0]], dtype=np.uint8))
        again = mask_from_png_bytes(mask_to_png_bytes(m), kind="augmented")
        assert np.array_equal(again.data, m.data) and again.kind == "augmented"
