"""PPM and PNG round trips plus byte-mapping conventions."""

import numpy as np
import pytest

from rinr.imgio import (
    ImageFormatError,
    from_uint8,
    load_image,
    save_image,
    to_uint8,
)


def random_image(rng, h, w):
    return rng.uniform(0, 1, (h, w, 3)).astype(np.float32)


class TestByteMapping:
    def test_half_rounds_up(self):
        # 1/510 scales to exactly 0.5, the smallest value that becomes byte 1
        img = np.array([[[0.0, 1.0 / 510.0, 1.0]]], dtype=np.float32)
        assert to_uint8(img).ravel().tolist() == [0, 1, 255]

    def test_out_of_range_is_clipped(self):
        img = np.array([[[-0.5, 0.5, 1.5]]], dtype=np.float32)
        assert to_uint8(img).ravel().tolist() == [0, 128, 255]

    def test_uint8_round_trip_is_exact(self):
        raw = np.arange(256, dtype=np.uint8).repeat(3).reshape(16, 16, 3)
        assert np.array_equal(to_uint8(from_uint8(raw)), raw)


class TestPpm:
    def test_round_trip(self, tmp_path):
        img = random_image(np.random.default_rng(0), 7, 5)
        path = str(tmp_path / "x.ppm")
        save_image(path, img)
        back = load_image(path)
        assert back.shape == (7, 5, 3)
        assert np.array_equal(to_uint8(back), to_uint8(img))

    def test_header_comments_are_skipped(self, tmp_path):
        payload = bytes(2 * 2 * 3)
        data = b"P6\n# made by hand\n2 # width\n 2\n# almost there\n255\n" + payload
        path = tmp_path / "c.ppm"
        path.write_bytes(data)
        img = load_image(str(path))
        assert img.shape == (2, 2, 3)
        assert np.all(img == 0.0)

    def test_rejects_wrong_magic(self, tmp_path):
        path = tmp_path / "bad.ppm"
        path.write_bytes(b"P5\n2 2\n255\n" + bytes(12))
        with pytest.raises(ImageFormatError, match="P6"):
            load_image(str(path))

    def test_rejects_unsupported_maxval(self, tmp_path):
        path = tmp_path / "deep.ppm"
        path.write_bytes(b"P6\n1 1\n65535\n" + bytes(6))
        with pytest.raises(ImageFormatError, match="maxval"):
            load_image(str(path))

    def test_rejects_truncated_pixels(self, tmp_path):
        path = tmp_path / "cut.ppm"
        path.write_bytes(b"P6\n2 2\n255\n" + bytes(11))
        with pytest.raises(ImageFormatError, match="pixel bytes"):
            load_image(str(path))

    def test_rejects_garbage_header_token(self, tmp_path):
        path = tmp_path / "tok.ppm"
        path.write_bytes(b"P6\nwide 2\n255\n" + bytes(12))
        with pytest.raises(ImageFormatError):
            load_image(str(path))

    def test_rejects_zero_dimensions(self, tmp_path):
        path = tmp_path / "zero.ppm"
        path.write_bytes(b"P6\n0 2\n255\n")
        with pytest.raises(ImageFormatError, match="dimensions"):
            load_image(str(path))


class TestPng:
    def test_round_trip(self, tmp_path):
        img = random_image(np.random.default_rng(1), 6, 9)
        path = str(tmp_path / "x.png")
        save_image(path, img)
        back = load_image(path)
        assert back.shape == (6, 9, 3)
        assert np.array_equal(to_uint8(back), to_uint8(img))

    def test_ppm_and_png_agree(self, tmp_path):
        img = random_image(np.random.default_rng(2), 4, 4)
        p1 = str(tmp_path / "a.ppm")
        p2 = str(tmp_path / "a.png")
        save_image(p1, img)
        save_image(p2, img)
        assert np.array_equal(load_image(p1), load_image(p2))


class TestDispatch:
    def test_unknown_extension_rejected(self, tmp_path):
        with pytest.raises(ImageFormatError):
            load_image(str(tmp_path / "x.bmp"))
        with pytest.raises(ImageFormatError):
            save_image(str(tmp_path / "x.gif"), np.zeros((2, 2, 3), dtype=np.float32))

    def test_save_rejects_bad_shape(self, tmp_path):
        with pytest.raises(ValueError):
            save_image(str(tmp_path / "x.ppm"), np.zeros((2, 2), dtype=np.float32))
