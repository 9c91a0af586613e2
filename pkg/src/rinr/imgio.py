"""Image file I/O: binary PPM (P6, 8-bit) without dependencies, PNG via Pillow.

Images cross this boundary as float32 arrays of shape (height, width, 3) with
values in [0, 1]; files store 8-bit channels.
"""

from __future__ import annotations

import os

import numpy as np


def to_uint8(image: np.ndarray) -> np.ndarray:
    """Quantize [0, 1] floats to bytes; 0.5 ulps round up, matching the
    codec's half-away-from-zero convention."""
    scaled = np.clip(image, 0.0, 1.0).astype(np.float64) * 255.0
    return np.floor(scaled + 0.5).astype(np.uint8)


def from_uint8(raw: np.ndarray) -> np.ndarray:
    return (raw.astype(np.float32) / np.float32(255.0)).astype(np.float32)


class ImageFormatError(ValueError):
    """Unreadable or unsupported image file."""


def _read_ppm(data: bytes, path: str) -> np.ndarray:
    # header: "P6", width, height, maxval as whitespace-separated tokens,
    # with '#' comments running to end of line; pixel data follows the single
    # whitespace byte after maxval
    if not data.startswith(b"P6"):
        raise ImageFormatError(f"{path}: not a binary PPM (P6) file")
    pos = 2
    tokens: list[int] = []
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ImageFormatError(f"{path}: truncated PPM header")
        try:
            tokens.append(int(data[start:pos]))
        except ValueError:
            raise ImageFormatError(f"{path}: bad PPM header token {data[start:pos]!r}") from None
    width, height, maxval = tokens
    if width < 1 or height < 1:
        raise ImageFormatError(f"{path}: bad PPM dimensions {width}x{height}")
    if maxval != 255:
        raise ImageFormatError(f"{path}: only maxval 255 supported, got {maxval}")
    pos += 1  # the single whitespace byte after maxval
    need = width * height * 3
    pixels = data[pos : pos + need]
    if len(pixels) != need:
        raise ImageFormatError(f"{path}: expected {need} pixel bytes, got {len(pixels)}")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width, 3).copy()


def _write_ppm(path: str, raw: np.ndarray) -> None:
    height, width = raw.shape[:2]
    with open(path, "wb") as f:
        f.write(b"P6\n%d %d\n255\n" % (width, height))
        f.write(raw.tobytes())


def load_image(path: str) -> np.ndarray:
    """Read a PPM or PNG file into a float32 (H, W, 3) array in [0, 1]."""
    ext = os.path.splitext(path)[1].lower()
    if ext == ".ppm":
        with open(path, "rb") as f:
            return from_uint8(_read_ppm(f.read(), path))
    if ext == ".png":
        from PIL import Image

        with Image.open(path) as im:
            raw = np.asarray(im.convert("RGB"), dtype=np.uint8)
        return from_uint8(raw)
    raise ImageFormatError(f"{path}: unsupported image extension {ext!r} (use .ppm or .png)")


def save_image(path: str, image: np.ndarray) -> None:
    """Write a float32 [0, 1] image as 8-bit PPM or PNG, chosen by extension."""
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) image, got shape {image.shape}")
    raw = to_uint8(image)
    ext = os.path.splitext(path)[1].lower()
    if ext == ".ppm":
        _write_ppm(path, raw)
        return
    if ext == ".png":
        from PIL import Image

        Image.fromarray(raw, mode="RGB").save(path, format="PNG")
        return
    raise ImageFormatError(f"{path}: unsupported image extension {ext!r} (use .ppm or .png)")
