"""Two-network image codec: a background MLP over the whole frame plus a tiny
object MLP over the bounding box.

The object network can fit the raw patch directly ("direct" mode) or the
residual between the raw patch and the background reconstruction ("residual"
mode). Residuals r = raw - recon lie in [-1, 1] and are stored affinely mapped
to [0, 1] via (r + 1) / 2, which keeps the fitting target in the same numeric
range as raw RGB.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from rinr.mlp import (
    CoordinateGrid,
    FitReport,
    MlpArchitecture,
    ParameterSet,
    TrainConfig,
    check_shapes,
    fit,
    forward,
)


class ObjectMode(enum.IntEnum):
    RESIDUAL = 0
    DIRECT = 1


@dataclass(frozen=True)
class BoundingBox:
    """Pixel-aligned box with top-left corner (x, y), width w, height h."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.x < 0 or self.y < 0:
            raise ValueError(f"bounding box origin must be >= 0, got ({self.x}, {self.y})")
        if self.w < 1 or self.h < 1:
            raise ValueError(f"bounding box sides must be >= 1, got {self.w}x{self.h}")

    @property
    def area(self) -> int:
        return self.w * self.h

    def validate_for(self, width: int, height: int) -> None:
        if self.x + self.w > width or self.y + self.h > height:
            raise ValueError(
                f"bounding box {self} does not fit a {width}x{height} image"
            )


def check_image(image: np.ndarray) -> None:
    """Raise unless `image` is a finite (H, W, 3) array with channels in [0, 1]."""
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got shape {image.shape}")
    if image.shape[0] < 1 or image.shape[1] < 1:
        raise ValueError("image dimensions must be >= 1")
    if not np.isfinite(image).all():
        raise ValueError("image contains non-finite values")
    if image.min() < 0.0 or image.max() > 1.0:
        raise ValueError("image channels must lie in [0, 1]")


def crop(image: np.ndarray, bbox: BoundingBox) -> np.ndarray:
    bbox.validate_for(image.shape[1], image.shape[0])
    return image[bbox.y : bbox.y + bbox.h, bbox.x : bbox.x + bbox.w].copy()


@dataclass(frozen=True)
class ResidualPatch:
    """Residual r = raw - recon stored as (r + 1) / 2, so values lie in [0, 1]."""

    w: int
    h: int
    stored: np.ndarray  # (h, w, 3) float32


def compute_residual(raw_patch: np.ndarray, recon_patch: np.ndarray) -> ResidualPatch:
    if raw_patch.shape != recon_patch.shape:
        raise ValueError(
            f"patch shapes differ: {raw_patch.shape} vs {recon_patch.shape}"
        )
    stored = (raw_patch.astype(np.float32) - recon_patch.astype(np.float32) + 1.0) / 2.0
    return ResidualPatch(w=raw_patch.shape[1], h=raw_patch.shape[0], stored=stored)


def apply_residual(recon_patch: np.ndarray, residual_pred: np.ndarray) -> np.ndarray:
    """Invert the residual mapping and add onto the reconstruction, clamped to [0, 1].

    `residual_pred` is the object network's raw forward output in stored space.
    """
    if recon_patch.shape != residual_pred.shape:
        raise ValueError(
            f"patch shapes differ: {recon_patch.shape} vs {residual_pred.shape}"
        )
    out = recon_patch.astype(np.float32) + (2.0 * residual_pred.astype(np.float32) - 1.0)
    return np.clip(out, 0.0, 1.0)


@dataclass(frozen=True)
class ObjectSizeTable:
    """Area thresholds mapping bounding boxes to object-network sizes.

    `tiers` is an ordered sequence of (max_area_px, arch); max_area_px of the
    final tier is None, the catch-all.
    """

    tiers: tuple[tuple[int | None, MlpArchitecture], ...]

    def __post_init__(self):
        if not self.tiers:
            raise ValueError("size table needs at least one tier")
        if self.tiers[-1][0] is not None:
            raise ValueError("last tier must be the catch-all (max_area None)")
        bounded = [t[0] for t in self.tiers[:-1]]
        if any(t is None for t in bounded):
            raise ValueError("only the last tier may be unbounded")
        if any(a >= b for a, b in zip(bounded, bounded[1:])):  # type: ignore[operator]
            raise ValueError("tier thresholds must be strictly increasing")


def select_object_arch(bbox: BoundingBox, table: ObjectSizeTable) -> MlpArchitecture:
    """First tier whose area bound covers the box; deterministic."""
    for max_area, arch in table.tiers:
        if max_area is None or bbox.area <= max_area:
            return arch
    raise AssertionError("unreachable: table ends with a catch-all tier")


DEFAULT_OBJECT_TABLE = ObjectSizeTable(
    (
        (1024, MlpArchitecture(3, 10)),
        (4096, MlpArchitecture(3, 15)),
        (16384, MlpArchitecture(5, 17)),
        (None, MlpArchitecture(5, 24)),
    )
)

_LARGE_OBJECT_TABLE = ObjectSizeTable(
    (
        (4096, MlpArchitecture(3, 15)),
        (16384, MlpArchitecture(5, 17)),
        (65536, MlpArchitecture(5, 24)),
        (None, MlpArchitecture(6, 28)),
    )
)


@dataclass(frozen=True)
class ArchPreset:
    """Per-dataset architecture family: background net, object tiers, and the
    single-network baseline the combined codec must undercut in size."""

    background: MlpArchitecture
    object_tiers: ObjectSizeTable
    single_baseline: MlpArchitecture


ARCH_PRESETS = {
    "dac-sdc": ArchPreset(MlpArchitecture(10, 30), DEFAULT_OBJECT_TABLE, MlpArchitecture(16, 48)),
    "uav123": ArchPreset(MlpArchitecture(10, 36), _LARGE_OBJECT_TABLE, MlpArchitecture(16, 55)),
    "otb100": ArchPreset(MlpArchitecture(10, 28), _LARGE_OBJECT_TABLE, MlpArchitecture(14, 45)),
}


@dataclass
class EncodedImage:
    """The compressed artifact: both parameter sets plus enough metadata to decode."""

    width: int
    height: int
    bbox: BoundingBox
    bg_arch: MlpArchitecture
    bg_params: ParameterSet
    obj_arch: MlpArchitecture
    obj_params: ParameterSet
    obj_mode: ObjectMode

    def __post_init__(self):
        self.bbox.validate_for(self.width, self.height)
        check_shapes(self.bg_arch, self.bg_params)
        check_shapes(self.obj_arch, self.obj_params)


def encode(
    image: np.ndarray,
    bbox: BoundingBox,
    bg_arch: MlpArchitecture,
    table: ObjectSizeTable,
    cfg_bg: TrainConfig,
    cfg_obj: TrainConfig,
    mode: ObjectMode = ObjectMode.RESIDUAL,
    bg_params: ParameterSet | None = None,
) -> tuple[EncodedImage, tuple[FitReport | None, FitReport]]:
    """Fit the background net on the full image, then the object net on the box.

    In residual mode the object target is the stored residual against the
    clamped background reconstruction; in direct mode it is the raw patch. The
    object net sees the box's own coordinate grid, normalized to [-1, 1] over
    the patch.

    Passing pre-fit `bg_params` skips the background fit (its report slot is
    then None); useful when comparing object modes over one background.
    """
    check_image(image)
    height, width = image.shape[:2]
    bbox.validate_for(width, height)

    full_grid = CoordinateGrid.for_size(width, height)
    if bg_params is None:
        bg_params, bg_report = fit(bg_arch, full_grid, image, cfg_bg)
    else:
        check_shapes(bg_arch, bg_params)
        bg_report = None
    bg_image = np.clip(forward(bg_arch, bg_params, full_grid), 0.0, 1.0)

    raw_patch = crop(image, bbox)
    recon_patch = crop(bg_image, bbox)
    if mode == ObjectMode.RESIDUAL:
        obj_target = compute_residual(raw_patch, recon_patch).stored
    else:
        obj_target = raw_patch

    obj_arch = select_object_arch(bbox, table)
    patch_grid = CoordinateGrid.for_size(bbox.w, bbox.h)
    obj_params, obj_report = fit(obj_arch, patch_grid, obj_target, cfg_obj)

    encoded = EncodedImage(
        width=width,
        height=height,
        bbox=bbox,
        bg_arch=bg_arch,
        bg_params=bg_params,
        obj_arch=obj_arch,
        obj_params=obj_params,
        obj_mode=mode,
    )
    return encoded, (bg_report, obj_report)


def decode_background(encoded: EncodedImage) -> np.ndarray:
    """Full-image reconstruction from the background net alone, clamped to [0, 1]."""
    grid = CoordinateGrid.for_size(encoded.width, encoded.height)
    return np.clip(forward(encoded.bg_arch, encoded.bg_params, grid), 0.0, 1.0)


def decode(encoded: EncodedImage) -> np.ndarray:
    """Reconstruct the image: background first, then the object patch on top.

    Pixels outside the bounding box depend only on the background parameters.
    """
    out = decode_background(encoded)
    bbox = encoded.bbox
    patch_grid = CoordinateGrid.for_size(bbox.w, bbox.h)
    obj_out = forward(encoded.obj_arch, encoded.obj_params, patch_grid)
    if encoded.obj_mode == ObjectMode.RESIDUAL:
        patch = apply_residual(crop(out, bbox), obj_out)
    else:
        patch = np.clip(obj_out, 0.0, 1.0)
    out[bbox.y : bbox.y + bbox.h, bbox.x : bbox.x + bbox.w] = patch
    return out


def mse(a: np.ndarray, b: np.ndarray, region: BoundingBox | None = None) -> float:
    """Mean squared error in float64, optionally restricted to a box."""
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    if region is not None:
        a = crop(a, region)
        b = crop(b, region)
    diff = a.astype(np.float64) - b.astype(np.float64)
    return float(np.mean(diff * diff))


def psnr(a: np.ndarray, b: np.ndarray, region: BoundingBox | None = None) -> float:
    """Peak signal-to-noise ratio in dB with peak 1.0; math.inf for identical inputs."""
    err = mse(a, b, region)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / err)


def psnr_outside(a: np.ndarray, b: np.ndarray, region: BoundingBox) -> float:
    """PSNR over the complement of `region`; math.inf if the complement is empty."""
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    region.validate_for(a.shape[1], a.shape[0])
    mask = np.ones(a.shape[:2], dtype=bool)
    mask[region.y : region.y + region.h, region.x : region.x + region.w] = False
    if not mask.any():
        return math.inf
    diff = a.astype(np.float64)[mask] - b.astype(np.float64)[mask]
    err = float(np.mean(diff * diff))
    return math.inf if err == 0.0 else 10.0 * math.log10(1.0 / err)


@dataclass(frozen=True)
class Histogram:
    """Equal-width bin counts over [0, 1]; value 1.0 lands in the last bin."""

    bin_count: int
    counts: np.ndarray
    total: int


def histogram(values: np.ndarray, bin_count: int) -> Histogram:
    values = np.asarray(values, dtype=np.float64).ravel()
    if bin_count < 1:
        raise ValueError("bin_count must be >= 1")
    if values.size == 0:
        raise ValueError("cannot histogram an empty value set")
    if not np.isfinite(values).all() or values.min() < 0.0 or values.max() > 1.0:
        raise ValueError("values must be finite and lie in [0, 1]")
    counts, _ = np.histogram(values, bins=bin_count, range=(0.0, 1.0))
    return Histogram(bin_count=bin_count, counts=counts, total=int(values.size))


def entropy(values: np.ndarray, bin_count: int) -> float:
    """Shannon entropy in bits of the binned value distribution."""
    hist = histogram(values, bin_count)
    p = hist.counts[hist.counts > 0] / hist.total
    return float(-(p * np.log2(p)).sum())


def compression_ratio(encoded_bytes: int, reference_bytes: int) -> float:
    """Compressed size over reference size (smaller is better)."""
    if reference_bytes <= 0:
        raise ValueError("reference_bytes must be positive")
    if encoded_bytes < 0:
        raise ValueError("encoded_bytes must be >= 0")
    return encoded_bytes / reference_bytes
