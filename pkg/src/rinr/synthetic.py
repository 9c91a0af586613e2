"""Synthetic scenes: a smooth background with a textured patch where an
object would sit.

The background is a per-channel low-order polynomial plus one low-frequency
sinusoid, rescaled (never clipped: clipping creates plateaus and kinks that
small coordinate networks fit badly) into [0.25, 0.75]. The object adds a
band-limited texture of amplitude at most 0.2 on top, so the composite stays
inside [0.05, 0.95] without any clipping. A background network therefore has
a sharply easier job than an object network fitting background + texture,
which is the asymmetry the residual codec exploits.
"""

from __future__ import annotations

import numpy as np

from rinr.codec import BoundingBox


def make_scene(
    scene_id: int,
    seed: int,
    size: int = 32,
    box: int = 16,
) -> tuple[np.ndarray, BoundingBox]:
    """Deterministic (scene_id, seed) -> (image, bbox). The box lands near
    the center, jittered by up to 3 pixels."""
    if box > size:
        raise ValueError(f"box {box} larger than image {size}")
    rng = np.random.default_rng(scene_id * 1000 + seed)
    yy, xx = np.mgrid[0:size, 0:size] / (size - 1.0)
    img = np.zeros((size, size, 3))
    for c in range(3):
        a, b, cc, d = rng.uniform(-0.5, 0.5, 4)
        fx, fy = rng.uniform(0.5, 1.5, 2)
        ph = rng.uniform(0, 2 * np.pi)
        field = a * xx + b * yy + cc * xx * yy + d * np.sin(np.pi * (fx * xx + fy * yy) + ph)
        lo, hi = field.min(), field.max()
        span = hi - lo if hi > lo else 1.0
        img[..., c] = 0.25 + 0.5 * (field - lo) / span

    jitter = 3 if size - box >= 6 else (size - box) // 2
    x0 = (size - box) // 2 + (int(rng.integers(-jitter, jitter + 1)) if jitter else 0)
    y0 = (size - box) // 2 + (int(rng.integers(-jitter, jitter + 1)) if jitter else 0)
    oy, ox = np.mgrid[0:box, 0:box] / max(box - 1.0, 1.0)
    tex = np.zeros((box, box, 3))
    for c in range(3):
        f1, f2 = rng.uniform(1.5, 3.0, 2)
        ph1, ph2 = rng.uniform(0, 2 * np.pi, 2)
        amp = rng.uniform(0.12, 0.2)
        tex[..., c] = amp * (np.sin(2 * np.pi * f1 * ox + ph1) * np.cos(2 * np.pi * f2 * oy + ph2))
    img[y0 : y0 + box, x0 : x0 + box] += tex
    return img.astype(np.float32), BoundingBox(x0, y0, box, box)


def gradient_ramp(size: int = 32) -> np.ndarray:
    """Smooth diagonal ramp; an easy target any healthy fit should nail."""
    yy, xx = np.mgrid[0:size, 0:size] / (size - 1.0)
    return np.stack([xx, yy, 0.5 * (xx + yy)], axis=-1).astype(np.float32)


def constant_image(size: int, value: float) -> np.ndarray:
    if not 0.0 <= value <= 1.0:
        raise ValueError("value must lie in [0, 1]")
    return np.full((size, size, 3), value, dtype=np.float32)
