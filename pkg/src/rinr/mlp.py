"""Coordinate MLPs with sinusoidal activations: init, forward, exact gradients,
Adam, and the full-batch fitting loop.

A network maps normalized (x, y) pixel coordinates to RGB. Its weights are the
compressed representation of an image, so everything here is deterministic for
a fixed seed: same architecture + seed + config reproduces the same bits.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

DEFAULT_FREQUENCY_SCALE = 30.0


class FitDivergenceError(RuntimeError):
    """Raised when the training loss stops being finite."""


@dataclass(frozen=True)
class MlpArchitecture:
    """Shape of a coordinate MLP: `layer_count` affine layers of width `hidden_dim`.

    `layer_count` counts every affine layer including the input and output ones,
    so the smallest valid network (layer_count=2) is input -> hidden -> output.
    Hidden layers apply sin(frequency_scale * z); the last layer is linear.
    """

    layer_count: int
    hidden_dim: int
    input_dim: int = 2
    output_dim: int = 3
    frequency_scale: float = DEFAULT_FREQUENCY_SCALE

    def __post_init__(self):
        if self.layer_count < 2:
            raise ValueError(f"layer_count must be >= 2, got {self.layer_count}")
        if self.hidden_dim < 1:
            raise ValueError(f"hidden_dim must be >= 1, got {self.hidden_dim}")
        if self.input_dim != 2 or self.output_dim != 3:
            raise ValueError("input_dim is fixed to 2 (x, y) and output_dim to 3 (RGB)")
        if not (self.frequency_scale > 0 and math.isfinite(self.frequency_scale)):
            raise ValueError(f"frequency_scale must be positive, got {self.frequency_scale}")

    @property
    def parameter_count(self) -> int:
        d, h, o = self.input_dim, self.hidden_dim, self.output_dim
        return (d + 1) * h + (self.layer_count - 2) * (h + 1) * h + (h + 1) * o

    def layer_dims(self) -> list[tuple[int, int]]:
        """(fan_in, fan_out) of each affine layer, in order."""
        dims = [self.input_dim] + [self.hidden_dim] * (self.layer_count - 1) + [self.output_dim]
        return list(zip(dims[:-1], dims[1:]))

    def __str__(self) -> str:
        return f"{self.layer_count}x{self.hidden_dim}"


def parse_arch(text: str, frequency_scale: float = DEFAULT_FREQUENCY_SCALE) -> MlpArchitecture:
    """Parse an "LxH" architecture string, e.g. "10x30"."""
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise ValueError(f"architecture must look like 'LxH', got {text!r}")
    try:
        layers, hidden = int(parts[0]), int(parts[1])
    except ValueError:
        raise ValueError(f"architecture must look like 'LxH', got {text!r}") from None
    return MlpArchitecture(layers, hidden, frequency_scale=frequency_scale)


@dataclass
class ParameterSet:
    """Ordered (weight[out, in], bias[out]) pairs, float32."""

    layers: list[tuple[np.ndarray, np.ndarray]]

    @property
    def num_values(self) -> int:
        return sum(w.size + b.size for w, b in self.layers)

    def copy(self) -> "ParameterSet":
        return ParameterSet([(w.copy(), b.copy()) for w, b in self.layers])

    def all_finite(self) -> bool:
        return all(np.isfinite(w).all() and np.isfinite(b).all() for w, b in self.layers)


def check_shapes(arch: MlpArchitecture, params: ParameterSet) -> None:
    """Raise if `params` does not chain to `arch`'s layer dimensions."""
    dims = arch.layer_dims()
    if len(params.layers) != len(dims):
        raise ValueError(
            f"expected {len(dims)} layers for arch {arch}, got {len(params.layers)}"
        )
    for i, ((fan_in, fan_out), (w, b)) in enumerate(zip(dims, params.layers)):
        if w.shape != (fan_out, fan_in) or b.shape != (fan_out,):
            raise ValueError(
                f"layer {i}: expected weight {(fan_out, fan_in)} / bias {(fan_out,)}, "
                f"got {w.shape} / {b.shape}"
            )


@dataclass(frozen=True)
class CoordinateGrid:
    """Row-major (x, y) coordinates in [-1, 1] for a width x height pixel grid.

    Corner pixels map exactly to +/-1; a single-pixel axis maps to 0.
    """

    width: int
    height: int
    coords: np.ndarray  # (width*height, 2) float32

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("grid dimensions must be >= 1")
        if self.coords.shape != (self.width * self.height, 2):
            raise ValueError(
                f"coords shape {self.coords.shape} does not match "
                f"{self.width}x{self.height} grid"
            )

    @classmethod
    def for_size(cls, width: int, height: int) -> "CoordinateGrid":
        xs = _axis_coords(width)
        ys = _axis_coords(height)
        gx, gy = np.meshgrid(xs, ys)  # (H, W), row-major ravel
        coords = np.stack([gx.ravel(), gy.ravel()], axis=1)
        return cls(width, height, np.ascontiguousarray(coords, dtype=np.float32))


def _axis_coords(n: int) -> np.ndarray:
    if n == 1:
        return np.zeros(1, dtype=np.float32)
    return np.linspace(-1.0, 1.0, n, dtype=np.float32)


@dataclass(frozen=True)
class TrainConfig:
    """Adam hyperparameters and step budget. Loss is fixed to mean squared error."""

    learning_rate: float = 1e-3
    steps: int = 2000
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("beta1 and beta2 must lie in [0, 1)")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.steps < 0:
            raise ValueError("steps must be >= 0")


@dataclass
class FitReport:
    loss_trace: list[float]
    final_psnr_db: float
    steps_run: int
    wall_time_s: float


def init_parameters(arch: MlpArchitecture, seed: int) -> ParameterSet:
    """Sinusoidal-network initialization, deterministic for a fixed seed.

    First layer: U[-1/fan_in, 1/fan_in]. Later layers:
    U[-sqrt(6/fan_in)/w0, sqrt(6/fan_in)/w0]. Biases start at zero.
    """
    rng = np.random.default_rng(seed)
    layers = []
    for i, (fan_in, fan_out) in enumerate(arch.layer_dims()):
        if i == 0:
            bound = 1.0 / fan_in
        else:
            bound = math.sqrt(6.0 / fan_in) / arch.frequency_scale
        w = rng.uniform(-bound, bound, size=(fan_out, fan_in)).astype(np.float32)
        b = np.zeros(fan_out, dtype=np.float32)
        layers.append((w, b))
    return ParameterSet(layers)


def forward(arch: MlpArchitecture, params: ParameterSet, grid: CoordinateGrid) -> np.ndarray:
    """Evaluate the network on every grid coordinate.

    Returns an (height, width, 3) float32 tensor. The output is not clamped;
    clamping to [0, 1] happens at decode time.
    """
    check_shapes(arch, params)
    h = grid.coords
    last = len(params.layers) - 1
    for i, (w, b) in enumerate(params.layers):
        z = h @ w.T + b
        h = np.sin(np.float32(arch.frequency_scale) * z) if i < last else z
    return h.reshape(grid.height, grid.width, arch.output_dim)


def mse_loss(pred: np.ndarray, target: np.ndarray) -> float:
    """Mean squared error over all entries, accumulated in float64."""
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {target.shape}")
    diff = pred.astype(np.float64) - target.astype(np.float64)
    return float(np.mean(diff * diff))


def backward(
    arch: MlpArchitecture,
    params: ParameterSet,
    grid: CoordinateGrid,
    target: np.ndarray,
) -> ParameterSet:
    """Exact gradient of mse_loss(forward(params, grid), target) w.r.t. every parameter.

    Gradients are accumulated in float64 with a fixed pixel order, so repeated
    calls are bit-identical.
    """
    _, grads = loss_and_gradients(arch, params, grid, target)
    return grads


def loss_and_gradients(
    arch: MlpArchitecture,
    params: ParameterSet,
    grid: CoordinateGrid,
    target: np.ndarray,
) -> tuple[float, ParameterSet]:
    """One full-batch forward/backward pass; returns (loss, gradients)."""
    check_shapes(arch, params)
    expected = (grid.height, grid.width, arch.output_dim)
    if target.shape != expected:
        raise ValueError(f"target shape {target.shape} does not match grid {expected}")

    omega = float(arch.frequency_scale)
    weights = [w.astype(np.float64) for w, _ in params.layers]
    biases = [b.astype(np.float64) for _, b in params.layers]
    last = len(weights) - 1

    # Forward, keeping inputs and pre-activations of every layer.
    acts = [grid.coords.astype(np.float64)]
    zs = []
    h = acts[0]
    for i in range(len(weights)):
        z = h @ weights[i].T + biases[i]
        if not np.isfinite(z).all():
            raise FitDivergenceError(f"non-finite activation in layer {i}")
        zs.append(z)
        h = np.sin(omega * z) if i < last else z
        acts.append(h)

    flat_target = target.reshape(-1, arch.output_dim).astype(np.float64)
    diff = acts[-1] - flat_target
    n_vals = diff.size
    loss = float(np.sum(diff * diff) / n_vals)

    delta = (2.0 / n_vals) * diff  # dL/dz of the output layer
    grad_layers: list[tuple[np.ndarray, np.ndarray] | None] = [None] * len(weights)
    for i in reversed(range(len(weights))):
        dw = delta.T @ acts[i]
        db = delta.sum(axis=0)
        grad_layers[i] = (dw, db)
        if i > 0:
            da = delta @ weights[i]
            delta = da * (omega * np.cos(omega * zs[i - 1]))
    return loss, ParameterSet(grad_layers)  # type: ignore[arg-type]


@dataclass
class AdamState:
    """First/second moment estimates, float64, shaped like the parameters."""

    m: list[tuple[np.ndarray, np.ndarray]]
    v: list[tuple[np.ndarray, np.ndarray]]

    @classmethod
    def zeros_like(cls, params: ParameterSet) -> "AdamState":
        zeros = lambda: [
            (np.zeros_like(w, dtype=np.float64), np.zeros_like(b, dtype=np.float64))
            for w, b in params.layers
        ]
        return cls(m=zeros(), v=zeros())


def adam_step(
    params: ParameterSet,
    grads: ParameterSet,
    state: AdamState,
    config: TrainConfig,
    t: int,
) -> tuple[ParameterSet, AdamState]:
    """One Adam update with bias correction; t is the 1-based step index."""
    if t < 1:
        raise ValueError("adam_step requires t >= 1 (bias correction divides by 1 - beta^t)")
    b1, b2, lr, eps = config.beta1, config.beta2, config.learning_rate, config.epsilon
    c1 = 1.0 - b1**t
    c2 = 1.0 - b2**t
    new_layers = []
    new_m = []
    new_v = []
    for (w, b), (gw, gb), (mw, mb), (vw, vb) in zip(
        params.layers, grads.layers, state.m, state.v
    ):
        mw_n = b1 * mw + (1.0 - b1) * gw
        vw_n = b2 * vw + (1.0 - b2) * (np.asarray(gw, dtype=np.float64) ** 2)
        mb_n = b1 * mb + (1.0 - b1) * gb
        vb_n = b2 * vb + (1.0 - b2) * (np.asarray(gb, dtype=np.float64) ** 2)
        w_new = w.astype(np.float64) - lr * (mw_n / c1) / (np.sqrt(vw_n / c2) + eps)
        b_new = b.astype(np.float64) - lr * (mb_n / c1) / (np.sqrt(vb_n / c2) + eps)
        new_layers.append((w_new.astype(np.float32), b_new.astype(np.float32)))
        new_m.append((mw_n, mb_n))
        new_v.append((vw_n, vb_n))
    return ParameterSet(new_layers), AdamState(new_m, new_v)


def fit(
    arch: MlpArchitecture,
    grid: CoordinateGrid,
    target: np.ndarray,
    config: TrainConfig,
) -> tuple[ParameterSet, FitReport]:
    """Fit a network to `target` with full-batch Adam steps.

    The target must hold values in [0, 1] (raw RGB or a mapped residual).
    Aborts with the failing step index if the loss stops being finite.

    Returns the lowest-loss iterate, not necessarily the last one: constant-rate
    Adam can destabilize late in training (the loss trace records any such
    blow-up), and the best parameters seen are the useful artifact.
    """
    expected = (grid.height, grid.width, arch.output_dim)
    if target.shape != expected:
        raise ValueError(f"target shape {target.shape} does not match grid {expected}")
    if not np.isfinite(target).all():
        raise ValueError("target contains non-finite values")
    if target.min() < 0.0 or target.max() > 1.0:
        raise ValueError("target values must lie in [0, 1]")

    params = init_parameters(arch, config.seed)
    state = AdamState.zeros_like(params)
    trace: list[float] = []
    best_loss = math.inf
    best_params = params
    start = time.perf_counter()
    for step in range(1, config.steps + 1):
        try:
            loss, grads = loss_and_gradients(arch, params, grid, target)
        except FitDivergenceError as e:
            raise FitDivergenceError(f"aborted at step {step}: {e}") from None
        if not math.isfinite(loss):
            raise FitDivergenceError(f"non-finite loss at step {step}")
        trace.append(loss)
        if loss < best_loss:
            best_loss = loss
            best_params = params
        params, state = adam_step(params, grads, state, config, step)
    wall = time.perf_counter() - start

    # the final iterate never had its loss recorded; give it the same chance
    if config.steps > 0:
        last_loss = mse_loss(forward(arch, params, grid), target.astype(np.float32))
        if math.isfinite(last_loss) and last_loss < best_loss:
            best_params = params
    params = best_params

    pred = np.clip(forward(arch, params, grid), 0.0, 1.0)
    final_mse = mse_loss(pred, target.astype(np.float32))
    final_psnr = math.inf if final_mse == 0.0 else 10.0 * math.log10(1.0 / final_mse)
    report = FitReport(
        loss_trace=trace,
        final_psnr_db=final_psnr,
        steps_run=len(trace),
        wall_time_s=wall,
    )
    return params, report
