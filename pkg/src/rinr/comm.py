"""Communication cost model for a fleet of edge devices sharing images.

Serverless baseline: every device sends its payload of m_i bytes directly to
each of its n_i receivers, so the fleet moves D_s = sum(n_i * m_i) bytes.

Fog alternative: a device may instead upload its payload once to a fog node
(m_i bytes), which compresses it by the factor alpha and forwards the
compressed copy to each receiver (n_i * ceil(alpha * m_i) bytes). Routing a
device through the fog pays m_i once to save n_i * (m_i - ceil(alpha * m_i)),
so it is worth it exactly when the receiver count is large enough relative to
the compression factor. The per-device choice is independent of every other
device's choice, which makes the globally optimal routing a per-device rule.

alpha may be given as a string or Decimal ("0.083" means 83/1000 exactly), a
Fraction, or a float (taken at its exact binary value). All byte totals are
exact integers; per-message compressed sizes round up to whole bytes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction

DEFAULT_BANDWIDTH_BYTES_PER_S = 2_000_000.0


class Route(enum.Enum):
    FOG = "fog"
    DIRECT = "direct"


def _as_alpha(value) -> Fraction:
    """Exact compression factor in (0, 1]."""
    if isinstance(value, Fraction):
        alpha = value
    elif isinstance(value, (str, Decimal, int)):
        alpha = Fraction(value)
    elif isinstance(value, float):
        alpha = Fraction(value)
    else:
        raise TypeError(f"unsupported alpha type: {type(value).__name__}")
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must be in (0, 1], got {value!r}")
    return alpha


@dataclass(frozen=True)
class DeviceProfile:
    """One edge device: payload size in bytes and how many peers want it."""

    id: str
    payload_bytes: int
    receiver_count: int

    def __post_init__(self):
        if not self.id:
            raise ValueError("device id must be non-empty")
        if self.payload_bytes < 0:
            raise ValueError(f"device {self.id!r}: payload_bytes must be >= 0")
        if self.receiver_count < 0:
            raise ValueError(f"device {self.id!r}: receiver_count must be >= 0")


@dataclass(frozen=True)
class NetworkPlan:
    """A routing decision per device plus the shared channel parameters."""

    alpha: Fraction
    routes: dict[str, Route]
    bandwidth_bytes_per_s: float = DEFAULT_BANDWIDTH_BYTES_PER_S

    def __post_init__(self):
        object.__setattr__(self, "alpha", _as_alpha(self.alpha))
        if self.bandwidth_bytes_per_s <= 0:
            raise ValueError("bandwidth must be > 0")

    @property
    def fog_count(self) -> int:
        return sum(1 for r in self.routes.values() if r is Route.FOG)


@dataclass(frozen=True)
class DeviceReport:
    """Route taken and the exact bytes a fog route saves (negative = loses)."""

    id: str
    route: Route
    marginal_saving: int


@dataclass(frozen=True)
class CommReport:
    d_s: int
    d_f: int
    m1: int
    m2: int
    m3: int
    savings: int
    ratio: float
    per_device: tuple[DeviceReport, ...]

    def __post_init__(self):
        if self.d_f != self.m1 + self.m2 + self.m3:
            raise ValueError("fog total must equal m1 + m2 + m3")
        if self.savings != self.d_s - self.d_f:
            raise ValueError("savings must equal d_s - d_f")


def compressed_bytes(payload_bytes: int, alpha) -> int:
    """Size after compression by `alpha`, rounded up to whole bytes."""
    if payload_bytes < 0:
        raise ValueError("payload_bytes must be >= 0")
    return math.ceil(_as_alpha(alpha) * payload_bytes)


def _fog_marginal(device: DeviceProfile, alpha: Fraction) -> int:
    """Exact bytes saved by routing this device through the fog node."""
    c = math.ceil(alpha * device.payload_bytes)
    return device.receiver_count * (device.payload_bytes - c) - device.payload_bytes


def serverless_total(devices: list[DeviceProfile]) -> int:
    """Bytes moved when every device unicasts its payload to each receiver."""
    return sum(d.receiver_count * d.payload_bytes for d in devices)


def fog_total(devices: list[DeviceProfile], plan: NetworkPlan) -> CommReport:
    """Bytes moved under `plan`, broken into the three legs.

    m1: fog node to receivers (compressed copies), m2: devices to fog node
    (raw uploads), m3: direct unicasts by devices that skip the fog.
    """
    missing = [d.id for d in devices if d.id not in plan.routes]
    if missing:
        raise ValueError(f"plan does not route devices: {missing}")
    alpha = plan.alpha
    m1 = m2 = m3 = 0
    rows = []
    for d in devices:
        route = plan.routes[d.id]
        if route is Route.FOG:
            m1 += d.receiver_count * math.ceil(alpha * d.payload_bytes)
            m2 += d.payload_bytes
        else:
            m3 += d.receiver_count * d.payload_bytes
        rows.append(DeviceReport(d.id, route, _fog_marginal(d, alpha)))
    d_s = serverless_total(devices)
    d_f = m1 + m2 + m3
    if d_f > 0:
        ratio = d_s / d_f
    else:
        ratio = 1.0 if d_s == 0 else math.inf
    return CommReport(
        d_s=d_s,
        d_f=d_f,
        m1=m1,
        m2=m2,
        m3=m3,
        savings=d_s - d_f,
        ratio=ratio,
        per_device=tuple(rows),
    )


def route_decision(receiver_count: int, alpha) -> Route:
    """Fog exactly when (1 - alpha) * n > 1; ties and alpha = 1 go Direct.

    This is the idealized rule in real arithmetic, evaluated exactly. It
    ignores whole-byte rounding of the compressed size, so for tiny payloads
    `optimize_routes` (which compares exact byte totals) can disagree.
    """
    if receiver_count < 0:
        raise ValueError("receiver_count must be >= 0")
    a = _as_alpha(alpha)
    return Route.FOG if (1 - a) * receiver_count > 1 else Route.DIRECT


def optimize_routes(
    devices: list[DeviceProfile],
    alpha,
    bandwidth_bytes_per_s: float = DEFAULT_BANDWIDTH_BYTES_PER_S,
) -> NetworkPlan:
    """Route each device to minimize the fleet's total bytes.

    The objective separates per device, so the optimum is the local rule:
    go Fog when the exact byte saving n*(m - ceil(alpha*m)) - m is positive.
    Ties go Direct (no point hopping through the fog for nothing). The
    resulting total is the minimum over all 2^k routings.
    """
    a = _as_alpha(alpha)
    routes = {
        d.id: Route.FOG if _fog_marginal(d, a) > 0 else Route.DIRECT for d in devices
    }
    return NetworkPlan(alpha=a, routes=routes, bandwidth_bytes_per_s=bandwidth_bytes_per_s)


def savings(devices: list[DeviceProfile], plan: NetworkPlan) -> int:
    """Bytes saved versus serverless: the sum of fog-routed marginals.

    Identical to serverless_total(devices) - fog_total(devices, plan).d_f,
    term by term.
    """
    missing = [d.id for d in devices if d.id not in plan.routes]
    if missing:
        raise ValueError(f"plan does not route devices: {missing}")
    return sum(
        _fog_marginal(d, plan.alpha)
        for d in devices
        if plan.routes[d.id] is Route.FOG
    )


class TrainingSite(enum.Enum):
    EDGE = "edge"
    FOG_NODE = "fog-node"


def training_location(transfer_bytes_for_training: int, model_bytes: int) -> TrainingSite:
    """Train where fewer bytes move: shipping training data to the device
    costs `transfer_bytes_for_training`; shipping the model to the fog node
    and back costs twice `model_bytes`. Ties stay on the device.
    """
    if transfer_bytes_for_training < 0 or model_bytes < 0:
        raise ValueError("byte counts must be >= 0")
    if transfer_bytes_for_training <= 2 * model_bytes:
        return TrainingSite.EDGE
    return TrainingSite.FOG_NODE


def transfer_time(byte_count: float, plan: NetworkPlan) -> float:
    """Seconds to move `byte_count` bytes at the plan's bandwidth."""
    if byte_count < 0:
        raise ValueError("byte_count must be >= 0")
    return byte_count / plan.bandwidth_bytes_per_s
