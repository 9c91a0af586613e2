"""Per-tensor affine weight quantization and the bit-exact ".rinr" container.

Policy defaults follow the codec's storage scheme: background tensors at 8
bits, object tensors at 16 bits. Single-network baseline files use 16 bits.

Container layout, little-endian throughout:

    magic "RINR" (4s) | version (u16)
    width (u32) | height (u32) | bbox x, y, w, h (u32 x4) | obj_mode (u8)
    background arch: layer_count (u32) | hidden_dim (u32) | frequency_scale (f32)
    object arch:     layer_count (u32) | hidden_dim (u32) | frequency_scale (f32)
    background tensor records (per layer: weight record, then bias record)
    object tensor records
    crc32 of all preceding bytes (u32)

Tensor record: bits (u8) | min (f32) | max (f32) | codes (count * bits/8 bytes).
Element counts are implied by the architecture, so records carry no shape.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from rinr.codec import BoundingBox, EncodedImage, ObjectMode
from rinr.mlp import MlpArchitecture, ParameterSet

MAGIC = b"RINR"
FORMAT_VERSION = 1

BACKGROUND_BITS = 8
OBJECT_BITS = 16
BASELINE_BITS = 16

_HEADER = struct.Struct("<4sHIIIIIIB")
_ARCH = struct.Struct("<IIf")
_TENSOR_META = struct.Struct("<Bff")
_CRC = struct.Struct("<I")

HEADER_BYTES = _HEADER.size + 2 * _ARCH.size
TENSOR_OVERHEAD_BYTES = _TENSOR_META.size


class ContainerError(Exception):
    """Base class for container parse failures."""


class BadMagicError(ContainerError):
    pass


class BadVersionError(ContainerError):
    pass


class CrcMismatchError(ContainerError):
    pass


class TruncatedFileError(ContainerError):
    pass


@dataclass(frozen=True)
class QuantizedTensor:
    """Min-max affine quantized values: code 0 maps to min_val, the top code to max_val."""

    bits: int
    min_val: float
    max_val: float
    codes: np.ndarray  # uint8 or uint16, original tensor shape

    def __post_init__(self):
        if self.bits not in (8, 16):
            raise ValueError(f"bits must be 8 or 16, got {self.bits}")
        if not self.min_val <= self.max_val:
            raise ValueError("min_val must be <= max_val")


def quantize(tensor: np.ndarray, bits: int) -> QuantizedTensor:
    """Uniform affine quantization to the tensor's own [min, max] range.

    Rounding is half away from zero; a constant tensor stores min == max with
    all-zero codes.
    """
    if bits not in (8, 16):
        raise ValueError(f"bits must be 8 or 16, got {bits}")
    tensor = np.asarray(tensor)
    if tensor.size == 0:
        raise ValueError("cannot quantize an empty tensor")
    if not np.isfinite(tensor).all():
        raise ValueError("cannot quantize non-finite values")
    dtype = np.uint8 if bits == 8 else np.uint16
    mn = np.float32(tensor.min())
    mx = np.float32(tensor.max())
    if mn == mx:
        codes = np.zeros(tensor.shape, dtype=dtype)
        return QuantizedTensor(bits=bits, min_val=float(mn), max_val=float(mx), codes=codes)
    top = (1 << bits) - 1
    scaled = (tensor.astype(np.float64) - float(mn)) / (float(mx) - float(mn)) * top
    # scaled >= 0, so floor(x + 0.5) rounds half away from zero.
    codes = np.floor(scaled + 0.5).astype(np.int64)
    codes = np.clip(codes, 0, top).astype(dtype)
    return QuantizedTensor(bits=bits, min_val=float(mn), max_val=float(mx), codes=codes)


def dequantize(q: QuantizedTensor) -> np.ndarray:
    """Reconstruct float64 values; error is at most half a quantization step."""
    top = (1 << q.bits) - 1
    if q.codes.size and int(q.codes.max()) > top:
        raise ValueError(f"code out of range for {q.bits}-bit tensor")
    if q.min_val == q.max_val:
        return np.full(q.codes.shape, q.min_val, dtype=np.float64)
    return q.min_val + q.codes.astype(np.float64) / top * (q.max_val - q.min_val)


def quantization_step(q: QuantizedTensor) -> float:
    """Width of one code step (0 for a degenerate range)."""
    return (q.max_val - q.min_val) / ((1 << q.bits) - 1)


@dataclass
class ContainerFile:
    """Parsed container contents with the quantized tensors left as stored."""

    version: int
    width: int
    height: int
    bbox: BoundingBox
    obj_mode: ObjectMode
    bg_arch: MlpArchitecture
    obj_arch: MlpArchitecture
    bg_tensors: list[QuantizedTensor]
    obj_tensors: list[QuantizedTensor]


def _quantize_params(params: ParameterSet, bits: int) -> list[QuantizedTensor]:
    out = []
    for w, b in params.layers:
        out.append(quantize(w, bits))
        out.append(quantize(b, bits))
    return out


def _tensor_record(q: QuantizedTensor) -> bytes:
    codes = np.ascontiguousarray(q.codes)
    if q.bits == 16:
        codes = codes.astype("<u2")
    return _TENSOR_META.pack(q.bits, q.min_val, q.max_val) + codes.tobytes()


def pack(
    encoded: EncodedImage,
    bg_bits: int = BACKGROUND_BITS,
    obj_bits: int = OBJECT_BITS,
) -> bytes:
    """Serialize an encoded image; deterministic, so equal inputs give equal bytes."""
    bbox = encoded.bbox
    parts = [
        _HEADER.pack(
            MAGIC,
            FORMAT_VERSION,
            encoded.width,
            encoded.height,
            bbox.x,
            bbox.y,
            bbox.w,
            bbox.h,
            int(encoded.obj_mode),
        ),
        _ARCH.pack(
            encoded.bg_arch.layer_count,
            encoded.bg_arch.hidden_dim,
            encoded.bg_arch.frequency_scale,
        ),
        _ARCH.pack(
            encoded.obj_arch.layer_count,
            encoded.obj_arch.hidden_dim,
            encoded.obj_arch.frequency_scale,
        ),
    ]
    for q in _quantize_params(encoded.bg_params, bg_bits):
        parts.append(_tensor_record(q))
    for q in _quantize_params(encoded.obj_params, obj_bits):
        parts.append(_tensor_record(q))
    body = b"".join(parts)
    return body + _CRC.pack(zlib.crc32(body))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, fmt: struct.Struct):
        end = self.pos + fmt.size
        if end > len(self.data):
            raise TruncatedFileError(
                f"file ends at byte {len(self.data)}, needed {end}"
            )
        vals = fmt.unpack_from(self.data, self.pos)
        self.pos = end
        return vals

    def take_bytes(self, n: int) -> bytes:
        end = self.pos + n
        if end > len(self.data):
            raise TruncatedFileError(
                f"file ends at byte {len(self.data)}, needed {end}"
            )
        out = self.data[self.pos : end]
        self.pos = end
        return out


def _read_tensor(reader: _Reader, shape: tuple[int, ...]) -> QuantizedTensor:
    bits, mn, mx = reader.take(_TENSOR_META)
    if bits not in (8, 16):
        raise TruncatedFileError(f"invalid tensor bit width {bits}")
    count = int(np.prod(shape))
    raw = reader.take_bytes(count * (bits // 8))
    dtype = "<u1" if bits == 8 else "<u2"
    codes = np.frombuffer(raw, dtype=dtype).reshape(shape).copy()
    return QuantizedTensor(bits=bits, min_val=mn, max_val=mx, codes=codes)


def _read_param_tensors(reader: _Reader, arch: MlpArchitecture) -> list[QuantizedTensor]:
    tensors = []
    for fan_in, fan_out in arch.layer_dims():
        tensors.append(_read_tensor(reader, (fan_out, fan_in)))
        tensors.append(_read_tensor(reader, (fan_out,)))
    return tensors


def parse_container(data: bytes) -> ContainerFile:
    """Validate magic, version, and CRC, then parse the quantized representation."""
    if len(data) < len(MAGIC):
        raise TruncatedFileError(f"file is only {len(data)} bytes")
    if data[: len(MAGIC)] != MAGIC:
        raise BadMagicError(f"bad magic {data[:len(MAGIC)]!r}")
    if len(data) < _HEADER.size + 2 * _ARCH.size + _CRC.size:
        raise TruncatedFileError(f"file is only {len(data)} bytes")
    (version,) = struct.unpack_from("<H", data, len(MAGIC))
    if version != FORMAT_VERSION:
        raise BadVersionError(f"unsupported format version {version}")
    body, crc_bytes = data[: -_CRC.size], data[-_CRC.size :]
    (stored_crc,) = _CRC.unpack(crc_bytes)
    actual_crc = zlib.crc32(body)
    if stored_crc != actual_crc:
        raise CrcMismatchError(
            f"crc mismatch: stored {stored_crc:#010x}, computed {actual_crc:#010x}"
        )

    reader = _Reader(body)
    magic, version, width, height, bx, by, bw, bh, mode_raw = reader.take(_HEADER)
    try:
        mode = ObjectMode(mode_raw)
        bbox = BoundingBox(bx, by, bw, bh)
        bg_arch = MlpArchitecture(*_take_arch(reader))
        obj_arch = MlpArchitecture(*_take_arch(reader))
    except ValueError as e:
        raise TruncatedFileError(f"invalid header field: {e}") from None
    bg_tensors = _read_param_tensors(reader, bg_arch)
    obj_tensors = _read_param_tensors(reader, obj_arch)
    if reader.pos != len(body):
        raise TruncatedFileError(
            f"{len(body) - reader.pos} unexpected trailing bytes before crc"
        )
    return ContainerFile(
        version=version,
        width=width,
        height=height,
        bbox=bbox,
        obj_mode=mode,
        bg_arch=bg_arch,
        obj_arch=obj_arch,
        bg_tensors=bg_tensors,
        obj_tensors=obj_tensors,
    )


def _take_arch(reader: _Reader):
    layer_count, hidden_dim, freq = reader.take(_ARCH)
    return layer_count, hidden_dim, 2, 3, freq


def _params_from_tensors(
    arch: MlpArchitecture, tensors: list[QuantizedTensor]
) -> ParameterSet:
    layers = []
    for i in range(arch.layer_count):
        w = dequantize(tensors[2 * i]).astype(np.float32)
        b = dequantize(tensors[2 * i + 1]).astype(np.float32)
        layers.append((w, b))
    return ParameterSet(layers)


def unpack(data: bytes) -> EncodedImage:
    """Parse and dequantize a container back into a decodable EncodedImage."""
    parsed = parse_container(data)
    return EncodedImage(
        width=parsed.width,
        height=parsed.height,
        bbox=parsed.bbox,
        bg_arch=parsed.bg_arch,
        bg_params=_params_from_tensors(parsed.bg_arch, parsed.bg_tensors),
        obj_arch=parsed.obj_arch,
        obj_params=_params_from_tensors(parsed.obj_arch, parsed.obj_tensors),
        obj_mode=parsed.obj_mode,
    )


def tensor_table_bytes(arch: MlpArchitecture, bits: int) -> int:
    """Size of one parameter set's tensor records at the given bit width."""
    per_value = bits // 8
    records = 2 * arch.layer_count
    return records * TENSOR_OVERHEAD_BYTES + arch.parameter_count * per_value


def packed_size(
    bg_arch: MlpArchitecture,
    obj_arch: MlpArchitecture,
    bg_bits: int = BACKGROUND_BITS,
    obj_bits: int = OBJECT_BITS,
) -> int:
    """Exact container size in bytes; a pure function of the architectures."""
    return (
        HEADER_BYTES
        + tensor_table_bytes(bg_arch, bg_bits)
        + tensor_table_bytes(obj_arch, obj_bits)
        + _CRC.size
    )
