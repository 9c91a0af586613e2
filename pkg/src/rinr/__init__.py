"""Region-importance-aware coordinate-MLP image codec.

A full image is encoded by a small background network and the bounding-box
region by a tiny object network fitted to the residual between the raw patch
and the background reconstruction. Companion modules cover weight quantization
and the on-disk container, architecture-grouped batch decoding, and a fog
communication-cost planner.
"""

from rinr.mlp import (
    CoordinateGrid,
    FitReport,
    MlpArchitecture,
    ParameterSet,
    TrainConfig,
    fit,
    forward,
    init_parameters,
    parse_arch,
)
from rinr.codec import (
    BoundingBox,
    EncodedImage,
    ObjectMode,
    ObjectSizeTable,
    decode,
    decode_background,
    encode,
    entropy,
    psnr,
)
from rinr.container import pack, unpack

__all__ = [
    "BoundingBox",
    "CoordinateGrid",
    "EncodedImage",
    "FitReport",
    "MlpArchitecture",
    "ObjectMode",
    "ObjectSizeTable",
    "ParameterSet",
    "TrainConfig",
    "decode",
    "decode_background",
    "encode",
    "entropy",
    "fit",
    "forward",
    "init_parameters",
    "pack",
    "parse_arch",
    "psnr",
    "unpack",
]
