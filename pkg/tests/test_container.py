"""Binary container: round trips, integrity checks, size accounting."""

import struct
import zlib

import numpy as np
import pytest

from rinr.codec import BoundingBox, EncodedImage, ObjectMode
from rinr.container import (
    BadMagicError,
    BadVersionError,
    ContainerError,
    CrcMismatchError,
    TruncatedFileError,
    pack,
    packed_size,
    parse_container,
    unpack,
)
from rinr.mlp import MlpArchitecture, init_parameters

BG_ARCH = MlpArchitecture(3, 8)
OBJ_ARCH = MlpArchitecture(2, 6)


def sample_encoded(mode=ObjectMode.RESIDUAL, seed=0) -> EncodedImage:
    return EncodedImage(
        width=12,
        height=10,
        bbox=BoundingBox(2, 3, 5, 4),
        bg_arch=BG_ARCH,
        bg_params=init_parameters(BG_ARCH, seed=seed),
        obj_arch=OBJ_ARCH,
        obj_params=init_parameters(OBJ_ARCH, seed=seed + 1),
        obj_mode=mode,
    )


def retail_crc(body: bytes) -> bytes:
    return body + struct.pack("<I", zlib.crc32(body))


class TestRoundTrip:
    def test_metadata_survives(self):
        enc = sample_encoded(mode=ObjectMode.DIRECT)
        back = unpack(pack(enc))
        assert (back.width, back.height) == (12, 10)
        assert back.bbox == BoundingBox(2, 3, 5, 4)
        assert back.obj_mode == ObjectMode.DIRECT
        assert back.bg_arch == BG_ARCH
        assert back.obj_arch == OBJ_ARCH

    def test_pack_is_deterministic(self):
        enc = sample_encoded()
        assert pack(enc) == pack(enc)

    def test_repack_after_unpack_is_byte_identical(self):
        # quantization is idempotent on already-dequantized values, so a second
        # trip through the container must reproduce the file exactly
        data = pack(sample_encoded())
        assert pack(unpack(data)) == data

    def test_parsed_codes_match_full_file(self):
        enc = sample_encoded()
        data = pack(enc)
        parsed = parse_container(data)
        assert len(parsed.bg_tensors) == 2 * BG_ARCH.layer_count
        assert len(parsed.obj_tensors) == 2 * OBJ_ARCH.layer_count
        total_codes = sum(t.codes.size for t in parsed.bg_tensors)
        assert total_codes == BG_ARCH.parameter_count

    def test_packed_size_matches_reality(self):
        data = pack(sample_encoded())
        assert len(data) == packed_size(BG_ARCH, OBJ_ARCH)

    def test_file_starts_with_magic_and_version(self):
        data = pack(sample_encoded())
        assert data[:6] == b"RINR\x01\x00"

    def test_custom_bit_widths_change_size(self):
        enc = sample_encoded()
        default = len(pack(enc))
        wide = len(pack(enc, bg_bits=16, obj_bits=16))
        assert wide == default + BG_ARCH.parameter_count


class TestIntegrity:
    def test_bad_magic(self):
        data = bytearray(pack(sample_encoded()))
        data[0] ^= 0xFF
        with pytest.raises(BadMagicError):
            parse_container(bytes(data))
        with pytest.raises(BadMagicError):
            parse_container(b"JUNKJUNKJUNKJUNKJUNKJUNK")

    def test_bad_version(self):
        data = bytearray(pack(sample_encoded()))
        data[4] = 99
        with pytest.raises(BadVersionError):
            parse_container(bytes(data))

    def test_crc_catches_payload_flip(self):
        data = bytearray(pack(sample_encoded()))
        data[len(data) // 2] ^= 0x01
        with pytest.raises(CrcMismatchError):
            parse_container(bytes(data))

    def test_crc_catches_damaged_crc_field(self):
        data = bytearray(pack(sample_encoded()))
        data[-1] ^= 0x01
        with pytest.raises(CrcMismatchError):
            parse_container(bytes(data))

    def test_short_file(self):
        with pytest.raises(TruncatedFileError):
            parse_container(b"RI")
        with pytest.raises(TruncatedFileError):
            parse_container(b"")
        with pytest.raises(TruncatedFileError):
            parse_container(b"RINR\x01\x00")

    def test_truncated_tensor_data_with_valid_crc(self):
        data = pack(sample_encoded())
        body = data[:-4]
        cut = retail_crc(body[:-10])
        with pytest.raises(TruncatedFileError):
            parse_container(cut)

    def test_trailing_garbage_with_valid_crc(self):
        data = pack(sample_encoded())
        body = data[:-4]
        padded = retail_crc(body + b"\x00\x00\x00")
        with pytest.raises(TruncatedFileError, match="trailing"):
            parse_container(padded)

    def test_random_single_byte_flips_always_detected(self):
        data = pack(sample_encoded())
        rng = np.random.default_rng(0)
        for _ in range(150):
            pos = int(rng.integers(0, len(data)))
            bit = 1 << int(rng.integers(0, 8))
            mutated = bytearray(data)
            mutated[pos] ^= bit
            with pytest.raises(ContainerError):
                parse_container(bytes(mutated))
