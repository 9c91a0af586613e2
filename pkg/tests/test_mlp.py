import math

import numpy as np
import pytest

from rinr.mlp import (
    CoordinateGrid,
    FitDivergenceError,
    MlpArchitecture,
    ParameterSet,
    backward,
    check_shapes,
    forward,
    init_parameters,
    mse_loss,
    parse_arch,
)


def count_by_enumeration(arch: MlpArchitecture) -> int:
    params = init_parameters(arch, seed=0)
    return sum(w.size + b.size for w, b in params.layers)


class TestArchitecture:
    def test_parameter_count_formula_10x30(self):
        assert MlpArchitecture(10, 30).parameter_count == 7623

    def test_parameter_count_matches_enumeration(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            arch = MlpArchitecture(int(rng.integers(2, 12)), int(rng.integers(1, 64)))
            assert arch.parameter_count == count_by_enumeration(arch)

    def test_known_counts(self):
        # the preset architectures and the object tiers
        for layers, hidden, want in [
            (3, 10, 173),
            (3, 15, 333),
            (5, 17, 1023),
            (5, 24, 1947),
            (6, 28, 3419),
            (10, 28, 6667),
            (10, 36, 10875),
            (14, 45, 25113),
            (16, 48, 33219),
            (16, 55, 43453),
        ]:
            assert MlpArchitecture(layers, hidden).parameter_count == want

    def test_layer_dims(self):
        arch = MlpArchitecture(3, 8)
        assert arch.layer_dims() == [(2, 8), (8, 8), (8, 3)]

    def test_min_depth(self):
        assert MlpArchitecture(2, 4).layer_dims() == [(2, 4), (4, 3)]
        with pytest.raises(ValueError):
            MlpArchitecture(1, 4)

    def test_rejects_bad_hidden(self):
        with pytest.raises(ValueError):
            MlpArchitecture(3, 0)

    def test_str_and_parse_round_trip(self):
        arch = MlpArchitecture(10, 30)
        assert str(arch) == "10x30"
        assert parse_arch("10x30") == arch

    def test_parse_rejects_garbage(self):
        for bad in ("", "10", "x30", "10x", "ax3", "10x30x2", "0x5"):
            with pytest.raises(ValueError):
                parse_arch(bad)


class TestCoordinateGrid:
    def test_corners_are_exact(self):
        grid = CoordinateGrid.for_size(5, 3)
        coords = grid.coords.reshape(3, 5, 2)
        assert coords[0, 0, 0] == -1.0 and coords[0, 0, 1] == -1.0
        assert coords[2, 4, 0] == 1.0 and coords[2, 4, 1] == 1.0

    def test_row_major_order(self):
        grid = CoordinateGrid.for_size(3, 2)
        expected = np.array(
            [[-1, -1], [0, -1], [1, -1], [-1, 1], [0, 1], [1, 1]], dtype=np.float32
        )
        assert np.array_equal(grid.coords, expected)

    def test_single_pixel_axis_maps_to_zero(self):
        grid = CoordinateGrid.for_size(1, 1)
        assert np.array_equal(grid.coords, np.zeros((1, 2), dtype=np.float32))
        tall = CoordinateGrid.for_size(1, 4)
        assert np.all(tall.coords[:, 0] == 0.0)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            CoordinateGrid.for_size(0, 3)


class TestInitAndForward:
    def test_init_deterministic(self):
        arch = MlpArchitecture(4, 12)
        a = init_parameters(arch, seed=7)
        b = init_parameters(arch, seed=7)
        for (wa, ba), (wb, bb) in zip(a.layers, b.layers):
            assert np.array_equal(wa, wb) and np.array_equal(ba, bb)
        c = init_parameters(arch, seed=8)
        assert any(
            not np.array_equal(wa, wc) for (wa, _), (wc, _) in zip(a.layers, c.layers)
        )

    def test_init_ranges(self):
        arch = MlpArchitecture(5, 32)
        params = init_parameters(arch, seed=0)
        first_w = params.layers[0][0]
        assert np.abs(first_w).max() <= 1.0 / 2.0
        bound = math.sqrt(6.0 / 32.0) / arch.frequency_scale
        for w, b in params.layers[1:]:
            assert np.abs(w).max() <= bound
            assert np.all(b == 0.0)
        assert np.all(params.layers[0][1] == 0.0)

    def test_forward_shape_and_dtype(self):
        arch = MlpArchitecture(3, 8)
        params = init_parameters(arch, seed=1)
        grid = CoordinateGrid.for_size(6, 4)
        out = forward(arch, params, grid)
        assert out.shape == (4, 6, 3)
        assert out.dtype == np.float32

    def test_forward_permutation_invariance(self):
        arch = MlpArchitecture(3, 8)
        params = init_parameters(arch, seed=1)
        grid = CoordinateGrid.for_size(5, 5)
        rng = np.random.default_rng(2)
        perm = rng.permutation(25)
        permuted = CoordinateGrid(width=5, height=5, coords=grid.coords[perm])
        out = forward(arch, params, grid).reshape(25, 3)
        out_perm = forward(arch, params, permuted).reshape(25, 3)
        assert np.array_equal(out[perm], out_perm)

    def test_forward_deterministic(self):
        arch = MlpArchitecture(5, 16)
        params = init_parameters(arch, seed=3)
        grid = CoordinateGrid.for_size(8, 8)
        assert np.array_equal(forward(arch, params, grid), forward(arch, params, grid))

    def test_check_shapes_catches_mismatch(self):
        arch = MlpArchitecture(3, 8)
        params = init_parameters(MlpArchitecture(3, 9), seed=0)
        with pytest.raises(ValueError):
            check_shapes(arch, params)

    def test_backward_flags_nonfinite_layer(self):
        # forward itself is unchecked; the divergence guard sits in the
        # gradient path where a poisoned activation would corrupt the update.
        arch = MlpArchitecture(3, 4)
        params = init_parameters(arch, seed=0)
        w0, b0 = params.layers[0]
        bad = ParameterSet([(np.full_like(w0, np.nan), b0)] + params.layers[1:])
        grid = CoordinateGrid.for_size(2, 2)
        target = np.zeros((2, 2, 3), dtype=np.float32)
        with pytest.raises(FitDivergenceError, match="layer 0"):
            backward(arch, bad, grid, target)


class TestMseLoss:
    def test_constant_difference(self):
        a = np.full((4, 4, 3), 0.6, dtype=np.float32)
        b = np.full((4, 4, 3), 0.5, dtype=np.float32)
        assert mse_loss(a, b) == pytest.approx(0.01, rel=1e-6)

    def test_single_pixel_black_vs_white(self):
        a = np.zeros((1, 1, 3), dtype=np.float32)
        b = np.ones((1, 1, 3), dtype=np.float32)
        assert mse_loss(a, b) == pytest.approx(1.0)

    def test_zero_for_identical(self):
        a = np.random.default_rng(0).uniform(0, 1, (3, 3, 3)).astype(np.float32)
        assert mse_loss(a, a.copy()) == 0.0
