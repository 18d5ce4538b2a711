"""Tests for the zero-padded 3x3 convolution bases."""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))
from rpp_experiments.core.errors import ConfigError, StructuralError
from rpp_experiments.symmetry.conv import (
    conv_basis_multichannel,
    conv_bias_basis,
    conv_operator,
    conv_toeplitz_basis,
    cross_correlate,
    filter_to_coordinates,
    identity_basis,
)


class TestConvToeplitzBasis:
    """Single-channel Toeplitz basis."""

    def setup_method(self):
        self.rng = np.random.default_rng(0)

    def test_nine_orthonormal_columns(self):
        basis = conv_toeplitz_basis(4, 5)
        Q = basis.dense()
        assert Q.shape == (400, 9)
        np.testing.assert_allclose(Q.T @ Q, np.eye(9), atol=1e-12)

    @pytest.mark.parametrize("height, width", [(3, 3), (4, 4), (5, 7)])
    def test_operator_matches_cross_correlation(self, height, width):
        for _ in range(5):
            filt = self.rng.standard_normal((3, 3))
            image = self.rng.standard_normal((height, width))
            via_basis = conv_operator(height, width, filt) @ image.ravel()
            direct = cross_correlate(image, filt).ravel()
            np.testing.assert_allclose(via_basis, direct, atol=1e-12)

    def test_centre_tap_is_identity(self):
        filt = np.zeros((3, 3))
        filt[1, 1] = 1.0
        np.testing.assert_allclose(conv_operator(3, 4, filt), np.eye(12), atol=1e-15)

    def test_filter_coordinates_round_trip(self):
        basis = conv_toeplitz_basis(4, 4)
        filt = self.rng.standard_normal((3, 3))
        beta = filter_to_coordinates(basis, filt)
        W = basis.weight(beta)
        np.testing.assert_allclose(basis.coordinates(W), beta, atol=1e-12)

    def test_filter_coordinates_give_conv_operator(self):
        basis = conv_toeplitz_basis(4, 5)
        filt = self.rng.standard_normal((3, 3))
        W = basis.weight(filter_to_coordinates(basis, filt))
        np.testing.assert_allclose(W, conv_operator(4, 5, filt), atol=1e-12)

    def test_interior_translation_equivariance(self):
        filt = self.rng.standard_normal((3, 3))
        image = np.zeros((6, 6))
        image[2, 2] = 1.0
        shifted = np.roll(image, 1, axis=1)
        out = cross_correlate(image, filt)
        out_shifted = cross_correlate(shifted, filt)
        np.testing.assert_allclose(np.roll(out, 1, axis=1), out_shifted, atol=1e-15)

    def test_small_images_rejected(self):
        with pytest.raises(ConfigError, match="at least 3x3"):
            conv_toeplitz_basis(2, 5)

    def test_filter_shape_checked(self):
        basis = conv_toeplitz_basis(3, 3)
        with pytest.raises(StructuralError, match="3x3"):
            filter_to_coordinates(basis, np.zeros((2, 2)))

    def test_basis_without_norms_rejected(self):
        with pytest.raises(StructuralError, match="normalization"):
            filter_to_coordinates(identity_basis(9, 9), np.zeros((3, 3)))


class TestMultichannel:
    """Channel-blocked bases used by RPP-Conv layers."""

    def setup_method(self):
        self.rng = np.random.default_rng(1)

    def test_column_count(self):
        basis = conv_basis_multichannel(4, 4, c_out=3, c_in=2)
        assert basis.rank == 54
        assert basis.n_in == 32
        assert basis.n_out == 48

    def test_matches_per_channel_correlation(self):
        h, w, c_out, c_in = 4, 5, 2, 3
        basis = conv_basis_multichannel(h, w, c_out, c_in)
        single = conv_toeplitz_basis(h, w)
        filters = self.rng.standard_normal((c_out, c_in, 3, 3))
        beta = np.concatenate(
            [
                filter_to_coordinates(single, filters[o, i])
                for o in range(c_out)
                for i in range(c_in)
            ]
        )
        images = self.rng.standard_normal((c_in, h, w))
        out = basis.weight(beta) @ images.ravel()
        expected = np.stack(
            [
                sum(cross_correlate(images[i], filters[o, i]) for i in range(c_in))
                for o in range(c_out)
            ]
        )
        np.testing.assert_allclose(out, expected.ravel(), atol=1e-12)

    def test_bias_is_constant_per_channel(self):
        basis = conv_bias_basis(3, 4, channels=2)
        assert basis.rank == 2
        bias = basis.weight(np.array([1.0, -2.0])).ravel()
        assert np.allclose(bias[:12], bias[0])
        assert np.allclose(bias[12:], bias[12])
        assert bias[0] > 0 > bias[12]

    def test_identity_basis_is_full(self):
        basis = identity_basis(3, 2)
        assert basis.rank == 6
        W = self.rng.standard_normal((2, 3))
        np.testing.assert_allclose(basis.weight(basis.coordinates(W)), W)
