"""Toeplitz bases for zero-padded 3×3 convolutions acting on flattened images.

A 3×3 cross-correlation on an h×w image is a dense (hw)×(hw) matrix that lies
in a 9-dimensional subspace: one (bi-)Toeplitz pattern per filter tap. Taps
are ordered row-major over (dy, dx) ∈ {-1, 0, 1}², so tap (dy, dx) is column
(dy + 1)·3 + (dx + 1) and matches ``filter[dy + 1, dx + 1]``.
"""

import logging
from typing import Tuple

import numpy as np
import scipy.sparse as sp

from ..core.errors import ConfigError, SizeLimitError, StructuralError
from .basis import EquivariantBasis

logger = logging.getLogger(__name__)

MAX_IMAGE_PIXELS = 4096

OFFSETS = [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1)]


def _check_dims(height: int, width: int) -> None:
    if height < 3 or width < 3:
        raise ConfigError(f"Image dims must be at least 3x3, got {height}x{width}")


def _tap_pairs(
    height: int, width: int, dy: int, dx: int
) -> Tuple[np.ndarray, np.ndarray]:
    """(output pixel, input pixel) index pairs populated by one tap."""
    ys, xs = np.meshgrid(np.arange(height), np.arange(width), indexing="ij")
    src_y, src_x = ys + dy, xs + dx
    valid = (src_y >= 0) & (src_y < height) & (src_x >= 0) & (src_x < width)
    out_pixels = (ys * width + xs)[valid]
    in_pixels = (src_y * width + src_x)[valid]
    return out_pixels, in_pixels


def conv_toeplitz_basis(height: int, width: int) -> EquivariantBasis:
    """The 9-column orthonormal basis of zero-padded 3×3 convolutions.

    The basis spans every filter at once; a particular 3×3 filter is the
    point ``filter_to_coordinates(basis, filt)`` in it, and
    ``basis.weight`` of those coordinates equals ``conv_operator`` of the
    filter.

    Column norms (√(number of populated entries)) are kept on the basis so a
    raw filter can be mapped to coordinates with ``filter_to_coordinates``.

    Raises:
        ConfigError: If height or width is below 3
    """
    _check_dims(height, width)
    hw = height * width
    if hw > MAX_IMAGE_PIXELS:
        raise SizeLimitError(
            f"Image {height}x{width} exceeds {MAX_IMAGE_PIXELS} pixels"
        )

    rows, cols, values, norms = [], [], [], []
    for column, (dy, dx) in enumerate(OFFSETS):
        out_pixels, in_pixels = _tap_pairs(height, width, dy, dx)
        norm = np.sqrt(len(out_pixels))
        rows.append(out_pixels * hw + in_pixels)
        cols.append(np.full(len(out_pixels), column))
        values.append(np.full(len(out_pixels), 1.0 / norm))
        norms.append(norm)

    Q = sp.csr_matrix(
        (np.concatenate(values), (np.concatenate(rows), np.concatenate(cols))),
        shape=(hw * hw, len(OFFSETS)),
    )
    return EquivariantBasis(Q, hw, hw, column_norms=np.array(norms))


def filter_to_coordinates(basis: EquivariantBasis, filt: np.ndarray) -> np.ndarray:
    """Basis coordinates β with reshape(Qβ) equal to the filter's Toeplitz matrix."""
    filt = np.asarray(filt, dtype=np.float64)
    if filt.shape != (3, 3):
        raise StructuralError(f"Filter must be 3x3, got {filt.shape}")
    if basis.column_norms is None:
        raise StructuralError("Basis carries no tap normalization")
    return filt.ravel() * basis.column_norms


def conv_operator(height: int, width: int, filt: np.ndarray) -> np.ndarray:
    """Dense (hw)×(hw) matrix of the zero-padded cross-correlation with ``filt``."""
    basis = conv_toeplitz_basis(height, width)
    return basis.weight(filter_to_coordinates(basis, filt))


def cross_correlate(image: np.ndarray, filt: np.ndarray) -> np.ndarray:
    """Direct zero-padded 3×3 cross-correlation.

    out[y, x] = Σ f[dy+1, dx+1] · in[y+dy, x+dx]
    """
    image = np.asarray(image, dtype=np.float64)
    padded = np.pad(image, 1)
    height, width = image.shape
    out = np.zeros_like(image)
    for dy, dx in OFFSETS:
        window = padded[1 + dy : 1 + dy + height, 1 + dx : 1 + dx + width]
        out += filt[dy + 1, dx + 1] * window
    return out


def conv_basis_multichannel(
    height: int, width: int, c_out: int, c_in: int
) -> EquivariantBasis:
    """Channel-blocked conv basis for maps (c_in·hw) -> (c_out·hw).

    Inputs and outputs are channel-major (channel, y, x). Each channel pair
    gets its own 9 columns, giving c_out·c_in·9 columns in total.
    """
    single = conv_toeplitz_basis(height, width)
    hw = height * width
    n_in = c_in * hw
    q = single.Q.tocoo()
    local_out, local_in = np.divmod(q.row, hw)

    rows, cols, values = [], [], []
    for o in range(c_out):
        for i in range(c_in):
            block = o * c_in + i
            rows.append((o * hw + local_out) * n_in + (i * hw + local_in))
            cols.append(q.col + 9 * block)
            values.append(q.data)

    Q = sp.csr_matrix(
        (np.concatenate(values), (np.concatenate(rows), np.concatenate(cols))),
        shape=(c_out * hw * n_in, 9 * c_out * c_in),
    )
    logger.debug(
        f"Conv basis {height}x{width}, channels {c_in}->{c_out}: {Q.shape[1]} columns"
    )
    return EquivariantBasis(
        Q, n_in, c_out * hw, column_norms=np.tile(single.column_norms, c_out * c_in)
    )


def conv_bias_basis(height: int, width: int, channels: int) -> EquivariantBasis:
    """Translation-invariant biases: one constant per output channel."""
    hw = height * width
    rows = np.arange(channels * hw)
    cols = np.repeat(np.arange(channels), hw)
    values = np.full(channels * hw, 1.0 / np.sqrt(hw))
    Q = sp.csr_matrix((values, (rows, cols)), shape=(channels * hw, channels))
    return EquivariantBasis(Q, 1, channels * hw)


def identity_basis(n_in: int, n_out: int) -> EquivariantBasis:
    """The full weight space, for layers whose equivariant path is unconstrained."""
    return EquivariantBasis(sp.identity(n_out * n_in, format="csr"), n_in, n_out)
