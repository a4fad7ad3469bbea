"""Quantum encodings of feature vectors and principal components.

The classifier uses a direct-sum representation: each of the ``n`` pixels
gets its own ``k``-dimensional block holding a unit 2-sparse vector, and the
blocks are concatenated with an overall ``1/sqrt(n)`` factor. Pixel blocks
are stored unscaled, as a coordinate-0 amplitude ("head") and one residual
amplitude ("tail") at a fixed coordinate; the dense state is built only on
request.

FRQI and NEQR encoders are provided for comparison.
"""
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._validation import as_vector, check_interval, check_unit_interval
from .exceptions import DimensionError, RangeError
from .quantum import StateVector, direct_sum

IMAGE_RESIDUAL = 1


def per_pixel_dim(n_components):
    """Smallest block size giving every residual its own coordinate: s + 2."""
    return int(n_components) + 2


def encode_pixel(x):
    """Amplitude pair ``(x, sqrt(1 - x^2))`` for an intensity in [0, 1]."""
    x = float(check_unit_interval(np.float64(x), "pixel"))
    return x, math.sqrt(max(0.0, 1.0 - x * x))


@dataclass(frozen=True, eq=False)
class DirectSumEncoding:
    """Sparse direct-sum state ``(1/sqrt(n)) * (+)_i (head_i|0> + tail_i|r>)``."""

    head: np.ndarray
    tail: np.ndarray
    k: int
    residual: int

    @property
    def n(self):
        return self.head.size

    @property
    def dim(self):
        return self.n * self.k

    def nonzeros(self):
        """Yield ``(block, coordinate, amplitude)`` for each nonzero amplitude."""
        scale = 1.0 / math.sqrt(self.n)
        for i in range(self.n):
            if self.head[i] != 0.0:
                yield i, 0, self.head[i] * scale
            if self.tail[i] != 0.0:
                yield i, self.residual, self.tail[i] * scale

    def blocks(self):
        """Unscaled per-pixel amplitude blocks as an ``(n, k)`` array."""
        out = np.zeros((self.n, self.k))
        out[:, 0] = self.head
        out[:, self.residual] = self.tail
        return out

    @cached_property
    def state(self):
        return direct_sum(list(self.blocks()), scale=1.0 / math.sqrt(self.n))

    def to_state(self):
        return self.state

    def norm_squared(self):
        return float(np.sum(self.head**2 + self.tail**2)) / self.n


@dataclass(frozen=True, eq=False)
class EncodedImage(DirectSumEncoding):
    residual: int = IMAGE_RESIDUAL


@dataclass(frozen=True, eq=False)
class EncodedComponent(DirectSumEncoding):
    index: int = 1


def encode_image(x, k):
    """Direct-sum encoding of a feature vector with entries in [0, 1]."""
    x = check_unit_interval(as_vector(x), "feature")
    if k < 2:
        raise DimensionError(f"per-pixel dimension must be at least 2, got {k}")
    head = x.copy()
    tail = np.sqrt(np.maximum(0.0, 1.0 - x * x))
    head.setflags(write=False)
    tail.setflags(write=False)
    return EncodedImage(head, tail, int(k), IMAGE_RESIDUAL)


def encode_component(v, index, k):
    """Encode component ``index`` (1-based) with residuals at coordinate index + 1.

    Entries may be negative; the sign is carried by the coordinate-0 amplitude.
    """
    if index < 1:
        raise DimensionError(f"component index must be >= 1, got {index}")
    if k < index + 2:
        raise DimensionError(
            f"per-pixel dimension {k} has no coordinate {index + 1} for component {index}"
        )
    v = check_interval(as_vector(v, "component"), -1.0, 1.0, "component entry")
    head = v.copy()
    tail = np.sqrt(np.maximum(0.0, 1.0 - v * v))
    head.setflags(write=False)
    tail.setflags(write=False)
    return EncodedComponent(head, tail, int(k), int(index) + 1, int(index))


def representation_inner_product(a, b):
    """Inner product of two direct-sum encodings in O(n).

    Only the shared coordinate 0 and, when both use the same residual
    coordinate, the residual amplitudes contribute. The ``1/n`` prefactor is
    applied once rather than as two ``1/sqrt(n)`` factors.
    """
    if a.n != b.n or a.k != b.k:
        raise DimensionError(
            f"encodings differ in shape: n={a.n},k={a.k} vs n={b.n},k={b.k}"
        )
    total = float(a.head @ b.head)
    if a.residual == b.residual:
        total += float(a.tail @ b.tail)
    return total / a.n


# --- comparison encoders -------------------------------------------------


def _side_exponent(size, what):
    """Return e with ``size == 4**e`` (an image of side 2**e), e >= 1."""
    e = 0
    while 4**e < size:
        e += 1
    if 4**e != size or e < 1:
        raise DimensionError(f"{what} needs a 2^n x 2^n grid with n >= 1, got {size} values")
    return e


@dataclass(frozen=True, eq=False)
class FrqiImage:
    """FRQI state: colour qubit tensored with a ``2^(2n)``-level position register."""

    state: StateVector
    thetas: np.ndarray

    @property
    def positions(self):
        return self.thetas.size

    def amplitude(self, colour, position):
        """Amplitude on ``|colour> (x) |position>``."""
        return self.state.amplitudes[colour * self.positions + position]


def intensity_to_angle(x):
    """Map intensities in [0, 1] to FRQI angles ``(pi / 2) * x``."""
    return (np.pi / 2) * check_unit_interval(np.asarray(x, dtype=np.float64), "intensity")


def encode_frqi(thetas):
    """FRQI encoding of a square grid (or flat list) of angles in [0, pi/2]."""
    thetas = check_interval(
        np.asarray(thetas, dtype=np.float64).reshape(-1), 0.0, np.pi / 2, "theta"
    )
    e = _side_exponent(thetas.size, "FRQI")
    positions = thetas.size
    side = 2**e
    # (cos|0> + sin|1>) (x) |i> puts cos at index i and sin at positions + i
    amps = np.concatenate([np.cos(thetas), np.sin(thetas)]) / side
    thetas.setflags(write=False)
    return FrqiImage(StateVector(amps), thetas)


@dataclass(frozen=True, eq=False)
class NeqrImage:
    """NEQR state over ``q`` intensity qubits and ``2n`` position qubits."""

    state: StateVector
    q: int
    side: int

    @property
    def position_bits(self):
        return 2 * int(math.log2(self.side))


def encode_neqr(intensities, q):
    """Basis-encode every pixel as ``|C_yx> (x) |y> (x) |x>`` with amplitude 1/side.

    The basis index of pixel (y, x) is ``C << 2n | y << n | x``.
    """
    grid = np.asarray(intensities)
    if grid.ndim != 2 or grid.shape[0] != grid.shape[1]:
        raise DimensionError(f"NEQR needs a square grid, got shape {grid.shape}")
    if q < 1:
        raise DimensionError(f"bit depth must be >= 1, got {q}")
    e = _side_exponent(grid.size, "NEQR")
    if not np.all(np.equal(np.mod(grid, 1), 0)):
        raise RangeError("NEQR intensities must be integers")
    grid = grid.astype(np.int64)
    if grid.min() < 0 or grid.max() > 2**q - 1:
        raise RangeError(f"NEQR intensities must lie in [0, {2**q - 1}]")
    side = 2**e
    dim = 2**q * side * side
    amps = np.zeros(dim, dtype=np.complex128)
    ys, xs = np.indices(grid.shape)
    idx = (grid << (2 * e)) | (ys << e) | xs
    amps[idx.reshape(-1)] = 1.0 / side
    return NeqrImage(StateVector(amps), int(q), side)


def decode_neqr(image, tol=1e-12):
    """Recover the intensity grid from the nonzero basis indices of a NEQR state."""
    e = image.position_bits // 2
    side = image.side
    amps = image.state.amplitudes
    nz = np.flatnonzero(np.abs(amps) > tol)
    if nz.size != side * side:
        raise DimensionError(
            f"expected {side * side} nonzero amplitudes, found {nz.size}"
        )
    grid = np.full((side, side), -1, dtype=np.int64)
    mask = side - 1
    for idx in nz:
        c, y, x = idx >> (2 * e), (idx >> e) & mask, idx & mask
        if grid[y, x] != -1:
            raise DimensionError(f"pixel ({y}, {x}) is encoded twice")
        grid[y, x] = c
    return grid
