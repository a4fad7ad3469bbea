"""Pure-state algebra and projective measurement.

Everything here is an immutable value. States carry complex amplitudes
even though the classifier only ever produces real ones.
"""
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .exceptions import (
    DimensionError,
    NormalizationError,
    ZeroProbabilityError,
)

STATE_TOL = 1e-12
OPERATOR_TOL = 1e-10
MAX_DENSE_DIM = 4096
# probabilities at or below this are treated as an impossible outcome
ZERO_PROBABILITY = 1e-30


def _frozen(values, dtype=np.complex128):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


class StateVector:
    """Complex amplitude vector over a finite-dimensional Hilbert space."""

    __slots__ = ("amplitudes",)

    def __init__(self, amplitudes):
        amps = _frozen(amplitudes).reshape(-1)
        if amps.size < 1:
            raise DimensionError("a state needs at least one amplitude")
        object.__setattr__(self, "amplitudes", amps)

    def __setattr__(self, name, value):
        raise AttributeError("StateVector is immutable")

    @classmethod
    def basis(cls, index, dim):
        """The computational basis ket ``|index>`` in dimension ``dim``."""
        if not 0 <= index < dim:
            raise DimensionError(f"basis index {index} outside dimension {dim}")
        amps = np.zeros(dim, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps)

    @property
    def dim(self):
        return self.amplitudes.size

    def norm_squared(self):
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def is_normalized(self, tol=STATE_TOL):
        return abs(self.norm_squared() - 1.0) <= tol

    def normalized(self):
        norm = np.sqrt(self.norm_squared())
        if norm == 0.0:
            raise NormalizationError("cannot normalize the zero vector")
        return StateVector(self.amplitudes / norm)

    def __len__(self):
        return self.dim

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)

    def __eq__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        return np.array_equal(self.amplitudes, other.amplitudes)

    def __hash__(self):
        return hash(self.amplitudes.tobytes())

    def __repr__(self):
        return f"StateVector(dim={self.dim}, amplitudes={self.amplitudes!r})"


def _as_state(value):
    return value if isinstance(value, StateVector) else StateVector(value)


def inner_product(a, b):
    """Return ``sum_i conj(b_i) * a_i``.

    Conjugate-symmetric: ``inner_product(a, b) == conj(inner_product(b, a))``.
    """
    a, b = _as_state(a), _as_state(b)
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return complex(np.vdot(b.amplitudes, a.amplitudes))


def outer_product(a, b):
    """Dense matrix ``|a><b|``."""
    a, b = _as_state(a), _as_state(b)
    return np.outer(a.amplitudes, b.amplitudes.conj())


def tensor_product(a, b):
    """Kronecker product; entry ``i * b.dim + j`` is ``a_i * b_j``."""
    a, b = _as_state(a), _as_state(b)
    return StateVector(np.kron(a.amplitudes, b.amplitudes))


def direct_sum(states, scale=1.0):
    """Concatenate ``states`` and multiply every amplitude by ``scale``."""
    states = [_as_state(s) for s in states]
    if not states:
        raise DimensionError("direct sum of an empty list")
    return StateVector(scale * np.concatenate([s.amplitudes for s in states]))


class ProjectorOperator:
    """Orthogonal projector in either implicit Gram form or dense form.

    The Gram form stores an orthonormal spanning set ``v_1 .. v_s`` and never
    builds the ``dim x dim`` matrix. With ``complement=True`` it represents
    ``1 - sum_l |v_l><v_l|`` instead, which is how the second outcome of a
    two-outcome measurement (and the identity, with an empty basis) is held.
    """

    def __init__(self, dim, basis=(), *, complement=False, matrix=None):
        self.dim = int(dim)
        self.complement = bool(complement)
        self._matrix = None
        if matrix is not None:
            matrix = np.asarray(matrix, dtype=np.complex128)
            if matrix.shape != (self.dim, self.dim):
                raise DimensionError(
                    f"projector matrix has shape {matrix.shape}, expected "
                    f"({self.dim}, {self.dim})"
                )
            self._matrix = _frozen(matrix)
            self.basis = ()
            return
        basis = tuple(_as_state(v) for v in basis)
        for v in basis:
            if v.dim != self.dim:
                raise DimensionError(
                    f"spanning vector of dim {v.dim} in a dim-{self.dim} projector"
                )
        self.basis = basis
        if basis:
            gram = self._basis_matrix().conj() @ self._basis_matrix().T
            err = np.max(np.abs(gram - np.eye(len(basis))))
            if err > OPERATOR_TOL:
                raise NormalizationError(
                    f"spanning vectors are not orthonormal (max deviation {err:.3g})"
                )

    @classmethod
    def from_vectors(cls, vectors):
        vectors = [_as_state(v) for v in vectors]
        if not vectors:
            raise DimensionError("need at least one vector to infer dimension")
        return cls(vectors[0].dim, vectors)

    @classmethod
    def from_matrix(cls, matrix):
        """Wrap a dense Hermitian idempotent matrix, checking both properties."""
        matrix = np.asarray(matrix, dtype=np.complex128)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionError(f"projector matrix must be square, got {matrix.shape}")
        if matrix.shape[0] > MAX_DENSE_DIM:
            raise DimensionError(
                f"dense projectors are limited to dimension {MAX_DENSE_DIM}"
            )
        if np.max(np.abs(matrix - matrix.conj().T), initial=0.0) > OPERATOR_TOL:
            raise NormalizationError("projector matrix is not Hermitian")
        if np.max(np.abs(matrix @ matrix - matrix), initial=0.0) > OPERATOR_TOL:
            raise NormalizationError("projector matrix is not idempotent")
        return cls(matrix.shape[0], matrix=matrix)

    @classmethod
    def identity(cls, dim):
        return cls(dim, (), complement=True)

    @property
    def is_dense(self):
        return self._matrix is not None

    @property
    def rank(self):
        if self.is_dense:
            return int(round(np.trace(self._matrix).real))
        return self.dim - len(self.basis) if self.complement else len(self.basis)

    def _basis_matrix(self):
        if not self.basis:
            return np.zeros((0, self.dim), dtype=np.complex128)
        return np.stack([v.amplitudes for v in self.basis])

    def complement_projector(self):
        """The projector ``1 - P``."""
        if self.is_dense:
            return ProjectorOperator(
                self.dim, matrix=np.eye(self.dim) - self._matrix
            )
        return ProjectorOperator(self.dim, self.basis, complement=not self.complement)

    def to_dense(self):
        """Materialize the matrix; refused above ``MAX_DENSE_DIM``."""
        if self.is_dense:
            return self._matrix
        if self.dim > MAX_DENSE_DIM:
            raise DimensionError(
                f"refusing to build a dense {self.dim}x{self.dim} projector "
                f"(limit {MAX_DENSE_DIM})"
            )
        b = self._basis_matrix()
        p = b.T @ b.conj()
        if self.complement:
            p = np.eye(self.dim) - p
        return p

    def dense(self):
        return ProjectorOperator(self.dim, matrix=self.to_dense())

    def apply(self, phi):
        """Return ``P|phi>`` as a raw amplitude array."""
        phi = _as_state(phi)
        self._check_dim(phi)
        if self.is_dense:
            return self._matrix @ phi.amplitudes
        b = self._basis_matrix()
        proj = b.T @ (b.conj() @ phi.amplitudes)
        return phi.amplitudes - proj if self.complement else proj

    def expectation(self, phi):
        """``<phi|P|phi>`` without materializing a Gram-form projector."""
        phi = _as_state(phi)
        self._check_dim(phi)
        if self.is_dense:
            return float(np.vdot(phi.amplitudes, self._matrix @ phi.amplitudes).real)
        coeffs = self._basis_matrix().conj() @ phi.amplitudes
        captured = float(np.sum(np.abs(coeffs) ** 2))
        return phi.norm_squared() - captured if self.complement else captured

    def _check_dim(self, phi):
        if phi.dim != self.dim:
            raise DimensionError(
                f"state of dim {phi.dim} measured with a dim-{self.dim} projector"
            )

    def __repr__(self):
        form = "dense" if self.is_dense else "gram"
        extra = ", complement" if self.complement else ""
        return f"ProjectorOperator(dim={self.dim}, rank={self.rank}, {form}{extra})"


@dataclass(frozen=True)
class MeasurementOutcome:
    label: str
    probability: float
    post_state: StateVector


def _require_normalized(phi):
    if not phi.is_normalized():
        raise NormalizationError(
            f"state has squared norm {phi.norm_squared()!r}, expected 1"
        )


def outcome_probability(p, phi):
    """Probability ``<phi|P|phi>`` of the outcome associated with ``p``."""
    phi = _as_state(phi)
    _require_normalized(phi)
    return min(1.0, max(0.0, p.expectation(phi)))


def collapse(p, phi, label="yes"):
    """Post-measurement state ``P|phi> / sqrt(<phi|P|phi>)``."""
    phi = _as_state(phi)
    prob = outcome_probability(p, phi)
    projected = p.apply(phi)
    norm = np.linalg.norm(projected)
    if prob <= ZERO_PROBABILITY or norm == 0.0:
        raise ZeroProbabilityError(f"outcome {label!r} has probability zero")
    # dividing by the realised norm rather than sqrt(prob) keeps the
    # post-measurement state unit-norm to machine precision
    return MeasurementOutcome(label, prob, StateVector(projected / norm))


def binary_measurement(p, yes="yes", no="no"):
    """The two-outcome measurement ``{P, 1 - P}`` keyed by label."""
    return {yes: p, no: p.complement_projector()}


def measure(projectors: Mapping[str, ProjectorOperator], phi, rng):
    """Sample one outcome of a projective measurement and collapse onto it.

    ``projectors`` must resolve the identity; probabilities are checked to
    sum to one within ``STATE_TOL``.
    """
    phi = _as_state(phi)
    labels: Sequence[str] = list(projectors)
    probs = np.array([outcome_probability(projectors[k], phi) for k in labels])
    if abs(probs.sum() - 1.0) > STATE_TOL:
        raise NormalizationError(
            f"outcome probabilities sum to {probs.sum()!r}; operators are not complete"
        )
    u = rng.random()
    cumulative = np.cumsum(probs)
    idx = int(np.searchsorted(cumulative, u, side="right"))
    idx = min(idx, len(labels) - 1)
    while probs[idx] <= ZERO_PROBABILITY:
        idx -= 1
    return collapse(projectors[labels[idx]], phi, labels[idx])
