"""Classical training: normalized sample matrix, SVD, principal components.

The SVD is a one-sided (Hestenes) Jacobi iteration. It orthogonalizes the
columns of the narrower orientation of the data matrix by plane rotations,
so work per sweep scales with ``min(m, n)**2 * max(m, n)``.
"""
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_interval
from .exceptions import (
    DegenerateSampleError,
    DimensionError,
    ModelIntegrityError,
    NumericalError,
    RankError,
)

NORM_TOL = 1e-12
ORTHO_TOL = 1e-8
RANK_TOL = 1e-10
DEFAULT_VARIANCE_THRESHOLD = 0.95

_MAX_SWEEPS = 80
_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class DataMatrix:
    """Vertically stacked sample rows, each scaled to unit l2 norm."""

    values: np.ndarray

    @property
    def m(self):
        return self.values.shape[0]

    @property
    def n(self):
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    def rank(self, tol=RANK_TOL):
        return svd(self, full_matrices=False).rank(tol)


@dataclass(frozen=True)
class SvdResult:
    """``A = U diag(singular_values) V^T``.

    With ``full_matrices=True`` U is m x m and V is n x n; the thin form keeps
    only the first ``q = min(m, n)`` columns of each.
    """

    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray

    def rank(self, tol=RANK_TOL):
        return int(np.count_nonzero(self.singular_values > tol))

    def reconstruct(self):
        q = self.singular_values.size
        return (self.U[:, :q] * self.singular_values) @ self.V[:, :q].T


@dataclass(frozen=True)
class PrincipalComponents:
    """Leading right singular vectors (rows of ``components``) and their weights."""

    components: np.ndarray
    singular_values: np.ndarray
    centered: bool = False
    mean: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        comps = np.atleast_2d(np.asarray(self.components, dtype=np.float64))
        sv = np.asarray(self.singular_values, dtype=np.float64).reshape(-1)
        if comps.shape[0] != sv.size:
            raise DimensionError(
                f"{comps.shape[0]} components but {sv.size} singular values"
            )
        if comps.shape[0] < 1:
            raise RankError("at least one principal component is required")
        gram = comps @ comps.T
        err = np.max(np.abs(gram - np.eye(comps.shape[0])))
        if err > ORTHO_TOL:
            raise ModelIntegrityError(
                f"components are not orthonormal (max deviation {err:.3g})"
            )
        # unit norm forces |v| <= 1; only rounding can push an entry past it
        comps = check_interval(comps, -1.0, 1.0, "component entry")
        comps.setflags(write=False)
        sv.setflags(write=False)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "singular_values", sv)

    @property
    def s(self):
        return self.components.shape[0]

    @property
    def n(self):
        return self.components.shape[1]

    def __len__(self):
        return self.s

    def __iter__(self):
        return iter(self.components)


def build_data_matrix(samples):
    """Stack ``samples`` as rows and scale each to unit l2 norm."""
    try:
        rows = [np.asarray(s, dtype=np.float64).reshape(-1) for s in samples]
    except (TypeError, ValueError) as exc:
        raise NumericalError(f"samples are not numeric: {exc}") from None
    if not rows:
        raise DimensionError("no samples given")
    n = rows[0].size
    if n < 1:
        raise DimensionError("samples must have at least one feature")
    for i, r in enumerate(rows):
        if r.size != n:
            raise DimensionError(f"sample {i} has length {r.size}, expected {n}")
    a = np.vstack(rows)
    if not np.all(np.isfinite(a)):
        raise NumericalError("samples contain non-finite values")
    norms = np.linalg.norm(a, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DegenerateSampleError(f"sample {zero[0]} is the zero vector")
    a = a / norms[:, None]
    a.setflags(write=False)
    return DataMatrix(a)


def _jacobi_columns(g):
    """Orthogonalize the columns of ``g`` in place; return the rotation matrix.

    On exit ``g_original = g @ v.T`` with mutually orthogonal columns of ``g``.
    """
    c = g.shape[1]
    v = np.eye(c)
    # columns at or below this squared norm are rounding noise
    floor = (_EPS * np.linalg.norm(g)) ** 2
    for _ in range(_MAX_SWEEPS):
        rotated = False
        for i in range(c - 1):
            for j in range(i + 1, c):
                gi, gj = g[:, i], g[:, j]
                alpha = gi @ gi
                beta = gj @ gj
                gamma = gi @ gj
                if min(alpha, beta) <= floor or abs(gamma) <= _EPS * np.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = np.copysign(1.0, zeta) / (abs(zeta) + np.hypot(1.0, zeta))
                cs = 1.0 / np.hypot(1.0, t)
                sn = cs * t
                new_i = cs * gi - sn * gj
                g[:, j] = sn * gi + cs * gj
                g[:, i] = new_i
                vi = v[:, i].copy()
                v[:, i] = cs * vi - sn * v[:, j]
                v[:, j] = sn * vi + cs * v[:, j]
        if not rotated:
            return v
    raise NumericalError(f"Jacobi SVD did not converge in {_MAX_SWEEPS} sweeps")


def _orthonormal_from(cols, size, complete):
    """Orthonormal basis whose leading columns match ``cols`` up to rounding.

    Columns of ``cols`` that are zero (null singular values) are filled in
    from the orthogonal complement.
    """
    q, r = np.linalg.qr(cols, mode="complete" if complete else "reduced")
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    q[:, : signs.size] *= signs
    return q if complete else q[:, : cols.shape[1]]


def svd(a, full_matrices=True):
    """Singular value decomposition of a :class:`DataMatrix` or 2-D array.

    Singular values are non-increasing. Signs are canonical: every right
    singular vector has its largest-magnitude entry positive (lowest index
    wins ties), with the matching left vector flipped alongside.
    """
    arr = np.array(a.values if isinstance(a, DataMatrix) else a, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericalError("matrix contains non-finite entries")
    m, n = arr.shape
    transposed = n > m
    g = arr.T.copy() if transposed else arr.copy()
    rows, cols = g.shape  # cols == min(m, n)

    rot = _jacobi_columns(g)
    sigma = np.linalg.norm(g, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    g = g[:, order]
    rot = rot[:, order]

    left = np.zeros_like(g)
    nz = sigma > 0.0
    left[:, nz] = g[:, nz] / sigma[nz]
    left = _orthonormal_from(left, rows, complete=full_matrices)
    # rot is square (cols x cols) and already orthogonal
    if transposed:
        u, v = rot, left
    else:
        u, v = left, rot

    q = cols
    for j in range(q):
        k = int(np.argmax(np.abs(v[:, j])))
        if v[k, j] < 0:
            v[:, j] = -v[:, j]
            u[:, j] = -u[:, j]
    sigma = np.where(sigma < 0.0, 0.0, sigma)
    for arr_ in (u, sigma, v):
        arr_.setflags(write=False)
    return SvdResult(u, sigma, v)


def n_components_for_variance(singular_values, threshold=DEFAULT_VARIANCE_THRESHOLD):
    """Smallest s whose leading singular values carry ``threshold`` of sum(sigma^2)."""
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"variance threshold must be in (0, 1], got {threshold!r}")
    singular_values = np.asarray(singular_values, dtype=np.float64)
    energy = singular_values**2
    total = energy.sum()
    if total == 0.0:
        raise RankError("data matrix has rank zero")
    ratio = np.cumsum(energy) / total
    s = int(np.searchsorted(ratio, threshold - 1e-15) + 1)
    return min(s, int(np.count_nonzero(singular_values > RANK_TOL)))


def extract_components(result, s):
    """First ``s`` right singular vectors, as rows, with their singular values."""
    if isinstance(s, bool) or int(s) != s or s < 1:
        raise RankError(f"component count must be a positive integer, got {s!r}")
    s = int(s)
    rank = result.rank()
    if s > rank:
        raise RankError(f"requested {s} components but numerical rank is {rank}")
    comps = result.V[:, :s].T.copy()
    return PrincipalComponents(comps, result.singular_values[:s].copy())


def fit_components(samples, n_components=None, variance_threshold=None, center=False):
    """Normalize samples, decompose, and keep the leading components.

    Exactly one of ``n_components`` / ``variance_threshold`` selects s; with
    neither, the default variance threshold is used. ``center`` subtracts the
    mean of the normalized rows before decomposing (off by default).
    """
    if n_components is not None and variance_threshold is not None:
        raise ValueError("give n_components or variance_threshold, not both")
    data = build_data_matrix(samples)
    values = data.values
    mean = None
    if center:
        mean = values.mean(axis=0)
        values = values - mean
    result = svd(values, full_matrices=False)
    if n_components is None:
        tau = DEFAULT_VARIANCE_THRESHOLD if variance_threshold is None else variance_threshold
        n_components = n_components_for_variance(result.singular_values, tau)
    pcs = extract_components(result, n_components)
    if center:
        return PrincipalComponents(pcs.components, pcs.singular_values, True, mean)
    return pcs
