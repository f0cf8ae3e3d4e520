"""Dense complex matrix kernel.

Tensor products, partial traces, Hermitian eigendecomposition, singular
value decomposition and tolerance-based numerical rank: the substrate all
higher-level modules compute on.  Everything here is a pure function on
plain ``numpy`` arrays (complex128, row-major); the index convention for
composite systems is most-significant-first, i.e. the left tensor factor
owns the high bits of a flat index.

Matrices are capped at side ``MAX_SIDE``.  The problem sizes this package
targets never exceed a few qubits per party, so a dense representation is
the honest choice and anything larger signals a modelling mistake.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from math import prod
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionCapError, InvariantViolation

MAX_SIDE = 4096

#: Below this, a projector weight / branch probability counts as zero.
ZERO_WEIGHT = 1e-12

_EINSUM_LETTERS = string.ascii_lowercase + string.ascii_uppercase


@dataclass(frozen=True)
class Tolerance:
    """Numerical thresholds for rank, hermiticity, positivity and purity checks.

    ``rank_rtol`` is a relative singular-value cutoff; the ``*_atol`` fields
    are absolute.  Double precision leaves several orders of magnitude of
    headroom over the defaults at the matrix sizes handled here.
    """

    rank_rtol: float = 1e-9
    herm_atol: float = 1e-9
    psd_atol: float = 1e-9
    purity_atol: float = 1e-9

    def __post_init__(self):
        for name in ("rank_rtol", "herm_atol", "psd_atol", "purity_atol"):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0:
                raise InvariantViolation(
                    name, f"{name} must lie in [0, 1), got {value!r}"
                )


DEFAULT_TOLERANCE = Tolerance()


def as_matrix(m, *, cap: int = MAX_SIDE) -> np.ndarray:
    """Coerce ``m`` to a finite 2-D complex array, enforcing the size cap."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim == 1:
        raise InvariantViolation("shape", "expected a 2-D matrix, got a vector")
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InvariantViolation(
            "shape", f"expected a nonempty 2-D matrix, got shape {arr.shape}"
        )
    if arr.shape[0] > cap or arr.shape[1] > cap:
        raise DimensionCapError(
            f"matrix of shape {arr.shape} exceeds the dense size cap {cap}"
        )
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise InvariantViolation("finite", "matrix entries must be finite")
    return arr


def as_vector(v, *, cap: int = MAX_SIDE) -> np.ndarray:
    """Coerce ``v`` to a finite 1-D complex array."""
    arr = np.asarray(v, dtype=np.complex128).reshape(-1)
    if arr.size == 0 or arr.size > cap:
        raise InvariantViolation("shape", f"vector length {arr.size} out of range")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise InvariantViolation("finite", "vector entries must be finite")
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def kron(a, b) -> np.ndarray:
    """Kronecker product with the left factor most significant.

    Row index ``(i_a, i_b)`` maps to ``i_a * b_rows + i_b``, matching the
    flat-index convention used for multipartite states throughout.
    """
    a = as_matrix(a)
    b = as_matrix(b)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if rows > MAX_SIDE or cols > MAX_SIDE:
        raise DimensionCapError(
            f"kron product of shape ({rows}, {cols}) exceeds the cap {MAX_SIDE}"
        )
    return np.kron(a, b)


def kron_all(mats: Iterable[np.ndarray]) -> np.ndarray:
    """Left-to-right Kronecker product of a nonempty sequence of matrices."""
    mats = list(mats)
    if not mats:
        raise InvariantViolation("factors", "kron_all needs at least one factor")
    out = as_matrix(mats[0])
    for m in mats[1:]:
        out = kron(out, m)
    return out


def trace(m) -> complex:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise InvariantViolation("shape", "trace needs a square matrix")
    return complex(np.trace(m))


def partial_trace(m, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out all subsystems not listed in ``keep``.

    ``dims`` lists the subsystem dimensions in most-significant-first order;
    ``keep`` holds the indices of the subsystems to retain, which keep their
    relative order in the result.  The total trace is preserved.  An empty
    ``keep`` is a caller error: the scalar trace has its own accessor.
    """
    m = as_matrix(m)
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise InvariantViolation("dims", f"subsystem dims must be >= 1, got {dims}")
    total = prod(dims)
    if m.shape != (total, total):
        raise InvariantViolation(
            "shape",
            f"matrix side {m.shape} does not match product of dims {dims} = {total}",
        )
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise InvariantViolation("keep", "keep set must be nonempty")
    n = len(dims)
    if any(k < 0 or k >= n for k in keep):
        raise InvariantViolation("keep", f"keep indices {keep} out of range for {n} subsystems")
    if 2 * n > len(_EINSUM_LETTERS):
        raise DimensionCapError(f"too many subsystems ({n}) for partial_trace")

    keepset = set(keep)
    row = list(_EINSUM_LETTERS[:n])
    col = []
    out_row = []
    out_col = []
    nxt = n
    for i in range(n):
        if i in keepset:
            letter = _EINSUM_LETTERS[nxt]
            nxt += 1
            col.append(letter)
            out_row.append(row[i])
            out_col.append(letter)
        else:
            col.append(row[i])  # repeated letter contracts the traced subsystem
    subscript = "".join(row) + "".join(col) + "->" + "".join(out_row) + "".join(out_col)
    reduced = np.einsum(subscript, m.reshape(dims + dims))
    side = prod(dims[k] for k in keep)
    return reduced.reshape(side, side)


def is_hermitian(m, atol: float = DEFAULT_TOLERANCE.herm_atol) -> bool:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m - dagger(m))) <= atol)


def eig_hermitian(m, tol: Tolerance = DEFAULT_TOLERANCE) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Returns ``(w, V)`` with ``m = V @ diag(w) @ V†`` and orthonormal
    eigenvector columns.  Rejects inputs whose anti-Hermitian part exceeds
    ``tol.herm_atol``.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise InvariantViolation("shape", "eig_hermitian needs a square matrix")
    deviation = float(np.max(np.abs(m - dagger(m))))
    if deviation > tol.herm_atol:
        raise InvariantViolation(
            "hermitian", f"matrix is not Hermitian (max deviation {deviation:.3e})"
        )
    w, v = np.linalg.eigh((m + dagger(m)) / 2.0)
    return w[::-1].copy(), v[:, ::-1].copy()


def svd(m) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Singular value decomposition ``m = left @ diag(s) @ right†``.

    ``left`` and ``right`` have orthonormal columns; ``s`` is descending and
    nonnegative.
    """
    m = as_matrix(m)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    return u, s, dagger(vh)


def singular_values(m) -> np.ndarray:
    return np.linalg.svd(as_matrix(m), compute_uv=False)


def numerical_rank(m, tol: Tolerance = DEFAULT_TOLERANCE) -> int:
    """Count singular values above ``rank_rtol * max(1, largest singular value)``.

    The ``max(1, .)`` floor makes the cutoff absolute for matrices of small
    norm, so near-zero matrices report rank 0 instead of being rescaled into
    full rank.
    """
    s = singular_values(m)
    if s.size == 0:
        return 0
    cutoff = tol.rank_rtol * max(1.0, float(s[0]))
    return int(np.count_nonzero(s > cutoff))


def spectral_norm(m) -> float:
    s = singular_values(m)
    return float(s[0]) if s.size else 0.0


def identity(n: int) -> np.ndarray:
    return np.eye(int(n), dtype=np.complex128)
