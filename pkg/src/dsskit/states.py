"""Multipartite state model.

Labelled system shapes, validated density matrices and pure states,
copy-regrouped tensor powers, and the preset states used by the worked
examples.  All value types are immutable; constructing one runs its full
invariant check, so any ``DensityMatrix`` or ``PureState`` in circulation
is known to be valid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod, sqrt
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionCapError, InvariantViolation
from .linalg import (
    MAX_SIDE,
    DEFAULT_TOLERANCE,
    Tolerance,
    as_matrix,
    as_vector,
    dagger,
    eig_hermitian,
    partial_trace,
)

TRACE_ATOL = 1e-9
NORM_ATOL = 1e-9


@dataclass(frozen=True)
class Party:
    """One labelled party and the factorization of its local space.

    ``dims`` lists the party's subsystems in order (a single entry for a
    plain party; one entry per copy after :func:`tensor_power`).  The local
    dimension is their product.
    """

    label: str
    dims: tuple[int, ...]

    def __post_init__(self):
        if not isinstance(self.label, str) or not self.label:
            raise InvariantViolation("label", f"party label must be a nonempty string, got {self.label!r}")
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if not dims:
            raise InvariantViolation("dims", f"party {self.label!r} has no subsystems")
        if any(d < 1 for d in dims):
            raise InvariantViolation("dims", f"party {self.label!r} has a subsystem of dim < 1: {dims}")

    @property
    def dim(self) -> int:
        return prod(self.dims)


def _as_party(entry) -> Party:
    if isinstance(entry, Party):
        return entry
    label, dims = entry
    if isinstance(dims, int):
        dims = (dims,)
    return Party(str(label), tuple(dims))


@dataclass(frozen=True)
class SystemShape:
    """Ordered list of parties; fixes the tensor factorization of a state.

    Flat indices are most-significant-first in party order (and, within a
    party, in subsystem order).
    """

    parties: tuple[Party, ...]

    def __post_init__(self):
        parties = tuple(_as_party(p) for p in self.parties)
        object.__setattr__(self, "parties", parties)
        if not parties:
            raise InvariantViolation("parties", "a system needs at least one party")
        labels = [p.label for p in parties]
        if len(set(labels)) != len(labels):
            raise InvariantViolation("labels", f"party labels must be unique, got {labels}")
        if self.total_dim > MAX_SIDE:
            raise DimensionCapError(
                f"total dimension {self.total_dim} exceeds the cap {MAX_SIDE}"
            )

    @classmethod
    def of(cls, *specs) -> "SystemShape":
        """Build from ``(label, dim)`` or ``(label, dims-tuple)`` pairs."""
        return cls(tuple(_as_party(s) for s in specs))

    @classmethod
    def qubits(cls, labels: str | int) -> "SystemShape":
        """A register of single qubits, e.g. ``qubits("ABC")`` or ``qubits(3)``."""
        if isinstance(labels, int):
            labels = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"[:labels]
        return cls(tuple(Party(ch, (2,)) for ch in labels))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(p.label for p in self.parties)

    @property
    def dims(self) -> tuple[int, ...]:
        """Per-party local dimensions."""
        return tuple(p.dim for p in self.parties)

    @property
    def total_dim(self) -> int:
        return prod(self.dims)

    def party_index(self, label: str) -> int:
        for i, p in enumerate(self.parties):
            if p.label == label:
                return i
        raise InvariantViolation("label", f"no party labelled {label!r} in {self.labels}")

    def party(self, label: str) -> Party:
        return self.parties[self.party_index(label)]


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A Hermitian, positive-semidefinite, unit-trace matrix over a shape.

    ``copy_base``/``copies`` record provenance when the state was built by
    :func:`tensor_power`; they take no part in validation or comparison.
    """

    shape: SystemShape
    mat: np.ndarray
    copy_base: "DensityMatrix | None" = field(default=None, repr=False, compare=False)
    copies: int = field(default=1, repr=False, compare=False)

    def __post_init__(self):
        mat = as_matrix(self.mat)
        d = self.shape.total_dim
        if mat.shape != (d, d):
            raise InvariantViolation(
                "dimension",
                f"matrix side {mat.shape} does not match shape total dim {d}",
            )
        deviation = float(np.max(np.abs(mat - dagger(mat))))
        if deviation > DEFAULT_TOLERANCE.herm_atol:
            raise InvariantViolation(
                "hermitian", f"density matrix is not Hermitian (max deviation {deviation:.3e})"
            )
        mat = (mat + dagger(mat)) / 2.0  # kill anti-Hermitian roundoff
        tr = float(np.real(np.trace(mat)))
        if abs(tr - 1.0) > TRACE_ATOL:
            raise InvariantViolation("trace", f"trace must be 1, got {tr!r}")
        lowest = float(np.min(np.linalg.eigvalsh(mat)))
        if lowest < -DEFAULT_TOLERANCE.psd_atol:
            raise InvariantViolation(
                "positive-semidefinite",
                f"density matrix has a negative eigenvalue {lowest:.3e}",
            )
        mat = mat.copy()
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)

    @classmethod
    def from_pure(cls, psi: "PureState") -> "DensityMatrix":
        v = psi.amplitudes
        return cls(psi.shape, np.outer(v, np.conj(v)))

    @classmethod
    def mixture(cls, shape: SystemShape, terms: Iterable[tuple[float, np.ndarray]]) -> "DensityMatrix":
        """Convex mixture of pure components given as (weight, vector) pairs."""
        d = shape.total_dim
        mat = np.zeros((d, d), dtype=np.complex128)
        for w, vec in terms:
            v = as_vector(vec)
            mat += float(w) * np.outer(v, np.conj(v))
        return cls(shape, mat)

    def trace(self) -> float:
        return float(np.real(np.trace(self.mat)))

    def eigh(self, tol: Tolerance = DEFAULT_TOLERANCE) -> tuple[np.ndarray, np.ndarray]:
        return eig_hermitian(self.mat, tol)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.mat)[::-1].copy()

    def is_pure(self, tol: Tolerance = DEFAULT_TOLERANCE) -> bool:
        return bool(self.eigenvalues()[0] >= 1.0 - tol.purity_atol)

    def top_eigenstate(self, tol: Tolerance = DEFAULT_TOLERANCE) -> "PureState":
        _, v = self.eigh(tol)
        return PureState(self.shape, v[:, 0])

    def reduced(self, labels: Iterable[str]) -> "DensityMatrix":
        """Reduced state on the named parties (order as in the shape)."""
        labels = set(labels)
        keep = [i for i, p in enumerate(self.shape.parties) if p.label in labels]
        missing = labels - {p.label for p in self.shape.parties}
        if missing:
            raise InvariantViolation("label", f"unknown parties {sorted(missing)}")
        red = partial_trace(self.mat, self.shape.dims, keep)
        sub = SystemShape(tuple(self.shape.parties[i] for i in keep))
        return DensityMatrix(sub, red)

    def allclose(self, other: "DensityMatrix", atol: float = 1e-9) -> bool:
        return self.shape.dims == other.shape.dims and bool(
            np.max(np.abs(self.mat - other.mat)) <= atol
        )


@dataclass(frozen=True, eq=False)
class PureState:
    """A unit-norm state vector over a shape."""

    shape: SystemShape
    amplitudes: np.ndarray

    def __post_init__(self):
        vec = as_vector(self.amplitudes)
        d = self.shape.total_dim
        if vec.size != d:
            raise InvariantViolation(
                "dimension", f"vector length {vec.size} does not match shape total dim {d}"
            )
        nrm = float(np.linalg.norm(vec))
        if abs(nrm - 1.0) > NORM_ATOL:
            raise InvariantViolation("norm", f"state vector norm must be 1, got {nrm!r}")
        vec = vec.copy()
        vec.setflags(write=False)
        object.__setattr__(self, "amplitudes", vec)

    def to_density(self) -> DensityMatrix:
        return DensityMatrix.from_pure(self)

    def reduced(self, labels: Iterable[str]) -> DensityMatrix:
        return self.to_density().reduced(labels)

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def fidelity_with_pure(rho: DensityMatrix, psi: PureState) -> float:
    """``<psi| rho |psi>``; requires matching total dimensions."""
    if rho.shape.total_dim != psi.shape.total_dim:
        raise InvariantViolation("dimension", "state and reference dimensions differ")
    v = psi.amplitudes
    return float(np.real(np.conj(v) @ rho.mat @ v))


def tensor_power(rho: DensityMatrix, n: int) -> DensityMatrix:
    """``n`` copies of ``rho``, regrouped so each party holds all its copies.

    The flat kron of copies orders subsystems copy-major; here rows and
    columns are explicitly permuted to party-major order, so party ``A``
    holds its copy-1 subsystems followed by copy-2 and so on, contiguously.
    Local subspaces of a party's enlarged space are then contiguous blocks.
    """
    n = int(n)
    if n < 1:
        raise InvariantViolation("copies", f"copies must be >= 1, got {n}")
    if n == 1:
        return rho
    total = rho.shape.total_dim**n
    if total > MAX_SIDE:
        raise DimensionCapError(
            f"{n} copies give total dimension {total}, above the cap {MAX_SIDE}"
        )
    big = rho.mat
    for _ in range(n - 1):
        big = np.kron(big, rho.mat)

    sizes = list(rho.shape.dims)
    k = len(sizes)
    axes = sizes * n  # copy-major axis sizes
    order = [c * k + p for p in range(k) for c in range(n)]  # party-major
    perm = order + [n * k + o for o in order]
    mat = big.reshape(tuple(axes) * 2).transpose(perm).reshape(total, total)

    parties = tuple(Party(p.label, p.dims * n) for p in rho.shape.parties)
    return DensityMatrix(SystemShape(parties), mat, copy_base=rho, copies=n)


# ---------------------------------------------------------------------------
# Preset states
# ---------------------------------------------------------------------------


def basis_vector(dim: int, index: int) -> np.ndarray:
    v = np.zeros(int(dim), dtype=np.complex128)
    v[int(index)] = 1.0
    return v


def product_basis_vector(shape: SystemShape, occupations: Sequence[int]) -> np.ndarray:
    """Computational product vector, one occupation index per party."""
    if len(occupations) != len(shape.parties):
        raise InvariantViolation("occupations", "one index per party required")
    vec = np.ones(1, dtype=np.complex128)
    for p, occ in zip(shape.parties, occupations):
        vec = np.kron(vec, basis_vector(p.dim, occ))
    return vec


def bell_vectors() -> dict[str, np.ndarray]:
    """The four Bell vectors on two qubits, keyed phi+/phi-/psi+/psi-."""
    s = 1.0 / sqrt(2.0)
    return {
        "phi+": np.array([s, 0, 0, s], dtype=np.complex128),
        "phi-": np.array([s, 0, 0, -s], dtype=np.complex128),
        "psi+": np.array([0, s, s, 0], dtype=np.complex128),
        "psi-": np.array([0, s, -s, 0], dtype=np.complex128),
    }


def bell_state(kind: str = "phi+") -> PureState:
    vecs = bell_vectors()
    if kind not in vecs:
        raise InvariantViolation("kind", f"unknown Bell state {kind!r}, expected one of {sorted(vecs)}")
    return PureState(SystemShape.qubits("AB"), vecs[kind])


def werner(F: float) -> DensityMatrix:
    """Werner state ``F [phi+] + (1-F)/3 ([phi-] + [psi+] + [psi-])``."""
    F = float(F)
    if not 0.0 <= F <= 1.0:
        raise InvariantViolation("F", f"F must lie in [0, 1], got {F}")
    vecs = bell_vectors()
    q = (1.0 - F) / 3.0
    return DensityMatrix.mixture(
        SystemShape.qubits("AB"),
        [(F, vecs["phi+"]), (q, vecs["phi-"]), (q, vecs["psi+"]), (q, vecs["psi-"])],
    )


def ghz_state() -> PureState:
    """``(|000> + |111>)/sqrt(2)`` on three qubits A, B, C."""
    shape = SystemShape.qubits("ABC")
    v = (product_basis_vector(shape, (0, 0, 0)) + product_basis_vector(shape, (1, 1, 1))) / sqrt(2.0)
    return PureState(shape, v)


def w_state() -> PureState:
    """The standard W state ``(|100> + |010> + |001>)/sqrt(3)``."""
    shape = SystemShape.qubits("ABC")
    v = (
        product_basis_vector(shape, (1, 0, 0))
        + product_basis_vector(shape, (0, 1, 0))
        + product_basis_vector(shape, (0, 0, 1))
    ) / sqrt(3.0)
    return PureState(shape, v)


def w_state_variant() -> PureState:
    """A W-type state with components |100>, |010>, |011>.

    Note the third component is |011>, not the standard |001>; this variant
    is kept alongside :func:`w_state` because both appear in circulation.
    Its single-party reduced ranks are (2, 2, 2), like the standard W.
    """
    shape = SystemShape.qubits("ABC")
    v = (
        product_basis_vector(shape, (1, 0, 0))
        + product_basis_vector(shape, (0, 1, 0))
        + product_basis_vector(shape, (0, 1, 1))
    ) / sqrt(3.0)
    return PureState(shape, v)


def ghz_w_pair() -> tuple[PureState, PureState]:
    """The (GHZ, W-variant) pair of inequivalent three-qubit states."""
    return ghz_state(), w_state_variant()


def three_qubit_example(p: float) -> DensityMatrix:
    """``p [GHZ] + (1-p) [|011>]`` on three qubits.

    The single-copy state admits no distillable subspace over computational
    subsets, while two copies do; it drives the GHZ distillation example.
    """
    p = float(p)
    if not 0.0 < p <= 1.0:
        raise InvariantViolation("p", f"p must lie in (0, 1], got {p}")
    shape = SystemShape.qubits("ABC")
    ghz = ghz_state().amplitudes
    prod_state = product_basis_vector(shape, (0, 1, 1))
    return DensityMatrix.mixture(shape, [(p, ghz), (1.0 - p, prod_state)])


def filter_example(lam: float) -> DensityMatrix:
    """``lam [psi] + (1-lam) [|01>]`` with ``psi = (sqrt(3)/2)|00> + (1/2)|11>``.

    A rank-2 two-qubit mixture whose entanglement of formation a local
    filter can raise; see :func:`dsskit.entanglement.filter_comparison`.
    """
    lam = float(lam)
    if not 0.0 < lam <= 1.0:
        raise InvariantViolation("lambda", f"lambda must lie in (0, 1], got {lam}")
    shape = SystemShape.qubits("AB")
    psi = sqrt(3.0) / 2.0 * product_basis_vector(shape, (0, 0)) + 0.5 * product_basis_vector(shape, (1, 1))
    return DensityMatrix.mixture(shape, [(lam, psi), (1.0 - lam, product_basis_vector(shape, (0, 1)))])


def maximally_mixed(shape: SystemShape) -> DensityMatrix:
    d = shape.total_dim
    return DensityMatrix(shape, np.eye(d, dtype=np.complex128) / d)
