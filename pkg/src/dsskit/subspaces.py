"""Distillable-subspace (DSS) search and certification.

A distillable subspace of a multipartite mixed state is a tensor product of
local subspaces, one per party, onto which the state projects to a pure
entangled state.  This module projects states onto local subspaces and
classifies the outcome, searches for distillable subspaces over subsets of
per-party orthonormal bases, independently re-verifies claimed
certificates, and checks the rank bound every genuine certificate must
satisfy.

The search family is restricted to subsets of supplied per-party bases
(computational by default).  Arbitrary-subspace search is a continuum
problem with no exact algorithm; basis subsets are exact, certifiable and
cover every worked example.  Callers can widen the family by supplying
rotated bases.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import prod
from typing import Iterable, Iterator, Literal, Mapping, Sequence

import numpy as np

from .entanglement import concurrence, dimension_signature, is_entangled_signature
from .errors import InvariantViolation, SearchSpaceTooLarge
from .linalg import (
    DEFAULT_TOLERANCE,
    ZERO_WEIGHT,
    Tolerance,
    as_matrix,
    dagger,
    identity,
    kron_all,
    numerical_rank,
)
from .states import DensityMatrix, Party, PureState, SystemShape, tensor_power

Classification = Literal["pure-entangled", "pure-product", "mixed", "zero"]

#: Default ceiling on the number of candidate subspaces a search may visit.
CANDIDATE_CAP = 1_000_000


@dataclass(frozen=True, eq=False)
class LocalSubspace:
    """Per-party orthonormal vector lists spanning a product subspace.

    ``parties`` pairs each label with a (local dim) x (subspace dim) matrix
    of orthonormal columns.  ``basis_indices`` records, when the subspace
    was carved out of per-party bases by index subsets, which columns were
    taken; it is bookkeeping only.
    """

    parties: tuple[tuple[str, np.ndarray], ...]
    basis_indices: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        cleaned = []
        for label, vecs in self.parties:
            v = as_matrix(vecs)
            if v.shape[1] == 0:
                raise InvariantViolation("vectors", f"party {label!r} has an empty vector list")
            if v.shape[1] > v.shape[0]:
                raise InvariantViolation(
                    "vectors", f"party {label!r} has more vectors than its dimension"
                )
            gram = dagger(v) @ v
            dev = float(np.max(np.abs(gram - np.eye(v.shape[1]))))
            if dev > 1e-9:
                raise InvariantViolation(
                    "orthonormal",
                    f"party {label!r} vectors are not orthonormal (deviation {dev:.3e})",
                )
            v = v.copy()
            v.setflags(write=False)
            cleaned.append((str(label), v))
        object.__setattr__(self, "parties", tuple(cleaned))

    @classmethod
    def full(cls, shape: SystemShape) -> "LocalSubspace":
        return cls(
            tuple((p.label, identity(p.dim)) for p in shape.parties),
            basis_indices=tuple(tuple(range(p.dim)) for p in shape.parties),
        )

    @classmethod
    def from_indices(
        cls,
        shape: SystemShape,
        indices: Mapping[str, Sequence[int]],
        bases: Mapping[str, np.ndarray] | None = None,
    ) -> "LocalSubspace":
        """Select columns of per-party bases (computational by default).

        Parties missing from ``indices`` keep their full local basis.
        """
        unknown = set(indices) - set(shape.labels)
        if unknown:
            raise InvariantViolation("label", f"unknown parties {sorted(unknown)}")
        resolved = _resolve_bases(shape, bases)
        parties = []
        recorded = []
        for p, basis in zip(shape.parties, resolved):
            idx = tuple(int(i) for i in indices.get(p.label, range(p.dim)))
            if not idx:
                raise InvariantViolation("vectors", f"party {p.label!r} has an empty index set")
            if any(i < 0 or i >= p.dim for i in idx):
                raise InvariantViolation(
                    "vectors", f"party {p.label!r} indices {idx} out of range for dim {p.dim}"
                )
            parties.append((p.label, basis[:, idx]))
            recorded.append(idx)
        return cls(tuple(parties), basis_indices=tuple(recorded))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.parties)

    @property
    def dims(self) -> tuple[int, ...]:
        """Subspace dimension per party."""
        return tuple(v.shape[1] for _, v in self.parties)

    def compression(self) -> np.ndarray:
        """Isometry from subspace coordinates into the ambient space."""
        return kron_all(v for _, v in self.parties)

    def projector(self) -> np.ndarray:
        b = self.compression()
        return b @ dagger(b)

    def subspace_shape(self) -> SystemShape:
        return SystemShape(tuple(Party(label, (v.shape[1],)) for label, v in self.parties))

    def _check_against(self, shape: SystemShape) -> None:
        if self.labels != shape.labels:
            raise InvariantViolation(
                "labels",
                f"subspace parties {self.labels} do not match state parties {shape.labels}",
            )
        for (label, v), p in zip(self.parties, shape.parties):
            if v.shape[0] != p.dim:
                raise InvariantViolation(
                    "dimension",
                    f"party {label!r} vectors have length {v.shape[0]}, local dim is {p.dim}",
                )


@dataclass(frozen=True, eq=False)
class ProjectionOutcome:
    """Result of projecting a state onto a local product subspace.

    ``weight`` is the trace before renormalization; ``state`` is the
    normalized projection in subspace coordinates (None exactly when the
    classification is "zero"); ``signature`` is the dimension signature of
    the projected pure state, recorded only for pure classifications.
    """

    weight: float
    state: DensityMatrix | None
    classification: Classification
    signature: tuple[int, ...] | None = None

    def __post_init__(self):
        if (self.classification == "zero") != (self.state is None):
            raise InvariantViolation("zero", "state must be absent exactly for zero weight")
        if self.classification == "zero" and self.weight != 0.0:
            raise InvariantViolation("zero", "zero classification requires weight 0")
        pure = self.classification in ("pure-entangled", "pure-product")
        if pure != (self.signature is not None):
            raise InvariantViolation("signature", "signature recorded exactly for pure outcomes")


@dataclass(frozen=True, eq=False)
class DssCertificate:
    """A local subspace together with its verified pure projection."""

    subspace: LocalSubspace
    outcome: ProjectionOutcome

    def __post_init__(self):
        if self.outcome.classification not in ("pure-entangled", "pure-product"):
            raise InvariantViolation(
                "classification", "a certificate requires a pure projection outcome"
            )


@dataclass(frozen=True)
class Refusal:
    """Why a claimed certificate failed: zero-weight, mixed, or product."""

    reason: Literal["zero-weight", "mixed", "product"]
    outcome: ProjectionOutcome


def project(
    rho: DensityMatrix, subspace: LocalSubspace, tol: Tolerance = DEFAULT_TOLERANCE
) -> ProjectionOutcome:
    """Project ``rho`` onto the subspace and classify the outcome.

    The projection is compressed to subspace coordinates (matrix elements
    between the subspace product vectors).  It is classified pure when the
    top eigenvalue fraction reaches ``1 - purity_atol``; a pure projection
    is entangled when some entry of its dimension signature exceeds 1.
    """
    subspace._check_against(rho.shape)
    b = subspace.compression()
    compressed = dagger(b) @ rho.mat @ b
    weight = float(np.real(np.trace(compressed)))
    if weight <= ZERO_WEIGHT:
        return ProjectionOutcome(weight=0.0, state=None, classification="zero")
    state = DensityMatrix(subspace.subspace_shape(), compressed / weight)
    evals, evecs = state.eigh(tol)
    if float(evals[0]) >= 1.0 - tol.purity_atol:
        psi = PureState(state.shape, evecs[:, 0])
        signature = dimension_signature(psi, tol)
        cls: Classification = (
            "pure-entangled" if is_entangled_signature(signature) else "pure-product"
        )
        return ProjectionOutcome(weight=weight, state=state, classification=cls, signature=signature)
    return ProjectionOutcome(weight=weight, state=state, classification="mixed")


def check_certificate(
    rho: DensityMatrix, subspace: LocalSubspace, tol: Tolerance = DEFAULT_TOLERANCE
) -> DssCertificate | Refusal:
    """Independently re-verify a claimed distillable subspace.

    Returns a certificate when the projection is pure and entangled, else a
    :class:`Refusal` naming the failed test.  Absence of a certificate is a
    result, not an error.
    """
    outcome = project(rho, subspace, tol)
    if outcome.classification == "zero":
        return Refusal("zero-weight", outcome)
    if outcome.classification == "mixed":
        return Refusal("mixed", outcome)
    if outcome.classification == "pure-product":
        return Refusal("product", outcome)
    return DssCertificate(subspace, outcome)


# ---------------------------------------------------------------------------
# Search over basis subsets
# ---------------------------------------------------------------------------


def _resolve_bases(
    shape: SystemShape, bases: Mapping[str, np.ndarray] | None
) -> list[np.ndarray]:
    """Per-party orthonormal bases as matrices, identity where unspecified."""
    resolved = []
    if bases:
        unknown = set(bases) - set(shape.labels)
        if unknown:
            raise InvariantViolation("label", f"unknown parties in bases: {sorted(unknown)}")
    for p in shape.parties:
        if bases and p.label in bases:
            b = as_matrix(bases[p.label])
            if b.shape != (p.dim, p.dim):
                raise InvariantViolation(
                    "dimension",
                    f"basis for party {p.label!r} must be {p.dim}x{p.dim}, got {b.shape}",
                )
            dev = float(np.max(np.abs(dagger(b) @ b - np.eye(p.dim))))
            if dev > 1e-9:
                raise InvariantViolation(
                    "orthonormal", f"basis for party {p.label!r} is not orthonormal"
                )
            resolved.append(b)
        else:
            resolved.append(identity(p.dim))
    return resolved


def _subset_indices(dim: int) -> list[tuple[int, ...]]:
    """All nonempty index subsets of range(dim), by ascending bitmask."""
    out = []
    for mask in range(1, 1 << dim):
        out.append(tuple(i for i in range(dim) if (mask >> i) & 1))
    return out


def candidate_count(shape: SystemShape) -> int:
    return prod((1 << d) - 1 for d in shape.dims)


def iter_candidates(shape: SystemShape) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Candidate per-party index subsets in canonical order.

    The order is lexicographic over (party position, subset bitmask
    ascending) with the first party most significant, so searches are
    deterministic however they are scheduled.
    """
    per_party = [_subset_indices(d) for d in shape.dims]
    return itertools.product(*per_party)


class _SearchContext:
    """Shared read-only data for one search over a state."""

    def __init__(
        self,
        rho: DensityMatrix,
        bases: Mapping[str, np.ndarray] | None,
        tol: Tolerance,
    ):
        self.rho = rho
        self.shape = rho.shape
        self.tol = tol
        self.bases = _resolve_bases(rho.shape, bases)
        self.bases_map = dict(zip(rho.shape.labels, self.bases))

        evals, evecs = rho.eigh(tol)
        cutoff = tol.rank_rtol * max(1.0, float(evals[0]))
        keep = evals > cutoff
        weights = evals[keep]
        vectors = evecs[:, keep]
        # Express the significant eigenvectors in the supplied product basis,
        # scaled by sqrt(weight): restricting their components to a candidate
        # index set then reads off the unnormalized projected ensemble.
        change = kron_all(self.bases)
        coords = dagger(change) @ vectors
        scaled = coords * np.sqrt(weights)[np.newaxis, :]
        self.ensemble = np.ascontiguousarray(scaled.T).reshape(
            (len(weights),) + self.shape.dims
        )

    def restricted(self, indices: tuple[tuple[int, ...], ...]) -> np.ndarray:
        """Ensemble components supported on the candidate index set, flattened."""
        rank = self.ensemble.shape[0]
        grid = np.ix_(range(rank), *indices)
        return self.ensemble[grid].reshape(rank, -1)

    def subspace(self, indices: tuple[tuple[int, ...], ...]) -> LocalSubspace:
        return LocalSubspace.from_indices(
            self.shape,
            {label: idx for label, idx in zip(self.shape.labels, indices)},
            bases=self.bases_map,
        )

    def survives_prune(self, indices: tuple[tuple[int, ...], ...]) -> bool:
        """Cheap exclusion test on the restricted ensemble.

        The projected state is pure only if the restricted ensemble has
        rank at most one.  Candidates are skipped only when they are
        clearly zero-weight or clearly mixed (an order of magnitude beyond
        the thresholds), so borderline cases always fall through to the
        exact classification in :func:`project`.
        """
        restricted = self.restricted(indices)
        weight = float(np.sum(np.abs(restricted) ** 2))
        if weight <= ZERO_WEIGHT * 0.1:
            return False
        s = np.linalg.svd(restricted, compute_uv=False)
        residual = float(np.sum(s[1:] ** 2))
        return residual <= 10.0 * self.tol.purity_atol * weight


def find_dss(
    rho: DensityMatrix,
    bases: Mapping[str, np.ndarray] | None = None,
    *,
    require_entangled: bool = True,
    min_signature: Sequence[int] | None = None,
    tol: Tolerance = DEFAULT_TOLERANCE,
    prune: bool = True,
    candidate_cap: int = CANDIDATE_CAP,
    workers: int = 1,
) -> list[DssCertificate]:
    """Search subsets of per-party bases for distillable subspaces.

    Enumerates every product of nonempty per-party index subsets (so
    ``prod(2^d_p - 1)`` candidates) in canonical order and returns a
    certificate for each candidate whose projection is pure, entangled
    (unless ``require_entangled`` is off) and at least ``min_signature``
    componentwise.  ``prune`` short-circuits candidates whose projection is
    provably zero or mixed from the state's eigenvectors alone; pruned and
    unpruned searches return identical results.  Candidate evaluation may
    run on ``workers`` threads; results are merged in canonical order either
    way.
    """
    count = candidate_count(rho.shape)
    if count > candidate_cap:
        raise SearchSpaceTooLarge(count, candidate_cap)
    if min_signature is not None:
        min_signature = tuple(int(m) for m in min_signature)
        if len(min_signature) != len(rho.shape.parties):
            raise InvariantViolation("min_signature", "one entry per party required")

    ctx = _SearchContext(rho, bases, tol)

    def evaluate(indices: tuple[tuple[int, ...], ...]) -> DssCertificate | None:
        if prune and not ctx.survives_prune(indices):
            return None
        outcome = project(rho, ctx.subspace(indices), tol)
        if outcome.classification == "pure-entangled" or (
            not require_entangled and outcome.classification == "pure-product"
        ):
            if min_signature is not None and any(
                n < m for n, m in zip(outcome.signature, min_signature)
            ):
                return None
            return DssCertificate(ctx.subspace(indices), outcome)
        return None

    candidates = iter_candidates(rho.shape)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            evaluated = list(pool.map(evaluate, candidates, chunksize=64))
    else:
        evaluated = [evaluate(c) for c in candidates]
    return [cert for cert in evaluated if cert is not None]


@dataclass(frozen=True, eq=False)
class PurifyingSubspace:
    """A subspace whose mixed projection beats a reference concurrence."""

    subspace: LocalSubspace
    outcome: ProjectionOutcome
    measure_before: float
    measure_after: float


def find_purifying_subspaces(
    rho: DensityMatrix,
    bases: Mapping[str, np.ndarray] | None = None,
    *,
    reference: DensityMatrix | float | None = None,
    tol: Tolerance = DEFAULT_TOLERANCE,
    candidate_cap: int = CANDIDATE_CAP,
) -> list[PurifyingSubspace]:
    """Search for subspaces whose mixed projection has higher concurrence.

    The measure is the two-qubit concurrence, so only candidates whose
    projected state is a 2 (x) 2 two-party state are assessed; all others
    are skipped.  ``reference`` fixes the concurrence to beat: a number, a
    two-qubit state, or (by default) the single-copy base of a state built
    with :func:`~dsskit.states.tensor_power`.
    """
    if reference is None:
        if rho.copy_base is None:
            raise InvariantViolation(
                "reference",
                "pass reference= (a state or a concurrence); the state is not a tracked tensor power",
            )
        reference = rho.copy_base
    if isinstance(reference, DensityMatrix):
        measure_before = concurrence(reference, tol)
    else:
        measure_before = float(reference)

    count = candidate_count(rho.shape)
    if count > candidate_cap:
        raise SearchSpaceTooLarge(count, candidate_cap)

    ctx = _SearchContext(rho, bases, tol)
    found = []
    for indices in iter_candidates(rho.shape):
        sub = ctx.subspace(indices)
        if len(indices) != 2 or sub.dims != (2, 2):
            continue  # concurrence undefined for this projected shape
        outcome = project(rho, sub, tol)
        if outcome.classification != "mixed":
            continue
        measure_after = concurrence(outcome.state, tol)
        if measure_after > measure_before:
            found.append(PurifyingSubspace(sub, outcome, measure_before, measure_after))
    return found


# ---------------------------------------------------------------------------
# Rank bound
# ---------------------------------------------------------------------------


def rank_bound(shape: SystemShape, copies: int, signature: Sequence[int]) -> int:
    """Largest rank of an n-copy state that can still project to a pure
    state of the given dimension signature: ``(prod dims)^n - prod(n_i) + 1``.
    """
    copies = int(copies)
    if copies < 1:
        raise InvariantViolation("copies", f"copies must be >= 1, got {copies}")
    signature = tuple(int(s) for s in signature)
    if any(s < 1 for s in signature):
        raise InvariantViolation("signature", f"signature entries must be >= 1, got {signature}")
    return shape.total_dim**copies - prod(signature) + 1


@dataclass(frozen=True)
class RankBoundReport:
    rank: int
    bound: int
    satisfied: bool


def check_rank_bound(
    rho: DensityMatrix,
    copies: int,
    cert: DssCertificate,
    tol: Tolerance = DEFAULT_TOLERANCE,
) -> RankBoundReport:
    """Compare the measured rank of ``rho^(x copies)`` against the bound.

    ``cert`` must have been produced from that tensor power.  Any genuine
    certificate satisfies the bound; an unsatisfied report flags a
    numerical-tolerance inconsistency rather than a counterexample.
    """
    if cert.outcome.signature is None:
        raise InvariantViolation("signature", "certificate lacks a dimension signature")
    sigma_n = tensor_power(rho, copies)
    rank = numerical_rank(sigma_n.mat, tol)
    bound = rank_bound(rho.shape, copies, cert.outcome.signature)
    return RankBoundReport(rank=rank, bound=bound, satisfied=rank <= bound)
