"""Seeded generators and independent oracles shared by the test modules."""

from __future__ import annotations

import numpy as np

from dsskit import DensityMatrix, Party, PureState, SystemShape


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_pure_vector(rng: np.random.Generator, d: int) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_pure_state(rng: np.random.Generator, shape: SystemShape) -> PureState:
    return PureState(shape, random_pure_vector(rng, shape.total_dim))


def random_density(rng: np.random.Generator, shape: SystemShape, rank: int | None = None) -> DensityMatrix:
    d = shape.total_dim
    rank = d if rank is None else min(rank, d)
    vectors = random_unitary(rng, d)[:, :rank]
    weights = rng.dirichlet(np.ones(rank))
    mat = (vectors * weights) @ np.conj(vectors).T
    return DensityMatrix(shape, mat)


def random_invertible_contraction(rng: np.random.Generator, d: int, smin: float = 0.2) -> np.ndarray:
    """Random operator with singular values in [smin, 1]: contractive and invertible."""
    s = rng.uniform(smin, 1.0, size=d)
    s[0] = 1.0  # pin the spectral norm at 1
    return random_unitary(rng, d) @ np.diag(s) @ random_unitary(rng, d)


def random_contraction(rng: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    """Random operator with spectral norm <= 1 and a chosen rank."""
    rank = d if rank is None else rank
    s = np.zeros(d)
    s[:rank] = rng.uniform(0.1, 1.0, size=rank)
    if rank:
        s[0] = 1.0
    return random_unitary(rng, d) @ np.diag(s) @ random_unitary(rng, d)


def flat_index(indices, dims) -> int:
    value = 0
    for i, d in zip(indices, dims):
        value = value * d + i
    return value


def partial_trace_oracle(mat: np.ndarray, dims: tuple[int, ...], keep: list[int]) -> np.ndarray:
    """Direct-summation partial trace, written index by index."""
    n = len(dims)
    traced = [i for i in range(n) if i not in keep]
    kept_dims = [dims[i] for i in keep]
    traced_dims = [dims[i] for i in traced]
    side = int(np.prod(kept_dims))
    out = np.zeros((side, side), dtype=np.complex128)
    for row_kept in np.ndindex(*kept_dims):
        for col_kept in np.ndindex(*kept_dims):
            total = 0.0 + 0.0j
            for summed in np.ndindex(*traced_dims):
                row = [0] * n
                col = [0] * n
                for pos, value in zip(keep, row_kept):
                    row[pos] = value
                for pos, value in zip(keep, col_kept):
                    col[pos] = value
                for pos, value in zip(traced, summed):
                    row[pos] = value
                    col[pos] = value
                total += mat[flat_index(row, dims), flat_index(col, dims)]
            out[flat_index(row_kept, kept_dims), flat_index(col_kept, kept_dims)] = total
    return out


# ---------------------------------------------------------------------------
# Planted distillable-subspace instances
# ---------------------------------------------------------------------------

PLANT_SHAPES = [
    SystemShape.of(("A", 2), ("B", 2), ("C", 2)),
    SystemShape.of(("A", 3), ("B", 3)),
    SystemShape.of(("A", 2), ("B", 3)),
]


def planted_instance(rng: np.random.Generator):
    """A rank-2 state hiding a pure entangled state on a basis-aligned subspace.

    Returns ``(state, planted_indices)`` where the state is
    ``q [psi] + (1-q) [product]`` with psi entangled inside the planted
    index sets and the product vector orthogonal to them (it uses an index
    outside the planted set on at least one party).
    """
    shape = PLANT_SHAPES[rng.integers(len(PLANT_SHAPES))]
    dims = shape.dims
    while True:
        sizes = [int(rng.integers(1, d + 1)) for d in dims]
        if sum(1 for s in sizes if s >= 2) >= 2 and any(s < d for s, d in zip(sizes, dims)):
            break
    index_sets = [tuple(sorted(rng.choice(d, size=s, replace=False).tolist())) for s, d in zip(sizes, dims)]

    sub_dim = int(np.prod(sizes))
    embed = np.zeros(shape.total_dim, dtype=np.complex128)
    while True:
        coeffs = random_pure_vector(rng, sub_dim)
        embed[:] = 0.0
        for pos, local in enumerate(np.ndindex(*sizes)):
            global_idx = flat_index([s[i] for s, i in zip(index_sets, local)], dims)
            embed[global_idx] = coeffs[pos]
        psi = PureState(shape, embed.copy())
        reduced_ranks = []
        for p in shape.parties:
            red = psi.reduced([p.label])
            reduced_ranks.append(np.linalg.matrix_rank(red.mat, tol=1e-9))
        if any(r > 1 for r in reduced_ranks):
            break

    strict = [i for i, (s, d) in enumerate(zip(sizes, dims)) if s < d]
    off_party = int(rng.choice(strict))
    product_idx = []
    for i, (s, d) in enumerate(zip(index_sets, dims)):
        if i == off_party:
            outside = [j for j in range(d) if j not in s]
            product_idx.append(int(rng.choice(outside)))
        else:
            product_idx.append(int(rng.integers(d)))
    product = np.zeros(shape.total_dim, dtype=np.complex128)
    product[flat_index(product_idx, dims)] = 1.0

    q = float(rng.uniform(0.2, 0.8))
    state = DensityMatrix.mixture(shape, [(q, psi.amplitudes), (1.0 - q, product)])
    return state, tuple(index_sets)


def certificate_summary(cert) -> tuple:
    return (
        cert.subspace.basis_indices,
        round(cert.outcome.weight, 10),
        cert.outcome.signature,
    )
