# python3
"""Demo: every local measurement operator is unitary . filter . projector.

Writing a local operator through its singular value decomposition
A = sum_j a_j |out_j><in_j| splits it into three elementary moves: a
projector keeping span{|in_j>}, a filter reweighting those directions by
the a_j, and a unitary rotating them onto the outputs.  The projector is
the only part that can create purity; the filter only shifts relative
weights (and so can raise entanglement with some luck and post-selection);
the unitary does neither.  Full-rank operators preserve both the state's
rank and, on pure states, the per-party reduced ranks.
"""

import numpy as np

from dsskit import (
    DensityMatrix,
    LocalFactor,
    ProductOperator,
    PureState,
    SystemShape,
    decompose,
    rank_preservation_report,
    signature_preservation_report,
)


def random_unitary(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_contraction(rng, d, rank):
    s = np.zeros(d)
    s[:rank] = rng.uniform(0.1, 1.0, size=rank)
    s[0] = 1.0
    return random_unitary(rng, d) @ np.diag(s) @ random_unitary(rng, d)


def random_density(rng, shape, rank):
    vectors = random_unitary(rng, shape.total_dim)[:, :rank]
    weights = rng.dirichlet(np.ones(rank))
    return DensityMatrix(shape, (vectors * weights) @ vectors.conj().T)


def random_pure_state(rng, shape):
    v = rng.normal(size=shape.total_dim) + 1j * rng.normal(size=shape.total_dim)
    return PureState(shape, v / np.linalg.norm(v))


def main():
    rng = np.random.default_rng(21)

    print("A random rank-2 operator on a 3-dimensional space:")
    f = random_contraction(rng, 3, rank=2)
    parts = decompose(f)
    print(f"  retained dim : {parts.retained_dim}")
    print(f"  weights      : {np.round(parts.weights, 6)}")
    residual = np.max(np.abs(parts.reconstruct() - f))
    print(f"  reconstruction residual: {residual:.3e}")
    print(f"  projector idempotency  : {np.max(np.abs(parts.lpo @ parts.lpo - parts.lpo)):.3e}")
    print(f"  unitary deviation      : {np.max(np.abs(parts.luo.conj().T @ parts.luo - np.eye(3))):.3e}")

    shape = SystemShape.of(("A", 3), ("B", 3))
    print("\nRank preservation under a full-rank product operator:")
    rho = random_density(rng, shape, rank=4)
    full_rank_op = ProductOperator(
        tuple(LocalFactor(lbl, random_contraction(rng, 3, rank=3)) for lbl in "AB")
    )
    report = rank_preservation_report(rho, full_rank_op)
    print(f"  rank before {report.rank_before}, after {report.rank_after}, "
          f"consistent: {report.consistent}")

    print("\n...and signature preservation on a pure state:")
    psi = random_pure_state(rng, shape)
    sig = signature_preservation_report(psi, full_rank_op)
    print(f"  signature before {sig.signature_before}, after {sig.signature_after}")

    print("\nA rank-deficient factor breaks the hypothesis and may collapse ranks:")
    lossy = ProductOperator.from_parts(shape, {"A": random_contraction(rng, 3, rank=1)})
    report = rank_preservation_report(rho, lossy)
    print(f"  full rank: {report.full_rank}; rank before {report.rank_before}, "
          f"after {report.rank_after} (consistency is vacuous here)")


if __name__ == "__main__":
    main()
