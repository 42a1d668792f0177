"""Dense real linear algebra for the manifold samplers.

Everything here is deterministic given its inputs; random draws come from an
explicitly passed ``numpy.random.Generator``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Orthonormality of frames and orthogonal matrices is enforced to this
# absolute tolerance; idempotency and trace of projections to the looser one.
# Chosen for float64 with ambient dimension up to ~32.
ORTHONORMAL_TOL = 1e-10
PROJECTION_TOL = 1e-9


class LinearDependence(ValueError):
    """Input vectors are (numerically) linearly dependent; resample."""


class DimensionMismatch(ValueError):
    """Operands do not have matching dimensions."""


@dataclass(frozen=True)
class Frame:
    """An orthonormal k-frame in R^n, stored as the n-by-k column matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] < m.shape[1] or m.shape[1] < 1:
            raise DimensionMismatch(f"frame matrix must be n x k with k <= n, got {m.shape}")
        gram = m.T @ m
        if np.max(np.abs(gram - np.eye(m.shape[1]))) >= ORTHONORMAL_TOL:
            raise LinearDependence("frame columns are not orthonormal")
        object.__setattr__(self, "matrix", m)

    @property
    def ambient_dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def count(self) -> int:
        return self.matrix.shape[1]


def gram_schmidt(vectors, tolerance: float = 1e-12) -> Frame:
    """Orthonormalize k vectors in R^n into a Frame.

    Uses the modified Gram-Schmidt recursion with one re-orthogonalization
    pass per vector, which keeps the result orthonormal to ORTHONORMAL_TOL
    even for nearly dependent inputs. Raises LinearDependence when a
    residual's norm falls below ``tolerance`` times the vector's norm.
    """
    vecs = np.asarray(vectors, dtype=float)
    if vecs.ndim != 2:
        raise DimensionMismatch("expected a sequence of equal-length vectors")
    k, n = vecs.shape
    if k > n:
        raise DimensionMismatch(f"cannot orthonormalize {k} vectors in R^{n}")
    cols = np.zeros((n, k))
    for i in range(k):
        v = vecs[i].copy()
        scale = np.linalg.norm(v)
        if scale == 0.0:
            raise LinearDependence(f"input vector {i} is zero")
        # two projection sweeps: the second mops up rounding left by the first
        for _ in range(2):
            for j in range(i):
                v -= (cols[:, j] @ v) * cols[:, j]
        norm = np.linalg.norm(v)
        if norm <= tolerance * scale:
            raise LinearDependence(f"vector {i} is dependent on its predecessors")
        cols[:, i] = v / norm
    return Frame(cols)


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw an n-by-n orthogonal matrix from the Haar distribution.

    QR of a standard normal matrix, with column signs fixed so that the
    triangular factor has positive diagonal; this removes the sign ambiguity
    that would otherwise bias the draw.
    """
    if n < 1:
        raise DimensionMismatch("n must be positive")
    while True:
        q, r = np.linalg.qr(rng.standard_normal((n, n)))
        diag = np.diag(r)
        if np.any(diag == 0.0):
            continue  # measure-zero degenerate draw
        return q * np.sign(diag)


def projection_matrix(frame: Frame) -> np.ndarray:
    """Orthogonal projection onto the span of the frame, as an n-by-n matrix.

    The result is symmetric by construction, idempotent, and has trace equal
    to the frame's column count.
    """
    m = frame.matrix
    p = m @ m.T
    return (p + p.T) / 2.0


def euclidean_distance(p, q) -> float:
    """Euclidean norm of p - q."""
    a = np.asarray(p, dtype=float).ravel()
    b = np.asarray(q, dtype=float).ravel()
    if a.shape != b.shape:
        raise DimensionMismatch(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def pairwise_distances(points: np.ndarray, others: np.ndarray | None = None,
                       chunk: int = 256) -> np.ndarray:
    """All Euclidean distances between rows of ``points`` and rows of ``others``.

    Row-chunked so large clouds never materialize a cubic intermediate.
    """
    a = np.asarray(points, dtype=float)
    b = a if others is None else np.asarray(others, dtype=float)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise DimensionMismatch("point arrays must be 2-d with equal width")
    out = np.empty((a.shape[0], b.shape[0]))
    for i in range(0, a.shape[0], chunk):
        diff = a[i:i + chunk, None, :] - b[None, :, :]
        out[i:i + chunk] = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    return out
