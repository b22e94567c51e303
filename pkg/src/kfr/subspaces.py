"""Subspaces, metric projections and J-orthogonal projections.

A subspace is stored as a block of orthonormal columns. Projections come
in two families: orthogonal projections with respect to an arbitrary SPD
metric ``G`` and J-orthogonal projections with respect to the indefinite
form of a Gram operator. The latter exist exactly when the compressed
form ``B^T W B`` is invertible, the finite-dimensional reading of the
projective completeness assumption; degenerate inputs raise
:class:`DegenerateSubspaceError` with a witness vector of near-zero
self-product.

Two independent J-orthogonal constructions are provided. The direct Gram
formula is the workhorse. The composed product of two metric projections
is kept as a cross-check: it agrees with the Gram formula precisely on
subspaces invariant under the fundamental symmetry, and it refuses (with
:class:`ComposedProjectionError`) whenever its output fails the
projection identities instead of silently returning a non-projection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .krein import GramOperator, w_inner
from .linalg import (
    MetricError,
    frobenius,
    matrix_function,
    orthonormalize,
    symmetric_eig,
    symmetrize,
)

__all__ = [
    "DegenerateSubspaceError",
    "ComposedProjectionError",
    "ORTHOGONAL",
    "J_ORTHOGONAL",
    "Subspace",
    "Projection",
    "CompletenessCheck",
    "subspace_from_columns",
    "spans_equal",
    "orthogonal_projection",
    "orthonormalize_in_metric",
    "j_orthogonal_projection_gram",
    "j_orthogonal_projection_composed",
    "j_orthogonal_complement",
    "is_projectively_complete",
    "check_j_orthonormal",
    "j_orthonormal_basis",
]

#: Relative magnitude floor for the compressed form B^T W B; below it the
#: subspace counts as degenerate (condition cap 1e10).
DEGENERACY_TOL = 1e-10

#: Residual tolerance for the projection identities of composed constructions.
PROJECTION_IDENTITY_TOL = 1e-9

#: Two spans are considered equal when cross-projection residuals stay below.
SPAN_TOL = 1e-8

ORTHOGONAL = "orthogonal"
J_ORTHOGONAL = "j-orthogonal"


class DegenerateSubspaceError(Exception):
    """Raised for subspaces on which the indefinite form degenerates.

    ``witness`` is a unit vector of the subspace whose self-product is
    near zero relative to the subspace scale.
    """

    def __init__(self, msg: str, witness: np.ndarray | None = None):
        super().__init__(msg)
        self.witness = witness


class ComposedProjectionError(Exception):
    """Raised when the composed projection product is not a J-orthogonal
    projection for the given subspace.

    Residuals of the failed identities are kept in ``residuals``.
    """

    def __init__(self, msg: str, residuals: dict[str, float]):
        super().__init__(msg)
        self.residuals = residuals


@dataclass(frozen=True)
class Subspace:
    """Column span of an orthonormal ``(d, r)`` block."""

    basis: np.ndarray

    def __post_init__(self):
        B = self.basis
        if B.ndim != 2:
            raise ValueError(f"basis must be 2-d, got shape {B.shape}")
        if not np.all(np.isfinite(B)):
            raise ValueError("basis must have finite entries")
        r = B.shape[1]
        if r and frobenius(B.T @ B - np.eye(r)) > 1e-10:
            raise ValueError("basis columns are not orthonormal")
        B.flags.writeable = False

    @property
    def ambient_dim(self) -> int:
        return int(self.basis.shape[0])

    @property
    def dim(self) -> int:
        return int(self.basis.shape[1])


def subspace_from_columns(columns, tol: float = 1e-10) -> Subspace:
    """Subspace spanned by arbitrary columns, compressed to numerical rank."""
    return Subspace(orthonormalize(columns, tol=tol))


def spans_equal(a: Subspace, b: Subspace, tol: float = SPAN_TOL) -> bool:
    """Whether two subspaces coincide as column spans.

    Each basis must project onto the other with residual at most ``tol``,
    in both directions.
    """
    if a.ambient_dim != b.ambient_dim or a.dim != b.dim:
        return False
    for first, second in ((a, b), (b, a)):
        resid = first.basis - second.basis @ (second.basis.T @ first.basis)
        if frobenius(resid) > tol * max(1.0, frobenius(first.basis)):
            return False
    return True


@dataclass(frozen=True)
class Projection:
    """Idempotent map onto a subspace, tagged with its self-adjointness.

    ``kind`` is ``"orthogonal"`` for G-self-adjoint projections (the
    metric is then kept in ``metric``) and ``"j-orthogonal"`` for
    projections self-adjoint with respect to the indefinite form.
    """

    matrix: np.ndarray
    kind: str
    metric: np.ndarray | None = None

    def __post_init__(self):
        self.matrix.flags.writeable = False
        if self.metric is not None:
            self.metric.flags.writeable = False

    def apply(self, x) -> np.ndarray:
        return self.matrix @ np.asarray(x, dtype=float)


def _check_ambient(subspace: Subspace, dim: int):
    if subspace.ambient_dim != dim:
        raise ValueError(
            f"subspace lives in dimension {subspace.ambient_dim}, expected {dim}"
        )


def orthogonal_projection(subspace: Subspace, metric) -> Projection:
    """Orthogonal projection onto a subspace under an SPD metric.

    Computes ``B (B^T G B)^{-1} B^T G``. The compressed matrix is SPD for
    any SPD ``G`` and orthonormal ``B``, so failure to solve indicates a
    broken metric and raises :class:`MetricError`.
    """
    G = symmetrize(metric)
    _check_ambient(subspace, G.shape[0])
    B = subspace.basis
    if subspace.dim == 0:
        return Projection(np.zeros_like(G), ORTHOGONAL, metric=G)
    compressed = symmetrize(B.T @ G @ B)
    try:
        solved = np.linalg.solve(compressed, B.T @ G)
    except np.linalg.LinAlgError as exc:
        raise MetricError(f"metric is singular on the subspace: {exc}") from exc
    return Projection(B @ solved, ORTHOGONAL, metric=G)


def orthonormalize_in_metric(columns, metric, tol: float = 1e-10) -> np.ndarray:
    """Basis of the column span orthonormal under an SPD metric.

    Columns ``C`` satisfy ``C^T G C = I`` afterwards; rank deficiency is
    compressed exactly as in the plain orthonormalization.
    """
    G = symmetrize(metric)
    root = matrix_function(G, lambda x: _metric_sqrt(x))
    inv_root = matrix_function(G, lambda x: 1.0 / _metric_sqrt(x))
    lifted = orthonormalize(root @ np.asarray(columns, dtype=float), tol=tol)
    return inv_root @ lifted


def _metric_sqrt(x: float) -> float:
    if x <= 0.0:
        raise ValueError(f"metric eigenvalue {x!r} is not positive")
    return math.sqrt(x)


def _compressed_form(subspace: Subspace, gram: GramOperator):
    """Eigendecomposition of B^T W B together with its magnitude extremes."""
    B = subspace.basis
    compressed = symmetrize(B.T @ gram.matrix @ B)
    eig = symmetric_eig(compressed)
    magnitudes = np.abs(eig.eigenvalues)
    return compressed, eig, float(magnitudes.min()), float(magnitudes.max())


@dataclass(frozen=True)
class CompletenessCheck:
    """Outcome of the projective completeness test.

    False outcomes carry a ``witness``: a unit vector of the subspace with
    near-zero indefinite self-product.
    """

    complete: bool
    smallest: float
    largest: float
    witness: np.ndarray | None

    def __bool__(self) -> bool:
        return self.complete


def is_projectively_complete(
    subspace: Subspace, gram: GramOperator, tol: float = DEGENERACY_TOL
) -> CompletenessCheck:
    """Whether the indefinite form is nondegenerate on the subspace.

    True when the smallest singular value of ``B^T W B`` exceeds ``tol``
    times the spectral magnitude of ``W``. The scale is the operator's,
    not the compressed block's: a block that is uniformly tiny relative to
    ``W`` is degenerate even though its own condition number is moderate,
    and the J-orthogonal projection norm grows like the reciprocal of the
    smallest compressed singular value.
    """
    _check_ambient(subspace, gram.dim)
    if subspace.dim == 0:
        return CompletenessCheck(True, 0.0, 0.0, None)
    _, eig, smallest, largest = _compressed_form(subspace, gram)
    if smallest > tol * gram.regularity.max_abs_eigenvalue:
        return CompletenessCheck(True, smallest, largest, None)
    index = int(np.argmin(np.abs(eig.eigenvalues)))
    witness = subspace.basis @ eig.eigenvectors[:, index]
    return CompletenessCheck(False, smallest, largest, witness)


def j_orthogonal_projection_gram(
    subspace: Subspace, gram: GramOperator, tol: float = DEGENERACY_TOL
) -> Projection:
    """J-orthogonal projection by the direct formula ``B (B^T W B)^{-1} B^T W``.

    Requires the subspace to be projectively complete; otherwise the
    compressed form is numerically singular and the projection does not
    exist.
    """
    _check_ambient(subspace, gram.dim)
    if subspace.dim == 0:
        return Projection(np.zeros((gram.dim, gram.dim)), J_ORTHOGONAL)
    check = is_projectively_complete(subspace, gram, tol=tol)
    if not check:
        raise DegenerateSubspaceError(
            "indefinite form degenerates on the subspace: compressed "
            f"eigenvalue magnitudes span [{check.smallest:.3e}, {check.largest:.3e}]",
            witness=check.witness,
        )
    B = subspace.basis
    compressed = symmetrize(B.T @ gram.matrix @ B)
    solved = np.linalg.solve(compressed, B.T @ gram.matrix)
    return Projection(B @ solved, J_ORTHOGONAL)


def j_orthogonal_projection_composed(
    subspace: Subspace, gram: GramOperator, tol: float = DEGENERACY_TOL
) -> Projection:
    """J-orthogonal projection as the product of two metric projections.

    Forms ``P_V P_{JV}`` with both factors orthogonal under the companion
    metric ``|W|``. The product is a J-orthogonal projection exactly when
    the subspace is invariant under the fundamental symmetry; the result
    is validated against the projection identities and rejected otherwise,
    so a caller can never mistake the composition for a projection it is
    not.
    """
    _check_ambient(subspace, gram.dim)
    if subspace.dim == 0:
        return Projection(np.zeros((gram.dim, gram.dim)), J_ORTHOGONAL)
    check = is_projectively_complete(subspace, gram, tol=tol)
    if not check:
        raise DegenerateSubspaceError(
            "indefinite form degenerates on the subspace",
            witness=check.witness,
        )
    metric = gram.abs_matrix
    p_v = orthogonal_projection(subspace, metric)
    mapped = subspace_from_columns(gram.symmetry @ subspace.basis)
    p_jv = orthogonal_projection(mapped, metric)
    Q = p_v.matrix @ p_jv.matrix

    scale = max(1.0, frobenius(Q))
    residuals = {
        "idempotency": frobenius(Q @ Q - Q) / scale,
        "fixes_subspace": frobenius(Q @ subspace.basis - subspace.basis),
        "w_self_adjoint": frobenius(gram.matrix @ Q - Q.T @ gram.matrix)
        / max(1.0, frobenius(gram.matrix) * scale),
    }
    if any(value > PROJECTION_IDENTITY_TOL for value in residuals.values()):
        raise ComposedProjectionError(
            "composed product is not a J-orthogonal projection here "
            f"(residuals {residuals}); the construction needs a subspace "
            "invariant under the fundamental symmetry",
            residuals=residuals,
        )
    return Projection(Q, J_ORTHOGONAL)


def j_orthogonal_complement(subspace: Subspace, gram: GramOperator) -> Subspace:
    """Complement with respect to the indefinite form.

    Equals ``J`` applied to the orthogonal complement taken in the
    associated Hilbert space, i.e. under the companion metric ``|W|``:
    for ``z`` with ``<|W|z, v> = 0`` on the subspace, ``[v, Jz] =
    z^T |W| v = 0``. The result has complementary dimension and is
    W-orthogonal to the input.
    """
    _check_ambient(subspace, gram.dim)
    d, r = gram.dim, subspace.dim
    if r == 0:
        return Subspace(np.eye(d))
    if r == d:
        return Subspace(np.zeros((d, 0)))
    # companion complement = plain complement of the span of |W| B
    full, _, _ = np.linalg.svd(gram.abs_matrix @ subspace.basis, full_matrices=True)
    companion_complement = full[:, r:]
    return subspace_from_columns(gram.symmetry @ companion_complement)


def check_j_orthonormal(vectors, gram: GramOperator, tol: float = 1e-9) -> bool:
    """Whether vectors pairwise satisfy ``[e_i, e_j] = +-delta_ij``.

    Off-diagonal products must vanish to ``tol`` and self-products must
    have magnitude within ``tol`` of one.
    """
    vecs = [np.asarray(v, dtype=float) for v in vectors]
    for i, vi in enumerate(vecs):
        for j, vj in enumerate(vecs):
            value = w_inner(gram, vi, vj)
            if i == j:
                if abs(abs(value) - 1.0) > tol:
                    return False
            elif abs(value) > tol:
                return False
    return True


def j_orthonormal_basis(
    subspace: Subspace, gram: GramOperator, tol: float = DEGENERACY_TOL
) -> np.ndarray:
    """Basis of the subspace with ``[b_i, b_j] = +-delta_ij``.

    Diagonalizes the compressed form and rescales by inverse square roots
    of the eigenvalue magnitudes; exists exactly for projectively complete
    subspaces.
    """
    _check_ambient(subspace, gram.dim)
    if subspace.dim == 0:
        return np.zeros((gram.dim, 0))
    check = is_projectively_complete(subspace, gram, tol=tol)
    if not check:
        raise DegenerateSubspaceError(
            "no sign-orthonormal basis: the form degenerates on the subspace",
            witness=check.witness,
        )
    _, eig, _, _ = _compressed_form(subspace, gram)
    scaling = 1.0 / np.sqrt(np.abs(eig.eigenvalues))
    return subspace.basis @ (eig.eigenvectors * scaling)
