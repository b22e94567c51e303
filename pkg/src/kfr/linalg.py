"""Dense real symmetric linear algebra kernel.

Everything downstream needs lives here: a cyclic Jacobi eigensolver,
rank-revealing orthonormalization, spectral matrix functions and extremal
generalized Rayleigh quotients for symmetric-definite pencils. All inputs
and outputs are plain ``numpy.float64`` arrays; results are returned with
``writeable=False`` so shared values cannot be mutated behind a caller's
back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "ConvergenceError",
    "EigenvalueDomainError",
    "MetricError",
    "EigenDecomposition",
    "symmetrize",
    "frobenius",
    "offdiag_frobenius",
    "symmetric_eig",
    "orthonormalize",
    "matrix_function",
    "apply_spectral_function",
    "extremal_rayleigh",
]

#: Off-diagonal Frobenius threshold (relative) at which the Jacobi sweep stops.
JACOBI_OFFDIAG_TOL = 1e-13

#: Hard cap on full Jacobi sweeps before giving up.
JACOBI_MAX_SWEEPS = 100

#: Default relative singular-value threshold for numerical rank decisions.
RANK_TOL = 1e-10

#: Relative eigenvalue floor below which a metric is treated as not positive
#: definite.
METRIC_FLOOR = 1e-12


class ConvergenceError(Exception):
    """Raised when the Jacobi iteration did not reach its threshold.

    Carries the remaining off-diagonal Frobenius residual in
    ``offdiag_residual`` for diagnostics.
    """

    def __init__(self, msg: str, offdiag_residual: float):
        super().__init__(msg)
        self.offdiag_residual = offdiag_residual


class EigenvalueDomainError(Exception):
    """Raised when a scalar function is undefined at an eigenvalue.

    The offending eigenvalue is available as ``eigenvalue``.
    """

    def __init__(self, msg: str, eigenvalue: float):
        super().__init__(msg)
        self.eigenvalue = eigenvalue


class MetricError(Exception):
    """Raised when a matrix that must be positive definite is not."""


def as_square_matrix(matrix, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite, square float64 array."""
    M = np.asarray(matrix, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} must have finite entries")
    return M


def symmetrize(matrix) -> np.ndarray:
    """Return the symmetric average ``(M + M^T) / 2`` as a fresh array.

    Symmetry of the result is bit-exact: entry ``(i, j)`` and ``(j, i)``
    are produced by the same floating-point expression.
    """
    M = as_square_matrix(matrix)
    return (M + M.T) / 2.0


def frobenius(matrix) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(np.asarray(matrix, dtype=float)))


def offdiag_frobenius(matrix) -> float:
    """Frobenius norm of the off-diagonal part.

    Summed directly over the off-diagonal entries; subtracting the diagonal
    mass from the total would cancel catastrophically near convergence.
    """
    M = np.asarray(matrix, dtype=float)
    off = M.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def _freeze(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues in non-decreasing order with matching eigenvector columns.

    ``eigenvectors[:, k]`` belongs to ``eigenvalues[k]``; the eigenvector
    matrix is orthogonal.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        _freeze(self.eigenvalues)
        _freeze(self.eigenvectors)

    @property
    def dim(self) -> int:
        return int(self.eigenvalues.shape[0])

    def reconstruct(self) -> np.ndarray:
        """Assemble ``V diag(lambda) V^T``."""
        V = self.eigenvectors
        return symmetrize((V * self.eigenvalues) @ V.T)


def symmetric_eig(
    matrix,
    offdiag_tol: float = JACOBI_OFFDIAG_TOL,
    max_sweeps: int = JACOBI_MAX_SWEEPS,
) -> EigenDecomposition:
    """Eigendecomposition of a real symmetric matrix by cyclic Jacobi sweeps.

    Rotations are applied in row-cyclic order until the off-diagonal
    Frobenius norm drops below ``offdiag_tol * max(1, ||M||_F)``. The
    result is deterministic for identical input: eigenvalues are sorted
    ascending with a stable sort, so ties keep the order in which the
    rotations produced them.

    Raises :class:`ConvergenceError` if the threshold is not met after
    ``max_sweeps`` full sweeps.
    """
    M = symmetrize(matrix)
    d = M.shape[0]
    A = M.copy()
    V = np.eye(d)
    scale = frobenius(A)
    threshold = offdiag_tol * max(1.0, scale)
    # Rotations on entries this small cannot move the off-diagonal norm
    # past the threshold; skipping them avoids pointless near-identity work.
    skip = threshold / max(d * d, 1)

    converged = offdiag_frobenius(A) <= threshold
    for _ in range(max_sweeps):
        if converged:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                if abs(apq) <= skip:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rot_p = A[:, p].copy()
                rot_q = A[:, q].copy()
                A[:, p] = c * rot_p - s * rot_q
                A[:, q] = s * rot_p + c * rot_q
                rot_p = A[p, :].copy()
                rot_q = A[q, :].copy()
                A[p, :] = c * rot_p - s * rot_q
                A[q, :] = s * rot_p + c * rot_q
                A[p, q] = 0.0
                A[q, p] = 0.0
                rot_p = V[:, p].copy()
                rot_q = V[:, q].copy()
                V[:, p] = c * rot_p - s * rot_q
                V[:, q] = s * rot_p + c * rot_q
        converged = offdiag_frobenius(A) <= threshold

    residual = offdiag_frobenius(A)
    if residual > threshold:
        raise ConvergenceError(
            f"Jacobi iteration left off-diagonal residual {residual:.3e} "
            f"above threshold {threshold:.3e} after {max_sweeps} sweeps",
            offdiag_residual=residual,
        )

    values = np.diag(A).copy()
    order = np.argsort(values, kind="stable")
    return EigenDecomposition(values[order], V[:, order].copy())


def orthonormalize(columns, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis for the column span, compressed to numerical rank.

    Singular directions with singular value at most ``tol`` times the
    largest one are dropped, so rank-deficient input yields fewer columns
    rather than an error. All-zero input yields a ``(d, 0)`` array.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    C = np.asarray(columns, dtype=float)
    if C.ndim == 1:
        C = C[:, None]
    if C.ndim != 2:
        raise ValueError(f"expected a 2-d column block, got shape {C.shape}")
    if not np.all(np.isfinite(C)):
        raise ValueError("columns must have finite entries")
    d = C.shape[0]
    if C.shape[1] == 0:
        return np.zeros((d, 0))
    U, sv, _ = np.linalg.svd(C, full_matrices=False)
    if sv.size == 0 or sv[0] == 0.0:
        return np.zeros((d, 0))
    rank = int(np.sum(sv > tol * sv[0]))
    return U[:, :rank].copy()


def apply_spectral_function(
    eig: EigenDecomposition, f: Callable[[float], float]
) -> np.ndarray:
    """Apply a scalar function on the spectrum: ``V diag(f(lambda)) V^T``."""
    mapped = np.empty_like(eig.eigenvalues)
    for k, lam in enumerate(eig.eigenvalues):
        try:
            value = f(float(lam))
        except (ArithmeticError, ValueError) as exc:
            raise EigenvalueDomainError(
                f"scalar function undefined at eigenvalue {lam!r}: {exc}",
                eigenvalue=float(lam),
            ) from exc
        if not math.isfinite(value):
            raise EigenvalueDomainError(
                f"scalar function not finite at eigenvalue {lam!r}",
                eigenvalue=float(lam),
            )
        mapped[k] = value
    V = eig.eigenvectors
    return symmetrize((V * mapped) @ V.T)


def matrix_function(matrix, f: Callable[[float], float]) -> np.ndarray:
    """Symmetric matrix function through the eigendecomposition."""
    return apply_spectral_function(symmetric_eig(matrix), f)


def _inverse_sqrt_of_metric(metric) -> np.ndarray:
    G = symmetrize(metric)
    eig = symmetric_eig(G)
    smallest, largest = float(eig.eigenvalues[0]), float(eig.eigenvalues[-1])
    if largest <= 0.0 or smallest <= METRIC_FLOOR * largest:
        raise MetricError(
            "metric is not positive definite: eigenvalue range "
            f"[{smallest:.3e}, {largest:.3e}]"
        )
    return apply_spectral_function(eig, lambda x: 1.0 / math.sqrt(x))


def extremal_rayleigh(matrix, metric) -> tuple[float, float]:
    """Extreme generalized eigenvalues of the pencil ``(M, G)``.

    Returns the minimum and maximum of ``x^T M x / x^T G x`` over nonzero
    ``x``, computed by congruence with ``G^{-1/2}`` followed by a symmetric
    eigendecomposition. ``G`` must be symmetric positive definite.
    """
    M = symmetrize(matrix)
    Gi = _inverse_sqrt_of_metric(metric)
    if Gi.shape != M.shape:
        raise ValueError(
            f"pencil shapes disagree: {M.shape} versus {Gi.shape}"
        )
    reduced = symmetric_eig(symmetrize(Gi @ M @ Gi))
    return float(reduced.eigenvalues[0]), float(reduced.eigenvalues[-1])
