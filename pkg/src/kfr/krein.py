"""Hilbert space with a W-metric.

An invertible symmetric Gram matrix ``W`` induces the indefinite form
``[x, y] = <Wx, y>``. Its polar decomposition ``W = J|W|`` supplies the
fundamental symmetry ``J`` and the positive definite companion form
``[x, y]_J = <|W|x, y>`` whose norm carries the topology. This module
builds all polar factors once, caches them on an immutable
:class:`GramOperator` and classifies the operator as regular or
near-singular by the relative size of its smallest eigenvalue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import (
    EigenDecomposition,
    apply_spectral_function,
    as_square_matrix,
    symmetric_eig,
    symmetrize,
)

__all__ = [
    "KernelError",
    "REGULAR",
    "NEAR_SINGULAR",
    "RegularityReport",
    "GramOperator",
    "build_gram",
    "w_inner",
    "j_inner",
    "j_norm",
    "norm_equivalence_constants",
]

#: Relative eigenvalue magnitude below which W is treated as having a kernel.
KERNEL_TOL = 1e-14

#: Default relative threshold separating regular from near-singular operators.
EPSILON_THRESHOLD = 1e-6

REGULAR = "regular"
NEAR_SINGULAR = "near-singular"


class KernelError(Exception):
    """Raised when a Gram matrix has a numerically nontrivial kernel."""


@dataclass(frozen=True)
class RegularityReport:
    """Spectral extremes of ``|W|`` and the regular/near-singular verdict.

    ``epsilon`` is the smallest eigenvalue magnitude and is only set for
    near-singular operators, where it parametrizes the singular limit.
    """

    min_abs_eigenvalue: float
    max_abs_eigenvalue: float
    condition_number: float
    classification: str
    epsilon: float | None


@dataclass(frozen=True)
class GramOperator:
    """Invertible symmetric ``W`` with cached polar and spectral factors.

    Fields hold ``W`` itself, its eigendecomposition, the fundamental
    symmetry ``J``, ``|W|``, ``|W|^{1/2}``, ``|W|^{-1/2}`` and the
    regularity report. Instances are immutable and safe to share.
    """

    matrix: np.ndarray
    eig: EigenDecomposition
    symmetry: np.ndarray
    abs_matrix: np.ndarray
    sqrt_abs: np.ndarray
    inv_sqrt_abs: np.ndarray
    regularity: RegularityReport

    def __post_init__(self):
        for field in ("matrix", "symmetry", "abs_matrix", "sqrt_abs", "inv_sqrt_abs"):
            getattr(self, field).flags.writeable = False

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def classification(self) -> str:
        return self.regularity.classification

    @property
    def is_regular(self) -> bool:
        return self.regularity.classification == REGULAR


def build_gram(
    matrix, epsilon_threshold: float = EPSILON_THRESHOLD
) -> GramOperator:
    """Construct a :class:`GramOperator` from a symmetric matrix.

    The polar factors come from one eigendecomposition: ``J`` applies the
    sign function on the spectrum, ``|W|`` the absolute value. A relative
    eigenvalue magnitude at or below ``1e-14`` is a kernel violation and
    raises :class:`KernelError`; a ratio below ``epsilon_threshold`` is
    classified near-singular with ``epsilon`` equal to the smallest
    magnitude.
    """
    W = symmetrize(as_square_matrix(matrix, "gram matrix"))
    eig = symmetric_eig(W)
    magnitudes = np.abs(eig.eigenvalues)
    largest = float(magnitudes.max())
    smallest = float(magnitudes.min())
    if largest == 0.0 or smallest <= KERNEL_TOL * largest:
        raise KernelError(
            "gram matrix has a numerically nontrivial kernel: smallest "
            f"eigenvalue magnitude {smallest:.3e} against largest {largest:.3e}"
        )
    ratio = smallest / largest
    if ratio < epsilon_threshold:
        report = RegularityReport(
            min_abs_eigenvalue=smallest,
            max_abs_eigenvalue=largest,
            condition_number=largest / smallest,
            classification=NEAR_SINGULAR,
            epsilon=smallest,
        )
    else:
        report = RegularityReport(
            min_abs_eigenvalue=smallest,
            max_abs_eigenvalue=largest,
            condition_number=largest / smallest,
            classification=REGULAR,
            epsilon=None,
        )
    return GramOperator(
        matrix=W,
        eig=eig,
        symmetry=apply_spectral_function(eig, lambda x: math.copysign(1.0, x)),
        abs_matrix=apply_spectral_function(eig, abs),
        sqrt_abs=apply_spectral_function(eig, lambda x: math.sqrt(abs(x))),
        inv_sqrt_abs=apply_spectral_function(eig, lambda x: 1.0 / math.sqrt(abs(x))),
        regularity=report,
    )


def _check_vector(gram: GramOperator, x, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.shape != (gram.dim,):
        raise ValueError(
            f"{name} has shape {v.shape}, expected ({gram.dim},)"
        )
    return v


def w_inner(gram: GramOperator, x, y) -> float:
    """Indefinite inner product ``[x, y] = <Wx, y>``."""
    vx = _check_vector(gram, x, "x")
    vy = _check_vector(gram, y, "y")
    return float(vy @ (gram.matrix @ vx))


def j_inner(gram: GramOperator, x, y) -> float:
    """Positive definite companion product ``[x, y]_J = <|W|x, y>``."""
    vx = _check_vector(gram, x, "x")
    vy = _check_vector(gram, y, "y")
    return float(vy @ (gram.abs_matrix @ vx))


def j_norm(gram: GramOperator, x) -> float:
    """Norm induced by the companion product."""
    return math.sqrt(max(j_inner(gram, x, x), 0.0))


def norm_equivalence_constants(gram: GramOperator) -> tuple[float, float]:
    """Tight constants ``(1/||W^-1||, ||W||)`` squeezing the J-norm.

    For every ``x``: ``lower * ||x||^2 <= ||x||_J^2 <= upper * ||x||^2``,
    with both constants attained on eigenvectors of ``W``.
    """
    return (
        gram.regularity.min_abs_eigenvalue,
        gram.regularity.max_abs_eigenvalue,
    )
