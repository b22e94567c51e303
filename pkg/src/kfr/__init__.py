"""Fusion frames on finite-dimensional Hilbert spaces with W-metrics.

An invertible symmetric Gram matrix turns a finite-dimensional real
space into a Krein-style geometry with an indefinite form and a positive
companion form. This package computes the polar factors, metric and
J-orthogonal projections, optimal frame bounds of weighted subspace
families under either geometry, the transfer maps between them with
certified intervals, the lower-bound collapse along near-singular
families, and the multiplication-form spectral decomposition with its
companion-geometry counterpart. A deterministic CLI (``kfr``) exposes
the analyses over JSON instance files.
"""

__version__ = "0.1.0"

from .fusion import (
    FrameBounds,
    FourWayReport,
    LocalFrameReport,
    LocalFrameSystem,
    WeightedSubspaceFamily,
    frame_bounds,
    frame_operator,
    local_frames_to_fusion,
    transport_by_invertible,
    vector_frame_bounds,
    verify_four_way_equivalence,
)
from .krein import (
    GramOperator,
    KernelError,
    RegularityReport,
    build_gram,
    j_inner,
    j_norm,
    norm_equivalence_constants,
    w_inner,
)
from .linalg import (
    ConvergenceError,
    EigenDecomposition,
    EigenvalueDomainError,
    MetricError,
    extremal_rayleigh,
    matrix_function,
    orthonormalize,
    symmetric_eig,
)
from .spectral import (
    AtomicMeasure,
    KreinDecomposition,
    SpectralRepresentation,
    krein_decomposition,
    ortho_basis_of_subspaces,
    spectral_representation,
)
from .subspaces import (
    ComposedProjectionError,
    DegenerateSubspaceError,
    Projection,
    Subspace,
    check_j_orthonormal,
    is_projectively_complete,
    j_orthogonal_complement,
    j_orthogonal_projection_composed,
    j_orthogonal_projection_gram,
    j_orthonormal_basis,
    orthogonal_projection,
    spans_equal,
    subspace_from_columns,
)
from .transfer import (
    RegularityError,
    SweepResult,
    TransferReport,
    diagonal_gram_family,
    singular_sweep,
    transfer_map_hilbert_to_krein,
    transfer_map_krein_to_hilbert,
    transfer_regular,
)

__all__ = [
    "__version__",
    # linalg
    "ConvergenceError",
    "EigenDecomposition",
    "EigenvalueDomainError",
    "MetricError",
    "extremal_rayleigh",
    "matrix_function",
    "orthonormalize",
    "symmetric_eig",
    # krein
    "GramOperator",
    "KernelError",
    "RegularityReport",
    "build_gram",
    "j_inner",
    "j_norm",
    "norm_equivalence_constants",
    "w_inner",
    # subspaces
    "ComposedProjectionError",
    "DegenerateSubspaceError",
    "Projection",
    "Subspace",
    "check_j_orthonormal",
    "is_projectively_complete",
    "j_orthogonal_complement",
    "j_orthogonal_projection_composed",
    "j_orthogonal_projection_gram",
    "j_orthonormal_basis",
    "orthogonal_projection",
    "spans_equal",
    "subspace_from_columns",
    # fusion
    "FrameBounds",
    "FourWayReport",
    "LocalFrameReport",
    "LocalFrameSystem",
    "WeightedSubspaceFamily",
    "frame_bounds",
    "frame_operator",
    "local_frames_to_fusion",
    "transport_by_invertible",
    "vector_frame_bounds",
    "verify_four_way_equivalence",
    # transfer
    "RegularityError",
    "SweepResult",
    "TransferReport",
    "diagonal_gram_family",
    "singular_sweep",
    "transfer_map_hilbert_to_krein",
    "transfer_map_krein_to_hilbert",
    "transfer_regular",
    # spectral
    "AtomicMeasure",
    "KreinDecomposition",
    "SpectralRepresentation",
    "krein_decomposition",
    "ortho_basis_of_subspaces",
    "spectral_representation",
]
