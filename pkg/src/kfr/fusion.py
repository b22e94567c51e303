"""Weighted subspace families and their frame bounds.

The frame operator of a weighted family under a metric ``G`` is the
symmetric matrix ``M = sum_i x_i^2 P_i^T G P_i`` whose quadratic form
collects the weighted squared projection norms. Optimal frame bounds are
the extreme generalized eigenvalues of the pencil ``(M, G)``; they are
computed exactly rather than certified from inequalities, which makes
every downstream theorem check as tight as the arithmetic allows.

Projections come in two kinds, matching the two frame-of-subspaces
definitions: metric-orthogonal projections for a plain or companion inner
product, and J-orthogonal projections for the indefinite form of a Gram
operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .krein import GramOperator
from .linalg import extremal_rayleigh, orthonormalize, symmetrize
from .subspaces import (
    DegenerateSubspaceError,
    J_ORTHOGONAL,
    ORTHOGONAL,
    Projection,
    Subspace,
    j_orthogonal_projection_gram,
    orthogonal_projection,
    orthonormalize_in_metric,
    subspace_from_columns,
)

__all__ = [
    "FRAME_TOL",
    "TIGHT_TOL",
    "WeightedSubspaceFamily",
    "FrameBounds",
    "FourWayReport",
    "LocalFrameSystem",
    "LocalFrameReport",
    "frame_operator",
    "frame_bounds",
    "vector_frame_bounds",
    "verify_four_way_equivalence",
    "local_frames_to_fusion",
    "transport_by_invertible",
]

#: Lower bounds at or below this do not count as frames.
FRAME_TOL = 1e-10

#: Relative gap under which bounds count as tight / Parseval.
TIGHT_TOL = 1e-8

#: Condition-number cap for transporting operators.
TRANSPORT_COND_CAP = 1e10


@dataclass(frozen=True)
class WeightedSubspaceFamily:
    """Finite weighted family of subspaces of one ambient space."""

    weights: tuple[float, ...]
    subspaces: tuple[Subspace, ...]

    def __post_init__(self):
        if not self.subspaces:
            raise ValueError("family must contain at least one subspace")
        if len(self.weights) != len(self.subspaces):
            raise ValueError(
                f"{len(self.weights)} weights for {len(self.subspaces)} subspaces"
            )
        dims = {s.ambient_dim for s in self.subspaces}
        if len(dims) != 1:
            raise ValueError(f"mixed ambient dimensions {sorted(dims)}")
        for w in self.weights:
            if not (math.isfinite(w) and w > 0.0):
                raise ValueError("weights must be positive and finite")
        for s in self.subspaces:
            if s.dim == 0:
                raise ValueError("family members must have dimension at least 1")

    @property
    def ambient_dim(self) -> int:
        return self.subspaces[0].ambient_dim

    def __len__(self) -> int:
        return len(self.subspaces)


@dataclass(frozen=True)
class FrameBounds:
    """Optimal bounds with the frame / tight / Parseval classification."""

    lower: float
    upper: float
    is_frame: bool
    is_tight: bool
    is_parseval: bool


def classify_bounds(
    lower: float,
    upper: float,
    frame_tol: float = FRAME_TOL,
    tight_tol: float = TIGHT_TOL,
) -> FrameBounds:
    lower = max(lower, 0.0)
    is_frame = lower > frame_tol
    is_tight = is_frame and (upper - lower) <= tight_tol * upper
    is_parseval = is_tight and abs(lower - 1.0) <= tight_tol
    return FrameBounds(lower, upper, is_frame, is_tight, is_parseval)


def _projections(
    family: WeightedSubspaceFamily,
    metric: np.ndarray,
    kind: str,
    gram: GramOperator | None,
) -> list[Projection]:
    if kind == ORTHOGONAL:
        return [orthogonal_projection(s, metric) for s in family.subspaces]
    if kind == J_ORTHOGONAL:
        if gram is None:
            raise ValueError("J-orthogonal projections need a Gram operator")
        return [j_orthogonal_projection_gram(s, gram) for s in family.subspaces]
    raise ValueError(f"unknown projection kind {kind!r}")


def frame_operator(
    family: WeightedSubspaceFamily,
    metric,
    kind: str = ORTHOGONAL,
    gram: GramOperator | None = None,
) -> np.ndarray:
    """Frame operator ``sum_i x_i^2 P_i^T G P_i`` in a fixed index order.

    Its quadratic form at ``k`` is the weighted sum of squared projection
    norms measured in the metric ``G``.
    """
    G = symmetrize(metric)
    if G.shape[0] != family.ambient_dim:
        raise ValueError(
            f"metric dimension {G.shape[0]} does not match family "
            f"dimension {family.ambient_dim}"
        )
    total = np.zeros_like(G)
    for weight, projection in zip(
        family.weights, _projections(family, G, kind, gram)
    ):
        P = projection.matrix
        total += weight**2 * (P.T @ G @ P)
    return symmetrize(total)


def frame_bounds(
    family: WeightedSubspaceFamily,
    metric,
    kind: str = ORTHOGONAL,
    gram: GramOperator | None = None,
    frame_tol: float = FRAME_TOL,
    tight_tol: float = TIGHT_TOL,
) -> FrameBounds:
    """Optimal frame bounds: extremes of ``k^T M k / k^T G k``."""
    M = frame_operator(family, metric, kind, gram)
    lower, upper = extremal_rayleigh(M, metric)
    return classify_bounds(lower, upper, frame_tol, tight_tol)


def vector_frame_bounds(
    vectors,
    metric,
    frame_tol: float = FRAME_TOL,
    tight_tol: float = TIGHT_TOL,
) -> FrameBounds:
    """Optimal bounds of a finite vector frame under an SPD metric.

    The quadratic form is ``sum_j <k, f_j>_G^2``, so the frame operator is
    ``sum_j G f_j f_j^T G`` measured against ``G``.
    """
    G = symmetrize(metric)
    stacked = [np.asarray(f, dtype=float) for f in vectors]
    if not stacked:
        raise ValueError("vector frame must be nonempty")
    total = np.zeros_like(G)
    for f in stacked:
        if f.shape != (G.shape[0],):
            raise ValueError(
                f"frame vector has shape {f.shape}, expected ({G.shape[0]},)"
            )
        lifted = G @ f
        total += np.outer(lifted, lifted)
    lower, upper = extremal_rayleigh(symmetrize(total), G)
    return classify_bounds(lower, upper, frame_tol, tight_tol)


@dataclass(frozen=True)
class FourWayReport:
    """Bound pairs of the four frame-of-subspaces formulations.

    Formulations: J-orthogonal projections on the family, the same on the
    symmetry-mapped family, and companion-metric orthogonal projections on
    both. ``bounds_agree`` holds when all lower and all upper bounds match
    to the relative tolerance used in the check; degeneracies encountered
    while building J-orthogonal projections are reported per item.
    """

    q_on_subspaces: FrameBounds | None
    q_on_mapped: FrameBounds | None
    p_on_subspaces: FrameBounds | None
    p_on_mapped: FrameBounds | None
    degeneracies: tuple[str, ...]
    bounds_agree: bool

    @property
    def all_bounds(self):
        return (
            self.q_on_subspaces,
            self.q_on_mapped,
            self.p_on_subspaces,
            self.p_on_mapped,
        )


def _mapped_family(
    family: WeightedSubspaceFamily, gram: GramOperator
) -> WeightedSubspaceFamily:
    mapped = tuple(
        subspace_from_columns(gram.symmetry @ s.basis) for s in family.subspaces
    )
    return WeightedSubspaceFamily(family.weights, mapped)


def verify_four_way_equivalence(
    family: WeightedSubspaceFamily,
    gram: GramOperator,
    rel_tol: float = 1e-8,
) -> FourWayReport:
    """Compute the four formulation bound pairs and whether they coincide.

    All four quadratic forms are normalized by the companion norm, so the
    four bound pairs are directly comparable. Agreement is relative: the
    spread of the four lower bounds (and of the four upper bounds) must
    stay within ``rel_tol`` of the bound magnitude, plus an absolute
    floor of ``1e-12`` times the form scale. The floor matters for
    families that barely frame the space: their lower bounds sit at the
    rounding noise of the eigensolve, where a purely relative comparison
    would demand more precision than double arithmetic carries.
    """
    if family.ambient_dim != gram.dim:
        raise ValueError("family and Gram operator dimensions differ")
    metric = gram.abs_matrix
    mapped = _mapped_family(family, gram)
    labels_and_calls = (
        ("q on subspaces", family, J_ORTHOGONAL),
        ("q on mapped subspaces", mapped, J_ORTHOGONAL),
        ("p on subspaces", family, ORTHOGONAL),
        ("p on mapped subspaces", mapped, ORTHOGONAL),
    )
    results: list[FrameBounds | None] = []
    degeneracies: list[str] = []
    for label, fam, kind in labels_and_calls:
        try:
            results.append(frame_bounds(fam, metric, kind, gram))
        except DegenerateSubspaceError as exc:
            results.append(None)
            degeneracies.append(f"{label}: {exc}")
    agree = not degeneracies
    if agree:
        lows = [b.lower for b in results]
        highs = [b.upper for b in results]
        low_scale = max(max(abs(v) for v in lows), 1e-300)
        high_scale = max(max(abs(v) for v in highs), 1e-300)
        noise_floor = 1e-12 * high_scale
        agree = (max(lows) - min(lows)) <= rel_tol * low_scale + noise_floor and (
            max(highs) - min(highs)
        ) <= rel_tol * high_scale + noise_floor
    return FourWayReport(
        q_on_subspaces=results[0],
        q_on_mapped=results[1],
        p_on_subspaces=results[2],
        p_on_mapped=results[3],
        degeneracies=tuple(degeneracies),
        bounds_agree=agree,
    )


@dataclass(frozen=True)
class LocalFrameSystem:
    """Partitioned vector system: one block of spanning vectors per weight.

    Blocks are stored as ``(d, n_i)`` column stacks; the induced partition
    of indices is contiguous and disjoint by construction.
    """

    blocks: tuple[np.ndarray, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if not self.blocks:
            raise ValueError("system must contain at least one block")
        if len(self.blocks) != len(self.weights):
            raise ValueError("one weight per block is required")
        dims = {b.shape[0] for b in self.blocks}
        if len(dims) != 1:
            raise ValueError("blocks live in different ambient dimensions")
        for b in self.blocks:
            if b.ndim != 2 or b.shape[1] == 0:
                raise ValueError("blocks must be nonempty column stacks")
            b.flags.writeable = False
        for w in self.weights:
            if not (math.isfinite(w) and w > 0.0):
                raise ValueError("weights must be positive and finite")

    @property
    def ambient_dim(self) -> int:
        return int(self.blocks[0].shape[0])

    @property
    def partition(self) -> tuple[tuple[int, ...], ...]:
        """Index sets of the blocks within the flattened vector sequence."""
        sets = []
        start = 0
        for b in self.blocks:
            sets.append(tuple(range(start, start + b.shape[1])))
            start += b.shape[1]
        return tuple(sets)


@dataclass(frozen=True)
class LocalFrameReport:
    """Equivalence report between local vector frames and the fusion family.

    Collects per-block bounds of each block within its own span, the two
    global vector-frame bound pairs (raw weighted vectors and weighted
    orthonormalized bases) and the fusion bounds of the spanned family.
    The verdict holds when the three frame flags agree.
    """

    block_bounds: tuple[FrameBounds, ...]
    weighted_vector_bounds: FrameBounds
    weighted_basis_bounds: FrameBounds
    fusion_bounds: FrameBounds
    verdicts_agree: bool
    issues: tuple[str, ...]


def local_frames_to_fusion(
    system: LocalFrameSystem,
    gram: GramOperator,
    frame_tol: float = FRAME_TOL,
) -> LocalFrameReport:
    """Check the local-frames versus fusion-frame correspondence.

    Every quantity is measured in the companion metric of the Gram
    operator. Per-block bounds are the bounds of the block seen as a
    vector frame of its own span; blocks that fail to frame their span
    (or whose span degenerates under the indefinite form) are reported.
    """
    if system.ambient_dim != gram.dim:
        raise ValueError("system and Gram operator dimensions differ")
    metric = gram.abs_matrix
    issues: list[str] = []

    block_bounds = []
    spans = []
    basis_vectors: list[np.ndarray] = []
    for index, (block, weight) in enumerate(zip(system.blocks, system.weights)):
        basis = orthonormalize_in_metric(block, metric)
        if basis.shape[1] == 0:
            raise ValueError(f"block {index} spans nothing")
        spans.append(subspace_from_columns(block))
        # bounds of the block within its span: compress the frame operator
        # onto metric-orthonormal coordinates of the span
        coords = np.stack([basis.T @ (metric @ f) for f in block.T], axis=0)
        compressed = symmetrize(coords.T @ coords)
        lower, upper = extremal_rayleigh(compressed, np.eye(compressed.shape[0]))
        bounds = classify_bounds(lower, upper, frame_tol)
        block_bounds.append(bounds)
        if not bounds.is_frame:
            issues.append(
                f"block {index} does not frame its span (lower bound {lower:.3e})"
            )
        basis_vectors.extend(weight * basis[:, j] for j in range(basis.shape[1]))

    weighted_vectors = [
        weight * block[:, j]
        for block, weight in zip(system.blocks, system.weights)
        for j in range(block.shape[1])
    ]
    vector_bounds = vector_frame_bounds(weighted_vectors, metric, frame_tol)
    basis_bounds = vector_frame_bounds(basis_vectors, metric, frame_tol)

    family = WeightedSubspaceFamily(system.weights, tuple(spans))
    try:
        fusion = frame_bounds(family, metric, J_ORTHOGONAL, gram, frame_tol)
    except DegenerateSubspaceError as exc:
        issues.append(f"fusion family degenerates: {exc}")
        fusion = classify_bounds(0.0, math.inf, frame_tol)
    verdicts = (vector_bounds.is_frame, basis_bounds.is_frame, fusion.is_frame)
    return LocalFrameReport(
        block_bounds=tuple(block_bounds),
        weighted_vector_bounds=vector_bounds,
        weighted_basis_bounds=basis_bounds,
        fusion_bounds=fusion,
        verdicts_agree=len(set(verdicts)) == 1,
        issues=tuple(issues),
    )


def transport_by_invertible(
    family: WeightedSubspaceFamily,
    operator,
    cond_cap: float = TRANSPORT_COND_CAP,
) -> WeightedSubspaceFamily:
    """Replace every subspace by the orthonormalized image under a map.

    Weights are unchanged. The map must be invertible with condition
    number at most ``cond_cap``; frame-ness of the family is preserved by
    any such map, and bounds are preserved exactly when the map is
    unitary between the source and target metrics.
    """
    U = np.asarray(operator, dtype=float)
    d = family.ambient_dim
    if U.shape != (d, d):
        raise ValueError(f"operator shape {U.shape} does not match dimension {d}")
    singular_values = np.linalg.svd(U, compute_uv=False)
    if singular_values[-1] <= 0.0 or (
        singular_values[0] / singular_values[-1] > cond_cap
    ):
        raise ValueError(
            "operator is numerically singular: singular values span "
            f"[{singular_values[-1]:.3e}, {singular_values[0]:.3e}]"
        )
    transported = tuple(
        Subspace(orthonormalize(U @ s.basis)) for s in family.subspaces
    )
    return WeightedSubspaceFamily(family.weights, transported)
