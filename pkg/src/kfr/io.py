"""Instance files, canonical serialization and content digests.

Instances and reports are JSON-compatible object trees. Serialization is
canonical: floats are printed with 17 significant digits in scientific
notation (enough for exact double round trips), keys keep construction
order, and indentation is fixed, so identical values produce identical
bytes. Parsing validates structure eagerly and reports the offending
field; a gram matrix that is asymmetric within tolerance is symmetrized
by averaging and the repair is recorded as an instance warning.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .fusion import WeightedSubspaceFamily
from .generators import DEFAULT_SWEEP_EPSILONS
from .krein import GramOperator, build_gram
from .subspaces import subspace_from_columns

__all__ = [
    "InstanceParseError",
    "InstanceValidationError",
    "InstanceOptions",
    "ProblemInstance",
    "dumps_canonical",
    "parse_instance",
    "parse_instance_text",
    "instance_payload",
    "serialize_instance",
    "instance_digest",
    "build_instance_gram",
    "build_instance_family",
]

#: Relative asymmetry allowed in a loaded gram matrix before rejection.
SYMMETRY_TOL = 1e-12


class InstanceParseError(Exception):
    """Raised for files that are not well-formed instances."""


class InstanceValidationError(Exception):
    """Raised for structurally valid files whose values break an invariant."""


@dataclass(frozen=True)
class InstanceOptions:
    """Tolerances and sweep grid carried by an instance."""

    epsilon_threshold: float = 1e-6
    cluster_tol: float = 1e-8
    frame_tol: float = 1e-10
    sweep_epsilons: tuple[float, ...] = DEFAULT_SWEEP_EPSILONS


@dataclass(frozen=True)
class ProblemInstance:
    """Validated problem statement: gram matrix, subspaces, weights."""

    dimension: int
    gram: np.ndarray
    subspace_columns: tuple[np.ndarray, ...]
    weights: tuple[float, ...]
    options: InstanceOptions = field(default_factory=InstanceOptions)
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        self.gram.flags.writeable = False
        for block in self.subspace_columns:
            block.flags.writeable = False


def _format_float(value: float) -> str:
    if not math.isfinite(value):
        raise ValueError(f"cannot serialize non-finite number {value!r}")
    return f"{value:.16e}"


def _write_canonical(obj, pieces: list[str], indent: int, level: int):
    pad = " " * (indent * level)
    inner = " " * (indent * (level + 1))
    if isinstance(obj, dict):
        if not obj:
            pieces.append("{}")
            return
        pieces.append("{\n")
        for index, (key, value) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise ValueError(f"object keys must be strings, got {key!r}")
            pieces.append(f"{inner}{json.dumps(key)}: ")
            _write_canonical(value, pieces, indent, level + 1)
            pieces.append(",\n" if index < len(obj) - 1 else "\n")
        pieces.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            pieces.append("[]")
            return
        pieces.append("[\n")
        for index, value in enumerate(obj):
            pieces.append(inner)
            _write_canonical(value, pieces, indent, level + 1)
            pieces.append(",\n" if index < len(obj) - 1 else "\n")
        pieces.append(pad + "]")
    elif isinstance(obj, bool) or obj is None:
        pieces.append(json.dumps(obj))
    elif isinstance(obj, int):
        pieces.append(str(obj))
    elif isinstance(obj, float):
        pieces.append(_format_float(obj))
    elif isinstance(obj, str):
        pieces.append(json.dumps(obj))
    else:
        raise ValueError(f"cannot serialize object of type {type(obj).__name__}")


def dumps_canonical(obj) -> str:
    """Deterministic JSON text: fixed float format, order and indentation."""
    pieces: list[str] = []
    _write_canonical(obj, pieces, indent=2, level=0)
    pieces.append("\n")
    return "".join(pieces)


def _require(mapping: dict, key: str, kind, where: str):
    if key not in mapping:
        raise InstanceParseError(f"missing field {key!r} in {where}")
    value = mapping[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InstanceParseError(f"field {key!r} in {where} must be a number")
        return float(value)
    if not isinstance(value, kind):
        raise InstanceParseError(
            f"field {key!r} in {where} must be {kind.__name__}"
        )
    return value


def _number_row(values, length: int, where: str) -> list[float]:
    if not isinstance(values, list) or len(values) != length:
        raise InstanceParseError(f"{where} must be a list of {length} numbers")
    row = []
    for value in values:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InstanceParseError(f"{where} must contain only numbers")
        row.append(float(value))
    return row


def parse_instance_text(text: str, source: str = "<string>") -> ProblemInstance:
    """Parse and validate an instance from JSON text."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceParseError(
            f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(data, dict):
        raise InstanceParseError(f"{source}: top level must be an object")

    dimension = _require(data, "dimension", int, source)
    if isinstance(dimension, bool) or dimension < 1:
        raise InstanceValidationError("dimension must be a positive integer")

    gram_rows = _require(data, "gram", list, source)
    if len(gram_rows) != dimension:
        raise InstanceValidationError(
            f"gram must have {dimension} rows, found {len(gram_rows)}"
        )
    gram = np.array(
        [
            _number_row(row, dimension, f"gram row {index}")
            for index, row in enumerate(gram_rows)
        ]
    )
    if not np.all(np.isfinite(gram)):
        raise InstanceValidationError("gram entries must be finite")

    warnings = []
    scale = float(np.abs(gram).max()) or 1.0
    asymmetry = float(np.abs(gram - gram.T).max())
    if asymmetry > SYMMETRY_TOL * scale:
        raise InstanceValidationError(
            f"gram is asymmetric by {asymmetry:.3e}, beyond tolerance "
            f"{SYMMETRY_TOL * scale:.3e}"
        )
    if asymmetry > 0.0:
        gram = (gram + gram.T) / 2.0
        warnings.append(
            f"gram symmetrized by averaging (largest asymmetry {asymmetry:.3e})"
        )

    subspace_entries = _require(data, "subspaces", list, source)
    if not subspace_entries:
        raise InstanceValidationError("at least one subspace is required")
    blocks = []
    for index, entry in enumerate(subspace_entries):
        if not isinstance(entry, dict):
            raise InstanceParseError(f"subspace {index} must be an object")
        vectors = _require(entry, "basis", list, f"subspace {index}")
        if not vectors:
            raise InstanceValidationError(f"subspace {index} has an empty basis")
        columns = [
            _number_row(vector, dimension, f"subspace {index} vector {j}")
            for j, vector in enumerate(vectors)
        ]
        blocks.append(np.array(columns, dtype=float).T)

    weight_values = _require(data, "weights", list, source)
    if len(weight_values) != len(blocks):
        raise InstanceValidationError(
            f"{len(weight_values)} weights for {len(blocks)} subspaces"
        )
    weights = []
    for index, value in enumerate(weight_values):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InstanceParseError(f"weight {index} must be a number")
        weight = float(value)
        if not (math.isfinite(weight) and weight > 0.0):
            raise InstanceValidationError("weights must be positive")
        weights.append(weight)

    options = InstanceOptions()
    if "options" in data:
        raw = data["options"]
        if not isinstance(raw, dict):
            raise InstanceParseError("options must be an object")
        eps_list = raw.get("sweepEpsilons", list(DEFAULT_SWEEP_EPSILONS))
        if not isinstance(eps_list, list) or not all(
            isinstance(e, (int, float)) and not isinstance(e, bool)
            for e in eps_list
        ):
            raise InstanceParseError("options.sweepEpsilons must be numbers")
        options = InstanceOptions(
            epsilon_threshold=float(raw.get("epsilonThreshold", 1e-6)),
            cluster_tol=float(raw.get("clusterTol", 1e-8)),
            frame_tol=float(raw.get("frameTol", 1e-10)),
            sweep_epsilons=tuple(float(e) for e in eps_list),
        )
        for name, value in (
            ("epsilonThreshold", options.epsilon_threshold),
            ("clusterTol", options.cluster_tol),
            ("frameTol", options.frame_tol),
        ):
            if not (math.isfinite(value) and value > 0.0):
                raise InstanceValidationError(f"options.{name} must be positive")

    return ProblemInstance(
        dimension=dimension,
        gram=gram,
        subspace_columns=tuple(blocks),
        weights=tuple(weights),
        options=options,
        warnings=tuple(warnings),
    )


def parse_instance(path) -> ProblemInstance:
    """Parse and validate an instance file."""
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise InstanceParseError(f"cannot read {path}: {exc}") from exc
    return parse_instance_text(text, source=str(path))


def instance_payload(instance: ProblemInstance) -> dict:
    """Instance as a canonical-serializable object tree."""
    return {
        "dimension": instance.dimension,
        "gram": [[float(v) for v in row] for row in instance.gram],
        "subspaces": [
            {"basis": [[float(v) for v in column] for column in block.T]}
            for block in instance.subspace_columns
        ],
        "weights": [float(w) for w in instance.weights],
        "options": {
            "epsilonThreshold": instance.options.epsilon_threshold,
            "clusterTol": instance.options.cluster_tol,
            "frameTol": instance.options.frame_tol,
            "sweepEpsilons": list(instance.options.sweep_epsilons),
        },
    }


def serialize_instance(instance: ProblemInstance) -> str:
    return dumps_canonical(instance_payload(instance))


def instance_digest(instance: ProblemInstance) -> str:
    """Content hash of the canonical instance bytes."""
    digest = hashlib.sha256(serialize_instance(instance).encode("utf-8"))
    return f"sha256:{digest.hexdigest()}"


def build_instance_gram(instance: ProblemInstance) -> GramOperator:
    return build_gram(instance.gram, instance.options.epsilon_threshold)


def build_instance_family(instance: ProblemInstance) -> WeightedSubspaceFamily:
    """Orthonormalize the stored columns into a weighted family."""
    subspaces = []
    for index, block in enumerate(instance.subspace_columns):
        subspace = subspace_from_columns(block)
        if subspace.dim == 0:
            raise InstanceValidationError(f"subspace {index} spans nothing")
        subspaces.append(subspace)
    return WeightedSubspaceFamily(instance.weights, tuple(subspaces))
