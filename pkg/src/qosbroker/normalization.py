"""Min-max normalization of quality matrices and consumer requirements.

Every column is mapped onto [0, 1] with 1 as the best value: minimized
properties use ``(max - x) / (max - min)``, maximized ones use
``(x - min) / (max - min)``. Column statistics come from the candidate
matrix only; the consumer's request never moves min or max.

Gaps in the plain formulas are closed as follows:

* a degenerate column (all present values equal, or none present) maps
  every present cell and the request to 1.0, so it cannot affect ranking;
* a missing provider value maps to 0.0, the worst score;
* a requested value outside ``[min, max]`` is clamped into range first.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .errors import QosError
from .model import Direction, QosSchema, QualityMatrix

MISSING_SCORE = 0.0
DEGENERATE_SCORE = 1.0


@dataclass(frozen=True)
class ColumnStats:
    name: str
    min: float
    max: float
    degenerate: bool

    @property
    def span(self) -> float:
        return self.max - self.min


@dataclass(frozen=True)
class NormalizedMatrix:
    service_ids: tuple[str, ...]
    schema: QosSchema
    values: tuple[tuple[float, ...], ...]
    stats: tuple[ColumnStats, ...]


def column_stats(name: str, column: Sequence[Optional[float]]) -> ColumnStats:
    present = [x for x in column if x is not None]
    if not present:
        return ColumnStats(name, 0.0, 0.0, True)
    lo, hi = min(present), max(present)
    return ColumnStats(name, lo, hi, lo == hi)


def _check_in_range(value: float, stats: ColumnStats) -> None:
    if stats.degenerate:
        raise QosError("degenerate-column", f"column {stats.name!r} has no spread")
    if not stats.min <= value <= stats.max:
        raise QosError(
            "value-out-of-range",
            f"{value!r} lies outside [{stats.min!r}, {stats.max!r}] for {stats.name!r}",
        )


def normalize_minimize(value: float, stats: ColumnStats) -> float:
    _check_in_range(value, stats)
    return (stats.max - value) / stats.span


def normalize_maximize(value: float, stats: ColumnStats) -> float:
    _check_in_range(value, stats)
    return (value - stats.min) / stats.span


def _normalize_present(value: float, stats: ColumnStats, direction: Direction) -> float:
    if stats.degenerate:
        return DEGENERATE_SCORE
    value = min(max(value, stats.min), stats.max)
    if direction is Direction.MINIMIZE:
        return normalize_minimize(value, stats)
    return normalize_maximize(value, stats)


def normalize_matrix(matrix: QualityMatrix) -> NormalizedMatrix:
    props = matrix.schema.properties
    stats = tuple(column_stats(p.name, matrix.column(v)) for v, p in enumerate(props))
    pairs = tuple(zip(stats, (p.direction for p in props)))
    values = tuple(
        tuple(
            MISSING_SCORE if x is None else _normalize_present(x, s, d)
            for x, (s, d) in zip(row, pairs)
        )
        for row in matrix.values
    )
    return NormalizedMatrix(matrix.service_ids, matrix.schema, values, stats)


def normalize_request(
    requirements: Mapping[str, float], stats: Sequence[ColumnStats], schema: QosSchema
) -> tuple[float, ...]:
    """Normalize the requested values against candidate column ``stats``.

    ``stats`` and ``schema`` must describe the same columns in the same order;
    the result covers the schema's properties that appear in ``requirements``.
    """
    if len(stats) != schema.k:
        raise QosError("length-mismatch", f"{len(stats)} column stats for a {schema.k}-property schema")
    return tuple(
        _normalize_present(requirements[p.name], s, p.direction)
        for p, s in zip(schema.properties, stats)
        if p.name in requirements
    )
