"""Schema, service, request and quality-matrix types.

Column order is always schema order: every vector and matrix derived from a
schema lists properties in the order they were defined.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence

from .errors import QosError

DEFAULT_MODE = "default"

# property name -> raw value; a property may be absent
QosProfile = Mapping[str, float]


class Direction(str, Enum):
    MINIMIZE = "min"
    MAXIMIZE = "max"

    @property
    def flag(self) -> int:
        """0 for minimize (lower raw value is better), 1 for maximize."""
        return 1 if self is Direction.MAXIMIZE else 0

    @classmethod
    def parse(cls, raw: object) -> "Direction":
        if isinstance(raw, Direction):
            return raw
        if raw in (0, "0", "min", "minimize", "MINIMIZE"):
            return cls.MINIMIZE
        if raw in (1, "1", "max", "maximize", "MAXIMIZE"):
            return cls.MAXIMIZE
        raise QosError("invalid-direction", f"direction must be 'min' or 'max', got {raw!r}")


@dataclass(frozen=True)
class QosPropertyDef:
    name: str
    direction: Direction
    unit: str = ""


@dataclass(frozen=True)
class QosSchema:
    properties: tuple[QosPropertyDef, ...]

    @property
    def k(self) -> int:
        return len(self.properties)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.properties)

    @property
    def nr(self) -> tuple[int, ...]:
        """Direction flags per column: 0 = minimize, 1 = maximize."""
        return tuple(p.direction.flag for p in self.properties)

    def __contains__(self, name: object) -> bool:
        return any(p.name == name for p in self.properties)

    def index(self, name: str) -> int:
        for i, p in enumerate(self.properties):
            if p.name == name:
                return i
        raise QosError("unknown-property", f"property {name!r} is not in the schema")

    def select(self, names: Iterable[str]) -> "QosSchema":
        """Sub-schema holding only ``names``, still in schema order."""
        wanted = set(names)
        for name in wanted:
            self.index(name)
        return QosSchema(tuple(p for p in self.properties if p.name in wanted))


def validate_schema(defs: Sequence[QosPropertyDef]) -> QosSchema:
    if not defs:
        raise QosError("empty-schema", "a schema needs at least one property")
    seen: set[str] = set()
    for i, d in enumerate(defs):
        if not isinstance(d.name, str) or not d.name.strip():
            raise QosError("empty-name", f"property #{i} has an empty name")
        if d.name in seen:
            raise QosError("duplicate-name", f"property {d.name!r} is defined twice")
        seen.add(d.name)
    return QosSchema(tuple(QosPropertyDef(d.name, Direction.parse(d.direction), d.unit) for d in defs))


def _check_number(value: object, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise QosError("invalid-value", f"{where}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise QosError("invalid-value", f"{where}: value must be finite, got {value!r}")
    return float(value)


def _check_profile(profile: Mapping[str, object], where: str) -> dict[str, float]:
    return {name: _check_number(v, f"{where}.{name}") for name, v in profile.items()}


@dataclass(frozen=True)
class ServiceRecord:
    id: str
    display_name: str = ""
    functional_tags: frozenset[str] = frozenset()
    profiles: Mapping[str, QosProfile] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not isinstance(self.id, str) or not self.id.strip():
            raise QosError("empty-id", "service id must be a non-empty string")
        if not self.profiles:
            raise QosError("no-profiles", f"service {self.id!r} declares no QoS profile")
        object.__setattr__(self, "functional_tags", frozenset(t.lower() for t in self.functional_tags))
        object.__setattr__(
            self,
            "profiles",
            {mode: _check_profile(p, f"{self.id}.{mode}") for mode, p in self.profiles.items()},
        )

    def profile_for(self, mode: str) -> Optional[QosProfile]:
        """Profile for ``mode``, falling back to the "default" profile."""
        if mode in self.profiles:
            return self.profiles[mode]
        return self.profiles.get(DEFAULT_MODE)


def check_record(record: ServiceRecord, schema: QosSchema) -> None:
    """Raise unknown-property if any profile names a property outside ``schema``."""
    for mode, profile in record.profiles.items():
        for name in profile:
            if name not in schema:
                raise QosError(
                    "unknown-property",
                    f"service {record.id!r} mode {mode!r} names unknown property {name!r}",
                )


@dataclass(frozen=True)
class MatchRequest:
    functional_tags: frozenset[str] = frozenset()
    mode: str = DEFAULT_MODE
    requirements: QosProfile = field(default_factory=dict)
    weights: Mapping[str, float] = field(default_factory=dict)
    top_k: int = 1

    def __post_init__(self) -> None:
        if isinstance(self.top_k, bool) or not isinstance(self.top_k, int) or self.top_k < 1:
            raise QosError("invalid-top-k", f"top_k must be a positive integer, got {self.top_k!r}")
        object.__setattr__(self, "functional_tags", frozenset(t.lower() for t in self.functional_tags))
        object.__setattr__(self, "requirements", _check_profile(self.requirements, "requirements"))
        object.__setattr__(self, "weights", _check_profile(self.weights, "weights"))

    def with_weights(self, weights: Mapping[str, float]) -> "MatchRequest":
        return MatchRequest(self.functional_tags, self.mode, self.requirements, weights, self.top_k)

    def with_top_k(self, top_k: int) -> "MatchRequest":
        return MatchRequest(self.functional_tags, self.mode, self.requirements, self.weights, top_k)


def requested_properties(request: MatchRequest, schema: QosSchema) -> tuple[str, ...]:
    """Names the consumer constrained, in schema order."""
    for name in request.requirements:
        if name not in schema:
            raise QosError("unknown-property", f"requirement names unknown property {name!r}")
    return tuple(n for n in schema.names if n in request.requirements)


def resolve_weights(request: MatchRequest, schema: QosSchema) -> tuple[float, ...]:
    """Weight vector over the requested properties, in schema order.

    Properties without an explicit weight get 1.0, so a request with no
    weights ranks by plain Euclidean distance.
    """
    names = requested_properties(request, schema)
    for name, w in request.weights.items():
        if name not in schema:
            raise QosError("unknown-property", f"weight names unknown property {name!r}")
        if name not in request.requirements:
            raise QosError("unrequested-weight", f"weight given for {name!r}, which is not requested")
        if not 0.0 < w <= 1.0:
            raise QosError("out-of-range-weight", f"weight for {name!r} must lie in (0, 1], got {w!r}")
    return tuple(float(request.weights.get(n, 1.0)) for n in names)


@dataclass(frozen=True)
class QualityMatrix:
    """Raw values, one row per candidate service and one column per property.

    ``None`` marks a property the provider did not declare for the mode.
    """

    service_ids: tuple[str, ...]
    schema: QosSchema
    values: tuple[tuple[Optional[float], ...], ...]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.service_ids), self.schema.k

    def column(self, v: int) -> tuple[Optional[float], ...]:
        return tuple(row[v] for row in self.values)


def build_quality_matrix(
    candidates: Sequence[ServiceRecord], schema: QosSchema, mode: str
) -> QualityMatrix:
    ids: list[str] = []
    rows: list[tuple[Optional[float], ...]] = []
    names = schema.names
    for record in candidates:
        profile = record.profile_for(mode)
        if profile is None:
            continue
        ids.append(record.id)
        rows.append(tuple(profile.get(n) for n in names))
    if not ids:
        raise QosError("no-candidates", f"no candidate offers a {mode!r} or {DEFAULT_MODE!r} profile")
    return QualityMatrix(tuple(ids), schema, tuple(rows))
