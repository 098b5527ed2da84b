"""Weighted Euclidean matchmaking over normalized QoS profiles.

A candidate's distance to the consumer is ``sqrt(sum_h w_h * (s_h - r_h)**2)``
where ``s`` is its normalized profile, ``r`` the normalized requirement and
``w`` the consumer's per-property weights. The candidate with the smallest
distance wins; ties go to the lexicographically smallest service id.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .errors import QosError
from .model import (
    DEFAULT_MODE,
    MatchRequest,
    QosSchema,
    ServiceRecord,
    build_quality_matrix,
    requested_properties,
    resolve_weights,
)
from .normalization import NormalizedMatrix, normalize_matrix, normalize_request


@dataclass(frozen=True)
class DimensionContribution:
    property: str
    request_norm: float
    service_norm: float
    weight: float
    contribution: float


@dataclass(frozen=True)
class RankedService:
    service_id: str
    distance: float
    contributions: tuple[DimensionContribution, ...]


@dataclass(frozen=True)
class MatchResult:
    ranking: tuple[RankedService, ...]
    unranked: bool = False
    matrix_echo: Optional[NormalizedMatrix] = None

    @property
    def winner(self) -> Optional[str]:
        return self.ranking[0].service_id if self.ranking else None

    @property
    def distances(self) -> dict[str, float]:
        return {r.service_id: r.distance for r in self.ranking}


def weighted_distance(a: Sequence[float], b: Sequence[float], w: Sequence[float]) -> float:
    if not len(a) == len(b) == len(w):
        raise QosError("length-mismatch", f"vector lengths differ: {len(a)}, {len(b)}, {len(w)}")
    return math.sqrt(sum(wh * (ah - bh) ** 2 for ah, bh, wh in zip(a, b, w)))


def _terms(row: Sequence[float], request: Sequence[float], weights: Sequence[float]) -> list[float]:
    return [wh * (sh - rh) ** 2 for sh, rh, wh in zip(row, request, weights)]


def match(
    request: MatchRequest,
    candidates: Sequence[ServiceRecord],
    schema: QosSchema,
    *,
    echo_matrix: bool = False,
) -> MatchResult:
    """Rank functionally matching ``candidates`` against ``request``.

    Only the properties named in the request's requirements take part;
    unrequested columns are dropped before normalization so their spread
    never matters. With no requirements at all, the candidates that offer
    the requested mode are returned unranked, in registration order, at
    distance 0.
    """
    if not candidates:
        raise QosError("no-candidates", "no candidate services to rank")
    weights = resolve_weights(request, schema)
    names = requested_properties(request, schema)

    if not names:
        offered = [c for c in candidates if c.profile_for(request.mode) is not None]
        if not offered:
            raise QosError(
                "no-candidates", f"no candidate offers a {request.mode!r} or {DEFAULT_MODE!r} profile"
            )
        ranking = tuple(RankedService(c.id, 0.0, ()) for c in offered[: request.top_k])
        return MatchResult(ranking, unranked=True)

    sub = schema.select(names)
    norm = normalize_matrix(build_quality_matrix(candidates, sub, request.mode))
    target = normalize_request(request.requirements, norm.stats, sub)

    scored = []
    for sid, row in zip(norm.service_ids, norm.values):
        terms = _terms(row, target, weights)
        scored.append((math.sqrt(sum(terms)), sid, row, terms))
    best = heapq.nsmallest(request.top_k, scored, key=lambda t: (t[0], t[1]))

    ranking = tuple(
        RankedService(
            sid,
            dist,
            tuple(
                DimensionContribution(name, r, s, w, c)
                for name, r, s, w, c in zip(names, target, row, weights, terms)
            ),
        )
        for dist, sid, row, terms in best
    )
    return MatchResult(ranking, matrix_echo=norm if echo_matrix else None)


def explain(result: MatchResult, service_id: str) -> tuple[DimensionContribution, ...]:
    """Per-property breakdown of one ranked service's squared distance."""
    for ranked in result.ranking:
        if ranked.service_id == service_id:
            return ranked.contributions
    raise QosError("unknown-service-id", f"service {service_id!r} is not in the result")


@dataclass(frozen=True)
class SchemeRanking:
    name: str
    weights: Mapping[str, float]
    result: MatchResult
    winner_changed: bool

    @property
    def winner(self) -> Optional[str]:
        return self.result.winner


@dataclass(frozen=True)
class SchemeComparison:
    schemes: tuple[SchemeRanking, ...]

    @property
    def winners(self) -> list[Optional[str]]:
        return [s.winner for s in self.schemes]

    @property
    def any_changed(self) -> bool:
        return any(s.winner_changed for s in self.schemes)


def compare_schemes(
    request: MatchRequest,
    schemes: Sequence[tuple[str, Mapping[str, float]]],
    candidates: Sequence[ServiceRecord],
    schema: QosSchema,
) -> SchemeComparison:
    """Rank the same candidate snapshot once per named weight scheme.

    Each scheme replaces the request's weights; every ranking is complete
    (``top_k`` is widened to the candidate count). A scheme is flagged when
    its winner differs from the first scheme's.
    """
    if not schemes:
        raise QosError("missing-field", "at least one weight scheme is required")
    snapshot = tuple(candidates)
    full = max(len(snapshot), 1)
    rows: list[SchemeRanking] = []
    first_winner: Optional[str] = None
    for i, (name, weights) in enumerate(schemes):
        result = match(request.with_weights(weights).with_top_k(full), snapshot, schema)
        if i == 0:
            first_winner = result.winner
        rows.append(SchemeRanking(name, dict(weights), result, result.winner != first_winner))
    return SchemeComparison(tuple(rows))
