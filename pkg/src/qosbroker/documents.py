"""JSON shapes for match requests, match results and weight schemes."""
from __future__ import annotations

from typing import Any, Mapping, Optional

from .errors import QosError
from .matchmaking import DimensionContribution, MatchResult, RankedService, SchemeComparison
from .model import DEFAULT_MODE, MatchRequest
from .registry import check_fields, require_object, string_field, string_list

DISPLAY_DECIMALS = 4
NO_MATCH_FEEDBACK = "no registered service offers the requested functionality"


def request_from_document(doc: Any) -> MatchRequest:
    doc = require_object(doc, "match request")
    check_fields(doc, "match request", (), ("tags", "mode", "requirements", "weights", "top_k"))
    return MatchRequest(
        functional_tags=frozenset(string_list(doc.get("tags", []), "tags")),
        mode=string_field(doc.get("mode", DEFAULT_MODE), "mode"),
        requirements=require_object(doc.get("requirements", {}), "requirements"),
        weights=require_object(doc.get("weights", {}), "weights"),
        top_k=doc.get("top_k", 1),
    )


def request_to_document(request: MatchRequest) -> dict[str, Any]:
    return {
        "tags": sorted(request.functional_tags),
        "mode": request.mode,
        "requirements": dict(request.requirements),
        "weights": dict(request.weights),
        "top_k": request.top_k,
    }


def _contribution_doc(c: DimensionContribution) -> dict[str, Any]:
    return {
        "property": c.property,
        "request_norm": c.request_norm,
        "service_norm": c.service_norm,
        "weight": c.weight,
        "contribution": c.contribution,
    }


def result_to_document(
    result: MatchResult, feedback: Optional[str] = None, revision: Optional[int] = None
) -> dict[str, Any]:
    """``distance`` is rounded for display; ``distance_raw`` keeps full precision."""
    doc: dict[str, Any] = {
        "ranking": [
            {
                "id": r.service_id,
                "distance": round(r.distance, DISPLAY_DECIMALS),
                "distance_raw": r.distance,
                "contributions": [_contribution_doc(c) for c in r.contributions],
            }
            for r in result.ranking
        ],
        "unranked": result.unranked,
        "feedback": feedback,
    }
    if revision is not None:
        doc["revision"] = revision
    return doc


def result_from_document(doc: Any) -> MatchResult:
    doc = require_object(doc, "match result")
    check_fields(doc, "match result", ("ranking",), ("unranked", "feedback", "revision"))
    ranking = []
    for item in doc["ranking"]:
        item = require_object(item, "ranking entry")
        check_fields(item, "ranking entry", ("id", "distance_raw"), ("distance", "contributions"))
        contributions = tuple(
            DimensionContribution(
                c["property"], c["request_norm"], c["service_norm"], c["weight"], c["contribution"]
            )
            for c in item.get("contributions", [])
        )
        ranking.append(RankedService(item["id"], float(item["distance_raw"]), contributions))
    return MatchResult(tuple(ranking), unranked=bool(doc.get("unranked", False)))


def schemes_from_document(doc: Any) -> list[tuple[str, Mapping[str, float]]]:
    """Accept ``{"name": {weights}, ...}`` or ``[{"name": ..., "weights": {...}}, ...]``."""
    if isinstance(doc, dict):
        items = [(name, w) for name, w in doc.items()]
    elif isinstance(doc, list):
        items = []
        for entry in doc:
            entry = require_object(entry, "scheme")
            check_fields(entry, "scheme", ("name", "weights"))
            items.append((entry["name"], entry["weights"]))
    else:
        raise QosError("malformed-document", "schemes must be an object or a list")
    if not items:
        raise QosError("missing-field", "at least one weight scheme is required")
    return [(string_field(n, "scheme name"), require_object(w, f"scheme {n!r}")) for n, w in items]


def comparison_to_document(comparison: SchemeComparison) -> dict[str, Any]:
    return {
        "schemes": [
            {
                "name": s.name,
                "weights": dict(s.weights),
                "winner": s.winner,
                "winner_changed": s.winner_changed,
                "ranking": result_to_document(s.result)["ranking"],
            }
            for s in comparison.schemes
        ],
        "winner_changed": comparison.any_changed,
    }
