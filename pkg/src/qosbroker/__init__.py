"""QoS-aware service registry and weighted-distance matchmaker."""
from .errors import QosError
from .matchmaking import (
    DimensionContribution,
    MatchResult,
    RankedService,
    SchemeComparison,
    compare_schemes,
    explain,
    match,
    weighted_distance,
)
from .model import (
    DEFAULT_MODE,
    Direction,
    MatchRequest,
    QosPropertyDef,
    QosSchema,
    QualityMatrix,
    ServiceRecord,
    build_quality_matrix,
    resolve_weights,
    validate_schema,
)
from .normalization import (
    ColumnStats,
    NormalizedMatrix,
    normalize_matrix,
    normalize_maximize,
    normalize_minimize,
    normalize_request,
)
from .registry import RegistryStore, load_store, save_store

__all__ = [
    "DEFAULT_MODE",
    "ColumnStats",
    "DimensionContribution",
    "Direction",
    "MatchRequest",
    "MatchResult",
    "NormalizedMatrix",
    "QosError",
    "QosPropertyDef",
    "QosSchema",
    "QualityMatrix",
    "RankedService",
    "RegistryStore",
    "SchemeComparison",
    "ServiceRecord",
    "build_quality_matrix",
    "compare_schemes",
    "explain",
    "load_store",
    "match",
    "normalize_matrix",
    "normalize_maximize",
    "normalize_minimize",
    "normalize_request",
    "resolve_weights",
    "save_store",
    "validate_schema",
    "weighted_distance",
]
