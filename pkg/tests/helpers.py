"""Build package objects from the oracle's plain-data instances."""
from qosbroker import MatchRequest, QosPropertyDef, ServiceRecord, validate_schema


def to_package(ids, raw, nr, requested, request, weights, top_k=None):
    names = [f"p{v}" for v in range(len(nr))]
    schema = validate_schema([QosPropertyDef(n, "max" if f else "min") for n, f in zip(names, nr)])
    records = [
        ServiceRecord(sid, profiles={"default": {n: x for n, x in zip(names, row) if x is not None}})
        for sid, row in zip(ids, raw)
    ]
    req = MatchRequest(
        requirements={names[v]: request[v] for v in requested},
        weights={names[v]: weights[v] for v in requested},
        top_k=top_k or len(ids),
    )
    return schema, records, req
