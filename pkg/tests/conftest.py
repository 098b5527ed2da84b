import pytest

from oracle import CASE1, CASE2, DIRECTION_FLAGS, PROPERTIES, REQUESTED, RAW_PROFILES
from qosbroker import Direction, MatchRequest, QosPropertyDef, RegistryStore, ServiceRecord, validate_schema

MODE = "WHM/NTM"
UNITS = ["ratio", "ms", "requests/s", "ratio", "ratio", "currency units"]


def weights_of(vector):
    return dict(zip(PROPERTIES, vector))


@pytest.fixture
def schema():
    return validate_schema(
        [
            QosPropertyDef(name, Direction.MAXIMIZE if flag else Direction.MINIMIZE, unit)
            for name, flag, unit in zip(PROPERTIES, DIRECTION_FLAGS, UNITS)
        ]
    )


@pytest.fixture
def services():
    return [
        ServiceRecord(sid, sid.upper(), frozenset({"weather"}), {MODE: dict(zip(PROPERTIES, row))})
        for sid, row in RAW_PROFILES.items()
    ]


@pytest.fixture
def store(schema, services):
    s = RegistryStore(schema)
    for record in services:
        s.register(record)
    return s


@pytest.fixture
def base_request():
    return MatchRequest(frozenset({"weather"}), MODE, dict(zip(PROPERTIES, REQUESTED)), {}, 4)


@pytest.fixture
def case1(base_request):
    return base_request.with_weights(weights_of(CASE1))


@pytest.fixture
def case2(base_request):
    return base_request.with_weights(weights_of(CASE2))
