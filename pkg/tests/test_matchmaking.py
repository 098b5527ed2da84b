import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import weights_of
from helpers import to_package
from oracle import CASE1, CASE2, PROPERTIES, brute_force_partial, random_instance
from qosbroker import MatchRequest, QosError, ServiceRecord, compare_schemes, explain, match, weighted_distance

# normalized rows and request, rounded to 2 d.p.
T2_WS3 = [0.30, 1.00, 0.00, 0.00, 0.75, 0.75]
T2_WS4 = [1.00, 0.00, 1.00, 0.75, 1.00, 0.50]
QPC = [0.90, 0.00, 0.17, 0.75, 1.00, 0.75]

# full-precision oracle values (tests/oracle.py brute_force)
FULL_CASE1 = {"ws_1": 0.780699, "ws_2": 1.216046, "ws_3": 1.266162, "ws_4": 0.657204}
FULL_CASE2 = {"ws_1": 0.804117, "ws_2": 1.007451, "ws_3": 0.721476, "ws_4": 0.871605}
FULL_UNWEIGHTED = {"ws_1": 1.099593, "ws_2": 1.434732, "ws_3": 1.418724, "ws_4": 0.875754}

unit = st.floats(min_value=0.0, max_value=1.0)
weight = st.floats(min_value=1e-6, max_value=1.0)
triples = st.integers(min_value=1, max_value=8).flatmap(
    lambda k: st.tuples(
        st.lists(unit, min_size=k, max_size=k),
        st.lists(unit, min_size=k, max_size=k),
        st.lists(weight, min_size=k, max_size=k),
    )
)


class TestWeightedDistance:
    def test_reference_case1_ws4(self):
        assert weighted_distance(T2_WS4, QPC, CASE1) == pytest.approx(0.655, abs=0.005)

    def test_reference_case2_ws3(self):
        assert weighted_distance(T2_WS3, QPC, CASE2) == pytest.approx(0.7222, abs=0.005)

    def test_identity(self):
        assert weighted_distance(T2_WS4, T2_WS4, CASE1) == 0.0

    def test_weights_sit_inside_the_sum(self):
        assert weighted_distance([1.0, 0.0], [0.0, 0.0], [0.25, 1.0]) == pytest.approx(0.5)

    def test_length_mismatch(self):
        with pytest.raises(QosError) as exc:
            weighted_distance([0.1], [0.1, 0.2], [1.0])
        assert exc.value.code == "length-mismatch"

    @given(triples)
    def test_nonnegative_symmetric(self, t):
        a, b, w = t
        d = weighted_distance(a, b, w)
        assert d >= 0.0
        assert d == weighted_distance(b, a, w)
        assert weighted_distance(a, a, w) == 0.0
        if any(x != y for x, y in zip(a, b)):
            assert d > 0.0 or all(wh * (x - y) ** 2 == 0.0 for x, y, wh in zip(a, b, w))


class TestWeatherScenario:
    def test_case1(self, schema, services, case1):
        result = match(case1, services, schema)
        assert [r.service_id for r in result.ranking] == ["ws_4", "ws_1", "ws_2", "ws_3"]
        assert result.distances == pytest.approx({"ws_1": 0.782, "ws_2": 1.215, "ws_3": 1.266, "ws_4": 0.655}, abs=0.005)
        assert result.distances == pytest.approx(FULL_CASE1, abs=1e-6)

    def test_case2(self, schema, services, case2):
        result = match(case2, services, schema)
        assert result.winner == "ws_3"
        assert result.distances["ws_3"] == pytest.approx(0.7222, abs=0.005)
        assert result.distances == pytest.approx(FULL_CASE2, abs=1e-6)

    def test_unweighted_baseline(self, schema, services, base_request):
        result = match(base_request, services, schema)
        assert result.winner == "ws_4"
        assert result.distances == pytest.approx(FULL_UNWEIGHTED, abs=1e-6)

    def test_top_k_default_is_one(self, schema, services, case1):
        result = match(case1.with_top_k(1), services, schema)
        assert len(result.ranking) == 1 and result.winner == "ws_4"

    def test_partial_request_drops_columns(self, schema, services):
        req = MatchRequest(mode="WHM/NTM", requirements={"cost": 100, "throughput": 200}, top_k=4)
        result = match(req, services, schema)
        assert [c.property for c in result.ranking[0].contributions] == ["throughput", "cost"]
        # ws_4 has the best throughput (200) but cost 300: norm cost 0.5, norm throughput 1.0
        assert result.distances["ws_4"] == pytest.approx(0.5)

    def test_empty_requirements_unranked(self, schema, services):
        result = match(MatchRequest(mode="WHM/NTM", top_k=4), services, schema)
        assert result.unranked
        assert [r.service_id for r in result.ranking] == ["ws_1", "ws_2", "ws_3", "ws_4"]
        assert all(r.distance == 0.0 for r in result.ranking)

    def test_no_candidates(self, schema, case1):
        with pytest.raises(QosError) as exc:
            match(case1, [], schema)
        assert exc.value.code == "no-candidates"

    def test_echo_matrix(self, schema, services, case1):
        result = match(case1, services, schema, echo_matrix=True)
        assert result.matrix_echo is not None
        assert result.matrix_echo.service_ids == ("ws_1", "ws_2", "ws_3", "ws_4")

    def test_tie_break_by_id(self, schema):
        recs = [ServiceRecord(i, profiles={"default": {"cost": 5}}) for i in ("b", "a", "c")]
        result = match(MatchRequest(requirements={"cost": 5}, top_k=3), recs, schema)
        assert [r.service_id for r in result.ranking] == ["a", "b", "c"]


class TestExplain:
    def test_ws1_case1(self, schema, services, case1):
        contribs = {c.property: c for c in explain(match(case1, services, schema), "ws_1")}
        assert contribs["cost"].contribution == pytest.approx(0.1 * 0.75**2)
        assert contribs["response_time"].contribution == pytest.approx((2 / 3) ** 2)
        assert max(contribs.values(), key=lambda c: c.contribution).property == "response_time"

    def test_ws4_case1_nonzero(self, schema, services, case1):
        contribs = explain(match(case1, services, schema), "ws_4")
        nonzero = [c.property for c in contribs if c.contribution > 1e-12]
        assert nonzero == ["scalability", "throughput", "cost"]

    def test_schema_order_and_sum(self, schema, services, case2):
        result = match(case2, services, schema)
        for r in result.ranking:
            cs = explain(result, r.service_id)
            assert [c.property for c in cs] == PROPERTIES
            assert math.isclose(sum(c.contribution for c in cs), r.distance**2, rel_tol=1e-12)
            assert all(c.contribution >= 0 for c in cs)

    def test_zero_distance(self, schema):
        rec = ServiceRecord("x", profiles={"default": {"cost": 3}})
        result = match(MatchRequest(requirements={"cost": 3}), [rec], schema)
        assert result.ranking[0].distance == 0.0
        assert all(c.contribution == 0.0 for c in explain(result, "x"))

    def test_unknown_id(self, schema, services, case1):
        with pytest.raises(QosError) as exc:
            explain(match(case1, services, schema), "ws_9")
        assert exc.value.code == "unknown-service-id"


class TestCompareSchemes:
    def test_reference_flip(self, schema, services, base_request):
        cmp = compare_schemes(
            base_request, [("case1", weights_of(CASE1)), ("case2", weights_of(CASE2))], services, schema
        )
        assert cmp.winners == ["ws_4", "ws_3"]
        assert [s.winner_changed for s in cmp.schemes] == [False, True]
        assert cmp.any_changed
        assert all(len(s.result.ranking) == 4 for s in cmp.schemes)

    def test_identical_schemes(self, schema, services, base_request):
        cmp = compare_schemes(base_request, [("a", weights_of(CASE1)), ("b", weights_of(CASE1))], services, schema)
        assert cmp.schemes[0].result == cmp.schemes[1].result
        assert not cmp.any_changed

    def test_unweighted_vs_case1(self, schema, services, base_request):
        cmp = compare_schemes(base_request, [("flat", {}), ("case1", weights_of(CASE1))], services, schema)
        assert cmp.winners == ["ws_4", "ws_4"]
        assert not cmp.any_changed

    def test_needs_a_scheme(self, schema, services, base_request):
        with pytest.raises(QosError):
            compare_schemes(base_request, [], services, schema)

    def test_invalid_scheme_propagates(self, schema, services, base_request):
        with pytest.raises(QosError) as exc:
            compare_schemes(base_request, [("bad", {"cost": 2.0})], services, schema)
        assert exc.value.code == "out-of-range-weight"


# -- randomized invariants ----------------------------------------------------


def _instances(seed, count):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield random_instance(rng)


def _distances(schema, records, req):
    return match(req, records, schema).distances


def test_oracle_equivalence_sample():
    for inst in _instances(7, 200):
        expected, winner = brute_force_partial(*inst)
        schema, records, req = to_package(*inst)
        result = match(req, records, schema)
        for sid, d in expected.items():
            assert result.distances[sid] == pytest.approx(d, abs=1e-9)
        assert result.winner == winner


def _order_respecting_ties(ranking):
    ds = [r.distance for r in ranking]
    return all(a <= b + 1e-12 for a, b in zip(ds, ds[1:]))


@pytest.mark.parametrize("seed", range(5))
def test_uniform_weight_scaling(seed):
    rng = np.random.default_rng(100 + seed)
    for inst in _instances(seed, 40):
        schema, records, req = to_package(*inst)
        base = match(req, records, schema)
        c = float(rng.uniform(0.01, 1.0 / max(req.weights.values())))
        scaled = match(req.with_weights({k: min(1.0, w * c) for k, w in req.weights.items()}), records, schema)
        for sid, d in base.distances.items():
            assert scaled.distances[sid] == pytest.approx(d * math.sqrt(c), rel=1e-9, abs=1e-12)
        if len(base.ranking) > 1 and base.ranking[1].distance - base.ranking[0].distance > 1e-9:
            assert scaled.winner == base.winner


def test_ranking_sorted_with_id_tiebreak():
    for inst in _instances(11, 200):
        schema, records, req = to_package(*inst)
        ranking = match(req, records, schema).ranking
        assert _order_respecting_ties(ranking)
        for a, b in zip(ranking, ranking[1:]):
            if a.distance == b.distance:
                assert a.service_id < b.service_id


def test_zero_weight_equals_column_deletion():
    for inst in _instances(3, 150):
        ids, raw, nr, requested, request, weights = inst
        if len(requested) < 2:
            continue
        drop = requested[0]
        tiny = list(weights)
        tiny[drop] = 1e-14
        s1, r1, q1 = to_package(ids, raw, nr, requested, request, tiny)
        s2, r2, q2 = to_package(ids, raw, nr, requested[1:], request, weights)
        d1, d2 = _distances(s1, r1, q1), _distances(s2, r2, q2)
        for sid in ids:
            assert d1[sid] == pytest.approx(d2[sid], abs=1e-6)


def test_deleting_agreeing_dimension_keeps_distance():
    rng = np.random.default_rng(5)
    for inst in _instances(4, 150):
        ids, raw, nr, requested, request, weights = inst
        if len(requested) < 2:
            continue
        drop = requested[0]
        present = [i for i, row in enumerate(raw) if row[drop] is not None]
        if not present:
            continue
        agree = int(rng.choice(present))
        request = list(request)
        request[drop] = raw[agree][drop]
        full = _distances(*to_package(ids, raw, nr, requested, request, weights))
        cut = _distances(*to_package(ids, raw, nr, requested[1:], request, weights))
        assert full[ids[agree]] == pytest.approx(cut[ids[agree]], abs=1e-12)


def test_monotone_single_weight_penalty():
    rng = np.random.default_rng(9)
    for inst in _instances(8, 150):
        ids, raw, nr, requested, request, weights = inst
        v = int(rng.choice(requested))
        lower = list(weights)
        lower[v] = weights[v] * 0.5
        schema, records, req_lo = to_package(ids, raw, nr, requested, request, lower)
        _, _, req_hi = to_package(ids, raw, nr, requested, request, weights)
        lo = match(req_lo, records, schema)
        hi = match(req_hi, records, schema)
        for r in lo.ranking:
            c = next(c for c in r.contributions if c.property == f"p{v}")
            assert hi.distances[r.service_id] >= r.distance - 1e-15
            if c.request_norm != c.service_norm:
                assert hi.distances[r.service_id] > r.distance
            else:
                assert hi.distances[r.service_id] == pytest.approx(r.distance, abs=1e-15)
