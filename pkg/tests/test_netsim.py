"""Waterfall simulation, plan inference, and trace throttling."""

import math

import pytest

from oracles import waterfall_march
from conftest import random_plan, random_profile
from webaudit.errors import CyclicPlan
from webaudit.netsim import (
    PlannedRequest,
    ThrottleProfile,
    UNTHROTTLED,
    WaterfallPlan,
    apply_throttle,
    infer_plan,
    simulate_waterfall,
)
from webaudit.trace import (
    MainThreadTask,
    NetworkRequest,
    NormalizedTrace,
    PaintEvent,
    VisualSample,
)

FOUR_G = ThrottleProfile(rtt_ms=100.0, downlink_kbps=1000.0, uplink_kbps=1000.0, cpu_multiplier=1.0)


def plan(*reqs) -> WaterfallPlan:
    return WaterfallPlan(tuple(PlannedRequest(*r) for r in reqs))


class TestProfiles:
    def test_validation(self):
        for bad in (
            dict(rtt_ms=-1.0, downlink_kbps=1.0, uplink_kbps=1.0),
            dict(rtt_ms=0.0, downlink_kbps=0.0, uplink_kbps=1.0),
            dict(rtt_ms=0.0, downlink_kbps=1.0, uplink_kbps=0.0),
            dict(rtt_ms=0.0, downlink_kbps=1.0, uplink_kbps=1.0, cpu_multiplier=0.5),
        ):
            with pytest.raises(ValueError):
                ThrottleProfile(**bad)

    def test_identity_detection(self):
        assert UNTHROTTLED.is_identity
        assert not FOUR_G.is_identity
        assert not ThrottleProfile(0.0, math.inf, math.inf, 4.0).is_identity


class TestPlanValidation:
    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            plan(("a", None, 0.0, 10), ("a", None, 0.0, 10))

    def test_unknown_parent_rejected(self):
        with pytest.raises(ValueError, match="unknown parent"):
            plan(("a", "ghost", 0.0, 10))

    def test_cycle_rejected(self):
        with pytest.raises(CyclicPlan):
            plan(("a", "b", 0.0, 10), ("b", "a", 0.0, 10))

    def test_negative_fields_rejected(self):
        with pytest.raises(ValueError):
            PlannedRequest("a", None, -1.0, 10)
        with pytest.raises(ValueError):
            PlannedRequest("a", None, 0.0, -10)


class TestSimulateWaterfall:
    def test_single_request(self):
        # 500 kilobits through a 1000 kbps pipe after one 100 ms round trip
        sims = simulate_waterfall(plan(("a", None, 0.0, 62500)), FOUR_G)
        assert [(s.start_ms, s.end_ms) for s in sims] == [(100.0, 600.0)]

    def test_two_simultaneous_requests_share_the_pipe(self):
        sims = simulate_waterfall(
            plan(("a", None, 0.0, 62500), ("b", None, 0.0, 62500)), FOUR_G
        )
        assert [(s.start_ms, s.end_ms) for s in sims] == [(100.0, 1100.0), (100.0, 1100.0)]

    def test_chained_request_waits_for_parent(self):
        sims = simulate_waterfall(
            plan(("a", None, 0.0, 62500), ("b", "a", 0.0, 25000)), FOUR_G
        )
        assert [(s.start_ms, s.end_ms) for s in sims] == [(100.0, 600.0), (700.0, 900.0)]

    def test_results_sorted_by_id(self):
        sims = simulate_waterfall(
            plan(("z", None, 0.0, 1000), ("a", "z", 0.0, 1000)), FOUR_G
        )
        assert [s.id for s in sims] == ["a", "z"]

    def test_zero_bytes_finish_instantly(self):
        sims = simulate_waterfall(plan(("a", None, 40.0, 0)), FOUR_G)
        assert [(s.start_ms, s.end_ms) for s in sims] == [(140.0, 140.0)]

    def test_infinite_downlink_transfers_instantly(self):
        profile = ThrottleProfile(50.0, math.inf, math.inf, 1.0)
        sims = simulate_waterfall(
            plan(("a", None, 0.0, 10**9), ("b", "a", 10.0, 10**9)), profile
        )
        assert [(s.start_ms, s.end_ms) for s in sims] == [(50.0, 50.0), (110.0, 110.0)]

    def test_empty_plan(self):
        assert simulate_waterfall(WaterfallPlan(()), FOUR_G) == []

    def test_late_arrival_slows_the_first_transfer(self):
        # b arrives at 600 when a still has 500 kbits left; they then share
        sims = simulate_waterfall(
            plan(("a", None, 0.0, 125000), ("b", None, 500.0, 62500)), FOUR_G
        )
        by_id = {s.id: s for s in sims}
        assert by_id["a"].end_ms == pytest.approx(1600.0, abs=1e-6)
        assert by_id["b"].end_ms == pytest.approx(1600.0, abs=1e-6)

    def test_matches_exact_oracle_on_random_plans(self, rng):
        for _ in range(200):
            p = random_plan(rng)
            profile = random_profile(rng)
            expected = waterfall_march(p, profile)
            for sim in simulate_waterfall(p, profile):
                want_start, want_end = expected[sim.id]
                assert sim.start_ms == pytest.approx(want_start, abs=1e-3)
                assert sim.end_ms == pytest.approx(want_end, abs=1e-3)


class TestInferPlan:
    def test_parent_is_latest_request_done_by_discovery(self):
        trace = NormalizedTrace(
            requests=(
                NetworkRequest(0.0, 10.0, 600.0, 100, "https://a.test"),
                NetworkRequest(600.0, 620.0, 900.0, 100, "https://a.test"),
                NetworkRequest(300.0, 310.0, 450.0, 100, "https://a.test"),
            )
        )
        p = infer_plan(trace)
        assert [r.parent_id for r in p.requests] == [None, "000000", None]
        assert [r.discovery_offset_ms for r in p.requests] == [0.0, 0.0, 300.0]

    def test_tie_prefers_earliest_finisher(self):
        trace = NormalizedTrace(
            requests=(
                NetworkRequest(0.0, 0.0, 500.0, 100, "https://a.test"),
                NetworkRequest(0.0, 0.0, 500.0, 100, "https://a.test"),
                NetworkRequest(500.0, 510.0, 700.0, 100, "https://a.test"),
            )
        )
        assert infer_plan(trace).requests[2].parent_id == "000000"

    def test_simultaneous_zero_length_twins_stay_acyclic(self):
        # the naive rule would make these two adopt each other
        trace = NormalizedTrace(
            requests=(
                NetworkRequest(100.0, 100.0, 100.0, 0, "https://a.test"),
                NetworkRequest(100.0, 100.0, 100.0, 0, "https://a.test"),
            )
        )
        p = infer_plan(trace)
        assert [r.parent_id for r in p.requests] == [None, "000000"]

    def test_ids_follow_trace_order(self, rng):
        from conftest import random_trace

        trace = random_trace(rng)
        p = infer_plan(trace)
        assert [r.id for r in p.requests] == sorted(r.id for r in p.requests)
        assert [r.bytes for r in p.requests] == [r.bytes for r in trace.requests]


class TestApplyThrottle:
    def base_trace(self) -> NormalizedTrace:
        return NormalizedTrace(
            paint_events=(
                PaintEvent(50.0, "first-paint"),
                PaintEvent(650.0, "contentful-paint"),
            ),
            tasks=(MainThreadTask(200.0, 40.0), MainThreadTask(700.0, 100.0)),
            requests=(NetworkRequest(0.0, 100.0, 600.0, 125000, "https://a.test"),),
            visual_progress=(VisualSample(50.0, 0.3), VisualSample(650.0, 1.0)),
        )

    def test_identity_profile_returns_the_same_object(self):
        trace = self.base_trace()
        assert apply_throttle(trace, UNTHROTTLED) is trace

    def test_requests_resimulated_under_profile(self):
        profile = ThrottleProfile(100.0, 1000.0, 1000.0, 2.0)
        out = apply_throttle(self.base_trace(), profile)
        # 1000 kilobits at 1000 kbps: starts after rtt, takes a full second
        assert out.requests == (NetworkRequest(0.0, 100.0, 1100.0, 125000, "https://a.test"),)

    def test_tasks_scaled_and_repacked_preserving_gaps(self):
        profile = ThrottleProfile(100.0, 1000.0, 1000.0, 2.0)
        out = apply_throttle(self.base_trace(), profile)
        assert out.tasks == (MainThreadTask(200.0, 80.0), MainThreadTask(740.0, 200.0))

    def test_paints_shift_with_the_latest_finished_request(self):
        profile = ThrottleProfile(100.0, 1000.0, 1000.0, 2.0)
        out = apply_throttle(self.base_trace(), profile)
        # request end moved 600 -> 1100; the paint before any request end stays
        assert [p.t_ms for p in out.paint_events] == [50.0, 1150.0]
        assert [s.t_ms for s in out.visual_progress] == [50.0, 1150.0]

    def test_throttled_trace_still_validates(self, rng):
        from conftest import random_trace

        for _ in range(50):
            trace = random_trace(rng)
            out = apply_throttle(trace, FOUR_G)
            again = NormalizedTrace.from_dict(out.to_dict())
            assert again == out

    def test_unconstrained_network_collapses_recorded_network_time(self):
        # re-simulation attributes the recorded transfer time to the
        # recording network, so an infinite pipe pulls everything to 0
        profile = ThrottleProfile(0.0, math.inf, math.inf, 4.0)
        out = apply_throttle(self.base_trace(), profile)
        assert out.requests == (NetworkRequest(0.0, 0.0, 0.0, 125000, "https://a.test"),)
        assert out.tasks == (MainThreadTask(200.0, 160.0), MainThreadTask(820.0, 400.0))
        assert [p.t_ms for p in out.paint_events] == [50.0, 50.0]
