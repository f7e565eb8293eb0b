"""Network waterfall simulation for throttled replay.

The downlink is modeled as a single shared pipe split equally among all
requests in flight (processor sharing). A request becomes visible some
fixed offset after its parent finishes, then spends one round trip before
its first byte arrives. Applying a throttle to a recorded trace rebuilds
the request waterfall under these rules, stretches main-thread tasks, and
shifts paint/visual timestamps along with the requests that preceded them.
"""

from __future__ import annotations

import bisect
import heapq
import math
from dataclasses import dataclass, replace
from typing import Sequence

from .errors import CyclicPlan
from .trace import (
    MainThreadTask,
    NetworkRequest,
    NormalizedTrace,
    VisualSample,
    clamp_visual_progress,
)

# A transfer counts as finished once this little payload remains; soaks up
# float drift from repeated share subtraction.
_COMPLETION_EPS_KBITS = 1e-9


@dataclass(frozen=True)
class ThrottleProfile:
    """Fully resolved throttling parameters (no deferred fields)."""

    rtt_ms: float
    downlink_kbps: float
    uplink_kbps: float
    cpu_multiplier: float = 1.0

    def __post_init__(self):
        if self.rtt_ms < 0:
            raise ValueError(f"rtt_ms must be >= 0, got {self.rtt_ms!r}")
        if not self.downlink_kbps > 0:
            raise ValueError(f"downlink_kbps must be > 0, got {self.downlink_kbps!r}")
        if not self.uplink_kbps > 0:
            raise ValueError(f"uplink_kbps must be > 0, got {self.uplink_kbps!r}")
        if self.cpu_multiplier < 1:
            raise ValueError(f"cpu_multiplier must be >= 1, got {self.cpu_multiplier!r}")

    @property
    def is_identity(self) -> bool:
        """True when applying this profile must leave a trace untouched."""
        return self.rtt_ms == 0 and math.isinf(self.downlink_kbps) and self.cpu_multiplier == 1


UNTHROTTLED = ThrottleProfile(rtt_ms=0.0, downlink_kbps=math.inf, uplink_kbps=math.inf, cpu_multiplier=1.0)


@dataclass(frozen=True)
class PlannedRequest:
    """One request in a dependency plan.

    discovery_offset_ms counts from the parent's completion, or from
    navigation start when there is no parent.
    """

    id: str
    parent_id: str | None
    discovery_offset_ms: float
    bytes: int
    origin: str = ""

    def __post_init__(self):
        if self.bytes < 0:
            raise ValueError(f"bytes must be >= 0, got {self.bytes!r}")
        if self.discovery_offset_ms < 0:
            raise ValueError(f"discovery_offset_ms must be >= 0, got {self.discovery_offset_ms!r}")


@dataclass(frozen=True)
class WaterfallPlan:
    """An acyclic forest of planned requests with unique ids."""

    requests: tuple[PlannedRequest, ...]

    def __post_init__(self):
        object.__setattr__(self, "requests", tuple(self.requests))
        by_id: dict[str, PlannedRequest] = {}
        for req in self.requests:
            if req.id in by_id:
                raise ValueError(f"duplicate request id {req.id!r}")
            by_id[req.id] = req
        for req in self.requests:
            if req.parent_id is not None and req.parent_id not in by_id:
                raise ValueError(f"request {req.id!r} references unknown parent {req.parent_id!r}")
        # Each node has at most one parent, so a cycle shows up as a repeat
        # on the walk up the parent chain.
        state: dict[str, int] = {}  # 1 = on the current chain, 2 = cleared
        for req in self.requests:
            chain = []
            node: str | None = req.id
            while node is not None and state.get(node) != 2:
                if state.get(node) == 1:
                    raise CyclicPlan(f"dependency cycle through request {node!r}")
                state[node] = 1
                chain.append(node)
                node = by_id[node].parent_id
            for visited in chain:
                state[visited] = 2


@dataclass(frozen=True)
class SimulatedRequest:
    id: str
    start_ms: float
    end_ms: float


def simulate_waterfall(plan: WaterfallPlan, profile: ThrottleProfile) -> list[SimulatedRequest]:
    """Play a plan through the shared-downlink model.

    A request starts at max(parent end, 0) + discovery_offset_ms + rtt_ms
    and finishes once its payload has passed through its time-varying share
    of the downlink. The result is sorted by request id.
    """
    requests = plan.requests
    if not requests:
        return []
    by_id = {r.id: r for r in requests}
    children: dict[str | None, list[PlannedRequest]] = {}
    for req in requests:
        children.setdefault(req.parent_id, []).append(req)

    starts: dict[str, float] = {}
    ends: dict[str, float] = {}
    arrivals: list[tuple[float, str]] = []  # heap: (first-byte time, id)

    def schedule(req: PlannedRequest, parent_end: float) -> None:
        start = max(parent_end, 0.0) + req.discovery_offset_ms + profile.rtt_ms
        starts[req.id] = start
        heapq.heappush(arrivals, (start, req.id))

    for root in children.get(None, []):
        schedule(root, 0.0)

    if math.isinf(profile.downlink_kbps):
        # Unlimited pipe: every transfer is instantaneous once started.
        while arrivals:
            start, rid = heapq.heappop(arrivals)
            ends[rid] = start
            for child in children.get(rid, []):
                schedule(child, start)
    else:
        capacity = profile.downlink_kbps
        active: dict[str, float] = {}  # id -> kilobits remaining
        now = 0.0
        while arrivals or active:
            if active:
                n = len(active)
                t_complete = now + min(active.values()) * n / capacity * 1000.0
            else:
                t_complete = math.inf
            t_arrival = arrivals[0][0] if arrivals else math.inf
            t_next = min(t_complete, t_arrival)
            if active and t_next > now:
                drained = capacity / len(active) * (t_next - now) / 1000.0
                for rid in active:
                    active[rid] -= drained
            now = t_next
            for rid in sorted(r for r, left in active.items() if left <= _COMPLETION_EPS_KBITS):
                del active[rid]
                ends[rid] = now
                for child in children.get(rid, []):
                    schedule(child, now)
            while arrivals and arrivals[0][0] <= now:
                _, rid = heapq.heappop(arrivals)
                kbits = by_id[rid].bytes * 8.0 / 1000.0
                if kbits <= _COMPLETION_EPS_KBITS:
                    ends[rid] = starts[rid]
                    for child in children.get(rid, []):
                        schedule(child, starts[rid])
                else:
                    active[rid] = kbits

    return sorted(
        (SimulatedRequest(rid, starts[rid], ends[rid]) for rid in starts),
        key=lambda sim: sim.id,
    )


def _plan_request_id(index: int) -> str:
    # Zero-padded so lexicographic id order equals trace request order.
    return f"{index:06d}"


def infer_plan(trace: NormalizedTrace) -> WaterfallPlan:
    """Reconstruct the dependency plan a recorded waterfall implies.

    A request's parent is the request that finished last at or before its
    discovery (ties keep the earliest request); the leftover gap becomes the
    discovery offset. The parent must additionally precede the child in
    (end_ms, index) order, or two zero-length requests discovered at the
    same instant could adopt each other.
    """
    reqs = trace.requests
    planned = []
    for i, req in enumerate(reqs):
        parent_index = None
        best: tuple[float, int] | None = None
        for j, cand in enumerate(reqs):
            if cand.end_ms > req.discovered_ms:
                continue
            if (cand.end_ms, j) >= (req.end_ms, i):
                continue
            key = (cand.end_ms, -j)
            if best is None or key > best:
                best = key
                parent_index = j
        if parent_index is None:
            parent_id = None
            offset = req.discovered_ms
        else:
            parent_id = _plan_request_id(parent_index)
            offset = req.discovered_ms - reqs[parent_index].end_ms
        planned.append(
            PlannedRequest(
                id=_plan_request_id(i),
                parent_id=parent_id,
                discovery_offset_ms=offset,
                bytes=req.bytes,
                origin=req.origin,
            )
        )
    return WaterfallPlan(tuple(planned))


def apply_throttle(trace: NormalizedTrace, profile: ThrottleProfile) -> NormalizedTrace:
    """Rebuild a trace as if it had been recorded under the profile."""
    # Recorded timestamps already contain the recording network's own
    # delays, so even a no-op re-simulation would move them; the identity
    # profile must therefore return the trace exactly as given.
    if profile.is_identity:
        return trace

    simulated = simulate_waterfall(infer_plan(trace), profile)
    # Plan ids are zero-padded indices, so the id-sorted output lines up
    # with the trace's request order.
    new_requests = tuple(
        NetworkRequest(
            discovered_ms=sim.start_ms - profile.rtt_ms,
            start_ms=sim.start_ms,
            end_ms=sim.end_ms,
            bytes=old.bytes,
            origin=old.origin,
        )
        for old, sim in zip(trace.requests, simulated)
    )

    scaled_tasks = []
    prev_old_end = 0.0
    prev_new_end = 0.0
    for task in trace.tasks:
        gap = task.start_ms - prev_old_end
        start = prev_new_end + gap
        dur = task.dur_ms * profile.cpu_multiplier
        scaled_tasks.append(MainThreadTask(start_ms=start, dur_ms=dur))
        prev_old_end = task.end_ms
        prev_new_end = start + dur

    shifts = _end_shift_table(trace.requests, simulated)
    new_paints = tuple(replace(p, t_ms=p.t_ms + _shift_at(shifts, p.t_ms)) for p in trace.paint_events)
    moved = sorted(
        (VisualSample(t_ms=s.t_ms + _shift_at(shifts, s.t_ms), fraction=s.fraction) for s in trace.visual_progress),
        key=lambda s: s.t_ms,
    )

    return NormalizedTrace(
        nav_start=trace.nav_start,
        paint_events=new_paints,
        tasks=tuple(scaled_tasks),
        requests=new_requests,
        visual_progress=clamp_visual_progress(moved),
    )


def _end_shift_table(
    old_requests: Sequence[NetworkRequest], simulated: Sequence[SimulatedRequest]
) -> tuple[list[float], list[float]]:
    """End-time deltas keyed by original end time, earliest request winning ties."""
    deltas: dict[float, float] = {}
    for old, sim in zip(old_requests, simulated):
        if old.end_ms not in deltas:
            deltas[old.end_ms] = sim.end_ms - old.end_ms
    ends = sorted(deltas)
    return ends, [deltas[end] for end in ends]


def _shift_at(shifts: tuple[list[float], list[float]], t_ms: float) -> float:
    """Delta of the latest request completed at or before t_ms; 0 if none."""
    ends, deltas = shifts
    idx = bisect.bisect_right(ends, t_ms) - 1
    return deltas[idx] if idx >= 0 else 0.0
