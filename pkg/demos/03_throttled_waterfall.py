"""Replay a request waterfall under a simulated 4G link.

First a hand-built three-request plan runs on an unlimited link and then
on the shipped 4G profile; the shared downlink stretches every transfer.
Second, a full recorded trace goes through apply_throttle, which rewrites
requests, tasks, paints and visual samples together, and the page's
score drops accordingly.
"""

from webaudit import (
    PlannedRequest,
    UNTHROTTLED,
    WaterfallPlan,
    apply_throttle,
    audit_trace,
    load_calibration,
    resolve_throttle,
    simulate_waterfall,
)
from webaudit.synth import build_demo_trace

plan = WaterfallPlan(
    requests=(
        PlannedRequest("doc", parent_id=None, discovery_offset_ms=0.0, bytes=52000),
        PlannedRequest("css", parent_id="doc", discovery_offset_ms=5.0, bytes=18000),
        PlannedRequest("img", parent_id="doc", discovery_offset_ms=40.0, bytes=120000),
    )
)

calibration = load_calibration()
mobile = calibration.mode("mobile")
four_g = resolve_throttle("4g", calibration, mobile)

print("request   unthrottled              4g (rtt 150, 1638 kbps)")
fast = {r.id: r for r in simulate_waterfall(plan, UNTHROTTLED)}
slow = {r.id: r for r in simulate_waterfall(plan, four_g)}
for rid in ("doc", "css", "img"):
    f, s = fast[rid], slow[rid]
    print(
        f"  {rid:4s}   {f.start_ms:7.1f} -> {f.end_ms:8.1f}"
        f"      {s.start_ms:7.1f} -> {s.end_ms:8.1f}"
    )
# css and img overlap on the 4g link, so each sees half the capacity
# while both are in flight

print()
trace = build_demo_trace(3)
throttled = apply_throttle(trace, four_g)

_, before = audit_trace(trace, mobile, calibration)
_, after = audit_trace(throttled, mobile, calibration)
print(f"demo page, mobile curves, unthrottled trace : score {before.performance_score:6.2f}")
print(f"same page re-simulated on 4g with 4x cpu    : score {after.performance_score:6.2f}")

last_fast = max(r.end_ms for r in trace.requests)
last_slow = max(r.end_ms for r in throttled.requests)
print(f"last byte arrives at {last_fast:.0f} ms as recorded, {last_slow:.0f} ms on 4g")

assert apply_throttle(trace, UNTHROTTLED) is trace  # identity profile changes nothing
