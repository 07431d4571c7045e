"""
Building a small network and checking it is safe to operate
============================================================

A four-bus system: a slack bus feeds a hub over two parallel lines,
and the hub serves two loads over short spurs. We solve the AC power
flow, look at voltages and line loadings, then see what a single line
outage does to the safety assessment.
"""

from gridshed import (
    Bus,
    Line,
    Load,
    Network,
    apply_outage,
    evaluate_safety,
    solve,
)

net = Network(
    base_mva=100.0,
    buses=(
        Bus(id=0, kind="slack", base_kv=138.0, v_setpoint=1.0),
        Bus(id=1, kind="pq", base_kv=138.0),
        Bus(id=2, kind="pq", base_kv=138.0),
        Bus(id=3, kind="pq", base_kv=138.0),
    ),
    lines=(
        Line(id=0, from_bus=0, to_bus=1, r=0.002, x=0.02, rating_mva=60.0),
        Line(id=1, from_bus=0, to_bus=1, r=0.002, x=0.02, rating_mva=60.0),
        Line(id=2, from_bus=1, to_bus=2, r=0.001, x=0.01, rating_mva=120.0),
        Line(id=3, from_bus=1, to_bus=3, r=0.001, x=0.01, rating_mva=120.0),
    ),
    generators=(),
    loads=(
        Load(id=0, bus=2, p_mw=45.0, q_mvar=13.5),
        Load(id=1, bus=3, p_mw=35.0, q_mvar=10.5),
    ),
    shunts=(),
)

# solve the intact system
sol = solve(net)
print(f"converged in {sol.iterations} iterations, "
      f"mismatch {sol.max_mismatch:.2e} pu")
for k, bus_id in enumerate(sol.bus_ids):
    print(f"  bus {bus_id}: {sol.v_mag[k]:.4f} pu, {sol.v_ang[k]:+.4f} rad")
for k, line_id in enumerate(sol.line_ids):
    print(f"  line {line_id}: {sol.line_loading_pct[k]:.1f}% of rating")
print(f"slack injects {sol.slack_p_mw:.1f} MW / {sol.slack_q_mvar:.1f} MVAr")

# the safety predicate wraps convergence, ratings, and voltage bands
report = evaluate_safety(net)
print(f"\nintact system safe: {report.safe} "
      f"(worst loading {report.worst_line_loading:.1f}%)")

# drop one of the parallel trunk lines: the survivor must carry
# everything and exceeds its 60 MVA rating
outaged = apply_outage(net, [0])
report = evaluate_safety(outaged)
print(f"after losing line 0: safe={report.safe}")
for line_id, pct in report.line_violations:
    print(f"  line {line_id} overloaded at {pct:.1f}%")
