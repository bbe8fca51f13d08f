"""Fire rescue: one city, one army base, three ways of organizing the response.

Run from the repository root:  python demos/01_fire_rescue.py
"""

from pathlib import Path

from orgsim import RunConfig, build_report, load_scenario, run

spec = load_scenario(Path(__file__).resolve().parent.parent / "docs" / "scenarios" / "fire_rescue.json")
print(spec.description, "\n")

# Each mode sees the identical three conditions.
for mode in ("strict", "sociocracy", "fso"):
    trace = run(spec, RunConfig.from_scenario(spec, mode=mode))
    report = build_report(spec.organizations, trace, spec.qoe_weights, spec.static_force_factors)
    print(f"{mode:>10}: success {report.success_rate:.2f}  mismatch {report.mismatch_total}  "
          f"qoe {report.qoe.total:+.2f}  reasons {report.failure_reasons}")

# Who did the fractal organization recruit, and from where?
trace = run(spec, RunConfig.from_scenario(spec, mode="fso"))
print()
for ev in trace.of_kind("RoleAssigned"):
    p = ev.payload
    origin = f" (on loan from {p['via']})" if p["via"] else ""
    print(f"t={ev.tick:2d} {p['condition']} {p['role']:<12} <- {p['actor']:<16} at {p['home_node']}{origin}")
for ev in trace.of_kind("SonFormed"):
    p = ev.payload
    print(f"t={ev.tick:2d} overlay {p['son']} spans {p['layer_span']} layers, {p['org_span']} org(s)")
