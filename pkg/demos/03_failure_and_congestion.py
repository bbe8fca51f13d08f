"""Single points of failure and congestion in a strict hierarchy.

A 15-node binary tree. Every request from the left half needs a medic who
lives at the top of the right half, so every request passes through the root.
"""

import numpy as np

from orgsim import RunConfig, build_report, run, spof_analysis
from orgsim.scenario import scenario_from_dict

nodes = [{"id": f"n{i}", "parent": None if i == 1 else f"n{i // 2}", "layer": i.bit_length() - 1, "region": []}
         for i in range(1, 16)]
nodes[2]["region"] = ["medic"]  # n3
left = ["n4", "n5", "n8", "n9", "n10", "n11"]
doc = {
    "format": "orgsim-scenario/1",
    "organizations": [{"id": "clinic", "root": "n1", "nodes": nodes,
                       "actors": [{"id": "medic", "capabilities": ["treat"], "systemic_class": 7}]}],
    "protocol_library": [{"condition_kind": "injury", "son_duration": 1,
                          "roles": [{"name": "medic", "required_capabilities": ["treat"], "min_class": 5}]}],
    "conditions": [{"tick": 3 * i, "kind": "injury", "origin_node": left[i % 6], "deadline": 3 * i + 10}
                   for i in range(10)],
    "run": {"mode": "strict", "horizon": 40},
}
spec = scenario_from_dict(doc)

crit = spof_analysis(spec.organizations[0]).criticality
by_layer = {}
for nid, c in crit.items():
    by_layer.setdefault(spec.organizations[0].nodes[nid].layer, []).append(c)
print("criticality by layer:", {k: round(float(np.mean(v)), 3) for k, v in sorted(by_layer.items())})

report = build_report(spec.organizations, run(spec))
busiest = sorted(report.congestion.items(), key=lambda kv: -kv[1])[:4]
print("success", report.success_rate, " busiest nodes:", busiest)

# Now knock out the root at tick 0.
doc["failures"] = [{"node": "n1", "at": 0}]
spec = scenario_from_dict(doc)
report = build_report(spec.organizations, run(spec, RunConfig.from_scenario(spec)))
print("root down -> success", report.success_rate, report.failure_reasons)
