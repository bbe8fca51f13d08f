"""Control bubbles: who is in control, and how many at once.

A strict hierarchy has a single root persona. Sociocratic representatives
add short-lived bubbles. FSO overlays float independently. When two
overlays want the same unique actor, the earlier condition wins and the
conflict is recorded.
"""

from pathlib import Path

from orgsim import RunConfig, run
from orgsim.metrics import bubble_intervals, controllability_profile
from orgsim.scenario import load_scenario, scenario_from_dict

spec = load_scenario(Path(__file__).resolve().parent.parent / "docs" / "scenarios" / "fire_rescue.json")
for mode in ("strict", "sociocracy", "fso"):
    trace = run(spec, RunConfig.from_scenario(spec, mode=mode))
    peak, timeline, traceable = controllability_profile(trace)
    print(f"{mode:>10}: peak {peak}  root-traceable {traceable:.2f}  timeline {''.join(str(x) for x in timeline)}")
    if mode == "fso":
        for b in bubble_intervals(trace):
            print(f"            {b.source} [{b.opened_at}, {b.closed_at})")

contention = scenario_from_dict({
    "format": "orgsim-scenario/1",
    "organizations": [{"id": "hospital", "root": "R", "nodes": [
        {"id": "R", "parent": None, "layer": 0, "region": []},
        {"id": "A", "parent": "R", "layer": 1, "region": []},
        {"id": "B", "parent": "R", "layer": 1, "region": ["surgeon"]},
        {"id": "A1", "parent": "A", "layer": 2, "region": []}],
        "actors": [{"id": "surgeon", "capabilities": ["surgery"], "systemic_class": 7}]}],
    "protocol_library": [{"condition_kind": "trauma", "son_duration": 5,
                          "roles": [{"name": "surgeon", "required_capabilities": ["surgery"], "min_class": 7}]}],
    "conditions": [{"tick": 0, "kind": "trauma", "origin_node": "A1", "deadline": 20},
                   {"tick": 1, "kind": "trauma", "origin_node": "A", "deadline": 20}],
    "run": {"mode": "fso", "horizon": 30},
})
print()
for ev in run(contention).events:
    if ev.kind in ("ConflictRecorded", "SonFormed", "ProtocolFailed"):
        print(f"t={ev.tick} {ev.kind} {ev.payload}")
