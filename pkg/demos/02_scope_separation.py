"""How far down can each organization look for help?

The only plumber sits in a sibling subtree. Three layers down, only the
fractal organization finds it. Two layers down, a sociocratic circle that
met before the leak elects the plumber as representative, and that is
enough for the sociocracy too.
"""

from pathlib import Path

from orgsim import RunConfig, build_report, load_scenario, run

here = Path(__file__).resolve().parent.parent / "docs" / "scenarios"

for name in ("scope_separation.json", "scope_separation_two_layers.json"):
    spec = load_scenario(here / name)
    rates = {}
    for mode in ("strict", "sociocracy", "fso"):
        trace = run(spec, RunConfig.from_scenario(spec, mode=mode))
        rates[mode] = build_report(spec.organizations, trace).success_rate
        if mode == "sociocracy":
            scope = [e.payload["scope"] for e in trace.of_kind("RoleAssigned")]
    print(name, rates)
    print("   sociocratic search scope when the plumber was found:", scope or "never found")
