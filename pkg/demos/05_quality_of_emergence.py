"""Quality of emergence as an algebraic sum, and selection for existence.

Candidate organizational variants are scored on the same scenarios and
compete for a limited number of slots.
"""

from pathlib import Path

from orgsim import ForceFactor, QoEWeights, RunConfig, build_report, qoe_report, run, select_for_existence
from orgsim.scenario import load_scenario

factors = [ForceFactor("shared-purpose", "centripetal", 2.0), ForceFactor("red-tape", "centrifugal", 0.5)]
score = qoe_report(factors, mismatch_penalty=4, conflict_penalty=1, failure_penalty=1, success_bonus=2,
                   weights=QoEWeights(mismatch=0.25, conflict=1, failure=2, success=1))
print("hand example:", score.as_dict())

here = Path(__file__).resolve().parent.parent / "docs" / "scenarios"
variants = {}
for mode in ("strict", "sociocracy", "fso"):
    total = 0.0
    for name in ("fire_rescue.json", "scope_separation.json", "scope_separation_two_layers.json"):
        spec = load_scenario(here / name)
        trace = run(spec, RunConfig.from_scenario(spec, mode=mode))
        total += build_report(spec.organizations, trace, spec.qoe_weights, spec.static_force_factors).qoe.total
    variants[mode] = total
print("summed QoE per variant:", variants)
print("two slots go to:", sorted(select_for_existence(list(variants.items()), 2)))
