"""The replay auditors must flag corrupted traces, not just pass clean ones."""

import copy

from builders import load
from orgsim import FSO, SOCIOCRACY, RunConfig, run
from orgsim.audit import (
    audit_all,
    audit_confinement,
    audit_conservation,
    audit_messages,
    audit_neighboring_layers,
    audit_optimality,
)
from orgsim.engine import Event, Trace


def demo(mode=FSO, confined=()):
    spec = load("fire_rescue.json")
    return spec, run(spec, RunConfig.from_scenario(spec, mode=mode, confined_roles=confined))


def edited(trace, kind, change, when=lambda p: True):
    """Copy of `trace` with `change` applied to the first `kind` event satisfying `when`."""
    out = []
    done = False
    for ev in trace.events:
        if not done and ev.kind == kind and when(ev.payload):
            p = copy.deepcopy(ev.payload)
            change(p)
            ev = Event(ev.tick, ev.seq, ev.kind, p)
            done = True
        out.append(ev)
    assert done, f"no {kind} event to edit"
    return Trace(out, trace.scenario_digest, trace.seed, trace.mode, trace.horizon)


def test_clean_demo_passes_every_audit():
    for mode in (FSO, SOCIOCRACY):
        spec, trace = demo(mode, confined=("engineer",))
        assert all(v == [] for v in audit_all(trace, spec, ("engineer",)).values())


def test_conservation_flags_a_leak():
    spec, trace = demo()
    leaky = edited(trace, "SonDissolved", lambda p: p.update(released=[]))
    assert audit_conservation(leaky, spec)


def test_optimality_flags_a_worse_pick():
    spec, trace = demo()

    def swap(p):
        p["actor"] = "squad-s" if p["actor"] == "squad-n" else "squad-n"

    bad = edited(trace, "RoleAssigned", swap, when=lambda p: p["role"] == "squad")
    assert audit_optimality(bad, spec)


def test_neighboring_layers_flags_long_edges():
    spec, trace = demo(SOCIOCRACY)

    def stretch(p):
        p["decision_node"], p["home_node"] = "city-hall", "block-a1"
        p["via"] = "army"

    bad = edited(trace, "RoleAssigned", stretch)
    problems = audit_neighboring_layers(bad, spec)
    assert any("crosses organizations" in x for x in problems)


def test_confinement_flags_a_borrowed_role():
    spec, trace = demo()
    assert audit_confinement(trace, spec, ("engineer",))  # FSO run without confinement borrows it


def test_messages_flag_non_edges():
    spec, trace = demo()
    bad = edited(trace, "MessageSent", lambda p: p.update(path=["block-a1", "station-north"]))
    assert audit_messages(bad, spec)
