"""Replay auditors that re-derive run invariants from a trace alone.

Each auditor walks the event list, rebuilds the state it needs (actor
commitments, node liveness) by itself and returns a list of human-readable
violations; an empty list means the trace is clean. They deliberately avoid
the engine's own search helpers so they can act as independent checks.
"""

from __future__ import annotations

from .protocols import FSO, SOCIOCRACY
from .scenario import ScenarioSpec


def _parents(spec: ScenarioSpec) -> dict:
    return {nid: node.parent for org in spec.organizations for nid, node in org.nodes.items()}


def _layers(spec: ScenarioSpec) -> dict:
    return {nid: node.layer for org in spec.organizations for nid, node in org.nodes.items()}


def _actors(spec: ScenarioSpec) -> dict:
    return {aid: a for org in spec.organizations for aid, a in org.actors.items()}


def _homes(spec: ScenarioSpec) -> dict:
    return {aid: nid for org in spec.organizations for nid, node in org.nodes.items() for aid in node.region}


def _chain(parents: dict, nid: str) -> list:
    out = [nid]
    while parents[out[-1]] is not None:
        out.append(parents[out[-1]])
    return out


def _distance(parents: dict, a: str, b: str) -> int:
    up_a, up_b = _chain(parents, a), _chain(parents, b)
    for i, n in enumerate(up_a):
        if n in up_b:
            return i + up_b.index(n)
    raise ValueError(f"{a} and {b} are in different trees")


def _roles(spec: ScenarioSpec) -> dict:
    return {(p.condition_kind, r.name): r for p in spec.protocol_library for r in p.roles}


def audit_conservation(trace, spec: ScenarioSpec) -> list:
    """Every commitment is released exactly once, by its SON or by a rollback."""
    total = len(_actors(spec))
    committed: dict = {}
    problems = []
    for ev in trace.events:
        p = ev.payload
        if ev.kind == "RoleAssigned":
            if p["actor"] in committed:
                problems.append(f"seq {ev.seq}: {p['actor']} double-committed ({committed[p['actor']]} and {p['condition']})")
            committed[p["actor"]] = p["condition"]
        elif ev.kind in ("SonDissolved", "ProtocolFailed"):
            for aid in p["released"]:
                if committed.get(aid) != p["condition"]:
                    problems.append(f"seq {ev.seq}: {aid} released by {p['condition']} but held by {committed.get(aid)}")
                committed.pop(aid, None)
            leftovers = [a for a, c in committed.items() if c == p["condition"]]
            if leftovers:
                problems.append(f"seq {ev.seq}: {p['condition']} ended still holding {sorted(leftovers)}")
        free = total - len(committed)
        if free < 0 or free + len(committed) != total:
            problems.append(f"seq {ev.seq}: actor count not conserved")
    if committed:
        problems.append(f"end of trace: leaked commitments {sorted(committed)}")
    return problems


def audit_optimality(trace, spec: ScenarioSpec) -> list:
    """Each assignment is the (mismatch, hops, id) argmin over free eligible actors in its scope."""
    parents = _parents(spec)
    layers = _layers(spec)
    actors = _actors(spec)
    homes = _homes(spec)
    roles = _roles(spec)
    kinds = {}
    origins = {}
    committed = set()
    problems = []
    for ev in trace.events:
        p = ev.payload
        if ev.kind == "ConditionFired":
            kinds[p["condition"]] = p["kind"]
            origins[p["condition"]] = p["origin"]
        elif ev.kind in ("SonDissolved", "ProtocolFailed"):
            committed -= set(p["released"])
        elif ev.kind == "RoleAssigned":
            role = roles[(kinds[p["condition"]], p["role"])]
            origin = origins[p["condition"]]

            def key(aid):
                a = actors[aid]
                home = homes[aid]
                if p["via"] is None:
                    hops = _distance(parents, origin, home)
                else:
                    hops = layers[origin] + 1 + layers[home]
                return (a.systemic_class - role.min_class, hops, aid)

            pool = [
                aid for aid, home in homes.items()
                if home in p["scope"]
                and aid not in committed
                and role.required_capabilities <= actors[aid].capabilities
                and actors[aid].systemic_class >= role.min_class
            ]
            if p["actor"] not in pool:
                problems.append(f"seq {ev.seq}: {p['actor']} was not a free eligible actor in scope")
            elif min(pool, key=key) != p["actor"]:
                best = min(pool, key=key)
                problems.append(f"seq {ev.seq}: {p['actor']} {key(p['actor'])} beaten by {best} {key(best)}")
            if key(p["actor"])[:2] != (p["mismatch"], p["hops"]):
                problems.append(f"seq {ev.seq}: recorded key {(p['mismatch'], p['hops'])} != {key(p['actor'])[:2]}")
            committed.add(p["actor"])
    return problems


def audit_neighboring_layers(trace, spec: ScenarioSpec) -> list:
    """Sociocratic assignments stay within two layers and inside the originating organization."""
    layers = _layers(spec)
    node_org = spec.node_index()
    origins = {}
    problems = []
    for ev in trace.events:
        p = ev.payload
        if ev.kind == "ConditionFired":
            origins[p["condition"]] = p["origin"]
        elif ev.kind == "RoleAssigned":
            span = abs(layers[p["decision_node"]] - layers[p["home_node"]])
            if span > 2:
                problems.append(f"seq {ev.seq}: assignment edge spans {span} layers")
            if node_org[p["home_node"]] != node_org[origins[p["condition"]]] or p["via"] is not None:
                problems.append(f"seq {ev.seq}: assignment crosses organizations")
        elif ev.kind == "ExceptionForwarded" and trace.mode == SOCIOCRACY:
            problems.append(f"seq {ev.seq}: sociocracy forwarded an exception")
    return problems


def audit_confinement(trace, spec: ScenarioSpec, confined_roles) -> list:
    """Confined roles are only ever filled locally or from the decision node's direct children."""
    parents = _parents(spec)
    confined = set(confined_roles)
    problems = []
    for ev in trace.events:
        p = ev.payload
        if ev.kind != "RoleAssigned" or p["role"] not in confined:
            continue
        if p["via"] is not None:
            problems.append(f"seq {ev.seq}: confined role {p['role']} borrowed from {p['via']}")
        elif p["home_node"] != p["decision_node"] and parents[p["home_node"]] != p["decision_node"]:
            problems.append(f"seq {ev.seq}: confined role {p['role']} reached {p['home_node']} from {p['decision_node']}")
        if p["scope_rule"] not in ("local", "strict"):
            problems.append(f"seq {ev.seq}: confined role {p['role']} searched with {p['scope_rule']} scope")
    return problems


def audit_searched_once(trace) -> list:
    """No region is searched twice for the same role exception, and searched sets only grow."""
    seen: dict = {}
    searched: dict = {}
    problems = []
    for ev in trace.events:
        p = ev.payload
        if ev.kind == "ExceptionRaised":
            seen[(p["condition"], p["role"])] = {p["node"]}
        elif ev.kind == "ExceptionEscalated":
            k = (p["condition"], p["role"])
            now = set(p["searched"])
            if not searched.get(k, set()) <= now:
                problems.append(f"seq {ev.seq}: searched set shrank for {k}")
            searched[k] = now
        elif ev.kind == "RoleAssigned" and p["scope_rule"] not in ("local", "forward"):
            k = (p["condition"], p["role"])
            prior = searched.get(k, seen.get(k, set()))
            again = set(p["scope"]) & prior
            if again:
                problems.append(f"seq {ev.seq}: {sorted(again)} searched twice for {k}")
    return problems


def audit_messages(trace, spec: ScenarioSpec) -> list:
    """Every message hop joins a live parent/child pair, or two organization roots."""
    parents = _parents(spec)
    roots = {org.root for org in spec.organizations}
    alive = {nid: True for nid in parents}
    problems = []
    for ev in trace.events:
        p = ev.payload
        if ev.kind == "NodeFailed":
            alive[p["node"]] = False
        elif ev.kind == "NodeRecovered":
            alive[p["node"]] = True
        elif ev.kind == "MessageSent":
            path = p["path"]
            for n in path:
                if not alive[n]:
                    problems.append(f"seq {ev.seq}: message through dead node {n}")
            for a, b in zip(path, path[1:]):
                if parents[a] != b and parents[b] != a and not (a in roots and b in roots):
                    problems.append(f"seq {ev.seq}: {a}->{b} is not a tree edge")
    return problems


def audit_son_members(trace, spec: ScenarioSpec) -> list:
    """SON members satisfy their roles, and no actor sits in two active SONs."""
    actors = _actors(spec)
    roles = _roles(spec)
    kinds = {}
    active: dict = {}
    problems = []
    for ev in trace.events:
        p = ev.payload
        if ev.kind == "ConditionFired":
            kinds[p["condition"]] = p["kind"]
        elif ev.kind == "SonFormed":
            for aid, role_name, _ in p["members"]:
                role = roles[(kinds[p["condition"]], role_name)]
                a = actors[aid]
                if not (role.required_capabilities <= a.capabilities and a.systemic_class >= role.min_class):
                    problems.append(f"seq {ev.seq}: {aid} cannot play {role_name}")
                if aid in active:
                    problems.append(f"seq {ev.seq}: {aid} already in {active[aid]}")
                active[aid] = p["son"]
        elif ev.kind == "SonDissolved":
            for aid in p["released"]:
                active.pop(aid, None)
    return problems


def audit_all(trace, spec: ScenarioSpec, confined_roles=()) -> dict:
    out = {
        "conservation": audit_conservation(trace, spec),
        "optimality": audit_optimality(trace, spec),
        "searched_once": audit_searched_once(trace),
        "messages": audit_messages(trace, spec),
        "son_members": audit_son_members(trace, spec),
    }
    if trace.mode == SOCIOCRACY:
        out["neighboring_layers"] = audit_neighboring_layers(trace, spec)
    if confined_roles and trace.mode == FSO:  # confinement is an FSO setting
        out["confinement"] = audit_confinement(trace, spec, confined_roles)
    return out
