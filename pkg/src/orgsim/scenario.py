"""Scenario documents: parsing, validation, serialization and condition generation.

A scenario is one JSON object whose ``format`` field must equal
``FORMAT``. Unknown fields anywhere are rejected. See docs/scenario_format.md.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .org import WILDCARD, Actor, CooperationRule, NeighborLink, OrgNode, Organization, validate_topology
from .protocols import MODES, Condition, TreatmentProtocol
from .semantics import RoleSpec
from .systemic import ForceFactor, QoEWeights

FORMAT = "orgsim-scenario/1"
PROBABILITY_TOLERANCE = 1e-9


class ScenarioError(ValueError):
    """Raised with every problem found in a scenario document."""

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(self.issues))


@dataclass(frozen=True)
class ConditionSpec:
    tick: int
    kind: str
    origin_node: str
    deadline: int


@dataclass(frozen=True)
class GeneratorSpec:
    rate: float
    kinds: tuple  # ((kind, probability), ...) in document order
    deadline_offset: int


@dataclass(frozen=True)
class FailureSpec:
    node: str
    at: int
    recover_at: Optional[int] = None

    def dead_at(self, tick: int) -> bool:
        return self.at <= tick and (self.recover_at is None or tick < self.recover_at)


@dataclass(frozen=True)
class RunSettings:
    mode: str = "fso"
    horizon: int = 100
    meeting_period: int = 5
    tenure: int = 5
    confined_roles: tuple = ()


@dataclass
class ScenarioSpec:
    organizations: list
    protocol_library: list
    static_force_factors: list = field(default_factory=list)
    qoe_weights: QoEWeights = QoEWeights()
    conditions: Optional[list] = None
    generator: Optional[GeneratorSpec] = None
    failures: list = field(default_factory=list)
    run: RunSettings = RunSettings()
    description: str = ""

    def node_index(self) -> dict:
        """Map node id -> organization id across the scenario."""
        return {nid: org.id for org in self.organizations for nid in org.nodes}

    def digest(self) -> str:
        return hashlib.sha256(serialize_scenario(self).encode("utf-8")).hexdigest()


# -- parsing ----------------------------------------------------------------

_TOP = {
    "format", "description", "organizations", "protocol_library", "static_force_factors",
    "qoe_weights", "conditions", "generator", "failures", "run",
}


class _Reader:
    """Collects issues with dotted field locations instead of failing fast."""

    def __init__(self):
        self.issues = []

    def err(self, where: str, msg: str) -> None:
        self.issues.append(f"{where}: {msg}")

    def obj(self, value, where, allowed, required=()):
        if not isinstance(value, dict):
            self.err(where, "expected an object")
            return None
        for key in sorted(set(value) - set(allowed)):
            self.err(f"{where}.{key}" if where else key, "unknown-field")
        for key in required:
            if key not in value:
                self.err(f"{where}.{key}" if where else key, "missing-field")
        return value

    def list(self, value, where):
        if not isinstance(value, list):
            self.err(where, "expected a list")
            return []
        return value

    def int(self, value, where, minimum=None):
        if isinstance(value, bool) or not isinstance(value, int):
            self.err(where, "expected an integer")
            return None
        if minimum is not None and value < minimum:
            self.err(where, f"must be >= {minimum}")
            return None
        return value

    def num(self, value, where):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            self.err(where, "expected a finite number")
            return None
        return float(value)

    def str(self, value, where):
        if not isinstance(value, str) or not value:
            self.err(where, "expected a non-empty string")
            return None
        return value

    def strs(self, value, where):
        out = []
        for i, item in enumerate(self.list(value, where)):
            s = self.str(item, f"{where}[{i}]")
            if s is not None:
                out.append(s)
        return out


def parse_scenario(text: str) -> ScenarioSpec:
    """Parse and validate a scenario document; raise ScenarioError listing every issue."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError([f"line {exc.lineno} column {exc.colno}: malformed JSON ({exc.msg})"]) from None
    return scenario_from_dict(doc)


def scenario_from_dict(doc) -> ScenarioSpec:
    r = _Reader()
    if r.obj(doc, "", _TOP, required=("format", "organizations", "protocol_library")) is None:
        raise ScenarioError(r.issues)
    if "format" in doc and doc["format"] != FORMAT:
        r.err("format", f"unsupported format {doc['format']!r}, expected {FORMAT!r}")

    orgs = [_org(r, o, f"organizations[{i}]") for i, o in enumerate(r.list(doc.get("organizations", []), "organizations"))]
    orgs = [o for o in orgs if o is not None]
    if not orgs and not r.issues:
        r.err("organizations", "at least one organization is required")

    library = []
    kinds = set()
    for i, p in enumerate(r.list(doc.get("protocol_library", []), "protocol_library")):
        proto = _protocol(r, p, f"protocol_library[{i}]")
        if proto is None:
            continue
        if proto.condition_kind in kinds:
            r.err(f"protocol_library[{i}].condition_kind", f"duplicate-kind({proto.condition_kind})")
        kinds.add(proto.condition_kind)
        library.append(proto)

    factors = []
    for i, f in enumerate(r.list(doc.get("static_force_factors", []), "static_force_factors")):
        where = f"static_force_factors[{i}]"
        if r.obj(f, where, {"name", "sign", "magnitude"}, ("name", "sign", "magnitude")) is None:
            continue
        name, mag = r.str(f.get("name"), f"{where}.name"), r.num(f.get("magnitude"), f"{where}.magnitude")
        sign = f.get("sign")
        if sign not in ("centripetal", "centrifugal"):
            r.err(f"{where}.sign", "expected 'centripetal' or 'centrifugal'")
        elif name is not None and mag is not None:
            if mag < 0:
                r.err(f"{where}.magnitude", "must be >= 0")
            else:
                factors.append(ForceFactor(name, sign, mag))

    weights = QoEWeights()
    if "qoe_weights" in doc:
        w = r.obj(doc["qoe_weights"], "qoe_weights", {"mismatch", "conflict", "failure", "success"})
        if w is not None:
            vals = {}
            for k in ("mismatch", "conflict", "failure", "success"):
                if k in w:
                    v = r.num(w[k], f"qoe_weights.{k}")
                    if v is not None and v < 0:
                        r.err(f"qoe_weights.{k}", "bad-weight")
                    elif v is not None:
                        vals[k] = v
            weights = QoEWeights(**vals)

    node_org = {}
    actor_ids = set()
    for o in orgs:
        for nid in o.nodes:
            if nid in node_org:
                r.err(f"organizations[{o.id}].nodes", f"duplicate-node({nid})")
            node_org[nid] = o.id
        for aid in o.actors:
            if aid in actor_ids:
                r.err(f"organizations[{o.id}].actors", f"duplicate-actor({aid})")
            actor_ids.add(aid)
    org_ids = [o.id for o in orgs]
    if len(set(org_ids)) != len(org_ids):
        r.err("organizations", "duplicate organization id")
    for o in orgs:
        for j, link in enumerate(o.neighbor_links):
            if link.to_org not in org_ids:
                r.err(f"organizations[{o.id}].neighbor_links[{j}].to_org", f"dangling-ref({link.to_org})")

    conditions = None
    generator = None
    if "conditions" in doc and "generator" in doc:
        r.err("conditions", "ambiguous-condition-source (both 'conditions' and 'generator' given)")
    if "conditions" in doc:
        conditions = []
        for i, c in enumerate(r.list(doc["conditions"], "conditions")):
            where = f"conditions[{i}]"
            if r.obj(c, where, {"tick", "kind", "origin_node", "deadline"}, ("tick", "kind", "origin_node", "deadline")) is None:
                continue
            tick = r.int(c.get("tick"), f"{where}.tick", 0)
            kind = r.str(c.get("kind"), f"{where}.kind")
            node = r.str(c.get("origin_node"), f"{where}.origin_node")
            deadline = r.int(c.get("deadline"), f"{where}.deadline", 0)
            if node is not None and node not in node_org:
                r.err(f"{where}.origin_node", f"dangling-ref({node})")
            if tick is not None and deadline is not None and deadline <= tick:
                r.err(f"{where}.deadline", "must be greater than tick")
            if None not in (tick, kind, node, deadline):
                conditions.append(ConditionSpec(tick, kind, node, deadline))
    elif "generator" in doc:
        generator = _generator(r, doc["generator"])
    else:
        conditions = []

    failures = []
    for i, f in enumerate(r.list(doc.get("failures", []), "failures")):
        where = f"failures[{i}]"
        if r.obj(f, where, {"node", "at", "recover_at"}, ("node", "at")) is None:
            continue
        node = r.str(f.get("node"), f"{where}.node")
        at = r.int(f.get("at"), f"{where}.at", 0)
        rec = f.get("recover_at")
        if rec is not None:
            rec = r.int(rec, f"{where}.recover_at", 0)
            if rec is not None and at is not None and rec <= at:
                r.err(f"{where}.recover_at", "must be greater than at")
        if node is not None and node not in node_org:
            r.err(f"{where}.node", f"dangling-ref({node})")
        if node is not None and at is not None:
            failures.append(FailureSpec(node, at, rec))

    run = RunSettings()
    if "run" in doc:
        run = _run(r, doc["run"])

    description = doc.get("description", "")
    if not isinstance(description, str):
        r.err("description", "expected a string")

    if r.issues:
        raise ScenarioError(r.issues)
    return ScenarioSpec(
        organizations=orgs,
        protocol_library=library,
        static_force_factors=factors,
        qoe_weights=weights,
        conditions=conditions,
        generator=generator,
        failures=failures,
        run=run,
        description=description,
    )


def _org(r: _Reader, o, where) -> Optional[Organization]:
    if r.obj(o, where, {"id", "root", "nodes", "actors", "neighbor_links", "description"}, ("id", "root", "nodes")) is None:
        return None
    oid = r.str(o.get("id"), f"{where}.id")
    root = r.str(o.get("root"), f"{where}.root")
    before = len(r.issues)

    actors = {}
    for i, a in enumerate(r.list(o.get("actors", []), f"{where}.actors")):
        aw = f"{where}.actors[{i}]"
        if r.obj(a, aw, {"id", "capabilities", "systemic_class"}, ("id", "capabilities", "systemic_class")) is None:
            continue
        aid = r.str(a.get("id"), f"{aw}.id")
        caps = r.strs(a.get("capabilities"), f"{aw}.capabilities")
        cls = r.int(a.get("systemic_class"), f"{aw}.systemic_class")
        if cls is not None and not 1 <= cls <= 9:
            r.err(f"{aw}.systemic_class", "must be within 1..9")
        if aid in actors:
            r.err(f"{aw}.id", f"duplicate-actor({aid})")
        if aid is not None and cls is not None:
            actors[aid] = Actor(aid, frozenset(caps), cls)

    nodes = {}
    for i, n in enumerate(r.list(o.get("nodes"), f"{where}.nodes")):
        nw = f"{where}.nodes[{i}]"
        if r.obj(n, nw, {"id", "parent", "layer", "region"}, ("id", "layer")) is None:
            continue
        nid = r.str(n.get("id"), f"{nw}.id")
        parent = n.get("parent")
        if parent is not None:
            parent = r.str(parent, f"{nw}.parent")
        layer = r.int(n.get("layer"), f"{nw}.layer", 0)
        region = r.strs(n.get("region", []), f"{nw}.region")
        for aid in region:
            if aid not in actors:
                r.err(f"{nw}.region", f"dangling-ref({aid})")
        if nid in nodes:
            r.err(f"{nw}.id", f"duplicate-node({nid})")
        if nid is not None and layer is not None:
            nodes[nid] = OrgNode(nid, parent, layer, frozenset(region))

    links = []
    for i, link in enumerate(r.list(o.get("neighbor_links", []), f"{where}.neighbor_links")):
        lw = f"{where}.neighbor_links[{i}]"
        if r.obj(link, lw, {"to_org", "cooperation_rule"}, ("to_org", "cooperation_rule")) is None:
            continue
        to = r.str(link.get("to_org"), f"{lw}.to_org")
        rule = r.obj(link.get("cooperation_rule"), f"{lw}.cooperation_rule",
                     {"lendable_roles", "max_concurrent_loans"}, ("lendable_roles", "max_concurrent_loans"))
        if rule is None or to is None:
            continue
        lendable = rule.get("lendable_roles")
        if lendable != WILDCARD:
            lendable = frozenset(r.strs(lendable, f"{lw}.cooperation_rule.lendable_roles"))
        budget = r.int(rule.get("max_concurrent_loans"), f"{lw}.cooperation_rule.max_concurrent_loans", 1)
        if budget is not None:
            links.append(NeighborLink(oid or "", to, CooperationRule(lendable, budget)))

    if oid is None or root is None or len(r.issues) > before:
        return None
    for nid, node in nodes.items():
        for aid in node.region:
            if actors[aid].home_node == "":
                actors[aid].home_node = nid
    org = Organization(id=oid, nodes=nodes, root=root, actors=actors, neighbor_links=links)
    for problem in validate_topology(org):
        r.err(f"{where}.nodes" if not problem.startswith(("link", "self-link", "duplicate-link")) else f"{where}.neighbor_links", problem)
    return org


def _protocol(r: _Reader, p, where) -> Optional[TreatmentProtocol]:
    if r.obj(p, where, {"condition_kind", "roles", "son_duration", "description"}, ("condition_kind", "roles", "son_duration")) is None:
        return None
    kind = r.str(p.get("condition_kind"), f"{where}.condition_kind")
    duration = r.int(p.get("son_duration"), f"{where}.son_duration", 1)
    roles = []
    names = set()
    for i, spec in enumerate(r.list(p.get("roles"), f"{where}.roles")):
        rw = f"{where}.roles[{i}]"
        if r.obj(spec, rw, {"name", "required_capabilities", "min_class", "count"}, ("name", "required_capabilities", "min_class")) is None:
            continue
        name = r.str(spec.get("name"), f"{rw}.name")
        caps = r.strs(spec.get("required_capabilities"), f"{rw}.required_capabilities")
        cls = r.int(spec.get("min_class"), f"{rw}.min_class")
        count = r.int(spec.get("count", 1), f"{rw}.count", 1)
        if not caps:
            r.err(f"{rw}.required_capabilities", "must not be empty")
        if cls is not None and not 1 <= cls <= 9:
            r.err(f"{rw}.min_class", "must be within 1..9")
            cls = None
        if name in names:
            r.err(f"{rw}.name", f"duplicate-role({name})")
        names.add(name)
        if None not in (name, cls, count) and caps:
            roles.append(RoleSpec(name, frozenset(caps), cls, count))
    if not roles:
        r.err(f"{where}.roles", "must not be empty")
        return None
    if kind is None or duration is None:
        return None
    return TreatmentProtocol(kind, tuple(roles), duration)


def _generator(r: _Reader, g) -> Optional[GeneratorSpec]:
    if r.obj(g, "generator", {"rate", "kinds", "deadline_offset"}, ("rate", "kinds", "deadline_offset")) is None:
        return None
    rate = r.num(g.get("rate"), "generator.rate")
    if rate is not None and not 0.0 <= rate <= 1.0:
        r.err("generator.rate", "must be within [0, 1]")
    offset = r.int(g.get("deadline_offset"), "generator.deadline_offset", 1)
    kinds = []
    raw = g.get("kinds")
    if not isinstance(raw, dict) or not raw:
        r.err("generator.kinds", "expected a non-empty object of kind -> probability")
    else:
        for kind, p in raw.items():
            v = r.num(p, f"generator.kinds.{kind}")
            if v is not None and v < 0:
                r.err(f"generator.kinds.{kind}", "must be >= 0")
            elif v is not None:
                kinds.append((kind, v))
        total = sum(p for _, p in kinds)
        if kinds and abs(total - 1.0) > PROBABILITY_TOLERANCE:
            r.err("generator.kinds", f"probabilities sum to {total!r}, expected 1")
    if rate is None or offset is None:
        return None
    return GeneratorSpec(rate, tuple(kinds), offset)


def _run(r: _Reader, doc) -> RunSettings:
    if r.obj(doc, "run", {"mode", "horizon", "meeting_period", "tenure", "confined_roles"}) is None:
        return RunSettings()
    defaults = RunSettings()
    mode = doc.get("mode", defaults.mode)
    if mode not in MODES:
        r.err("run.mode", f"unknown mode {mode!r}")
    horizon = r.int(doc.get("horizon", defaults.horizon), "run.horizon", 1)
    period = r.int(doc.get("meeting_period", defaults.meeting_period), "run.meeting_period", 1)
    tenure = r.int(doc.get("tenure", defaults.tenure), "run.tenure", 1)
    confined = tuple(sorted(r.strs(doc.get("confined_roles", []), "run.confined_roles")))
    return RunSettings(mode, horizon or 1, period or 1, tenure or 1, confined)


# -- serialization ----------------------------------------------------------


def scenario_to_dict(spec: ScenarioSpec) -> dict:
    doc = {"format": FORMAT}
    if spec.description:
        doc["description"] = spec.description
    orgs = []
    for org in spec.organizations:
        orgs.append({
            "id": org.id,
            "root": org.root,
            "nodes": [
                {"id": n.id, "parent": n.parent, "layer": n.layer, "region": sorted(n.region)}
                for n in sorted(org.nodes.values(), key=lambda n: (n.layer, n.id))
            ],
            "actors": [
                {"id": a.id, "capabilities": sorted(a.capabilities), "systemic_class": a.systemic_class}
                for a in sorted(org.actors.values(), key=lambda a: a.id)
            ],
            "neighbor_links": [
                {
                    "to_org": link.to_org,
                    "cooperation_rule": {
                        "lendable_roles": link.cooperation_rule.lendable_roles
                        if link.cooperation_rule.lendable_roles == WILDCARD
                        else sorted(link.cooperation_rule.lendable_roles),
                        "max_concurrent_loans": link.cooperation_rule.max_concurrent_loans,
                    },
                }
                for link in org.neighbor_links
            ],
        })
    doc["organizations"] = orgs
    doc["protocol_library"] = [
        {
            "condition_kind": p.condition_kind,
            "son_duration": p.son_duration,
            "roles": [
                {"name": r.name, "required_capabilities": sorted(r.required_capabilities),
                 "min_class": r.min_class, "count": r.count}
                for r in p.roles
            ],
        }
        for p in spec.protocol_library
    ]
    doc["static_force_factors"] = [
        {"name": f.name, "sign": f.sign, "magnitude": f.magnitude} for f in spec.static_force_factors
    ]
    w = spec.qoe_weights
    doc["qoe_weights"] = {"mismatch": w.mismatch, "conflict": w.conflict, "failure": w.failure, "success": w.success}
    if spec.generator is not None:
        g = spec.generator
        doc["generator"] = {"rate": g.rate, "kinds": dict(g.kinds), "deadline_offset": g.deadline_offset}
    else:
        doc["conditions"] = [
            {"tick": c.tick, "kind": c.kind, "origin_node": c.origin_node, "deadline": c.deadline}
            for c in spec.conditions or []
        ]
    doc["failures"] = [
        {"node": f.node, "at": f.at, "recover_at": f.recover_at} for f in spec.failures
    ]
    run = spec.run
    doc["run"] = {
        "mode": run.mode,
        "horizon": run.horizon,
        "meeting_period": run.meeting_period,
        "tenure": run.tenure,
        "confined_roles": list(run.confined_roles),
    }
    return doc


def serialize_scenario(spec: ScenarioSpec) -> str:
    return json.dumps(scenario_to_dict(spec), indent=2, sort_keys=False) + "\n"


def load_scenario(path) -> ScenarioSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


# -- contingent causes ------------------------------------------------------


def generate_conditions(spec: ScenarioSpec, seed: int, horizon: int) -> list:
    """Draw the condition stream for a generator-form scenario.

    One uniform draw per alive node per tick decides firing (nodes in id
    order); a second draw picks the kind for nodes that fire.
    """
    gen = spec.generator
    if gen is None:
        raise ValueError("scenario has no condition generator")
    rng = np.random.Generator(np.random.PCG64(seed))
    nodes = sorted(spec.node_index())
    kinds = [k for k, _ in gen.kinds]
    cdf = np.cumsum([p for _, p in gen.kinds])
    out = []
    for tick in range(horizon):
        for nid in nodes:
            if any(f.node == nid and f.dead_at(tick) for f in spec.failures):
                continue
            if rng.random() < gen.rate:
                u = rng.random() * cdf[-1]
                kind = kinds[min(int(np.searchsorted(cdf, u, side="right")), len(kinds) - 1)]
                out.append(Condition(f"c{len(out):05d}", kind, nid, tick, tick + gen.deadline_offset))
    return out


def explicit_conditions(spec: ScenarioSpec, horizon: Optional[int] = None) -> list:
    ordered = sorted(enumerate(spec.conditions or []), key=lambda ic: (ic[1].tick, ic[0]))
    out = []
    for _, c in ordered:
        if horizon is not None and c.tick >= horizon:
            continue
        out.append(Condition(f"c{len(out):05d}", c.kind, c.origin_node, c.tick, c.deadline))
    return out


def conditions_for(spec: ScenarioSpec, seed: int, horizon: int) -> list:
    if spec.generator is not None:
        return generate_conditions(spec, seed, horizon)
    return explicit_conditions(spec, horizon)


def random_scenario_dict(
    seed: int,
    max_nodes: int = 30,
    max_actors: int = 60,
    n_orgs: int = 1,
    n_conditions: int = 15,
    horizon: int = 60,
    max_holders: int = 10,
    failures: int = 0,
    mode: str = "fso",
) -> dict:
    """Build a random but valid scenario document.

    No capability term is held by more than `max_holders` actors, so every
    role has at most that many eligible candidates. Organizations after the
    first are lent to the first through wildcard links.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    caps = [f"cap{i}" for i in range(8)]
    holders = {c: 0 for c in caps}
    orgs = []
    all_nodes = []
    for k in range(n_orgs):
        n = int(rng.integers(3, max_nodes + 1)) if k == 0 else int(rng.integers(2, max(3, max_nodes // 3) + 1))
        ids = [f"o{k}n{i:02d}" for i in range(n)]
        layer = {ids[0]: 0}
        parent = {ids[0]: None}
        for nid in ids[1:]:
            options = [p for p in layer if layer[p] < 5]
            p = options[int(rng.integers(len(options)))]
            parent[nid] = p
            layer[nid] = layer[p] + 1
        budget = max_actors // n_orgs
        n_act = int(rng.integers(1, budget + 1))
        region = {nid: [] for nid in ids}
        actors = []
        for j in range(n_act):
            aid = f"o{k}a{j:02d}"
            want = 1 + int(rng.random() < 0.3)
            mine = []
            for c in rng.permutation(caps):
                if len(mine) == want:
                    break
                if holders[c] < max_holders:
                    holders[c] += 1
                    mine.append(str(c))
            if not mine:
                continue
            home = ids[int(rng.integers(n))]
            region[home].append(aid)
            actors.append({"id": aid, "capabilities": sorted(mine), "systemic_class": int(rng.integers(1, 10))})
        links = []
        if k == 0:
            for j in range(1, n_orgs):
                links.append({"to_org": f"org{j}",
                              "cooperation_rule": {"lendable_roles": "*", "max_concurrent_loans": int(rng.integers(1, 4))}})
        orgs.append({
            "id": f"org{k}",
            "root": ids[0],
            "nodes": [{"id": nid, "parent": parent[nid], "layer": layer[nid], "region": region[nid]} for nid in ids],
            "actors": actors,
            "neighbor_links": links,
        })
        all_nodes.extend(ids)

    library = []
    for kind in ("fire", "flood", "outage"):
        n_roles = int(rng.integers(1, 4))
        roles = []
        for r in range(n_roles):
            need = [str(c) for c in rng.choice(caps, size=1 + int(rng.random() < 0.2), replace=False)]
            roles.append({"name": f"{kind}-r{r}", "required_capabilities": sorted(need),
                          "min_class": int(rng.integers(1, 8)), "count": 1 + int(rng.random() < 0.25)})
        library.append({"condition_kind": kind, "son_duration": int(rng.integers(1, 8)), "roles": roles})

    primary = orgs[0]["nodes"]
    conds = []
    for _ in range(n_conditions):
        tick = int(rng.integers(0, max(1, horizon - 10)))
        node = primary[int(rng.integers(len(primary)))]["id"]
        kind = ("fire", "flood", "outage")[int(rng.integers(3))]
        conds.append({"tick": tick, "kind": kind, "origin_node": node, "deadline": tick + int(rng.integers(3, 20))})

    fails = []
    for _ in range(failures):
        node = all_nodes[int(rng.integers(len(all_nodes)))]
        at = int(rng.integers(0, horizon))
        rec = at + int(rng.integers(1, 20)) if rng.random() < 0.5 else None
        fails.append({"node": node, "at": at, "recover_at": rec})

    return {
        "format": FORMAT,
        "organizations": orgs,
        "protocol_library": library,
        "conditions": conds,
        "failures": fails,
        "run": {"mode": mode, "horizon": horizon, "meeting_period": int(rng.integers(1, 6)),
                "tenure": int(rng.integers(1, 8)), "confined_roles": []},
    }


def random_scenario(seed: int, **kwargs) -> ScenarioSpec:
    return scenario_from_dict(random_scenario_dict(seed, **kwargs))
