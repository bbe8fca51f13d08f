"""Deterministic discrete-event kernel driving the organizational rule engines.

Time is a logical integer tick. Queued actions are processed in
lexicographic ``(tick, seq)`` order. Within a tick, structural actions
(failures, recoveries, SON dissolutions, circle meetings, condition firings)
run first in queue order; all role searches due at that tick are then
resolved together, which is where FSO contention is detected.

Every state change is recorded as an :class:`Event` in the :class:`Trace`.
"""

from __future__ import annotations

import copy
import hashlib
import heapq
import json
from dataclasses import dataclass, field
from typing import Optional

from .org import locate_neighbor_orgs, path_to_root, tree_path
from .protocols import (
    FSO,
    MODES,
    Condition,
    ProtocolFailure,
    RoleException,
    RoleRequest,
    build_circles,
    candidates_in,
    dissolve_son,
    escalate_exception,
    form_son,
    forward_to_neighbor,
    link_budget,
    hold_meeting,
    make_rules,
    next_step,
    resolve_contention,
    select_protocol,
)
from .scenario import ScenarioSpec, conditions_for

EVENT_KINDS = (
    "ConditionFired", "MeetingHeld", "ElectionHeld", "ExceptionRaised", "ExceptionEscalated",
    "ExceptionForwarded", "RoleAssigned", "SonFormed", "SonDissolved", "ProtocolFailed",
    "ConflictRecorded", "NodeFailed", "NodeRecovered", "MessageSent",
)
HASH_ALGORITHM = "sha256"
EMPTY_TRACE_HASH = hashlib.sha256(b"").hexdigest()


class CausalityError(ValueError):
    pass


@dataclass(frozen=True)
class Event:
    tick: int
    seq: int
    kind: str
    payload: dict

    def canonical(self) -> str:
        """One JSON line: keys tick, seq, kind, payload; payload keys sorted."""
        head = json.dumps({"tick": self.tick, "seq": self.seq, "kind": self.kind}, separators=(",", ":"))
        body = json.dumps(self.payload, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
        return head[:-1] + ',"payload":' + body + "}"


@dataclass
class Trace:
    events: list
    scenario_digest: str
    seed: int
    mode: str = ""
    horizon: int = 0

    def of_kind(self, *kinds: str) -> list:
        return [e for e in self.events if e.kind in kinds]

    def to_jsonl(self) -> str:
        return "".join(e.canonical() + "\n" for e in self.events)


def trace_hash(trace: Trace) -> str:
    """SHA-256 hex digest of the canonical JSON Lines serialization."""
    return hashlib.sha256(trace.to_jsonl().encode("ascii")).hexdigest()


def read_trace_jsonl(text: str, **meta) -> Trace:
    events = []
    for line in text.splitlines():
        if line.strip():
            d = json.loads(line)
            events.append(Event(d["tick"], d["seq"], d["kind"], d["payload"]))
    return Trace(events=events, scenario_digest=meta.get("scenario_digest", ""),
                 seed=meta.get("seed", 0), mode=meta.get("mode", ""), horizon=meta.get("horizon", 0))


@dataclass(frozen=True)
class RunConfig:
    mode: str = "fso"
    horizon: int = 100
    seed: int = 0
    meeting_period: int = 5
    tenure: int = 5
    confined_roles: tuple = ()

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.meeting_period < 1 or self.tenure < 1:
            raise ValueError("meeting_period and tenure must be >= 1")

    @classmethod
    def from_scenario(cls, spec: ScenarioSpec, **overrides) -> "RunConfig":
        run = spec.run
        base = dict(mode=run.mode, horizon=run.horizon, seed=0, meeting_period=run.meeting_period,
                    tenure=run.tenure, confined_roles=tuple(run.confined_roles))
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**base)


# -- per-condition bookkeeping ----------------------------------------------


@dataclass
class _Case:
    condition: Condition
    org: str
    protocol: object
    order: dict  # role name -> position in protocol
    son_id: str
    status: str = "active"  # active | formed | succeeded | failed
    members: list = field(default_factory=list)  # (actor, role, org)
    loans: list = field(default_factory=list)  # NeighborLink per borrowed actor
    son: object = None

    @property
    def needed(self) -> int:
        return sum(r.count for r in self.protocol.roles)


@dataclass
class _Request:
    case: _Case
    kind: str  # local | step | forward
    exc: Optional[RoleException] = None

    @property
    def priority(self) -> tuple:
        c = self.case.condition
        role_pos = -1 if self.exc is None else self.case.order[self.exc.role]
        return (c.fired_at, c.id, role_pos)


@dataclass
class _Proposal:
    picks: list  # MatchResult
    scope: list
    rule: str
    links: list = field(default_factory=list)  # per pick, for forwards
    scopes: list = field(default_factory=list)  # per pick, for forwards


class Simulation:
    """Single-threaded event loop owning all mutable run state."""

    def __init__(self, spec: ScenarioSpec, config: RunConfig, conditions: Optional[list] = None):
        self.spec = spec
        self.config = config
        self.rules = make_rules(config.mode, config.confined_roles)
        self.registry = {o.id: copy.deepcopy(o) for o in spec.organizations}
        for org in self.registry.values():
            org.rebuild_index()
        self.node_org = spec.node_index()
        self.circles = {oid: build_circles(org) for oid, org in self.registry.items()} if self.rules.holds_meetings else {}
        self.library = list(spec.protocol_library)
        self.now = 0
        self._queue: list = []
        self._seq = 0
        self.events: list = []
        self.cases: dict = {}
        self._pending: list = []
        if conditions is None:
            conditions = conditions_for(spec, config.seed, config.horizon)
        self.conditions = conditions

    # -- queue ------------------------------------------------------------

    def schedule(self, tick: int, action: str, data=None) -> int:
        """Enqueue an action; equal ticks run in insertion order."""
        if tick < self.now:
            raise CausalityError(f"causality: tick {tick} is before now={self.now}")
        seq = self._seq
        self._seq += 1
        heapq.heappush(self._queue, (tick, seq, action, data))
        return seq

    def inject_failure(self, node: str, at: int, recover_at: Optional[int] = None) -> None:
        if node not in self.node_org:
            raise KeyError(f"no-such-node({node})")
        self.schedule(at, "fail", node)
        if recover_at is not None:
            self.schedule(recover_at, "recover", node)

    def emit(self, event_kind: str, **payload) -> Event:
        ev = Event(self.now, len(self.events), event_kind, payload)
        self.events.append(ev)
        return ev

    # -- main loop --------------------------------------------------------

    def run(self) -> Trace:
        cfg = self.config
        for f in self.spec.failures:
            self.inject_failure(f.node, f.at, f.recover_at)
        if self.rules.holds_meetings:
            for t in range(0, cfg.horizon, cfg.meeting_period):
                self.schedule(t, "meeting")
        for cond in self.conditions:
            self.schedule(cond.fired_at, "fire", cond)

        while self._queue and self._queue[0][0] < cfg.horizon:
            self.now = self._queue[0][0]
            while self._queue and self._queue[0][0] == self.now:
                _, _, action, data = heapq.heappop(self._queue)
                getattr(self, f"_on_{action}")(data)
            while self._pending:
                batch, self._pending = self._pending, []
                self._resolve(batch)

        self._truncate(cfg.horizon)
        return Trace(
            events=self.events,
            scenario_digest=self.spec.digest(),
            seed=cfg.seed,
            mode=cfg.mode,
            horizon=cfg.horizon,
        )

    def _truncate(self, horizon: int) -> None:
        self.now = max(self.now, horizon)
        for cid in sorted(self.cases):
            case = self.cases[cid]
            if case.status == "active":
                self._fail(case, "horizon")
            elif case.status == "formed":
                self._dissolve(case, truncated=case.son.dissolves_at > horizon)

    # -- structural actions -------------------------------------------------

    def _node(self, nid: str):
        return self.registry[self.node_org[nid]].nodes[nid]

    def _on_fail(self, nid: str) -> None:
        node = self._node(nid)
        if node.alive:
            node.alive = False
            self.emit("NodeFailed", node=nid)

    def _on_recover(self, nid: str) -> None:
        node = self._node(nid)
        if not node.alive:
            node.alive = True
            self.emit("NodeRecovered", node=nid)

    def _on_meeting(self, _data) -> None:
        cfg = self.config
        for oid in sorted(self.circles):
            org = self.registry[oid]
            for pid in sorted(self.circles[oid]):
                circle = self.circles[oid][pid]
                present = [m for m in circle.members if org.nodes[m].alive]
                if not present:
                    continue
                self.emit("MeetingHeld", circle=pid, members=present)
                updated, rep = hold_meeting(circle, org, self.now, cfg.meeting_period, cfg.tenure)
                self.circles[oid][pid] = updated
                bubble = f"rep:{pid}@{self.now}"
                self.emit(
                    "ElectionHeld",
                    circle=pid,
                    representative=rep,
                    tenure_until=updated.representative[1],
                    advertised=sorted(updated.advertised_capabilities),
                    bubble=bubble,
                )

    def _on_dissolve(self, cid: str) -> None:
        case = self.cases[cid]
        if case.status == "formed":
            self._dissolve(case)

    def _on_fire(self, cond: Condition) -> None:
        oid = self.node_org[cond.origin_node]
        self.emit("ConditionFired", condition=cond.id, kind=cond.kind, origin=cond.origin_node, deadline=cond.deadline)
        try:
            proto = select_protocol(self.library, cond)
        except ProtocolFailure as exc:
            case = _Case(cond, oid, None, {}, f"son-{cond.id}")
            self.cases[cond.id] = case
            self._fail(case, exc.reason)
            return
        case = _Case(cond, oid, proto, {r.name: i for i, r in enumerate(proto.roles)}, f"son-{cond.id}")
        self.cases[cond.id] = case
        if not self._node(cond.origin_node).alive:
            self._fail(case, "origin-dead")
            return
        self._pending.append(_Request(case, "local"))

    def _on_step(self, req: "_Request") -> None:
        self._pending.append(req)

    _on_forward = _on_step

    # -- searches ---------------------------------------------------------

    def _propose(self, req: _Request, contested=frozenset()) -> _Proposal:
        case = req.case
        org = self.registry[case.org]
        origin = case.condition.origin_node
        if req.kind == "local":
            picks = []
            taken: set = set()
            for role in case.protocol.roles:
                found = [m for m in candidates_in(org, [origin], role, origin, contested) if m.actor not in taken]
                picks.extend(found[: role.count])
                taken |= {m.actor for m in found[: role.count]}
            return _Proposal(picks, [origin], "local")
        role = case.protocol.role(req.exc.role)
        if req.kind == "step":
            out = escalate_exception(self.rules, org, req.exc, role, origin, self.now,
                                     self.circles.get(case.org), son_id=None, contested=contested)
            return _Proposal(out.assigned, out.scope, out.rule)
        links = locate_neighbor_orgs(org, role.name)
        picks, via = forward_to_neighbor(org, req.exc, role, links, self.registry, origin,
                                         son_id=None, contested=contested)
        subtrees = {link.to_org: self.registry[link.to_org].reachable_subtree(self.registry[link.to_org].root)
                    for link in links}
        # a pick is optimal among the links that still had loan budget when it was made
        scopes, used = [], {}
        for link in via:
            open_links = [lk for lk in links if used.get(lk.to_org, 0) < link_budget(lk)]
            scopes.append(sorted(n for lk in open_links for n in subtrees[lk.to_org]))
            used[link.to_org] = used.get(link.to_org, 0) + 1
        scope = sorted(n for nodes in subtrees.values() for n in nodes)
        return _Proposal(picks, scope, "forward", via, scopes)

    def _resolve(self, batch: list) -> None:
        live = []
        for req in batch:
            case = req.case
            if case.status != "active":
                continue
            if req.kind != "local":
                if self.now >= case.condition.deadline:
                    self._fail(case, "deadline")
                    continue
                if not self._node(req.exc.current_node).alive:
                    self._fail(case, "route-dead", dropped=1)
                    continue
            live.append(req)
        live.sort(key=lambda r: r.priority)

        if self.rules.mode != FSO:
            # the root persona serializes every decision: no contention
            for req in live:
                if req.case.status == "active":
                    self._apply(req, self._propose(req), [])
            return

        # Proposals are made in priority order against live state, but actors
        # already claimed this tick by another condition stay visible: a
        # request whose picks collide with such a claim loses them.
        claimed: dict = {}  # actor -> RoleRequest holding it this tick
        for req in live:
            if req.case.status != "active":
                continue
            cond = req.case.condition
            contested = frozenset(
                a for a, holder in claimed.items()
                if holder.condition != cond.id and self._actor(a).committed_to == f"son-{holder.condition}"
            )
            prop = self._propose(req, contested)
            lost = []
            kept = _Proposal([], prop.scope, prop.rule, [], [])
            for i, m in enumerate(prop.picks):
                if m.actor in contested:
                    claim = RoleRequest(cond.id, cond.fired_at, m.role, m.actor)
                    winner, _ = resolve_contention([claimed[m.actor], claim])
                    lost.append((m, winner))
                    continue
                kept.picks.append(m)
                if prop.links:
                    kept.links.append(prop.links[i])
                    kept.scopes.append(prop.scopes[i])
            self._apply(req, kept, lost)
            for m in kept.picks:
                claimed.setdefault(m.actor, RoleRequest(cond.id, cond.fired_at, m.role, m.actor))

    def _actor(self, aid: str):
        return next(o.actors[aid] for o in self.registry.values() if aid in o.actors)

    def _apply(self, req: _Request, prop: _Proposal, lost: list) -> None:
        case = req.case
        cond = case.condition
        org = self.registry[case.org]
        decision = cond.origin_node if req.exc is None else req.exc.current_node
        chain = [cond.origin_node] if req.exc is None else list(req.exc.path)

        for m, winner in lost:
            self.emit("ConflictRecorded", actor=m.actor, role=m.role, winner=winner.condition,
                      loser=cond.id, winner_fired_at=winner.fired_at, loser_fired_at=cond.fired_at)

        granted = 0
        for i, m in enumerate(prop.picks):
            via = prop.links[i] if prop.links else None
            if via is not None and via.exhausted:
                continue
            host = self.registry[via.to_org] if via is not None else org
            actor = host.actors[m.actor]
            if not actor.free:
                continue
            actor.committed_to = case.son_id
            if via is not None:
                via.active_loans += 1
                case.loans.append(via)
            case.members.append((m.actor, m.role, host.id))
            granted += 1
            self.emit(
                "RoleAssigned",
                condition=cond.id, role=m.role, actor=m.actor, org=host.id, home_node=actor.home_node,
                decision_node=decision, mismatch=m.mismatch, hops=m.hop_distance,
                scope_rule=prop.rule, scope=prop.scopes[i] if prop.scopes else sorted(prop.scope), path=chain,
                via=via.to_org if via is not None else None,
                via_root=org.root in chain,
            )
            if via is not None:
                route = [decision] + list(reversed(path_to_root(host, actor.home_node)))
            else:
                route = tree_path(org, decision, actor.home_node)
            if len(route) > 1:
                self.emit("MessageSent", condition=cond.id, purpose="assign", path=route)

        if req.kind == "local":
            per_role: dict = {}
            for aid, role, _ in case.members:
                per_role[role] = per_role.get(role, 0) + 1
            origin = cond.origin_node
            for role in case.protocol.roles:
                missing = role.count - per_role.get(role.name, 0)
                if missing > 0:
                    exc = RoleException(cond.id, role.name, origin, frozenset([origin]), 0, missing, (origin,))
                    self.emit("ExceptionRaised", condition=cond.id, role=role.name, node=origin, remaining=missing)
                    self._pending.append(_Request(case, "step", exc))
        elif req.kind == "step":
            exc = req.exc
            remaining = exc.remaining - granted
            nxt, exhausted, blocked = next_step(org, exc, prop.scope, remaining)
            if nxt is not None:
                self.emit("MessageSent", condition=cond.id, purpose="escalate", path=[exc.current_node, nxt.current_node])
                self.emit("ExceptionEscalated", condition=cond.id, role=exc.role, **{"from": exc.current_node},
                          to=nxt.current_node, hops=nxt.hops, remaining=remaining, searched=sorted(nxt.searched_nodes))
                self.schedule(self.now + 1, "step", _Request(case, "step", nxt))
            elif blocked:
                self._fail(case, "route-dead", dropped=1)
                return
            elif exhausted:
                links = locate_neighbor_orgs(org, exc.role) if self.rules.forwards and self.rules.may_forward(exc.role) else []
                if not links:
                    self._fail(case, "exhausted")
                    return
                fwd = RoleException(cond.id, exc.role, exc.current_node,
                                    exc.searched_nodes | frozenset(prop.scope), exc.hops + 1, remaining, exc.path)
                self.emit("ExceptionForwarded", condition=cond.id, role=exc.role, from_org=org.id,
                          to_orgs=[link.to_org for link in links], remaining=remaining)
                self.schedule(self.now + 1, "forward", _Request(case, "forward", fwd))
        else:
            if req.exc.remaining - granted > 0:
                self._fail(case, "forward-failed")
                return

        if len(case.members) == case.needed and case.status == "active":
            self._form(case)

    # -- SON lifecycle ----------------------------------------------------

    def _form(self, case: _Case) -> None:
        try:
            son = form_son(case.condition, case.members, self.now, case.protocol, self.registry, case.org)
        except ProtocolFailure as exc:
            self._fail(case, exc.reason)
            return
        case.son = son
        case.status = "formed"
        bubble = f"son:{son.id}" if self.rules.son_bubbles else None
        self.emit(
            "SonFormed",
            son=son.id, condition=case.condition.id,
            members=[list(m) for m in son.members],
            layer_span=son.layer_span, org_span=son.org_span,
            dissolves_at=son.dissolves_at, bubble=bubble,
            latency=self.now - case.condition.fired_at,
        )
        self.schedule(son.dissolves_at, "dissolve", case.condition.id)

    def _dissolve(self, case: _Case, truncated: bool = False) -> None:
        released = dissolve_son(case.son, self.now, self.registry)
        for link in case.loans:
            link.active_loans -= 1
        case.loans = []
        case.status = "succeeded"
        self.emit("SonDissolved", son=case.son.id, condition=case.condition.id, released=released,
                  truncated=truncated)

    def _fail(self, case: _Case, reason: str, dropped: int = 0) -> None:
        released = []
        for aid, _, oid in case.members:
            actor = self.registry[oid].actors[aid]
            if actor.committed_to == case.son_id:
                actor.committed_to = None
                released.append(aid)
        for link in case.loans:
            link.active_loans -= 1
        case.loans = []
        case.members = []
        case.status = "failed"
        self.emit("ProtocolFailed", condition=case.condition.id, reason=reason,
                  released=sorted(released), dropped=dropped)


def run(spec: ScenarioSpec, config: Optional[RunConfig] = None, conditions: Optional[list] = None) -> Trace:
    """Simulate `spec` under `config` and return the full event trace."""
    if config is None:
        config = RunConfig.from_scenario(spec)
    return Simulation(spec, config, conditions).run()
