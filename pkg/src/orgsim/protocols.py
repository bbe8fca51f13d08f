"""Organizational rule engines: strict hierarchy, sociocracy and FSO.

All three share the same condition -> protocol -> local assignment ->
role exception pipeline. They differ in how far a role exception may look
from the node currently holding it, whether circles elect representatives,
whether exceptions may leave the organization, and what counts as a control
bubble.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

from .org import Organization, tree_distance
from .semantics import MatchResult, RoleSpec, eligible, rank_candidates
from .systemic import mismatch

STRICT = "strict"
SOCIOCRACY = "sociocracy"
FSO = "fso"
MODES = (STRICT, SOCIOCRACY, FSO)


class ProtocolFailure(Exception):
    """A condition could not be treated; `reason` is a short machine tag."""

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason


@dataclass(frozen=True)
class Condition:
    id: str
    kind: str
    origin_node: str
    fired_at: int
    deadline: int

    def __post_init__(self):
        if self.deadline <= self.fired_at:
            raise ValueError(f"condition {self.id}: deadline must be after fired_at")


@dataclass(frozen=True)
class TreatmentProtocol:
    condition_kind: str
    roles: tuple
    son_duration: int

    def __post_init__(self):
        if not self.roles:
            raise ValueError(f"protocol {self.condition_kind}: no roles")
        if self.son_duration < 1:
            raise ValueError(f"protocol {self.condition_kind}: son_duration must be >= 1")

    def role(self, name: str) -> RoleSpec:
        for r in self.roles:
            if r.name == name:
                return r
        raise KeyError(name)


@dataclass(frozen=True)
class RoleException:
    condition: str
    role: str
    current_node: str
    searched_nodes: frozenset
    hops: int = 0
    remaining: int = 1
    path: tuple = ()  # nodes that held the exception, origin first


@dataclass
class SocialOverlayNetwork:
    id: str
    condition: str
    members: list  # (actor, role, org) triples
    formed_at: int
    dissolves_at: int
    layer_span: int
    org_span: int


@dataclass
class Circle:
    parent_node: str
    members: list
    representative: Optional[tuple] = None  # (node id, tenure_until)
    advertised_capabilities: frozenset = frozenset()

    def active_at(self, now: int) -> bool:
        return self.representative is not None and now < self.representative[1]


@dataclass
class ControlBubble:
    id: str
    source: str
    opened_at: int
    closed_at: Optional[int] = None


@dataclass
class Outcome:
    """Result of one search step for a role exception."""

    assigned: list = field(default_factory=list)
    scope: list = field(default_factory=list)
    rule: str = ""
    escalated: Optional[RoleException] = None
    exhausted: bool = False
    blocked: bool = False  # parent exists but is dead


# -- rule engines -----------------------------------------------------------


class Rules:
    """Common engine-facing interface; subclasses fix the mode-specific parts."""

    mode = ""
    root_persona = True
    son_bubbles = False
    forwards = False
    holds_meetings = False

    def __init__(self, confined_roles: Iterable[str] = ()):
        self.confined_roles = frozenset(confined_roles)

    def scope(self, org: Organization, exc: RoleException, circles: dict, now: int) -> tuple:
        """Return ``(node ids to search, rule label)`` for an exception step."""
        raise NotImplementedError

    def may_forward(self, role: str) -> bool:
        return self.forwards


class StrictRules(Rules):
    mode = STRICT

    def scope(self, org, exc, circles, now):
        return strict_scope(org, exc), STRICT


class SociocracyRules(Rules):
    mode = SOCIOCRACY
    holds_meetings = True

    def scope(self, org, exc, circles, now):
        nodes = strict_scope(org, exc)
        seen = set(nodes) | exc.searched_nodes
        for child in org.alive_children(exc.current_node):
            circle = circles.get(child)
            if circle is None or not circle.active_at(now):
                continue
            if not org.nodes[circle.representative[0]].alive:
                continue
            for m in circle.members:
                if org.nodes[m].alive and m not in seen:
                    nodes.append(m)
                    seen.add(m)
        return nodes, SOCIOCRACY


class FsoRules(Rules):
    mode = FSO
    root_persona = False
    son_bubbles = True
    forwards = True

    def scope(self, org, exc, circles, now):
        probe = MatchResult("", exc.role, 0, 0)
        if not check_confinement(self.confined_roles, probe):
            # confined roles only travel along the hierarchy path
            return strict_scope(org, exc), STRICT
        nodes = [n for n in org.reachable_subtree(exc.current_node) if n not in exc.searched_nodes]
        return nodes, FSO

    def may_forward(self, role: str) -> bool:
        return role not in self.confined_roles


def make_rules(mode: str, confined_roles: Iterable[str] = ()) -> Rules:
    try:
        cls = {STRICT: StrictRules, SOCIOCRACY: SociocracyRules, FSO: FsoRules}[mode]
    except KeyError:
        raise ValueError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}") from None
    return cls(confined_roles)


def strict_scope(org: Organization, exc: RoleException) -> list:
    return [c for c in org.alive_children(exc.current_node) if c not in exc.searched_nodes]


# -- operations -------------------------------------------------------------


def select_protocol(library: Sequence[TreatmentProtocol], condition: Condition) -> TreatmentProtocol:
    for proto in library:
        if proto.condition_kind == condition.kind:
            return proto
    raise ProtocolFailure("unknown-kind", condition.kind)


def candidates_in(
    org: Organization,
    nodes: Iterable[str],
    role: RoleSpec,
    origin: str,
    contested=frozenset(),
    hop_offset: int = 0,
) -> list:
    """Ranked free, eligible actors in the regions of `nodes`.

    Actors in `contested` were claimed by a competing request during the
    same tick; they are ranked as if still free so collisions surface.
    Hop distance is measured from `origin` inside `org` (plus `hop_offset`
    for actors reached across organizations).
    """
    pool = []
    for actor in org.actors_in(nodes):
        if not eligible(actor, role) or not (actor.free or actor.id in contested):
            continue
        if origin in org.nodes:
            hops = tree_distance(org, origin, actor.home_node)
        else:
            hops = org.nodes[actor.home_node].layer
        pool.append((actor, hops + hop_offset))
    pool.sort(key=lambda ah: ah[0].id)
    ranked = rank_candidates([(a, h) for a, h in pool if a.free], role)
    if contested:
        ranked += [
            MatchResult(a.id, role.name, mismatch(a.systemic_class, role.min_class), h)
            for a, h in pool if not a.free
        ]
        ranked.sort(key=lambda m: m.key)
    return ranked


def commit(org: Organization, matches: Iterable[MatchResult], son_id: str) -> None:
    for m in matches:
        actor = org.actors[m.actor]
        if not actor.free:
            raise RuntimeError(f"actor {m.actor} already committed to {actor.committed_to}")
        actor.committed_to = son_id


def assign_locally(org: Organization, condition: Condition, protocol: TreatmentProtocol, son_id: str = "") -> tuple:
    """Fill roles from the originating node's region.

    Returns ``(assignments, unfilled)`` where `unfilled` holds RoleSpecs whose
    `count` is the number of actors still missing.
    """
    origin = org.node(condition.origin_node)
    if not origin.alive:
        raise ProtocolFailure("origin-dead", origin.id)
    son_id = son_id or f"son-{condition.id}"
    assignments, unfilled = [], []
    for role in protocol.roles:
        picked = candidates_in(org, [origin.id], role, origin.id)[: role.count]
        commit(org, picked, son_id)
        assignments.extend(picked)
        if len(picked) < role.count:
            unfilled.append(replace(role, count=role.count - len(picked)))
    return assignments, unfilled


def escalate_exception(
    rules: Rules,
    org: Organization,
    exc: RoleException,
    role: RoleSpec,
    origin: str,
    now: int = 0,
    circles: Optional[dict] = None,
    son_id: Optional[str] = None,
    contested=frozenset(),
) -> Outcome:
    """One search step of a role exception at its current node.

    Candidates found are committed to `son_id` unless it is None, in which
    case the outcome only proposes them (used for contention handling).
    """
    if not org.node(exc.current_node).alive:
        raise ProtocolFailure("route-dead", exc.current_node)
    nodes, label = rules.scope(org, exc, circles or {}, now)
    picked = candidates_in(org, nodes, role, origin, contested)[: exc.remaining]
    if son_id is not None:
        commit(org, picked, son_id)
    out = Outcome(assigned=picked, scope=list(nodes), rule=label)
    out.escalated, out.exhausted, out.blocked = next_step(org, exc, nodes, exc.remaining - len(picked))
    return out


def next_step(org: Organization, exc: RoleException, scope: Iterable[str], remaining: int) -> tuple:
    """Where an exception goes after searching `scope` with `remaining` unfilled.

    Returns ``(escalated exception or None, exhausted, blocked)``.
    """
    if remaining == 0:
        return None, False, False
    parent = org.nodes[exc.current_node].parent
    if parent is None:
        return None, True, False
    if not org.nodes[parent].alive:
        return None, True, True
    escalated = RoleException(
        condition=exc.condition,
        role=exc.role,
        current_node=parent,
        searched_nodes=exc.searched_nodes | frozenset(scope),
        hops=exc.hops + 1,
        remaining=remaining,
        path=exc.path + (parent,),
    )
    return escalated, False, False


def forward_to_neighbor(
    org: Organization,
    exc: RoleException,
    role: RoleSpec,
    links: Sequence,
    registry: dict,
    origin: str,
    son_id: Optional[str] = None,
    contested=frozenset(),
) -> tuple:
    """Borrow the best actors for a role across all usable neighbor links.

    Candidates from every link are ranked together by (mismatch, hops, id)
    and taken greedily while each link has loan budget left. Returns
    ``(assigned, per-actor lending link)``; both are empty when no link
    could help. Loan budgets are charged only when committing.
    """
    base = org.nodes[origin].layer + 1  # up to the root, then across
    pool = []
    for link in links:
        if not link.cooperation_rule.covers(role.name) or link_budget(link) <= 0:
            continue
        target = registry[link.to_org]
        alive = target.reachable_subtree(target.root)
        pool.extend((m, link) for m in candidates_in(target, alive, role, origin, contested, hop_offset=base))
    pool.sort(key=lambda ml: ml[0].key)
    used: dict = {}
    assigned, via = [], []
    for m, link in pool:
        if len(assigned) == exc.remaining:
            break
        if used.get(link.to_org, 0) >= link_budget(link):
            continue
        used[link.to_org] = used.get(link.to_org, 0) + 1
        assigned.append(m)
        via.append(link)
    if son_id is not None:
        for m, link in zip(assigned, via):
            commit(registry[link.to_org], [m], son_id)
            link.active_loans += 1
    return assigned, via


def link_budget(link) -> int:
    return link.cooperation_rule.max_concurrent_loans - link.active_loans


def form_son(
    condition: Condition,
    members: Sequence[tuple],
    now: int,
    protocol: TreatmentProtocol,
    registry: dict,
    origin_org: str,
) -> SocialOverlayNetwork:
    """Bind assigned actors into a transient overlay.

    `members` holds ``(actor, role, org)`` triples covering every role.
    """
    if now >= condition.deadline:
        raise ProtocolFailure("deadline", f"{condition.id} at {now}")
    filled: dict = {}
    for _, role, _ in members:
        filled[role] = filled.get(role, 0) + 1
    for role in protocol.roles:
        if filled.get(role.name, 0) < role.count:
            raise ProtocolFailure("unfilled", role.name)
    layers = [registry[origin_org].nodes[condition.origin_node].layer]
    orgs = {origin_org}
    for aid, _, oid in members:
        org = registry[oid]
        layers.append(org.nodes[org.actors[aid].home_node].layer)
        orgs.add(oid)
    return SocialOverlayNetwork(
        id=f"son-{condition.id}",
        condition=condition.id,
        members=sorted(members),
        formed_at=now,
        dissolves_at=now + protocol.son_duration,
        layer_span=max(layers) - min(layers),
        org_span=len(orgs),
    )


def dissolve_son(son: SocialOverlayNetwork, now: int, registry: dict) -> list:
    """Free every member of `son`; returns the released actor ids."""
    released = []
    for aid, _, oid in son.members:
        actor = registry[oid].actors[aid]
        if actor.committed_to == son.id:
            actor.committed_to = None
            released.append(aid)
    return sorted(released)


def build_circles(org: Organization) -> dict:
    """One circle per node with children, keyed by that parent node."""
    return {
        nid: Circle(parent_node=nid, members=org.children(nid))
        for nid in sorted(org.nodes)
        if org.children(nid)
    }


def capability_union(org: Organization, node_id: str) -> frozenset:
    caps: set = set()
    for actor in org.actors_in([node_id]):
        caps |= actor.capabilities
    return frozenset(caps)


def hold_meeting(circle: Circle, org: Organization, now: int, meeting_period: int, tenure: int) -> tuple:
    """Run a circle meeting and elect a representative.

    Returns ``(circle, elected node id or None)``; nobody is elected when
    every member is dead.
    """
    if now % meeting_period != 0:
        raise ValueError(f"meetings happen every {meeting_period} ticks, not at {now}")
    present = [m for m in circle.members if org.nodes[m].alive]
    if not present:
        return circle, None
    winner = min(present, key=lambda m: (-len(capability_union(org, m)), m))
    advertised: set = set()
    for m in present:
        advertised |= capability_union(org, m)
    updated = replace(
        circle,
        representative=(winner, now + tenure),
        advertised_capabilities=frozenset(advertised),
    )
    return updated, winner


@dataclass(frozen=True)
class RoleRequest:
    condition: str
    fired_at: int
    role: str
    actor: str

    @property
    def priority(self) -> tuple:
        return (self.fired_at, self.condition)


def resolve_contention(requests: Sequence[RoleRequest]) -> tuple:
    """Pick the earliest-fired request for a contended actor.

    Returns ``(winner, losers)``; each loser yields one recorded conflict.
    """
    if not requests:
        raise ValueError("no requests")
    ordered = sorted(requests, key=lambda r: (r.priority, r.role))
    return ordered[0], ordered[1:]


def check_confinement(confined_roles: Iterable[str], assignment: MatchResult) -> bool:
    return assignment.role not in confined_roles
