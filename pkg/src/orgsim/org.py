"""Organizations as layered trees of nodes, each node owning a region of actors.

Node and actor identifiers are unique across a whole scenario, so conditions
and failures can name a node without qualifying it by organization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union

WILDCARD = "*"


class NoSuchNode(KeyError):
    """Raised when an operation names a node the organization does not have."""

    def __init__(self, node: str):
        super().__init__(node)
        self.node = node

    def __str__(self) -> str:
        return f"no-such-node({self.node})"


@dataclass
class Actor:
    id: str
    capabilities: frozenset
    systemic_class: int
    home_node: str = ""
    committed_to: Optional[str] = None  # SON id while committed

    @property
    def free(self) -> bool:
        return self.committed_to is None


@dataclass
class OrgNode:
    id: str
    parent: Optional[str]
    layer: int
    region: frozenset = frozenset()
    alive: bool = True


@dataclass(frozen=True)
class CooperationRule:
    lendable_roles: Union[frozenset, str] = WILDCARD
    max_concurrent_loans: int = 1

    def covers(self, role: str) -> bool:
        if self.lendable_roles == WILDCARD:
            return True
        return role in self.lendable_roles


@dataclass
class NeighborLink:
    from_org: str
    to_org: str
    cooperation_rule: CooperationRule
    active_loans: int = 0

    @property
    def exhausted(self) -> bool:
        return self.active_loans >= self.cooperation_rule.max_concurrent_loans


@dataclass
class Organization:
    id: str
    nodes: dict
    root: str
    actors: dict = field(default_factory=dict)
    neighbor_links: list = field(default_factory=list)

    def __post_init__(self) -> None:
        self._children: dict = {}
        self.rebuild_index()

    def rebuild_index(self) -> None:
        children: dict = {nid: [] for nid in self.nodes}
        for node in self.nodes.values():
            if node.parent is not None and node.parent in children:
                children[node.parent].append(node.id)
        for kids in children.values():
            kids.sort()
        self._children = children

    def node(self, node_id: str) -> OrgNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise NoSuchNode(node_id) from None

    def children(self, node_id: str) -> list:
        self.node(node_id)
        return list(self._children.get(node_id, ()))

    def alive_children(self, node_id: str) -> list:
        return [c for c in self.children(node_id) if self.nodes[c].alive]

    def descendants(self, node_id: str) -> list:
        """All descendants of a node regardless of liveness, in DFS order."""
        out = []
        stack = list(reversed(self.children(node_id)))
        while stack:
            n = stack.pop()
            out.append(n)
            stack.extend(reversed(self._children.get(n, ())))
        return out

    def reachable_subtree(self, node_id: str) -> list:
        """Nodes of the subtree reachable from `node_id` through alive nodes only.

        A dead node hides its own region and cuts off everything below it.
        """
        if not self.node(node_id).alive:
            return []
        out = []
        stack = [node_id]
        while stack:
            n = stack.pop()
            out.append(n)
            stack.extend(reversed(self.alive_children(n)))
        return out

    def actors_in(self, node_ids: Iterable[str]) -> Iterator[Actor]:
        for nid in node_ids:
            for aid in sorted(self.nodes[nid].region):
                yield self.actors[aid]

    def depth(self) -> int:
        return max(n.layer for n in self.nodes.values())


def path_to_root(org: Organization, node: str) -> list:
    """Node ids from `node` up to the root, child before parent."""
    path = [org.node(node).id]
    seen = {node}
    while org.nodes[path[-1]].parent is not None:
        parent = org.nodes[path[-1]].parent
        if parent in seen or parent not in org.nodes:
            raise ValueError(f"broken parent chain at {path[-1]}")
        seen.add(parent)
        path.append(parent)
    return path


def tree_path(org: Organization, src: str, dst: str) -> list:
    """Node ids along the unique tree path from src to dst (inclusive)."""
    up = path_to_root(org, src)
    down = path_to_root(org, dst)
    on_down = {n: i for i, n in enumerate(down)}
    for i, n in enumerate(up):
        if n in on_down:
            return up[: i + 1] + list(reversed(down[: on_down[n]]))
    raise ValueError(f"{src} and {dst} share no root")


def tree_distance(org: Organization, src: str, dst: str) -> int:
    return len(tree_path(org, src, dst)) - 1


def subtree_actors(org: Organization, node: str) -> set:
    """Actor ids held by the alive-reachable subtree rooted at `node`."""
    out: set = set()
    for nid in org.reachable_subtree(node):
        out |= org.nodes[nid].region
    return out


def locate_neighbor_orgs(org: Organization, role: str) -> list:
    """Links able to lend `role` right now, ordered by target org id."""
    found = [
        link
        for link in org.neighbor_links
        if link.cooperation_rule.covers(role) and not link.exhausted
    ]
    return sorted(found, key=lambda link: link.to_org)


def validate_topology(org: Organization) -> list:
    """Return a list of violation strings; an empty list means the topology is ok.

    Violations are named ``kind(subject)``, e.g. ``layer-mismatch(n3)``.
    """
    problems = []
    if org.root not in org.nodes:
        problems.append(f"missing-root({org.root})")
    for nid, node in sorted(org.nodes.items()):
        if node.id != nid:
            problems.append(f"id-mismatch({nid})")
        if nid == org.root:
            if node.parent is not None:
                problems.append(f"root-has-parent({nid})")
            if node.layer != 0:
                problems.append(f"layer-mismatch({nid})")
            continue
        if node.parent is None:
            problems.append(f"extra-root({nid})")
            continue
        if node.parent not in org.nodes:
            problems.append(f"dangling-parent({nid})")
            continue
        if node.layer != org.nodes[node.parent].layer + 1:
            problems.append(f"layer-mismatch({nid})")

    # every node must reach the root without cycling
    for nid in sorted(org.nodes):
        seen = set()
        cur: Optional[str] = nid
        while cur is not None and cur in org.nodes and cur not in seen:
            seen.add(cur)
            cur = org.nodes[cur].parent
        if cur is not None and cur in seen:
            problems.append(f"cycle({nid})")
        elif org.root in org.nodes and org.root not in seen:
            if f"dangling-parent({nid})" not in problems and f"extra-root({nid})" not in problems:
                problems.append(f"unrooted({nid})")

    owner: dict = {}
    for nid, node in sorted(org.nodes.items()):
        for aid in sorted(node.region):
            if aid in owner:
                problems.append(f"actor-shared({aid})")
            else:
                owner[aid] = nid
            if aid not in org.actors:
                problems.append(f"unknown-actor({aid})")
    for aid, actor in sorted(org.actors.items()):
        if not 1 <= actor.systemic_class <= 9:
            problems.append(f"bad-class({aid})")
        if aid not in owner:
            problems.append(f"homeless-actor({aid})")
        elif actor.home_node and actor.home_node != owner[aid]:
            problems.append(f"home-mismatch({aid})")

    targets = set()
    for link in org.neighbor_links:
        if link.from_org != org.id:
            problems.append(f"link-source({link.to_org})")
        if link.to_org == org.id:
            problems.append(f"self-link({link.to_org})")
        if link.to_org in targets:
            problems.append(f"duplicate-link({link.to_org})")
        targets.add(link.to_org)
        if link.cooperation_rule.max_concurrent_loans < 1:
            problems.append(f"bad-loan-budget({link.to_org})")
    return problems
