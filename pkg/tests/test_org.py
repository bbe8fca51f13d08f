import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orgsim.org import (
    Actor,
    CooperationRule,
    NeighborLink,
    NoSuchNode,
    Organization,
    OrgNode,
    locate_neighbor_orgs,
    path_to_root,
    subtree_actors,
    tree_distance,
    validate_topology,
)


def make_org(parents: dict, regions=None, dead=()) -> Organization:
    """Build an organization from a child -> parent map (layers derived)."""
    regions = regions or {}
    layer = {}

    def depth(n):
        if n not in layer:
            layer[n] = 0 if parents[n] is None else depth(parents[n]) + 1
        return layer[n]

    nodes = {n: OrgNode(n, p, depth(n), frozenset(regions.get(n, ())), n not in dead) for n, p in parents.items()}
    actors = {a: Actor(a, frozenset({"x"}), 5, n) for n, r in regions.items() for a in r}
    root = next(n for n, p in parents.items() if p is None)
    return Organization("org", nodes, root, actors)


@st.composite
def random_trees(draw):
    n = draw(st.integers(1, 25))
    parents = {"t0": None}
    for i in range(1, n):
        parents[f"t{i}"] = f"t{draw(st.integers(0, i - 1))}"
    dead = draw(st.sets(st.sampled_from(sorted(parents))))
    return parents, dead


def chase(parents, n):
    out = [n]
    while parents[out[-1]] is not None:
        out.append(parents[out[-1]])
    return out


@settings(max_examples=200, deadline=None)
@given(random_trees())
def test_path_to_root_matches_parent_chase(tree):
    parents, _ = tree
    org = make_org(parents)
    assert validate_topology(org) == []
    for n in parents:
        assert path_to_root(org, n) == chase(parents, n)
        assert len(path_to_root(org, n)) - 1 == org.nodes[n].layer


@settings(max_examples=200, deadline=None)
@given(random_trees())
def test_reachable_subtree_matches_alive_ancestry(tree):
    parents, dead = tree
    org = make_org(parents, dead=dead)
    for start in parents:
        # oracle: n is reachable iff every node on the path from n up to start is alive
        expected = set()
        for n in parents:
            p = chase(parents, n)
            if start in p and not any(x in dead for x in p[: p.index(start) + 1]):
                expected.add(n)
        assert set(org.reachable_subtree(start)) == expected


@settings(max_examples=100, deadline=None)
@given(random_trees())
def test_tree_distance_is_symmetric_and_via_common_ancestor(tree):
    parents, _ = tree
    org = make_org(parents)
    for a in list(parents)[:6]:
        for b in list(parents)[:6]:
            up_a, up_b = chase(parents, a), chase(parents, b)
            lca = next(x for x in up_a if x in up_b)
            assert tree_distance(org, a, b) == up_a.index(lca) + up_b.index(lca)
            assert tree_distance(org, a, b) == tree_distance(org, b, a)


def test_dead_node_hides_its_region_and_below():
    org = make_org({"r": None, "a": "r", "b": "a"}, {"a": ["x1"], "b": ["x2"], "r": ["x0"]}, dead={"a"})
    assert subtree_actors(org, "r") == {"x0"}
    assert org.reachable_subtree("a") == []
    assert sorted(org.descendants("r")) == ["a", "b"]


def test_unknown_node_raises():
    org = make_org({"r": None})
    with pytest.raises(NoSuchNode, match="no-such-node"):
        org.children("ghost")
    with pytest.raises(NoSuchNode):
        path_to_root(org, "ghost")


def test_validate_topology_reports_named_violations():
    org = make_org({"r": None, "a": "r"})
    org.nodes["a"].layer = 3
    assert validate_topology(org) == ["layer-mismatch(a)"]

    org = make_org({"r": None, "a": "r"}, {"r": ["x"]})
    org.nodes["a"].region = frozenset({"x"})
    assert "actor-shared(x)" in validate_topology(org)

    org = make_org({"r": None})
    org.actors["loner"] = Actor("loner", frozenset({"x"}), 3)
    assert validate_topology(org) == ["homeless-actor(loner)"]

    org = make_org({"r": None, "a": "r", "b": "a"})
    org.nodes["a"].parent = "b"
    org.nodes["a"].layer = 3
    org.rebuild_index()
    assert any(p.startswith("cycle(") for p in validate_topology(org))

    org = make_org({"r": None})
    org.neighbor_links = [NeighborLink("org", "x", CooperationRule()), NeighborLink("org", "x", CooperationRule())]
    assert validate_topology(org) == ["duplicate-link(x)"]


def test_locate_neighbor_orgs_filters_and_sorts():
    org = make_org({"r": None})
    org.neighbor_links = [
        NeighborLink("org", "zeta", CooperationRule()),
        NeighborLink("org", "alpha", CooperationRule(frozenset({"medic"}), 1)),
        NeighborLink("org", "beta", CooperationRule(frozenset({"medic"}), 1), active_loans=1),
    ]
    assert [link.to_org for link in locate_neighbor_orgs(org, "medic")] == ["alpha", "zeta"]
    assert [link.to_org for link in locate_neighbor_orgs(org, "cook")] == ["zeta"]
