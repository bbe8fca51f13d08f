import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from builders import doc, spec_of
from orgsim.org import Actor
from orgsim.protocols import (
    FSO,
    SOCIOCRACY,
    STRICT,
    Condition,
    ProtocolFailure,
    RoleException,
    RoleRequest,
    TreatmentProtocol,
    assign_locally,
    build_circles,
    check_confinement,
    form_son,
    hold_meeting,
    make_rules,
    resolve_contention,
    select_protocol,
)
from orgsim.semantics import MatchResult, RoleSpec, UnmatchedCandidate, rank_candidates

PLUMB = RoleSpec("fixer", frozenset({"plumbing"}), 3)


def org():
    """R -> A, B;  A -> A1;  B -> B1 -> B2."""
    nodes = [
        {"id": "R", "parent": None, "layer": 0, "region": []},
        {"id": "A", "parent": "R", "layer": 1, "region": ["a-clerk"]},
        {"id": "B", "parent": "R", "layer": 1, "region": []},
        {"id": "A1", "parent": "A", "layer": 2, "region": []},
        {"id": "B1", "parent": "B", "layer": 2, "region": ["b1-plumber"]},
        {"id": "B2", "parent": "B1", "layer": 3, "region": ["b2-plumber"]},
    ]
    actors = [
        {"id": "a-clerk", "capabilities": ["report"], "systemic_class": 7},
        {"id": "b1-plumber", "capabilities": ["plumbing"], "systemic_class": 5},
        {"id": "b2-plumber", "capabilities": ["plumbing"], "systemic_class": 3},
    ]
    return spec_of(doc(nodes, actors, [])).organizations[0]


AT_ROOT = RoleException("c0", "fixer", "R", frozenset({"A", "A1"}), 1, 1, ("A", "R"))


def test_scopes_differ_by_mode():
    o = org()
    circles = build_circles(o)
    assert make_rules(STRICT).scope(o, AT_ROOT, circles, 1) == (["B"], STRICT)
    # no meeting held yet: the sociocracy sees no further than the strict hierarchy
    assert make_rules(SOCIOCRACY).scope(o, AT_ROOT, circles, 1) == (["B"], SOCIOCRACY)
    circles["B"], elected = hold_meeting(circles["B"], o, 0, 5, 5)
    assert elected == "B1"
    assert make_rules(SOCIOCRACY).scope(o, AT_ROOT, circles, 1) == (["B", "B1"], SOCIOCRACY)
    # tenure over: back to strict reach
    assert make_rules(SOCIOCRACY).scope(o, AT_ROOT, circles, 5) == (["B"], SOCIOCRACY)
    nodes, label = make_rules(FSO).scope(o, AT_ROOT, circles, 1)
    assert (sorted(nodes), label) == (["B", "B1", "B2", "R"], FSO)


def test_confined_role_falls_back_to_strict_scope():
    o = org()
    rules = make_rules(FSO, confined_roles=["fixer"])
    assert rules.scope(o, AT_ROOT, {}, 0) == (["B"], STRICT)
    assert not rules.may_forward("fixer") and rules.may_forward("other")
    assert check_confinement(["fixer"], MatchResult("x", "other", 0, 0))
    assert not check_confinement(["fixer"], MatchResult("x", "fixer", 0, 0))


def test_dead_child_is_skipped_and_cuts_subtree():
    o = org()
    o.nodes["B1"].alive = False
    nodes, _ = make_rules(FSO).scope(o, AT_ROOT, {}, 0)
    assert sorted(nodes) == ["B", "R"]


def test_meeting_elects_widest_capability_region():
    o = org()
    o.nodes["A1"].region = frozenset()
    circles = build_circles(o)
    circle, winner = hold_meeting(circles["R"], o, 0, 5, 3)
    # B's subtree advertises plumbing; A's advertises report: tie on size, lowest id wins
    assert winner == "A"
    assert circle.representative == ("A", 3)
    with pytest.raises(ValueError):
        hold_meeting(circles["R"], o, 2, 5, 3)


def test_assign_locally_reports_unfilled():
    o = org()
    proto = TreatmentProtocol("leak", (PLUMB,), 2)
    cond = Condition("c0", "leak", "B1", 0, 5)
    picked, unfilled = assign_locally(o, cond, proto)
    assert [m.actor for m in picked] == ["b1-plumber"]
    assert unfilled == []
    assert o.actors["b1-plumber"].committed_to == "son-c0"
    picked, unfilled = assign_locally(o, Condition("c1", "leak", "B1", 0, 5), proto)
    assert picked == [] and unfilled == [PLUMB]


def test_select_protocol_unknown_kind():
    with pytest.raises(ProtocolFailure) as err:
        select_protocol([], Condition("c0", "meteor", "R", 0, 3))
    assert err.value.reason == "unknown-kind"


def test_form_son_checks_deadline_and_roles():
    o = org()
    registry = {o.id: o}
    proto = TreatmentProtocol("leak", (PLUMB,), 2)
    cond = Condition("c0", "leak", "A", 0, 5)
    son = form_son(cond, [("b2-plumber", "fixer", o.id)], 2, proto, registry, o.id)
    assert (son.id, son.dissolves_at, son.layer_span, son.org_span) == ("son-c0", 4, 2, 1)
    with pytest.raises(ProtocolFailure, match="unfilled"):
        form_son(cond, [], 2, proto, registry, o.id)
    with pytest.raises(ProtocolFailure, match="deadline"):
        form_son(cond, [("b2-plumber", "fixer", o.id)], 5, proto, registry, o.id)


def test_resolve_contention_prefers_earlier_then_id():
    a = RoleRequest("c2", 1, "r", "x")
    b = RoleRequest("c1", 1, "r", "x")
    c = RoleRequest("c9", 0, "r", "x")
    winner, losers = resolve_contention([a, b, c])
    assert winner == c and set(losers) == {a, b}
    assert resolve_contention([a, b])[0] == b


@settings(max_examples=200)
@given(st.lists(st.tuples(st.integers(3, 9), st.integers(0, 6)), min_size=1, max_size=12))
def test_rank_candidates_matches_sort_oracle(rows):
    pool = [(Actor(f"a{i:02d}", frozenset({"plumbing", "x"}), cls), hops) for i, (cls, hops) in enumerate(rows)]
    ranked = rank_candidates(pool, PLUMB)
    oracle = sorted((cls - 3, hops, a.id) for (a, hops), (cls, _) in zip(pool, rows))
    assert [m.key for m in ranked] == oracle


def test_rank_rejects_ineligible_or_busy():
    with pytest.raises(UnmatchedCandidate):
        rank_candidates([(Actor("a", frozenset({"x"}), 9), 0)], PLUMB)
    busy = Actor("b", frozenset({"plumbing"}), 9, committed_to="son-z")
    with pytest.raises(UnmatchedCandidate):
        rank_candidates([(busy, 0)], PLUMB)


def test_forwarding_ranks_across_all_links():
    from orgsim.org import CooperationRule, NeighborLink
    from orgsim.protocols import forward_to_neighbor

    def lender(oid, cls):
        nodes = [{"id": f"{oid}-root", "parent": None, "layer": 0, "region": [f"{oid}-plumber"]}]
        return spec_of(doc(nodes, [{"id": f"{oid}-plumber", "capabilities": ["plumbing"], "systemic_class": cls}],
                           [])).organizations[0]

    home = org()
    first, second = lender("alpha", 9), lender("beta", 3)  # beta is a perfect fit
    first.id, second.id = "alpha", "beta"
    registry = {home.id: home, "alpha": first, "beta": second}
    links = [NeighborLink(home.id, "alpha", CooperationRule()), NeighborLink(home.id, "beta", CooperationRule())]
    exc = RoleException("c0", "fixer", "R", frozenset({"R", "A", "B"}), 1, 2, ("A", "R"))
    picked, via = forward_to_neighbor(home, exc, PLUMB, links, registry, "A", son_id="son-c0")
    assert [m.actor for m in picked] == ["beta-plumber", "alpha-plumber"]
    assert [link.to_org for link in via] == ["beta", "alpha"]
    assert [link.active_loans for link in links] == [1, 1]
    # budget of one loan per link: a second request gets nothing
    again, _ = forward_to_neighbor(home, exc, PLUMB, links, registry, "A")
    assert again == []
