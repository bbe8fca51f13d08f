"""Every auditor stays clean on randomly drawn scenarios, in every mode."""

from hypothesis import given, settings
from hypothesis import strategies as st

from orgsim import FSO, MODES, RunConfig, build_report, run
from orgsim.audit import audit_all, audit_searched_once, audit_son_members
from orgsim.scenario import random_scenario


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 100_000), st.sampled_from(MODES), st.integers(1, 4), st.integers(0, 4))
def test_audits_clean(seed, mode, n_orgs, failures):
    spec = random_scenario(seed, n_orgs=n_orgs, failures=failures, mode=mode)
    trace = run(spec)
    problems = {k: v for k, v in audit_all(trace, spec).items() if v}
    assert problems == {}


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000), st.integers(0, 2), st.integers(1, 4))
def test_confined_runs_audit_clean(seed, pick, n_orgs):
    spec = random_scenario(seed, n_orgs=n_orgs, mode=FSO)
    confined = tuple(sorted({p.roles[min(pick, len(p.roles) - 1)].name for p in spec.protocol_library}))
    trace = run(spec, RunConfig.from_scenario(spec, confined_roles=confined))
    problems = {k: v for k, v in audit_all(trace, spec, confined).items() if v}
    assert problems == {}


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000), st.sampled_from(MODES))
def test_report_counts_are_consistent(seed, mode):
    spec = random_scenario(seed, n_orgs=2, failures=1, mode=mode)
    trace = run(spec)
    report = build_report(spec.organizations, trace)
    assert report.fired == report.succeeded + report.failure_count
    assert 0.0 <= report.success_rate <= 1.0
    assert sum(report.failure_reasons.values()) == report.failure_count
    assert report.max_concurrent_bubbles >= (1 if mode != FSO else 0)
    assert audit_searched_once(trace) == [] and audit_son_members(trace, spec) == []
