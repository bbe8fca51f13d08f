"""Post-hoc analysis of organizations and traces.

Everything here reads a finished :class:`~orgsim.engine.Trace` (and, where
node lists are needed, the organizations); nothing mutates run state.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .org import Organization, validate_topology
from .protocols import SOCIOCRACY, STRICT
from .systemic import QoEScore, QoEWeights, qoe_report


class InvalidTopology(ValueError):
    pass


@dataclass
class SpofReport:
    criticality: dict  # node -> fraction of non-root nodes cut off from the root

    def as_dict(self) -> dict:
        return {"criticality": {k: self.criticality[k] for k in sorted(self.criticality)}}


@dataclass
class MetricsReport:
    fired: int
    succeeded: int
    failure_count: int
    success_rate: float
    mean_latency: Optional[float]
    mismatch_total: int
    conflict_count: int
    congestion: dict
    max_concurrent_bubbles: int
    root_traceability: float
    layer_span_histogram: dict
    org_span_histogram: dict
    qoe: QoEScore
    failure_reasons: dict = field(default_factory=dict)
    dropped_messages: int = 0

    def as_dict(self) -> dict:
        return {
            "fired": self.fired,
            "succeeded": self.succeeded,
            "failure_count": self.failure_count,
            "success_rate": self.success_rate,
            "mean_latency": self.mean_latency,
            "mismatch_total": self.mismatch_total,
            "conflict_count": self.conflict_count,
            "congestion": {k: self.congestion[k] for k in sorted(self.congestion)},
            "max_concurrent_bubbles": self.max_concurrent_bubbles,
            "root_traceability": self.root_traceability,
            "layer_span_histogram": {str(k): v for k, v in sorted(self.layer_span_histogram.items())},
            "org_span_histogram": {str(k): v for k, v in sorted(self.org_span_histogram.items())},
            "failure_reasons": {k: self.failure_reasons[k] for k in sorted(self.failure_reasons)},
            "dropped_messages": self.dropped_messages,
            "qoe": self.qoe.as_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2) + "\n"


def _orgs(orgs) -> list:
    if orgs is None:
        return []
    if isinstance(orgs, Organization):
        return [orgs]
    if isinstance(orgs, dict):
        return list(orgs.values())
    return list(orgs)


def spof_analysis(org: Organization) -> SpofReport:
    problems = validate_topology(org)
    if problems:
        raise InvalidTopology(", ".join(problems))
    others = len(org.nodes) - 1
    crit = {}
    for nid in org.nodes:
        crit[nid] = len(org.descendants(nid)) / others if others else 0.0
    return SpofReport(crit)


def congestion_profile(trace, orgs=None) -> dict:
    """Messages touching each node, counting both endpoints and every relay."""
    counts: Counter = Counter()
    for org in _orgs(orgs):
        for nid in org.nodes:
            counts[nid] += 0
    for ev in trace.of_kind("MessageSent"):
        for nid in ev.payload["path"]:
            counts[nid] += 1
    return dict(counts)


@dataclass
class Bubble:
    id: str
    source: str
    opened_at: int
    closed_at: int


def bubble_intervals(trace) -> list:
    """Control bubbles as half-open tick intervals ``[opened_at, closed_at)``."""
    horizon = trace.horizon
    out = []
    if trace.mode in (STRICT, SOCIOCRACY):
        out.append(Bubble("root", "root-persona", 0, horizon))
    elections: dict = {}
    for ev in trace.of_kind("ElectionHeld"):
        elections.setdefault(ev.payload["circle"], []).append(ev)
    for circle, evs in elections.items():
        for i, ev in enumerate(evs):
            close = min(ev.payload["tenure_until"], horizon)
            if i + 1 < len(evs):
                close = min(close, evs[i + 1].tick)
            out.append(Bubble(ev.payload["bubble"], f"representative({ev.payload['representative']})", ev.tick, close))
    dissolved = {ev.payload["son"]: ev.tick for ev in trace.of_kind("SonDissolved")}
    for ev in trace.of_kind("SonFormed"):
        if ev.payload.get("bubble"):
            son = ev.payload["son"]
            out.append(Bubble(ev.payload["bubble"], f"son({son})", ev.tick, dissolved.get(son, horizon)))
    out.sort(key=lambda b: (b.opened_at, b.id))
    return out


def controllability_profile(trace) -> tuple:
    """Return ``(max_concurrent_bubbles, per-tick bubble counts, root_traceability)``."""
    horizon = trace.horizon
    timeline = np.zeros(max(horizon, 0), dtype=np.int64)
    for b in bubble_intervals(trace):
        lo, hi = max(b.opened_at, 0), min(b.closed_at, horizon)
        if hi > lo:
            timeline[lo:hi] += 1
    assigned = trace.of_kind("RoleAssigned")
    traceable = sum(1 for ev in assigned if ev.payload["via_root"])
    ratio = traceable / len(assigned) if assigned else 0.0
    peak = int(timeline.max()) if timeline.size else 0
    return peak, timeline.tolist(), ratio


def response_metrics(trace) -> dict:
    fired = {ev.payload["condition"]: ev.tick for ev in trace.of_kind("ConditionFired")}
    formed = {ev.payload["condition"]: ev.tick for ev in trace.of_kind("SonFormed")}
    succeeded = [ev.payload["condition"] for ev in trace.of_kind("SonDissolved")]
    failed = trace.of_kind("ProtocolFailed")
    latencies = [formed[c] - fired[c] for c in succeeded]
    reasons = Counter(ev.payload["reason"] for ev in failed)
    return {
        "fired": len(fired),
        "succeeded": len(succeeded),
        "failure_count": len(failed),
        "success_rate": len(succeeded) / len(fired) if fired else 0.0,
        "mean_latency": float(np.mean(latencies)) if latencies else None,
        "mismatch_total": sum(ev.payload["mismatch"] for ev in trace.of_kind("RoleAssigned")),
        "conflict_count": len(trace.of_kind("ConflictRecorded")),
        "layer_span_histogram": dict(Counter(ev.payload["layer_span"] for ev in trace.of_kind("SonFormed"))),
        "org_span_histogram": dict(Counter(ev.payload["org_span"] for ev in trace.of_kind("SonFormed"))),
        "failure_reasons": dict(reasons),
        "dropped_messages": sum(ev.payload.get("dropped", 0) for ev in failed),
    }


def build_report(orgs, trace, weights: QoEWeights = QoEWeights(), static_factors: Iterable = ()) -> MetricsReport:
    resp = response_metrics(trace)
    peak, _, traceability = controllability_profile(trace)
    qoe = qoe_report(
        list(static_factors),
        resp["mismatch_total"],
        resp["conflict_count"],
        resp["failure_count"],
        resp["succeeded"],
        weights,
    )
    return MetricsReport(
        fired=resp["fired"],
        succeeded=resp["succeeded"],
        failure_count=resp["failure_count"],
        success_rate=resp["success_rate"],
        mean_latency=resp["mean_latency"],
        mismatch_total=resp["mismatch_total"],
        conflict_count=resp["conflict_count"],
        congestion=congestion_profile(trace, orgs),
        max_concurrent_bubbles=peak,
        root_traceability=traceability,
        layer_span_histogram=resp["layer_span_histogram"],
        org_span_histogram=resp["org_span_histogram"],
        qoe=qoe,
        failure_reasons=resp["failure_reasons"],
        dropped_messages=resp["dropped_messages"],
    )


def root_congestion(report: MetricsReport, orgs) -> int:
    """Busiest organization root (roots are where strict hierarchies congest)."""
    return max((report.congestion.get(o.root, 0) for o in _orgs(orgs)), default=0)


# -- CSV emitters -----------------------------------------------------------


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def congestion_csv(congestion: dict, orgs=None) -> str:
    owner = {nid: o.id for o in _orgs(orgs) for nid in o.nodes}
    rows = [(owner.get(n, ""), n, congestion[n]) for n in sorted(congestion, key=lambda n: (owner.get(n, ""), n))]
    return _csv(rows, ["org", "node", "messages"])


def bubbles_csv(timeline: list) -> str:
    return _csv(list(enumerate(timeline)), ["tick", "active_bubbles"])


def spof_csv(reports: dict) -> str:
    rows = []
    for oid in sorted(reports):
        crit = reports[oid].criticality
        for nid in sorted(crit):
            rows.append((oid, nid, _fmt(crit[nid])))
    return _csv(rows, ["org", "node", "criticality"])


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)
