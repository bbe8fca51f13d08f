"""Discrete-event simulation of organizational control protocols.

Strict hierarchies, sociocracies and fractal social organizations are run on
the same scenarios and compared on quality of emergence, congestion,
controllability and failure resilience.
"""

from .engine import EMPTY_TRACE_HASH, Event, RunConfig, Simulation, Trace, run, trace_hash
from .metrics import (
    MetricsReport,
    SpofReport,
    build_report,
    congestion_profile,
    controllability_profile,
    response_metrics,
    spof_analysis,
)
from .org import (
    Actor,
    CooperationRule,
    NeighborLink,
    OrgNode,
    Organization,
    locate_neighbor_orgs,
    path_to_root,
    subtree_actors,
    validate_topology,
)
from .protocols import (
    FSO,
    MODES,
    SOCIOCRACY,
    STRICT,
    Condition,
    ProtocolFailure,
    RoleException,
    TreatmentProtocol,
)
from .scenario import (
    ScenarioError,
    ScenarioSpec,
    generate_conditions,
    load_scenario,
    parse_scenario,
    serialize_scenario,
)
from .semantics import MatchResult, RoleSpec, matches, rank_candidates
from .systemic import ForceFactor, QoEScore, QoEWeights, SystemicClass, mismatch, qoe_report, qoe_sum, select_for_existence

__version__ = "0.1.0"
