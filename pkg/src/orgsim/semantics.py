"""Service description and matching between actors and roles.

Capability terms are compared as exact strings; a role is playable by an
actor holding a superset of its terms at or above its systemic class.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .org import Actor
from .systemic import mismatch


class UnmatchedCandidate(ValueError):
    pass


@dataclass(frozen=True)
class RoleSpec:
    name: str
    required_capabilities: frozenset
    min_class: int
    count: int = 1

    def __post_init__(self):
        if self.count < 1:
            raise ValueError(f"role {self.name}: count must be >= 1")
        if not self.required_capabilities:
            raise ValueError(f"role {self.name}: required_capabilities is empty")
        if not 1 <= self.min_class <= 9:
            raise ValueError(f"role {self.name}: min_class outside 1..9")


@dataclass(frozen=True)
class MatchResult:
    actor: str
    role: str
    mismatch: int
    hop_distance: int

    @property
    def key(self) -> tuple:
        return (self.mismatch, self.hop_distance, self.actor)


def eligible(actor: Actor, role: RoleSpec) -> bool:
    """Capability and class fit, ignoring availability."""
    return role.required_capabilities <= actor.capabilities and actor.systemic_class >= role.min_class


def matches(actor: Actor, role: RoleSpec) -> bool:
    return actor.free and eligible(actor, role)


def rank_candidates(candidates: Iterable[tuple], role: RoleSpec) -> list:
    """Rank ``(actor, hop_distance)`` pairs by (mismatch, hops, actor id)."""
    out = []
    for actor, hops in candidates:
        if not matches(actor, role):
            raise UnmatchedCandidate(f"unmatched-candidate({actor.id}, {role.name})")
        out.append(MatchResult(actor.id, role.name, mismatch(actor.systemic_class, role.min_class), hops))
    out.sort(key=lambda m: m.key)
    return out
