"""Systemic classes, Parts-Whole mismatch and the quality-of-emergence calculus."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Sequence


class SystemicClass(IntEnum):
    """Boulding's ladder of systemic complexity."""

    FRAMEWORK = 1
    CLOCKWORK = 2
    THERMOSTAT = 3
    CELL = 4
    PLANT = 5
    ANIMAL = 6
    HUMAN = 7
    SOCIAL_ORGANIZATION = 8
    TRANSCENDENTAL = 9


class Ineligible(ValueError):
    pass


class BadWeight(ValueError):
    pass


CENTRIPETAL = "centripetal"
CENTRIFUGAL = "centrifugal"


@dataclass(frozen=True)
class ForceFactor:
    name: str
    sign: str
    magnitude: float

    def __post_init__(self):
        if self.sign not in (CENTRIPETAL, CENTRIFUGAL):
            raise ValueError(f"unknown force sign {self.sign!r}")
        if not self.magnitude >= 0:
            raise ValueError(f"force magnitude must be >= 0, got {self.magnitude}")

    @property
    def signed(self) -> float:
        return self.magnitude if self.sign == CENTRIPETAL else -self.magnitude


@dataclass(frozen=True)
class QoEWeights:
    mismatch: float = 1.0
    conflict: float = 1.0
    failure: float = 1.0
    success: float = 1.0

    def __post_init__(self):
        for name in ("mismatch", "conflict", "failure", "success"):
            w = getattr(self, name)
            if not (w >= 0 and math.isfinite(w)):
                raise BadWeight(f"bad-weight({name}={w})")


@dataclass(frozen=True)
class QoEScore:
    static_sum: float
    mismatch_penalty: float
    conflict_penalty: float
    failure_penalty: float
    success_bonus: float
    total: float
    weights: QoEWeights

    def as_dict(self) -> dict:
        return {
            "static_sum": self.static_sum,
            "mismatch_penalty": self.mismatch_penalty,
            "conflict_penalty": self.conflict_penalty,
            "failure_penalty": self.failure_penalty,
            "success_bonus": self.success_bonus,
            "total": self.total,
            "weights": {
                "mismatch": self.weights.mismatch,
                "conflict": self.weights.conflict,
                "failure": self.weights.failure,
                "success": self.weights.success,
            },
        }


def mismatch(actor_class: int, role_min_class: int) -> int:
    """Demotion distance of an actor playing a role; 0 is a perfect fit."""
    if actor_class < role_min_class:
        raise Ineligible(f"ineligible(actor class {actor_class} < role class {role_min_class})")
    return int(actor_class) - int(role_min_class)


def qoe_sum(factors: Iterable[ForceFactor]) -> float:
    """Centripetal magnitudes minus centrifugal magnitudes.

    Uses correctly rounded summation so the result does not depend on the
    order of the factors.
    """
    factors = list(factors)
    pull = math.fsum(f.magnitude for f in factors if f.sign == CENTRIPETAL)
    push = math.fsum(f.magnitude for f in factors if f.sign == CENTRIFUGAL)
    return pull - push


def qoe_report(
    static_factors: Sequence[ForceFactor],
    mismatch_penalty: float,
    conflict_penalty: float,
    failure_penalty: float,
    success_bonus: float,
    weights: QoEWeights = QoEWeights(),
) -> QoEScore:
    for name, v in (
        ("mismatch", mismatch_penalty),
        ("conflict", conflict_penalty),
        ("failure", failure_penalty),
        ("success", success_bonus),
    ):
        if v < 0:
            raise ValueError(f"{name} input must be >= 0, got {v}")
    if not isinstance(weights, QoEWeights):
        weights = QoEWeights(*weights)
    static = qoe_sum(static_factors)
    total = (
        static
        - weights.mismatch * mismatch_penalty
        - weights.conflict * conflict_penalty
        - weights.failure * failure_penalty
        + weights.success * success_bonus
    )
    return QoEScore(
        static_sum=static,
        mismatch_penalty=mismatch_penalty,
        conflict_penalty=conflict_penalty,
        failure_penalty=failure_penalty,
        success_bonus=success_bonus,
        total=total,
        weights=weights,
    )


def select_for_existence(candidates, capacity: int) -> set:
    """Keep the `capacity` candidates with the highest QoE total.

    `candidates` is a sequence of ``(identifier, QoEScore)`` pairs; a bare
    number is accepted in place of a score. Ties go to the smaller identifier.
    """
    if capacity < 1:
        raise ValueError("capacity must be >= 1")

    def total(score) -> float:
        return score.total if isinstance(score, QoEScore) else float(score)

    ranked = sorted(candidates, key=lambda c: (-total(c[1]), c[0]))
    return {ident for ident, _ in ranked[:capacity]}
