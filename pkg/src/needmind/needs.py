"""Hierarchy of needs, satisfaction dynamics and need weights.

Every need carries a satisfaction in ``[0, S_MAX]``. Its competitive
weight combines its own satisfaction, the satisfactions of the lower
needs it predicts (its *sons*) and the satisfactions of the whole level
below it::

    w = alpha * s_own + beta * sum(s_sons) + gamma * sum(s_lower) + delta[level]

``alpha`` and ``beta`` are negative, ``gamma`` is positive and ``delta``
shifts each level so that weights stay nonnegative.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping

import numpy as np

from needmind.errors import ConfigurationError

S_MAX = 10.0
THRESHOLD = 5.0


class Need(str, Enum):
    SLEEP = "sleep"
    ENERGY = "energy"
    WATER = "water"
    BREED = "breed"
    PERSONAL_SAFETY = "personal_safety"
    PROPERTY_SAFETY = "property_safety"
    FAMILY_AFFECTION = "family_affection"
    FRIENDSHIP = "friendship"
    LOVE = "love"
    RESPECT = "respect"

    @property
    def level(self) -> int:
        return _LEVEL[self]

    @property
    def label(self) -> str:
        """Label the need carries once it is packed into a short-term slot."""
        return _LABEL.get(self, self.value)

    @classmethod
    def from_label(cls, label: str) -> "Need":
        for need in cls:
            if need.label == label or need.value == label:
                return need
        raise KeyError(label)


_LEVEL = {
    Need.SLEEP: 1,
    Need.ENERGY: 1,
    Need.WATER: 1,
    Need.BREED: 1,
    Need.PERSONAL_SAFETY: 2,
    Need.PROPERTY_SAFETY: 2,
    Need.FAMILY_AFFECTION: 3,
    Need.FRIENDSHIP: 3,
    Need.LOVE: 3,
    Need.RESPECT: 4,
}
_LABEL = {Need.SLEEP: "sleepy", Need.ENERGY: "hungry", Need.WATER: "thirsty"}

# Canonical order; also the Up-Tree leaf order and the tie-break order.
NEEDS: tuple[Need, ...] = tuple(Need)
LEVELS: tuple[int, ...] = (1, 2, 3, 4)
INDEX = {need: i for i, need in enumerate(NEEDS)}


def needs_at(level: int) -> tuple[Need, ...]:
    return tuple(n for n in NEEDS if n.level == level)


def _as_need(need) -> Need:
    try:
        return Need(need)
    except ValueError:
        raise ConfigurationError(f"unknown need {need!r}") from None


@dataclass(frozen=True)
class NeedHierarchy:
    """Prediction edges from each need to the lower-level needs it serves."""

    sons: Mapping[Need, frozenset[Need]]

    def __post_init__(self):
        full = {n: frozenset() for n in NEEDS}
        for need, kids in self.sons.items():
            full[_as_need(need)] = frozenset(_as_need(k) for k in kids)
        for need, kids in full.items():
            for kid in kids:
                if kid.level != need.level - 1:
                    raise ConfigurationError(
                        f"son {kid.value} of {need.value} is not exactly one level lower"
                    )
        object.__setattr__(self, "sons", full)

    @property
    def levels(self) -> dict[int, tuple[Need, ...]]:
        return {lvl: needs_at(lvl) for lvl in LEVELS}

    def lower(self, need: Need) -> tuple[Need, ...]:
        return needs_at(need.level - 1) if need.level > 1 else ()

    @classmethod
    def default(cls) -> "NeedHierarchy":
        # Personal safety predicts the three bodily needs; every other higher
        # need predicts the whole level below it.
        sons = {n: frozenset(needs_at(n.level - 1)) for n in NEEDS if n.level > 1}
        sons[Need.PERSONAL_SAFETY] = frozenset({Need.SLEEP, Need.ENERGY, Need.WATER})
        return cls(sons)


DEFAULT_DECAY = {Need.ENERGY: 0.10, Need.WATER: 0.03, Need.SLEEP: 0.02, Need.BREED: 0.01}
DEFAULT_RECOVERY = {Need.PERSONAL_SAFETY: 0.2, Need.FRIENDSHIP: 0.2}


@dataclass(frozen=True)
class SatisfactionState:
    sat: Mapping[Need, float]
    decay_rate: Mapping[Need, float] = field(default_factory=dict)
    recovery_rate: Mapping[Need, float] = field(default_factory=dict)
    s_max: float = S_MAX

    def __post_init__(self):
        sat = {n: 0.0 for n in NEEDS}
        for need, value in self.sat.items():
            sat[_as_need(need)] = _clamp(float(value), 0.0, self.s_max)
        rates = []
        for table in (self.decay_rate, self.recovery_rate):
            full = {n: 0.0 for n in NEEDS}
            for need, value in table.items():
                if value < 0:
                    raise ConfigurationError(f"negative rate for {need}")
                full[_as_need(need)] = float(value)
            rates.append(full)
        object.__setattr__(self, "sat", sat)
        object.__setattr__(self, "decay_rate", rates[0])
        object.__setattr__(self, "recovery_rate", rates[1])

    def __getitem__(self, need: Need) -> float:
        return self.sat[need]

    def with_sat(self, updates: Mapping[Need, float]) -> "SatisfactionState":
        return replace(self, sat={**self.sat, **updates})

    def vector(self) -> np.ndarray:
        return np.array([self.sat[n] for n in NEEDS])

    @classmethod
    def initial(
        cls,
        level1: float = 5.1,
        higher: float = S_MAX,
        decay: Mapping[Need, float] | None = None,
        recovery: Mapping[Need, float] | None = None,
        overrides: Mapping[Need, float] | None = None,
    ) -> "SatisfactionState":
        sat = {n: (level1 if n.level == 1 else higher) for n in NEEDS}
        sat.update(overrides or {})
        return cls(
            sat,
            DEFAULT_DECAY if decay is None else decay,
            DEFAULT_RECOVERY if recovery is None else recovery,
        )


def _clamp(x: float, lo: float, hi: float) -> float:
    return lo if x < lo else hi if x > hi else x


@dataclass(frozen=True)
class WeightParams:
    alpha: Mapping[Need, float]
    beta: Mapping[Need, float]
    gamma: Mapping[Need, float]
    delta: Mapping[int, float]

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            table = {_as_need(k): float(v) for k, v in getattr(self, name).items()}
            missing = [n.value for n in NEEDS if n not in table]
            if missing:
                raise ConfigurationError(f"{name} missing for {', '.join(missing)}")
            object.__setattr__(self, name, table)
        delta = {int(k): float(v) for k, v in self.delta.items()}
        if sorted(delta) != list(LEVELS):
            raise ConfigurationError("delta must be given for levels 1-4")
        object.__setattr__(self, "delta", delta)
        for need in NEEDS:
            if not self.alpha[need] < 0:
                raise ConfigurationError(f"alpha for {need.value} must be negative")
            if not self.beta[need] < 0:
                raise ConfigurationError(f"beta for {need.value} must be negative")
            if not self.gamma[need] > 0:
                raise ConfigurationError(f"gamma for {need.value} must be positive")
        if any(d < 0 for d in delta.values()):
            raise ConfigurationError("delta must be nonnegative")

    @classmethod
    def per_level(
        cls,
        coefficients: Mapping[int, tuple[float, float, float]],
        delta: Mapping[int, float],
    ) -> "WeightParams":
        """Build params where every need of a level shares ``(alpha, beta, gamma)``."""
        alpha, beta, gamma = {}, {}, {}
        for need in NEEDS:
            alpha[need], beta[need], gamma[need] = coefficients[need.level]
        return cls(alpha, beta, gamma, delta)

    @classmethod
    def default(cls, hierarchy: NeedHierarchy | None = None) -> "WeightParams":
        coefficients = {
            1: (-1.0, -0.1, 0.1),
            2: (-1.0, -0.1, 0.05),
            3: (-1.0, -0.1, 0.05),
            4: (-1.0, -0.1, 0.05),
        }
        base = cls.per_level(coefficients, {1: 10.0, 2: 0.0, 3: 0.0, 4: 0.0})
        return base.with_min_delta(hierarchy or NeedHierarchy.default())

    def with_min_delta(
        self, hierarchy: NeedHierarchy, levels: Iterable[int] = (2, 3, 4)
    ) -> "WeightParams":
        delta = dict(self.delta)
        for level in levels:
            delta[level] = min_delta(self, hierarchy, level)
        return replace(self, delta=delta)

    def replace(self, **changes) -> "WeightParams":
        return replace(self, **changes)


def min_delta(params: WeightParams, hierarchy: NeedHierarchy, level: int, s_max: float = S_MAX) -> float:
    """Smallest level offset keeping every weight of ``level`` nonnegative.

    The undelta'd weight is linear in each satisfaction, so its minimum over
    the box sits on a corner and separates per coordinate.
    """
    worst = 0.0
    for need in needs_at(level):
        low = min(0.0, params.alpha[need] * s_max)
        for j in hierarchy.lower(need):
            coef = params.gamma[need] + (params.beta[need] if j in hierarchy.sons[need] else 0.0)
            low += min(0.0, coef * s_max)
        worst = min(worst, low)
    return -worst


def weight(
    params: WeightParams, hierarchy: NeedHierarchy, state: SatisfactionState, need: Need
) -> float:
    if need not in INDEX:
        raise ConfigurationError(f"unknown need {need!r}")
    sons = sum(state.sat[j] for j in hierarchy.sons[need])
    lower = sum(state.sat[j] for j in hierarchy.lower(need))
    return (
        params.alpha[need] * state.sat[need]
        + params.beta[need] * sons
        + params.gamma[need] * lower
        + params.delta[need.level]
    )


def weight_matrix(params: WeightParams, hierarchy: NeedHierarchy) -> tuple[np.ndarray, np.ndarray]:
    """Linear form ``w = A @ s + b`` of the weight over all needs."""
    k = len(NEEDS)
    A = np.zeros((k, k))
    b = np.zeros(k)
    for i, need in enumerate(NEEDS):
        A[i, i] += params.alpha[need]
        for j in hierarchy.sons[need]:
            A[i, INDEX[j]] += params.beta[need]
        for j in hierarchy.lower(need):
            A[i, INDEX[j]] += params.gamma[need]
        b[i] = params.delta[need.level]
    return A, b


@dataclass(frozen=True)
class NeedWeight:
    w: Mapping[Need, float]
    computed_at: int = 0

    def __getitem__(self, need: Need) -> float:
        return self.w[need]

    def argmax(self, among: Iterable[Need] | None = None) -> Need:
        """Strongest need; ties go to the earlier need in canonical order."""
        pool = list(among) if among is not None else list(NEEDS)
        return max(pool, key=lambda n: (self.w[n], -INDEX[n]))


def all_weights(
    params: WeightParams, hierarchy: NeedHierarchy, state: SatisfactionState, slot: int = 0
) -> NeedWeight:
    A, b = weight_matrix(params, hierarchy)
    w = A @ state.vector() + b
    return NeedWeight({n: float(w[i]) for i, n in enumerate(NEEDS)}, slot)


def decay_tick(state: SatisfactionState) -> SatisfactionState:
    """Drain every bodily need by its decay rate; higher levels are untouched."""
    updates = {
        n: max(0.0, state.sat[n] - state.decay_rate[n]) for n in NEEDS if n.level == 1
    }
    return state.with_sat(updates)


_RESTORES = {"ate": Need.ENERGY, "drank": Need.WATER, "slept": Need.SLEEP, "bred": Need.BREED}


@dataclass(frozen=True)
class NeedEvent:
    kind: str
    need: Need | None = None
    distance: float | None = None
    radius: float | None = None

    @classmethod
    def predator_proximity(cls, d: float, radius: float) -> "NeedEvent":
        return cls("predator_proximity", distance=d, radius=radius)

    @classmethod
    def friend_threat(cls, d_fp: float, radius: float) -> "NeedEvent":
        return cls("friend_threat", distance=d_fp, radius=radius)

    @classmethod
    def recover(cls, need: Need) -> "NeedEvent":
        return cls("recover", need=need)


def apply_event(state: SatisfactionState, event: NeedEvent) -> SatisfactionState:
    if event.kind in _RESTORES:
        return state.with_sat({_RESTORES[event.kind]: state.s_max})
    if event.kind in ("predator_proximity", "friend_threat"):
        if event.distance is None or event.radius is None:
            raise ValueError(f"{event.kind} needs a distance and a radius")
        value = safety_satisfaction(event.distance, event.radius, state.s_max)
        target = Need.PERSONAL_SAFETY if event.kind == "predator_proximity" else Need.FRIENDSHIP
        return state.with_sat({target: value})
    if event.kind == "recover":
        if event.need is None:
            raise ValueError("recover needs a need")
        need = _as_need(event.need)
        return state.with_sat({need: state.sat[need] + state.recovery_rate[need]})
    raise ValueError(f"unknown need event {event.kind!r}")


def safety_satisfaction(d: float, radius: float, s_max: float = S_MAX) -> float:
    """Linear distance map; the edge of view (``d == radius``) lands on the threshold."""
    if radius <= 0:
        raise ConfigurationError("view radius must be positive")
    if d < 0:
        raise ValueError("distance must be nonnegative")
    return _clamp(s_max * d / (2.0 * radius), 0.0, s_max)


# Friend-to-predator distance uses the same map as one's own safety.
friendship_satisfaction = safety_satisfaction


def is_dead(state: SatisfactionState) -> bool:
    return any(state.sat[n] == 0.0 for n in NEEDS if n.level == 1)


def arisen(state: SatisfactionState, threshold: float = THRESHOLD) -> list[Need]:
    return [n for n in NEEDS if state.sat[n] < threshold]


def corner_minimum(params: WeightParams, hierarchy: NeedHierarchy, s_max: float = S_MAX) -> dict[Need, float]:
    """Minimum weight of every need over all corners of the satisfaction box.

    Brute-force enumeration over the needs each weight depends on, kept
    separate from :func:`min_delta` so each can check the other.
    """
    out = {}
    for need in NEEDS:
        deps = sorted({need, *hierarchy.sons[need], *hierarchy.lower(need)}, key=INDEX.get)
        best = float("inf")
        for corner in itertools.product((0.0, s_max), repeat=len(deps)):
            state = SatisfactionState(dict(zip(deps, corner)))
            best = min(best, weight(params, hierarchy, state, need))
        out[need] = best
    return out
