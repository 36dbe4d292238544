"""Landmark slots of the predator/prey experiments, read back from a trace."""

from __future__ import annotations

from dataclasses import dataclass

from needmind.engine import Trace
from needmind.needs import NEEDS, THRESHOLD, Need, NeedHierarchy, SatisfactionState, WeightParams, all_weights
from needmind.world import distance


def _first(trace: Trace, kind: str, agent: str, label: str | None = None, after: int = -1) -> int | None:
    for e in trace.events:
        if e.kind == kind and e.agent == agent and e.slot > after and (label is None or e.label == label):
            return e.slot
    return None


def states(trace: Trace, agent: str) -> list[dict[Need, float]]:
    """Per-slot end-of-slot satisfactions rebuilt from the samples."""
    out: dict[int, dict[Need, float]] = {}
    for e in trace.events:
        if e.kind == "satisfaction_sample" and e.agent == agent:
            out.setdefault(e.slot, {})[Need(e.need)] = e.value
    return [out[s] for s in sorted(out)]


def weights_at(trace: Trace, agent: str, slot: int, params: WeightParams, hierarchy: NeedHierarchy):
    state = SatisfactionState(states(trace, agent)[slot], {n: 0.0 for n in NEEDS}, {n: 0.0 for n in NEEDS})
    return all_weights(params, hierarchy, state, slot)


def safe_after(trace: Trace, agent: str, start: int | None) -> int | None:
    """First slot after ``start`` at which personal safety is back at threshold."""
    if start is None:
        return None
    for slot, value in trace.samples(agent, Need.PERSONAL_SAFETY):
        if slot > start and value >= THRESHOLD:
            return slot
    return None


def predator_distance(trace: Trace, slot: int, agent: str, predators: list[str]) -> float:
    where = trace.positions[slot]
    return min(distance(where[agent], where[p]) for p in predators)


@dataclass(frozen=True)
class SingleAgentMilestones:
    hungry_admitted: int | None
    hunt_started: int | None
    safety_threshold: int | None
    food_outweighs_safety: bool
    eat: int | None
    flee: int | None
    escape: int | None

    def order_ok(self) -> bool:
        seq = [self.hungry_admitted, self.hunt_started, self.safety_threshold, self.eat, self.flee, self.escape]
        if any(s is None for s in seq):
            return False
        return seq == sorted(seq) and self.food_outweighs_safety and self.eat < self.flee


def single_agent(trace: Trace, params: WeightParams, hierarchy: NeedHierarchy, agent: str = "alice"):
    threshold = _first(trace, "need_arise", agent, "personal_safety")
    outweighs = False
    if threshold is not None:
        w = weights_at(trace, agent, threshold, params, hierarchy)
        outweighs = w[Need.ENERGY] > w[Need.PERSONAL_SAFETY]
    eat = _first(trace, "eat_done", agent)
    flee = _first(trace, "flee_start", agent)
    return SingleAgentMilestones(
        hungry_admitted=_first(trace, "slot_admit", agent, "hungry"),
        hunt_started=_first(trace, "skill_start", agent, "hunt"),
        safety_threshold=threshold,
        food_outweighs_safety=outweighs,
        eat=eat,
        flee=flee,
        escape=safe_after(trace, agent, flee),
    )


@dataclass(frozen=True)
class DoubleAgentMilestones:
    bob_sees_predator: int | None
    alice_sees_predator: int | None
    remind: int | None
    near_both: int | None
    alice_flee: int | None
    alice_safe: int | None
    bob_flee: int | None
    bob_safe: int | None
    bob_friendship_led: bool
    alice_friendship_frozen: bool


def double_agent(
    trace: Trace,
    params: WeightParams,
    hierarchy: NeedHierarchy,
    views: dict[str, float],
    predators: list[str],
    alice: str = "alice",
    bob: str = "bob",
) -> DoubleAgentMilestones:
    def first_within(name: str, radius: float) -> int | None:
        for slot in range(len(trace.positions)):
            if predator_distance(trace, slot, name, predators) <= radius:
                return slot
        return None

    # closest joint approach: the slot minimising the predator's larger distance to the pair
    near_both = None
    if trace.positions:
        spans = [max(predator_distance(trace, s, n, predators) for n in (alice, bob)) for s in range(len(trace.positions))]
        near_both = spans.index(min(spans))

    alice_flee = _first(trace, "flee_start", alice)
    alice_safe = safe_after(trace, alice, alice_flee)
    bob_flee = _first(trace, "flee_start", bob)

    # while bob's friendship outweighs his safety he must not be fleeing
    led = True
    fleeing = {e.slot for e in trace.events if e.agent == bob and e.kind == "skill_start" and e.label == "flee"}
    for slot in fleeing:
        w = weights_at(trace, bob, slot, params, hierarchy)
        if w[Need.FRIENDSHIP] > w[Need.PERSONAL_SAFETY]:
            led = False

    # once bob is out of alice's view her friendship only recovers
    frozen = True
    fr = dict(trace.samples(alice, Need.FRIENDSHIP))
    for slot in range(1, len(trace.positions)):
        where = trace.positions[slot]
        if distance(where[alice], where[bob]) > views[alice] and fr[slot] < fr[slot - 1]:
            frozen = False

    return DoubleAgentMilestones(
        bob_sees_predator=first_within(bob, views[bob]),
        alice_sees_predator=first_within(alice, views[alice]),
        remind=_first(trace, "remind_sent", bob),
        near_both=near_both,
        alice_flee=alice_flee,
        alice_safe=alice_safe,
        bob_flee=bob_flee,
        bob_safe=safe_after(trace, bob, bob_flee),
        bob_friendship_led=led,
        alice_friendship_frozen=frozen,
    )
