"""Skill processors: the behaviours a method label runs in the world.

A skill is checked for applicability each slot it runs, then stepped once.
Movement never exceeds the agent's speed in one slot.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from needmind.ltm import Percept
from needmind.needs import THRESHOLD, Need, NeedEvent, apply_event
from needmind.world import Agent, Item, Message, Point, SkillRun, WorldState, distance, move_away, move_toward

CAPTURE_DISTANCE = 1.0
# square-spiral legs for blind search grow by this many units per turn
SWEEP_LEG = 1.0


@dataclass
class StepResult:
    done: bool
    notes: list[tuple[str, dict]] = field(default_factory=list)


@dataclass(frozen=True)
class Skill:
    name: str
    applicable: Callable[[Agent, WorldState, SkillRun], bool]
    step: Callable[[Agent, WorldState, SkillRun], StepResult]


def _visible(agent: Agent, label: str) -> list[Percept]:
    return [p for p in agent.percepts if p.kind == "visual" and p.label == label]


def threat_position(agent: Agent) -> Point | None:
    """Nearest predator seen; else the latest heard report; else memory."""
    seen = _visible(agent, "predator")
    if seen:
        return min(seen, key=lambda p: (p.distance, p.source)).position
    heard = [p for p in agent.percepts if p.kind == "auditory" and p.label == "predator"]
    if heard:
        return min(heard, key=lambda p: (p.distance, p.source)).position
    fact = agent.kb.facts.get("predator")
    return fact.position if fact else None


def escaped(agent: Agent, world: WorldState) -> bool:
    """Out of sight both ways and no longer feeling threatened.

    No predator in view, none watching the agent, and personal safety back at
    threshold (a relayed warning keeps it low after the predator is out of sight).
    """
    if agent.state[Need.PERSONAL_SAFETY] < THRESHOLD:
        return False
    for predator in world.predators:
        if distance(agent.position, predator.position) <= agent.view_radius:
            return False
        if predator.watches(agent.position):
            return False
    return True


# -- eat / drink ---------------------------------------------------------------


def _consume(name: str, item: str, event: str, note: str) -> Skill:
    def applicable(agent, world, run):
        return item in agent.possessions

    def step(agent, world, run):
        agent.possessions.remove(item)
        agent.state = apply_event(agent.state, NeedEvent(event))
        return StepResult(True, [(note, {})])

    return Skill(name, applicable, step)


# -- hunt ----------------------------------------------------------------------


def _prey_target(agent: Agent) -> Point | None:
    seen = _visible(agent, "prey")
    if seen:
        return min(seen, key=lambda p: (p.distance, p.source)).position
    fact = agent.kb.facts.get("prey")
    return fact.position if fact else None


def _hunt_applicable(agent, world, run):
    return _prey_target(agent) is not None


def _hunt_step(agent, world, run):
    target = _prey_target(agent)
    agent.position = move_toward(agent.position, target, agent.speed)
    caught = [p for p in world.food if distance(agent.position, p.position) < CAPTURE_DISTANCE]
    if caught:
        prey = min(caught, key=lambda p: (distance(agent.position, p.position), p.id))
        world.remove_prey(prey)
        agent.possessions.append("food")
        agent.kb.forget("prey")
        agent.pipe.push(Percept("food", "visual", agent.position, agent.id, world.slot))
        return StepResult(True, [("capture", {"x": prey.position[0], "y": prey.position[1]})])
    if agent.position == target and not _visible(agent, "prey"):
        # remembered prey is not where it was
        agent.kb.forget("prey")
    return StepResult(False)


# -- search --------------------------------------------------------------------


def _sweep_waypoint(run: SkillRun, origin: Point) -> Point:
    """Next corner of a square spiral around where the search began."""
    legs = run.memo.setdefault("legs", 0)
    x, y = run.memo.setdefault("corner", origin)
    dx, dy = [(1, 0), (0, 1), (-1, 0), (0, -1)][legs % 4]
    length = SWEEP_LEG * (legs // 2 + 1)
    return (x + dx * length, y + dy * length)


def _search_step(agent, world, run):
    label = run.target
    fact = agent.kb.facts.get(label)
    if fact is not None:
        agent.position = move_toward(agent.position, fact.position, agent.speed)
        if agent.position == fact.position and not any(
            e.label == label and distance(agent.position, e.position) <= agent.view_radius
            for e in world.entities()
        ):
            agent.kb.forget(label)
    else:
        waypoint = _sweep_waypoint(run, agent.position)
        agent.position = move_toward(agent.position, waypoint, agent.speed)
        if agent.position == waypoint:
            run.memo["corner"] = waypoint
            run.memo["legs"] += 1
    found = any(
        e.label == label and e is not agent and distance(agent.position, e.position) <= agent.view_radius
        for e in world.entities()
    )
    return StepResult(found)


# -- flee ----------------------------------------------------------------------


def _flee_applicable(agent, world, run):
    return threat_position(agent) is not None and not escaped(agent, world)


def _flee_step(agent, world, run):
    threat = threat_position(agent)
    agent.position = move_away(agent.position, threat, agent.speed)
    return StepResult(escaped(agent, world))


# -- remind --------------------------------------------------------------------


def _friends_in_earshot(agent: Agent, world: WorldState) -> list[Agent]:
    out = []
    for name in agent.friends:
        friend = world.agent(name)
        if friend.alive and distance(agent.position, friend.position) <= agent.auditory_radius:
            out.append(friend)
    return out


def _remind_applicable(agent, world, run):
    return bool(_visible(agent, "predator")) and bool(_friends_in_earshot(agent, world))


def _remind_step(agent, world, run):
    predator = min(_visible(agent, "predator"), key=lambda p: (p.distance, p.source))
    notes = []
    for friend in _friends_in_earshot(agent, world):
        world.send(
            Message(agent.id, friend.id, "predator", predator.position, world.slot, predator.source, agent.view_radius)
        )
        notes.append(("remind_sent", {"to": friend.name, "x": predator.position[0], "y": predator.position[1]}))
    return StepResult(True, notes)


# -- sleep / primitives ----------------------------------------------------------


def _calm(agent, world, run):
    return not _visible(agent, "predator")


def _sleep_step(agent, world, run):
    agent.asleep = True
    agent.tree.sleep()
    return StepResult(True, [("fell_asleep", {})])


def _move_step(agent, world, run):
    goal = run.memo["goal"]
    agent.position = move_toward(agent.position, goal, agent.speed)
    return StepResult(agent.position == goal)


def _put_step(agent, world, run):
    label = run.target
    agent.possessions.remove(label)
    world.items.append(Item(world.new_id(), label, agent.position))
    return StepResult(True)


def _always(agent, world, run):
    return True


SKILLS: dict[str, Skill] = {
    "eat": _consume("eat", "food", "ate", "eat_done"),
    "drink": _consume("drink", "water", "drank", "drink_done"),
    "hunt": Skill("hunt", _hunt_applicable, _hunt_step),
    "search": Skill("search", _always, _search_step),
    "flee": Skill("flee", _flee_applicable, _flee_step),
    "remind": Skill("remind", _remind_applicable, _remind_step),
    "sleep": Skill("sleep", _calm, _sleep_step),
    "move": Skill("move", lambda a, w, r: "goal" in r.memo, _move_step),
    "observe": Skill("observe", _always, lambda a, w, r: StepResult(True)),
    "put": Skill("put", lambda a, w, r: r.target in a.possessions, _put_step),
}


def skill_step(name: str, agent: Agent, world: WorldState, run: SkillRun) -> StepResult | None:
    """Step ``name`` once; ``None`` when the skill does not apply."""
    skill = SKILLS[name]
    if not skill.applicable(agent, world, run):
        return None
    return skill.step(agent, world, run)
