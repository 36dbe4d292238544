"""The 2D environment: agents, predators, prey and loose items."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

from needmind.links import Pipe, UpTree
from needmind.ltm import KnowledgeBase, Percept
from needmind.needs import SatisfactionState
from needmind.stm import SlotTree

Point = tuple[float, float]


def distance(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def move_toward(pos: Point, target: Point, step: float) -> Point:
    """Advance by ``min(step, remaining)``; lands exactly on ``target`` when in reach."""
    d = distance(pos, target)
    if d <= step:
        return (float(target[0]), float(target[1]))
    f = step / d
    return (pos[0] + (target[0] - pos[0]) * f, pos[1] + (target[1] - pos[1]) * f)


def move_away(pos: Point, threat: Point, step: float) -> Point:
    d = distance(pos, threat)
    if d == 0:
        # no defined direction; break the tie toward +x
        return (pos[0] + step, pos[1])
    f = step / d
    return (pos[0] + (pos[0] - threat[0]) * f, pos[1] + (pos[1] - threat[1]) * f)


@dataclass
class SkillRun:
    name: str
    need: str
    target: str | None
    started_at: int
    memo: dict = field(default_factory=dict)


@dataclass
class Agent:
    id: int
    name: str
    position: Point
    state: SatisfactionState
    tree: SlotTree
    uptree: UpTree
    pipe: Pipe
    kb: KnowledgeBase
    speed: float = 0.5
    view_radius: float = 23.0
    auditory_radius: float = 50.0
    friends: tuple[str, ...] = ()
    possessions: list[str] = field(default_factory=list)
    alive: bool = True
    asleep: bool = False
    running: SkillRun | None = None
    percepts: list[Percept] = field(default_factory=list)
    fleeing: bool = False

    @property
    def label(self) -> str:
        return self.name


@dataclass
class Predator:
    id: int
    name: str
    position: Point
    home: Point
    speed: float = 1.0
    view_radius: float = 23.0
    territorial: bool = True
    return_speed: float = 0.0
    chase_target: int | None = None
    label: str = "predator"

    def watches(self, point: Point) -> bool:
        """Whether ``point`` lies in the circle this predator keeps watch over."""
        center = self.home if self.territorial else self.position
        return distance(center, point) <= self.view_radius


@dataclass
class Prey:
    id: int
    name: str
    position: Point
    label: str = "prey"


@dataclass
class Item:
    id: int
    label: str
    position: Point

    @property
    def name(self) -> str:
        return self.label


@dataclass(frozen=True)
class Message:
    sender: int
    target: int
    label: str
    position: Point
    slot: int
    about: int | None = None
    # the sender's view radius: how the report's distance should be judged
    scale: float | None = None


@dataclass
class WorldState:
    agents: list[Agent] = field(default_factory=list)
    predators: list[Predator] = field(default_factory=list)
    food: list[Prey] = field(default_factory=list)
    items: list[Item] = field(default_factory=list)
    slot: int = 0
    messages: list[Message] = field(default_factory=list)
    next_id: int = 0

    def entities(self) -> Iterator:
        yield from (a for a in self.agents if a.alive)
        yield from self.predators
        yield from self.food
        yield from self.items

    def entity(self, entity_id: int):
        for e in (*self.agents, *self.predators, *self.food, *self.items):
            if e.id == entity_id:
                return e
        raise KeyError(entity_id)

    def agent(self, name: str) -> Agent:
        for a in self.agents:
            if a.name == name:
                return a
        raise KeyError(name)

    def new_id(self) -> int:
        self.next_id += 1
        return self.next_id - 1

    def send(self, message: Message) -> None:
        self.messages.append(message)

    def messages_for(self, target: int) -> list[Message]:
        """Pop and return the messages waiting for ``target``."""
        mine = [m for m in self.messages if m.target == target]
        self.messages = [m for m in self.messages if m.target != target]
        return mine

    def remove_prey(self, prey: Prey) -> None:
        self.food = [p for p in self.food if p.id != prey.id]


def predator_ai(predator: Predator, world: WorldState) -> Point:
    """Where ``predator`` moves this slot.

    Toward the nearest watched agent; with nobody to chase a territorial
    predator walks back to its lair at its return pace, any other one holds still.
    """
    targets = [a for a in world.agents if a.alive and predator.watches(a.position)]
    if not targets:
        predator.chase_target = None
        if predator.territorial and predator.return_speed > 0:
            return move_toward(predator.position, predator.home, predator.return_speed)
        return predator.position
    prey = min(targets, key=lambda a: (distance(predator.position, a.position), a.id))
    predator.chase_target = prey.id
    return move_toward(predator.position, prey.position, predator.speed)
