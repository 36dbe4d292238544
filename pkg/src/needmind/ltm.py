"""Unconscious processors: the knowledge base and the sensors.

The knowledge base maps a need label to the method that serves it and
remembers where things were last seen. It saves to a line-oriented text
form::

    hungry -> eat [pre: possess:food] [subgoal: food]
    fact prey 100.0 100.0 3
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, TextIO

from needmind.errors import KnowledgeFormatError

if TYPE_CHECKING:
    from needmind.world import Agent, WorldState


@dataclass(frozen=True)
class Rule:
    need_label: str
    method_label: str
    preconditions: tuple[str, ...] = ()
    subgoal_on_failure: str | None = None

    def __str__(self) -> str:
        text = f"{self.need_label} -> {self.method_label}"
        if self.preconditions:
            text += f" [pre: {','.join(self.preconditions)}]"
        if self.subgoal_on_failure:
            text += f" [subgoal: {self.subgoal_on_failure}]"
        return text


@dataclass(frozen=True)
class Fact:
    label: str
    position: tuple[float, float]
    slot: int


@dataclass
class KnowledgeBase:
    rules: dict[str, Rule] = field(default_factory=dict)
    facts: dict[str, Fact] = field(default_factory=dict)

    def add_rule(self, rule: Rule) -> None:
        if rule.need_label in self.rules:
            raise ValueError(f"a rule for {rule.need_label!r} already exists")
        self.rules[rule.need_label] = rule

    def query(self, need_label: str) -> Rule | None:
        return self.rules.get(need_label)

    def update(self, fact: Fact) -> None:
        old = self.facts.get(fact.label)
        if old is None or fact.slot >= old.slot:
            self.facts[fact.label] = fact

    def forget(self, label: str) -> Fact | None:
        return self.facts.pop(label, None)

    def receive(self, payload) -> None:
        """Down-Tree delivery: remember every object the workspace attended to."""
        for view in payload.slots:
            # only what was attended to this slot; stale slots would resurrect forgotten facts
            if view.kind == "object" and view.position is not None and view.seen_at == payload.slot:
                self.update(Fact(view.label, view.position, view.seen_at))

    def dumps(self) -> str:
        lines = [str(rule) for rule in self.rules.values()]
        for fact in self.facts.values():
            x, y = fact.position
            lines.append(f"fact {fact.label} {x!r} {y!r} {fact.slot}")
        return "".join(line + "\n" for line in lines)

    def save(self, sink: TextIO | str | Path) -> None:
        if isinstance(sink, (str, Path)):
            Path(sink).write_text(self.dumps())
        else:
            sink.write(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "KnowledgeBase":
        kb = cls()
        for lineno, raw in enumerate(io.StringIO(text), start=1):
            if not raw.endswith("\n"):
                raise KnowledgeFormatError("truncated line (no terminating newline)", lineno)
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("fact "):
                kb.update(_parse_fact(line, lineno))
            else:
                rule = _parse_rule(line, lineno)
                if rule.need_label in kb.rules:
                    raise KnowledgeFormatError(f"duplicate rule for {rule.need_label!r}", lineno)
                kb.rules[rule.need_label] = rule
        return kb

    @classmethod
    def load(cls, source: TextIO | str | Path) -> "KnowledgeBase":
        if isinstance(source, (str, Path)):
            return cls.loads(Path(source).read_text())
        return cls.loads(source.read())


_RULE = re.compile(
    r"^(?P<need>[\w@.]+)\s*->\s*(?P<method>\w+)"
    r"(?:\s*\[pre:\s*(?P<pre>[^\]]*)\])?"
    r"(?:\s*\[subgoal:\s*(?P<sub>[\w@.]+)\])?\s*$"
)


def _parse_rule(line: str, lineno: int) -> Rule:
    m = _RULE.match(line)
    if m is None:
        raise KnowledgeFormatError(f"cannot parse rule {line!r}", lineno)
    pre = tuple(p.strip() for p in (m["pre"] or "").split(",") if p.strip())
    return Rule(m["need"], m["method"], pre, m["sub"])


def _parse_fact(line: str, lineno: int) -> Fact:
    parts = line.split()
    if len(parts) != 5:
        raise KnowledgeFormatError(f"fact needs 'fact label x y slot', got {line!r}", lineno)
    try:
        return Fact(parts[1], (float(parts[2]), float(parts[3])), int(parts[4]))
    except ValueError as exc:
        raise KnowledgeFormatError(str(exc), lineno) from None


def default_rulebase() -> KnowledgeBase:
    """Rules closing over the needs the predator/prey scenarios exercise."""
    kb = KnowledgeBase()
    for rule in (
        Rule("hungry", "eat", ("possess:food",), "food"),
        Rule("food", "hunt", ("located:prey",), "prey"),
        Rule("prey", "search"),
        Rule("thirsty", "drink", ("possess:water",), "water"),
        Rule("water", "search"),
        Rule("sleepy", "sleep", ("calm",)),
        Rule("personal_safety", "flee"),
        Rule("friendship", "remind", ("sees:predator",)),
    ):
        kb.add_rule(rule)
    return kb


def walkthrough_rulebase() -> KnowledgeBase:
    """The two rules of the hungry walkthrough: eat needs food, food is searched for."""
    kb = KnowledgeBase()
    kb.add_rule(Rule("hungry", "eat", ("possess:food",), "food"))
    kb.add_rule(Rule("food", "search"))
    return kb


# -- sensors --------------------------------------------------------------------


@dataclass(frozen=True)
class Percept:
    label: str
    kind: str  # "visual" | "auditory"
    position: tuple[float, float]
    source: int
    slot: int
    distance: float = 0.0
    about: int | None = None  # entity an auditory report refers to
    scale: float | None = None  # reporter's view radius, for auditory reports

    def __str__(self) -> str:
        x, y = self.position
        return f"{self.label}@({x:g},{y:g})"


def sense(world: "WorldState", observer: "Agent") -> list[Percept]:
    """Visual percepts within the view radius, then heard messages, by entity id."""
    from needmind.world import distance

    out = []
    for entity in sorted(world.entities(), key=lambda e: e.id):
        if entity.id == observer.id:
            continue
        d = distance(observer.position, entity.position)
        if d <= observer.view_radius:
            out.append(Percept(entity.label, "visual", entity.position, entity.id, world.slot, d))
    heard = []
    for message in world.messages_for(observer.id):
        sender = world.entity(message.sender)
        if distance(observer.position, sender.position) <= observer.auditory_radius:
            d = distance(observer.position, message.position)
            heard.append(
                Percept(
                    message.label, "auditory", message.position, sender.id, world.slot, d, message.about, message.scale
                )
            )
    return out + sorted(heard, key=lambda p: (p.source, p.label))


def located(kb: KnowledgeBase, percepts: Iterable[Percept], label: str) -> bool:
    return label in kb.facts or any(p.label == label for p in percepts)
