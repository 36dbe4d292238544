"""The short-term workspace: a capacity-bounded tree of slots.

Slots hold one of four kinds of content. The single ontology slot is the
root while the agent is awake; needs and objects hang off the root and
methods hang off the need they serve. When the tree is full, an incoming
item replaces the weakest resident only if it is strictly stronger.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Protocol, Union

CAPACITY = 7
# unmet predicates of these forms name a resource worth a subgoal
RESOURCE_PREDICATES = ("possess:", "located:")
OBJECT_INTENSITY = 5.0
OBJECT_FADE = 0.5


@dataclass(frozen=True)
class Ontology:
    label: str = "self"


@dataclass(frozen=True)
class NeedContent:
    label: str
    weight: float = 0.0
    origin: str = "feeling"  # or "subgoal"
    serves: str | None = None  # the need a subgoal was created for


@dataclass(frozen=True)
class ObjectContent:
    label: str
    position: tuple[float, float] | None = None
    seen_at: int = 0
    channel: str = "visual"


@dataclass(frozen=True)
class MethodContent:
    label: str
    target: str


Content = Union[Ontology, NeedContent, ObjectContent, MethodContent]

_KIND = {Ontology: "ontology", NeedContent: "need", ObjectContent: "object", MethodContent: "method"}


@dataclass
class Slot:
    content: Content
    intensity: float = 0.0
    parent: int | None = None
    admitted_at: int = 0
    id: int = -1

    @property
    def kind(self) -> str:
        return _KIND[type(self.content)]

    @property
    def label(self) -> str:
        return self.content.label


@dataclass(frozen=True)
class SlotView:
    id: int
    kind: str
    label: str
    intensity: float
    parent: int | None
    position: tuple[float, float] | None = None
    seen_at: int | None = None


@dataclass
class Admission:
    admitted: bool
    slot: Slot | None = None
    refreshed: bool = False
    evicted: Slot | None = None
    cascade: list[Slot] = field(default_factory=list)
    reason: str = ""


class Context(Protocol):
    """What ``think`` may ask about the agent when checking preconditions."""

    def holds(self, predicate: str) -> bool: ...


@dataclass(frozen=True)
class Decision:
    kind: str  # execute | subgoal | continue | blocked | no_method | idle
    need: str | None = None
    method: str | None = None
    subgoal: str | None = None


def predicate_argument(predicate: str) -> str:
    """``possess:food`` -> ``food``; a bare predicate names itself."""
    return predicate.split(":", 1)[1] if ":" in predicate else predicate


class SlotTree:
    def __init__(self, capacity: int = CAPACITY, awake: bool = True, now: int = 0):
        self.capacity = capacity
        self.slots: dict[int, Slot] = {}
        self.awake = False
        self._next_id = 0
        if awake:
            self.wake(now)

    def __len__(self) -> int:
        return len(self.slots)

    def __iter__(self):
        return iter(list(self.slots.values()))

    @property
    def root(self) -> Slot | None:
        for slot in self.slots.values():
            if slot.kind == "ontology":
                return slot
        return None

    def labels(self) -> set[str]:
        return {s.label for s in self.slots.values()}

    def find(self, kind: str, label: str) -> Slot | None:
        for slot in self.slots.values():
            if slot.kind == kind and slot.label == label:
                return slot
        return None

    def of_kind(self, kind: str) -> list[Slot]:
        return [s for s in self.slots.values() if s.kind == kind]

    def needs(self) -> list[Slot]:
        return self.of_kind("need")

    def methods(self) -> list[Slot]:
        return self.of_kind("method")

    def objects(self) -> list[Slot]:
        return self.of_kind("object")

    # -- sleep / wake ---------------------------------------------------

    def sleep(self) -> list[Slot]:
        dropped = list(self.slots.values())
        self.slots.clear()
        self.awake = False
        return dropped

    def wake(self, now: int = 0) -> None:
        if self.awake:
            return
        self.awake = True
        self._insert(Slot(Ontology(), intensity=0.0, parent=None, admitted_at=now))

    def sleep_wake(self, awake: bool, now: int = 0) -> None:
        if awake:
            self.wake(now)
        else:
            self.sleep()

    # -- admission --------------------------------------------------------

    def admit(self, item: Slot, now: int | None = None) -> Admission:
        if not self.awake:
            return Admission(False, reason="asleep")
        if item.kind == "ontology":
            return Admission(False, reason="ontology is installed by wake")
        if now is not None:
            item = replace(item, admitted_at=now)

        resident = self.find(item.kind, item.label)
        if resident is not None:
            resident.intensity = max(resident.intensity, item.intensity)
            if item.kind == "object" or item.kind == "need" and item.content.origin == resident.content.origin:
                resident.content = item.content
            return Admission(False, slot=resident, refreshed=True, reason="duplicate")

        if item.kind == "method":
            target = self.find("need", item.content.target)
            if target is None:
                return Admission(False, reason="target need absent")
            parent = target.id
        else:
            parent = self.root.id

        result = Admission(True)
        if len(self.slots) >= self.capacity:
            victim = self.weakest()
            if victim is None or not item.intensity > victim.intensity:
                return Admission(False, reason="weaker than every resident")
            if item.kind == "method" and victim.id == parent:
                return Admission(False, reason="would evict its own target")
            removed = self.remove(victim.id)
            result.evicted = removed[0]
            result.cascade = removed[1:]

        result.slot = self._insert(replace(item, parent=parent))
        return result

    def weakest(self) -> Slot | None:
        """Lowest-intensity non-root slot; the oldest one loses a tie."""
        pool = [s for s in self.slots.values() if s.kind != "ontology"]
        if not pool:
            return None
        return min(pool, key=lambda s: (s.intensity, s.admitted_at, s.id))

    def _insert(self, slot: Slot) -> Slot:
        slot = replace(slot, id=self._next_id)
        self._next_id += 1
        self.slots[slot.id] = slot
        self._check()
        return slot

    def remove(self, slot_id: int) -> list[Slot]:
        """Remove a slot together with the methods and subgoals hanging on it."""
        slot = self.slots.pop(slot_id, None)
        if slot is None:
            return []
        removed = [slot]
        if slot.kind == "need":
            for other in list(self.slots.values()):
                if other.id not in self.slots:
                    continue
                if (other.kind == "method" and other.content.target == slot.label) or (
                    other.kind == "need" and other.content.serves == slot.label
                ):
                    removed.extend(self.remove(other.id))
        return removed

    def remove_label(self, kind: str, label: str) -> list[Slot]:
        slot = self.find(kind, label)
        return self.remove(slot.id) if slot else []

    def _check(self) -> None:
        assert len(self.slots) <= self.capacity, "workspace over capacity"
        if self.awake:
            assert self.root is not None, "awake workspace without its root"
        for slot in self.slots.values():
            if slot.kind == "method":
                assert self.find("need", slot.content.target), "method without its need"

    # -- per-slot upkeep ----------------------------------------------------

    def refresh(self, weights: dict[str, float]) -> None:
        """Re-weight feeling needs, let subgoals and methods inherit, fade objects."""
        for slot in self.needs():
            if slot.content.origin == "feeling" and slot.label in weights:
                slot.intensity = weights[slot.label]
                slot.content = replace(slot.content, weight=weights[slot.label])
        for slot in sorted(self.needs(), key=lambda s: s.admitted_at):
            if slot.content.origin == "subgoal":
                served = self.find("need", slot.content.serves)
                if served is not None:
                    slot.intensity = served.intensity
        for slot in self.methods():
            slot.intensity = self.find("need", slot.content.target).intensity
        for slot in self.objects():
            slot.intensity = max(0.0, slot.intensity - OBJECT_FADE)

    def drop_needs(self, labels: Iterable[str]) -> list[Slot]:
        """Drop feeling needs that no longer stand (with their methods and subgoals)."""
        removed = []
        for label in labels:
            slot = self.find("need", label)
            if slot is not None and slot.content.origin == "feeling":
                removed.extend(self.remove(slot.id))
        return removed

    # -- think ----------------------------------------------------------------

    def focus(self) -> Slot | None:
        """The need think works on: the strongest need, then down its subgoal chain."""
        needs = self.needs()
        if not needs:
            return None
        key = lambda s: (s.intensity, -s.admitted_at, -s.id)  # noqa: E731
        top = max(needs, key=key)
        seen = {top.id}
        while True:
            subs = [n for n in needs if n.content.serves == top.label and n.id not in seen]
            if not subs:
                return top
            top = max(subs, key=key)
            seen.add(top.id)

    def decide(self, kb, ctx: Context) -> Decision:
        top = self.focus()
        if top is None:
            return Decision("idle")
        if any(m.content.target == top.label for m in self.methods()):
            return Decision("continue", need=top.label)
        rule = kb.query(top.label)
        if rule is None:
            return Decision("no_method", need=top.label)
        for pre in rule.preconditions:
            if ctx.holds(pre):
                continue
            if rule.subgoal_on_failure or pre.startswith(RESOURCE_PREDICATES):
                return Decision(
                    "subgoal", need=top.label, subgoal=rule.subgoal_on_failure or predicate_argument(pre)
                )
            return Decision("blocked", need=top.label, method=rule.method_label)
        return Decision("execute", need=top.label, method=rule.method_label)

    def reduction(self) -> list[str]:
        """Resolve every need whose label now shows up as an object."""
        seen = {s.label for s in self.objects()}
        resolved = []
        for slot in self.needs():
            if slot.id in self.slots and slot.label in seen:
                self.remove(slot.id)
                resolved.append(slot.label)
        return resolved

    def complete_method(self, label: str, satisfied: Callable[[str], bool] | Iterable[str] = ()) -> list[Slot]:
        method = self.find("method", label)
        if method is None:
            return []
        if not callable(satisfied):
            done = set(satisfied)
            satisfied = done.__contains__
        removed = self.remove(method.id)
        target = self.find("need", method.content.target)
        if target is not None and target.content.origin == "feeling" and satisfied(target.label):
            removed.extend(self.remove(target.id))
        return removed

    def snapshot(self) -> tuple[SlotView, ...]:
        views = []
        for s in self.slots.values():
            extra = (s.content.position, s.content.seen_at) if s.kind == "object" else (None, None)
            views.append(SlotView(s.id, s.kind, s.label, s.intensity, s.parent, *extra))
        return tuple(views)
