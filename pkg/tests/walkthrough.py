"""Scripted replay of the hungry walkthrough, shared by the STM and acceptance tests."""

from __future__ import annotations

from needmind.ltm import walkthrough_rulebase
from needmind.stm import CAPACITY, MethodContent, NeedContent, ObjectContent, Slot, SlotTree


class Owns:
    def __init__(self, *items):
        self.items = set(items)

    def holds(self, predicate):
        return predicate.split(":", 1)[1] in self.items


def need(label, w, origin="feeling", serves=None):
    return Slot(NeedContent(label, w, origin, serves), intensity=w)


def obj(label, w):
    return Slot(ObjectContent(label), intensity=w)


def method(label, target, w):
    return Slot(MethodContent(label, target), intensity=w)


def members(tree):
    return {(s.kind, s.label) for s in tree}


def walkthrough():
    """Replay the hungry walkthrough and return the slot membership after each step."""
    kb = walkthrough_rulebase()
    tree = SlotTree()
    for label, w in (("obj_1", 4.0), ("obj_2", 3.0), ("obj_3", 2.0)):
        tree.admit(obj(label, w))
    steps = []

    # 1: the hungry feeling is packed into a slot under self
    tree.admit(need("hungry", 6.0))
    steps.append(members(tree))

    # 2: knowledge proposes eat, which fails its feasibility check
    assert kb.query("hungry").method_label == "eat"
    tree.admit(method("eat", "hungry", 6.0))
    steps.append(members(tree))

    # 3: the missing food becomes a target need
    decision = tree.decide(kb, Owns())
    assert decision.kind == "continue"
    rule = kb.query("hungry")
    tree.admit(need(rule.subgoal_on_failure, 6.0, "subgoal", "hungry"))
    steps.append(members(tree))
    assert len(tree) == CAPACITY

    # 4: search for food pushes the weakest object out
    decision = tree.decide(kb, Owns())
    assert (decision.need, decision.method) == ("food", "search")
    evicted = tree.admit(method("search", "food", 6.0)).evicted
    steps.append(members(tree))

    # 5: obj_1's percept turns out to be food; search resolves; eat runs and empties the plate
    tree.remove_label("object", "obj_1")
    tree.admit(obj("food", 5.0))
    tree.reduction()
    after_found = members(tree)
    assert tree.decide(kb, Owns("food")).kind == "continue"
    tree.complete_method("eat", {"hungry"})
    tree.remove_label("object", "food")
    steps.append(members(tree))
    return steps, evicted, after_found


WALKTHROUGH = [
    {("ontology", "self"), ("object", "obj_1"), ("object", "obj_2"), ("object", "obj_3"), ("need", "hungry")},
    {("ontology", "self"), ("object", "obj_1"), ("object", "obj_2"), ("object", "obj_3"), ("need", "hungry"),
     ("method", "eat")},
    {("ontology", "self"), ("object", "obj_1"), ("object", "obj_2"), ("object", "obj_3"), ("need", "hungry"),
     ("method", "eat"), ("need", "food")},
    {("ontology", "self"), ("object", "obj_1"), ("object", "obj_2"), ("need", "hungry"), ("method", "eat"),
     ("need", "food"), ("method", "search")},
    {("ontology", "self"), ("object", "obj_2")},
]
