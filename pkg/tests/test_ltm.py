from __future__ import annotations

import math
from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from needmind.engine import build_world
from needmind.errors import KnowledgeFormatError
from needmind.ltm import Fact, KnowledgeBase, Rule, default_rulebase, sense
from needmind.scenario import load_scenario


def test_hungry_rule():
    rule = default_rulebase().query("hungry")
    assert (rule.method_label, rule.preconditions) == ("eat", ("possess:food",))


def test_unknown_label_has_no_rule():
    assert default_rulebase().query("boredom") is None


def test_facts_upsert():
    kb = KnowledgeBase()
    kb.update(Fact("prey", (100.0, 100.0), 3))
    kb.update(Fact("prey", (101.0, 100.0), 4))
    kb.update(Fact("tree", (0.0, 0.0), 4))
    assert kb.facts["prey"] == Fact("prey", (101.0, 100.0), 4)
    assert len(kb.facts) == 2


def test_older_fact_does_not_overwrite():
    kb = KnowledgeBase()
    kb.update(Fact("prey", (1.0, 1.0), 5))
    kb.update(Fact("prey", (2.0, 2.0), 4))
    assert kb.facts["prey"].slot == 5


def test_empty_round_trip():
    assert KnowledgeBase.loads(KnowledgeBase().dumps()) == KnowledgeBase()


def test_rules_round_trip(tmp_path):
    kb = KnowledgeBase()
    kb.add_rule(Rule("hungry", "eat", ("possess:food",), "food"))
    kb.add_rule(Rule("food", "search"))
    kb.add_rule(Rule("friendship", "remind", ("sees:predator", "calm")))
    kb.update(Fact("prey", (100.5, 99.25), 3))
    path = tmp_path / "kb.txt"
    kb.save(path)
    assert KnowledgeBase.load(path) == kb


label = st.from_regex(r"[a-z]{1,8}", fullmatch=True)


@given(st.dictionaries(label, st.tuples(label, st.lists(label, max_size=3), st.none() | label), max_size=5))
def test_round_trip_property(table):
    kb = KnowledgeBase()
    for need, (method, pre, sub) in table.items():
        kb.add_rule(Rule(need, method, tuple(f"possess:{p}" for p in pre), sub))
    assert KnowledgeBase.loads(kb.dumps()) == kb


def test_truncated_file_is_an_error():
    text = default_rulebase().dumps()
    with pytest.raises(KnowledgeFormatError) as err:
        KnowledgeBase.loads(text[:-3])
    assert err.value.line == len(text.splitlines())


def test_garbage_line_reports_position():
    with pytest.raises(KnowledgeFormatError, match="line 2"):
        KnowledgeBase.loads("hungry -> eat\nnot a rule at all\n")


class TestSense:
    def world(self, view=23.0):
        config = load_scenario("single_agent")
        config = config.replace(agents=tuple(replace(a, view_radius=view) for a in config.agents))
        world = build_world(config)
        return world, world.agent("alice")

    def test_prey_in_view(self):
        world, alice = self.world()
        seen = {p.label: p for p in sense(world, alice)}
        assert seen["prey"].distance == pytest.approx(13.0)
        assert "predator" not in seen

    def test_predator_distance(self):
        world, alice = self.world()
        predator = world.predators[0]
        d = math.dist(alice.position, predator.position)
        assert d == pytest.approx(31.89, abs=0.005)
        assert d > alice.view_radius

    def test_blind_agent_sees_nothing(self):
        world, alice = self.world(view=0.0)
        assert sense(world, alice) == []
