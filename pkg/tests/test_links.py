from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from needmind.errors import ConfigurationError
from needmind.links import Chunk, Pipe, UpTree, broadcast


def chunk(ltm_id, w, t=0, payload=None):
    return Chunk(ltm_id, payload or f"c{ltm_id}", w, t)


def drain(tree: UpTree, limit: int = 1000) -> list[Chunk]:
    out = []
    for _ in range(limit):
        got = tree.step()
        if got is not None:
            out.append(got)
        if not tree.buffered():
            break
    return out


def brute_force_order(weights) -> list[int]:
    return sorted(range(len(weights)), key=lambda i: (-weights[i], i))


class TestSubmit:
    def test_empty_leaf_buffers(self):
        tree = UpTree(4)
        assert tree.submit(1, chunk(1, 3.0)) is None
        assert tree.levels[0][1].weight == 3.0

    def test_stronger_chunk_keeps_buffer(self):
        tree = UpTree(4)
        tree.submit(0, chunk(0, 7.0))
        loser = tree.submit(0, chunk(0, 3.0, t=1))
        assert loser.weight == 3.0
        assert tree.levels[0][0].weight == 7.0

    def test_tie_goes_to_newer(self):
        tree = UpTree(4)
        tree.submit(0, chunk(0, 7.0, t=0))
        tree.submit(0, chunk(0, 7.0, t=1))
        assert tree.levels[0][0].submitted_at == 1

    @pytest.mark.parametrize("leaf", [-1, 3])
    def test_leaf_out_of_range(self, leaf):
        with pytest.raises(ConfigurationError):
            UpTree(3).submit(leaf, chunk(0, 1.0))

    def test_padding_to_power_of_two(self):
        tree = UpTree(6)
        assert (tree.n, tree.h) == (8, 3)


class TestStep:
    def test_two_leaves(self):
        tree = UpTree(2)
        tree.submit(0, chunk(0, 7.0, payload="hungry"))
        tree.submit(1, chunk(1, 5.0, payload="safety"))
        assert tree.step() is None
        assert tree.root.payload == "hungry"
        assert tree.step().payload == "hungry"

    def test_sibling_tie_goes_to_lower_id(self):
        tree = UpTree(2)
        tree.submit(1, chunk(1, 4.0))
        tree.submit(0, chunk(0, 4.0))
        assert [c.ltm_id for c in drain(tree)] == [0, 1]

    @pytest.mark.parametrize("n", [2, 4, 8, 16])
    def test_uncontested_latency_is_h(self, n):
        tree = UpTree(n)
        tree.submit(n - 1, chunk(n - 1, 1.0))
        # the step in the submission slot counts as the first
        emitted = [tree.step() for _ in range(tree.h + 1)]
        assert emitted[:-1] == [None] * tree.h
        assert emitted[-1] is not None

    def test_loser_stays_buffered(self):
        tree = UpTree(4)
        tree.submit(0, chunk(0, 5.0))
        tree.submit(2, chunk(2, 9.0))
        tree.step()
        tree.step()
        assert tree.root.ltm_id == 2
        assert tree.levels[1][0].ltm_id == 0

    @pytest.mark.parametrize("n", [2, 4, 8, 16])
    def test_quiescent_order_matches_sort(self, n):
        rng = np.random.default_rng(n)
        for _ in range(1000):
            weights = rng.integers(0, 6, n).astype(float)  # small range forces ties
            tree = UpTree(n)
            for i, w in enumerate(weights):
                tree.submit(i, chunk(i, w))
            assert [c.ltm_id for c in drain(tree)] == brute_force_order(weights)

    @given(st.lists(st.floats(-100, 100), min_size=1, max_size=16))
    def test_nothing_lost_or_duplicated(self, weights):
        tree = UpTree(len(weights))
        for i, w in enumerate(weights):
            tree.submit(i, chunk(i, w))
        assert sorted(c.ltm_id for c in drain(tree)) == list(range(len(weights)))

    def test_non_finite_weight_rejected(self):
        with pytest.raises(ValueError):
            UpTree(2).submit(0, chunk(0, float("nan")))


class Inbox:
    def __init__(self):
        self.got = []

    def receive(self, payload):
        self.got.append(payload)


class TestBroadcastAndPipe:
    def test_no_receivers(self):
        assert broadcast("x", []) == 0

    def test_every_receiver_gets_the_same_payload(self):
        payload = ("self", "hungry")
        boxes = [Inbox() for _ in range(3)]
        assert broadcast(payload, boxes) == 3
        assert all(b.got == [payload] and b.got[0] is payload for b in boxes)

    def test_pipe_is_fifo(self):
        pipe = Pipe()
        for p in "abc":
            pipe.push(p)
        assert pipe.drain() == ["a", "b", "c"]
        assert pipe.drain() == []

    def test_empty_drain(self):
        assert Pipe().drain() == []
