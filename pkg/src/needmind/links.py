"""Transport between long-term processors and the short-term workspace.

The Up-Tree is a pipelined binary tournament: every processor owns a leaf,
each node buffers at most one chunk, and on every step each empty node
pulls the stronger chunk of its two children. A chunk therefore climbs one
level per step, and a chunk that loses at some node stays buffered there
until its turn comes.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Any, Iterable, Protocol

from needmind.errors import ConfigurationError


@dataclass(frozen=True)
class Chunk:
    """A frozen copy of one processor's output at submission time."""

    ltm_id: int
    payload: Any
    weight: float
    submitted_at: int


@dataclass(frozen=True)
class TreeEvent:
    kind: str  # "submit" | "advance" | "drop" | "emit"
    chunk: Chunk
    level: int
    index: int


def _beats(a: Chunk, b: Chunk) -> bool:
    """Pull order: higher weight, then lower processor id."""
    return (a.weight, -a.ltm_id) > (b.weight, -b.ltm_id)


class UpTree:
    def __init__(self, n_ltms: int):
        if n_ltms < 1:
            raise ConfigurationError("an Up-Tree needs at least one leaf")
        n = 2
        while n < n_ltms:
            n *= 2
        self.n_ltms = n_ltms
        self.n = n
        self.h = n.bit_length() - 1
        # levels[0] are the leaves, levels[h] == [root]
        self.levels: list[list[Chunk | None]] = [[None] * (n >> lvl) for lvl in range(self.h + 1)]
        self.events: list[TreeEvent] = []

    @property
    def root(self) -> Chunk | None:
        return self.levels[self.h][0]

    def buffered(self) -> list[Chunk]:
        return [c for level in self.levels for c in level if c is not None]

    def submit(self, leaf: int, chunk: Chunk) -> Chunk | None:
        """Buffer ``chunk`` at ``leaf``; returns the chunk that lost the buffer, if any."""
        if not 0 <= leaf < self.n_ltms:
            raise ConfigurationError(f"leaf {leaf} out of range for {self.n_ltms} processors")
        if chunk.weight != chunk.weight or chunk.weight in (float("inf"), float("-inf")):
            raise ValueError("chunk weight must be finite")
        held = self.levels[0][leaf]
        self.events.append(TreeEvent("submit", chunk, 0, leaf))
        if held is None:
            self.levels[0][leaf] = chunk
            return None
        # higher weight keeps the buffer; a tie goes to the newer chunk
        if chunk.weight >= held.weight:
            self.levels[0][leaf] = chunk
            loser = held
        else:
            loser = chunk
        self.events.append(TreeEvent("drop", loser, 0, leaf))
        return loser

    def step(self) -> Chunk | None:
        """Advance the pipeline one step and return the chunk leaving the root."""
        winner = self.levels[self.h][0]
        if winner is not None:
            self.levels[self.h][0] = None
            self.events.append(TreeEvent("emit", winner, self.h, 0))
        # top-down, so a vacated node is refilled from below within the same
        # step but nothing climbs more than one level
        for lvl in range(self.h, 0, -1):
            below = self.levels[lvl - 1]
            here = self.levels[lvl]
            for i, held in enumerate(here):
                if held is not None:
                    continue
                left, right = below[2 * i], below[2 * i + 1]
                if left is None and right is None:
                    continue
                if right is None or (left is not None and not _beats(right, left)):
                    here[i], below[2 * i] = left, None
                else:
                    here[i], below[2 * i + 1] = right, None
                self.events.append(TreeEvent("advance", here[i], lvl, i))
        return winner

    def drain_events(self) -> list[TreeEvent]:
        events, self.events = self.events, []
        return events


class Receiver(Protocol):
    def receive(self, payload: Any) -> None: ...


def broadcast(payload: Any, ltms: Iterable[Receiver]) -> int:
    """Deliver the same immutable payload to every processor; returns the count."""
    count = 0
    for ltm in ltms:
        ltm.receive(payload)
        count += 1
    return count


class Pipe:
    """Unbounded FIFO from the sensor processors straight into the workspace."""

    def __init__(self):
        self._queue: deque = deque()

    def __len__(self) -> int:
        return len(self._queue)

    def push(self, percept) -> None:
        self._queue.append(percept)

    def drain(self) -> list:
        out = list(self._queue)
        self._queue.clear()
        return out

