"""The per-slot engine loop binding sensors, feelings, the Up-Tree and the workspace.

One :func:`tick` runs these phases in order:

1. scheduled environment events, then predator movement;
2. every agent senses the world and pushes percepts down its pipe;
3. feelings update (decay, distance-driven events, recovery), arisen needs
   are submitted to the agent's Up-Tree;
4. one Up-Tree step; the emitted chunk enters the workspace as a need;
5. the pipe is drained into object slots, reduction runs, think decides;
6. the running skill takes one step;
7. the workspace is broadcast to the long-term processors;
8. death check, then one satisfaction sample per need per agent.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from needmind import needs as nd
from needmind.links import Chunk, Pipe, UpTree, broadcast
from needmind.ltm import KnowledgeBase, Percept, default_rulebase, located, sense
from needmind.needs import NEEDS, THRESHOLD, Need, NeedEvent, SatisfactionState
from needmind.scenario import ScenarioConfig, ScheduledEvent
from needmind.skills import SKILLS, skill_step
from needmind.stm import OBJECT_INTENSITY, MethodContent, NeedContent, ObjectContent, Slot, SlotTree
from needmind.world import Agent, Predator, Prey, SkillRun, WorldState, distance, predator_ai

EVENT_KINDS = (
    "need_arise",
    "chunk_submit",
    "chunk_emit",
    "slot_admit",
    "slot_evict",
    "reduction",
    "decide",
    "subgoal",
    "skill_start",
    "skill_done",
    "remind_sent",
    "remind_heard",
    "flee_start",
    "eat_done",
    "death",
    "satisfaction_sample",
)


@dataclass(frozen=True)
class TraceEvent:
    slot: int
    agent: str
    kind: str
    need: str = ""
    label: str = ""
    value: float | None = None
    x: float | None = None
    y: float | None = None

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown trace event kind {self.kind!r}")


@dataclass
class Trace:
    events: list[TraceEvent] = field(default_factory=list)
    horizon: int = 0
    world: WorldState | None = None
    # end-of-slot positions of every agent and predator, for geometry checks
    positions: list[dict[str, tuple[float, float]]] = field(default_factory=list)

    def __iter__(self):
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)

    def of(self, kind: str, agent: str | None = None) -> list[TraceEvent]:
        return [e for e in self.events if e.kind == kind and (agent is None or e.agent == agent)]

    def samples(self, agent: str, need: Need | str) -> list[tuple[int, float]]:
        name = need.value if isinstance(need, Need) else need
        return [(e.slot, e.value) for e in self.events if e.kind == "satisfaction_sample" and e.agent == agent and e.need == name]


@dataclass(frozen=True)
class Broadcast:
    slot: int
    agent: str
    slots: tuple


class _Feeling:
    """Down-Tree receiver standing in for a feeling processor; it keeps the last view."""

    def __init__(self, need: Need):
        self.need = need
        self.last = None

    def receive(self, payload) -> None:
        self.last = payload


class AgentContext:
    """Answers think's precondition queries for one agent."""

    def __init__(self, agent: Agent):
        self.agent = agent

    def holds(self, predicate: str) -> bool:
        kind, _, arg = predicate.partition(":")
        agent = self.agent
        if kind == "possess":
            return arg in agent.possessions
        if kind == "located":
            return located(agent.kb, agent.percepts, arg)
        if kind == "sees":
            return any(p.kind == "visual" and p.label == arg for p in agent.percepts)
        if kind == "calm":
            return not any(p.label == "predator" for p in agent.percepts)
        raise ValueError(f"unknown predicate {predicate!r}")


class Engine:
    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.params = config.params
        self.hierarchy = config.hierarchy
        self.rng = random.Random(config.seed)
        self.world = build_world(config, self.rng)
        self.leaf = {need: i for i, need in enumerate(config.feelings)}
        self.feelings = {a.id: [_Feeling(n) for n in config.feelings] for a in self.world.agents}
        self._events: list[TraceEvent] = []

    # -- helpers ----------------------------------------------------------------

    def _emit(self, agent: Agent, kind: str, need: str = "", label: str = "", value=None, pos=None):
        x, y = pos if pos is not None else (None, None)
        self._events.append(TraceEvent(self.world.slot, agent.name, kind, need, label, value, x, y))

    def _admit(self, agent: Agent, slot: Slot) -> bool:
        result = agent.tree.admit(slot, now=self.world.slot)
        if result.evicted is not None:
            for gone in [result.evicted, *result.cascade]:
                self._emit(agent, "slot_evict", label=gone.label, value=gone.intensity)
                self._lost_method(agent, gone)
        if result.admitted:
            self._emit(agent, "slot_admit", need=slot.kind, label=slot.label, value=slot.intensity)
        return result.admitted

    def _lost_method(self, agent: Agent, slot: Slot) -> None:
        if slot.kind == "method" and agent.running and agent.running.name == slot.label:
            self._stop(agent, done=False)

    def _stop(self, agent: Agent, done: bool) -> None:
        run = agent.running
        agent.running = None
        self._emit(agent, "skill_done", need=run.need, label=run.name, value=1.0 if done else 0.0, pos=agent.position)
        if run.name == "flee":
            agent.fleeing = False

    def weights(self, agent: Agent) -> nd.NeedWeight:
        return nd.all_weights(self.params, self.hierarchy, agent.state, self.world.slot)

    # -- phases -----------------------------------------------------------------

    def tick(self) -> list[TraceEvent]:
        self._events = []
        world = self.world
        self._environment()
        for agent in self._conscious():
            agent.percepts = sense(world, agent)
            for p in agent.percepts:
                agent.pipe.push(p)
                if p.kind == "auditory":
                    self._emit(agent, "remind_heard", label=p.label, value=p.distance, pos=p.position)
        for agent in self._living():
            self._feel(agent)
        for agent in self._living():
            self._compete(agent)
        for agent in self._conscious():
            self._think(agent)
        for agent in self._conscious():
            self._act(agent)
        for agent in self._conscious():
            payload = Broadcast(world.slot, agent.name, agent.tree.snapshot())
            broadcast(payload, [agent.kb, *self.feelings[agent.id]])
        for agent in self._living():
            if nd.is_dead(agent.state):
                agent.alive = False
                agent.running = None
                agent.tree.sleep()
                starved = [n.value for n in NEEDS if n.level == 1 and agent.state[n] == 0.0]
                self._emit(agent, "death", need=starved[0], pos=agent.position)
        for agent in world.agents:
            for need in NEEDS:
                self._emit(agent, "satisfaction_sample", need=need.value, value=agent.state[need], pos=agent.position)
        world.slot += 1
        return self._events

    def _living(self) -> list[Agent]:
        return [a for a in self.world.agents if a.alive]

    def _conscious(self) -> list[Agent]:
        return [a for a in self.world.agents if a.alive and not a.asleep]

    def _environment(self) -> None:
        world = self.world
        for ev in self.config.schedule:
            if ev.slot == world.slot:
                apply_scheduled(world, ev)
        moves = [(p, predator_ai(p, world)) for p in world.predators]
        for predator, target in moves:
            predator.position = target

    def _feel(self, agent: Agent) -> None:
        before = agent.state
        state = nd.decay_tick(before)
        if agent.asleep:
            gained = min(state.s_max, state[Need.SLEEP] + self.config.sleep_gain)
            state = state.with_sat({Need.SLEEP: gained})
            if gained >= state.s_max:
                state = nd.apply_event(state, NeedEvent("slept"))
                agent.asleep = False
                agent.tree.wake(self.world.slot)
        else:
            state = self._distance_events(agent, state)
        agent.state = state

        for need in NEEDS:
            if before[need] >= THRESHOLD > state[need]:
                self._emit(agent, "need_arise", need=need.value, label=need.label, value=state[need])
        if agent.asleep:
            return

        w = self.weights(agent)
        agent.tree.refresh({n.label: w[n] for n in NEEDS})
        satisfied = [n.label for n in NEEDS if state[n] >= THRESHOLD]
        for gone in agent.tree.drop_needs(satisfied):
            if gone.kind == "need":
                self._emit(agent, "reduction", need="satisfied", label=gone.label)
            self._lost_method(agent, gone)
        for need in nd.arisen(state):
            if need not in self.leaf:
                continue
            leaf = self.leaf[need]
            chunk = Chunk(leaf, need, w[need], self.world.slot)
            agent.uptree.submit(leaf, chunk)
            self._emit(agent, "chunk_submit", need=need.value, label=need.label, value=chunk.weight)
        agent.uptree.drain_events()

    def _distance_events(self, agent: Agent, state: SatisfactionState) -> SatisfactionState:
        seen = [p for p in agent.percepts if p.kind == "visual"]
        predators = [p for p in seen if p.label == "predator"]
        heard = [p for p in agent.percepts if p.kind == "auditory" and p.label == "predator"]
        if predators:
            d = min(p.distance for p in predators)
            state = nd.apply_event(state, NeedEvent.predator_proximity(d, agent.view_radius))
        elif heard:
            # a warning is judged on the reporter's scale
            report = min(heard, key=lambda p: (p.distance, p.source))
            state = nd.apply_event(state, NeedEvent.predator_proximity(report.distance, report.scale or agent.view_radius))
        else:
            state = nd.apply_event(state, NeedEvent.recover(Need.PERSONAL_SAFETY))

        friends = [p for p in seen if p.label in agent.friends]
        if friends and predators:
            d_fp = min(distance(f.position, p.position) for f in friends for p in predators)
            state = nd.apply_event(state, NeedEvent.friend_threat(d_fp, agent.view_radius))
        else:
            state = nd.apply_event(state, NeedEvent.recover(Need.FRIENDSHIP))
        return state

    def _compete(self, agent: Agent) -> None:
        winner = agent.uptree.step()
        agent.uptree.drain_events()
        if winner is None:
            return
        need: Need = winner.payload
        self._emit(agent, "chunk_emit", need=need.value, label=need.label, value=winner.weight)
        if agent.asleep:
            # the pipeline keeps running; nothing is there to receive the winner
            return
        # the chunk's frozen weight won the race; inside the workspace the need weighs what it weighs now
        current = self.weights(agent)[need]
        self._admit(agent, Slot(NeedContent(need.label, current, "feeling"), intensity=current))

    def _think(self, agent: Agent) -> None:
        slot = self.world.slot
        for p in agent.pipe.drain():
            content = ObjectContent(p.label, p.position, slot, p.kind)
            self._admit(agent, Slot(content, intensity=OBJECT_INTENSITY))
        for label in agent.tree.reduction():
            self._emit(agent, "reduction", need="object", label=label)
        if agent.running and agent.tree.find("method", agent.running.name) is None:
            self._stop(agent, done=False)

        decision = agent.tree.decide(agent.kb, AgentContext(agent))
        if decision.kind == "idle":
            return
        self._emit(agent, "decide", need=decision.need or "", label=decision.kind)
        if decision.kind == "subgoal":
            served = agent.tree.find("need", decision.need)
            content = NeedContent(decision.subgoal, served.intensity, "subgoal", serves=decision.need)
            if self._admit(agent, Slot(content, intensity=served.intensity)):
                self._emit(agent, "subgoal", need=decision.need, label=decision.subgoal, value=served.intensity)
        elif decision.kind == "execute":
            self._start(agent, decision.method, decision.need)

    def _start(self, agent: Agent, method: str, need_label: str) -> None:
        if agent.running is not None:
            old = agent.running
            self._stop(agent, done=False)
            agent.tree.remove_label("method", old.name)
        run = SkillRun(method, need_label, need_label if method == "search" else None, self.world.slot)
        if not SKILLS[method].applicable(agent, self.world, run):
            self._emit(agent, "decide", need=need_label, label="inapplicable")
            return
        target = agent.tree.find("need", need_label)
        if not self._admit(agent, Slot(MethodContent(method, need_label), intensity=target.intensity)):
            return
        agent.running = run
        self._emit(agent, "skill_start", need=need_label, label=method, pos=agent.position)
        if method == "flee" and not agent.fleeing:
            agent.fleeing = True
            self._emit(agent, "flee_start", need=need_label, label=method, pos=agent.position)

    def _act(self, agent: Agent) -> None:
        run = agent.running
        if run is None:
            return
        result = skill_step(run.name, agent, self.world, run)
        if result is None:
            # no longer feasible; drop the method and let think re-plan
            self._stop(agent, done=False)
            agent.tree.remove_label("method", run.name)
            return
        for note, info in result.notes:
            if note == "eat_done":
                self._emit(agent, "eat_done", need=Need.ENERGY.value, label="eat", value=agent.state[Need.ENERGY], pos=agent.position)
            elif note == "remind_sent":
                self._emit(agent, "remind_sent", need=Need.FRIENDSHIP.value, label=info["to"], pos=(info["x"], info["y"]))
        if result.done:
            agent.running = None
            self._emit(agent, "skill_done", need=run.need, label=run.name, value=1.0, pos=agent.position)
            if run.name == "sleep":
                return
            if run.name == "flee":
                agent.fleeing = False
            satisfied = {n.label for n in NEEDS if agent.state[n] >= THRESHOLD}
            for gone in agent.tree.complete_method(run.name, satisfied)[1:]:
                self._emit(agent, "reduction", need="satisfied", label=gone.label)


def apply_scheduled(world: WorldState, ev: ScheduledEvent) -> None:
    if ev.action == "spawn_prey":
        x, y = map(float, ev.args)
        world.food.append(Prey(world.new_id(), f"prey{world.next_id}", (x, y)))
    elif ev.action == "remove_prey":
        world.food = [p for p in world.food if p.name != ev.args[0]]
    elif ev.action == "move":
        name, x, y = ev.args
        for e in (*world.agents, *world.predators, *world.food):
            if e.name == name:
                e.position = (float(x), float(y))
    elif ev.action == "set_sat":
        name, need, value = ev.args
        agent = world.agent(name)
        agent.state = agent.state.with_sat({Need(need): float(value)})


def build_world(config: ScenarioConfig, rng: random.Random | None = None) -> WorldState:
    rng = rng or random.Random(config.seed)
    world = WorldState()

    def jittered(point):
        if config.jitter <= 0:
            return (float(point[0]), float(point[1]))
        return (point[0] + rng.gauss(0.0, config.jitter), point[1] + rng.gauss(0.0, config.jitter))

    for spec in config.agents:
        state = SatisfactionState.initial(
            config.sat_level1, config.sat_higher, config.decay, config.recovery, spec.sat
        )
        world.agents.append(
            Agent(
                id=world.new_id(),
                name=spec.name,
                position=jittered(spec.position),
                state=state,
                tree=SlotTree(now=0),
                uptree=UpTree(len(config.feelings)),
                pipe=Pipe(),
                kb=default_rulebase(),
                speed=spec.speed,
                view_radius=spec.view_radius,
                auditory_radius=spec.auditory_radius,
                friends=spec.friends,
                possessions=list(spec.possessions),
            )
        )
    for spec in config.predators:
        pos = jittered(spec.position)
        world.predators.append(
            Predator(
                world.new_id(), spec.name, pos, pos, spec.speed, spec.view_radius, spec.territorial, spec.return_speed
            )
        )
    for spec in config.prey:
        world.food.append(Prey(world.new_id(), spec.name, jittered(spec.position)))
    return world


def tick(engine: Engine) -> list[TraceEvent]:
    return engine.tick()


def run(config: ScenarioConfig) -> Trace:
    """Tick to the horizon (or until every agent is dead) and return the full trace."""
    engine = Engine(config)
    trace = Trace(horizon=config.horizon, world=engine.world)
    for _ in range(config.horizon):
        trace.events.extend(engine.tick())
        w = engine.world
        trace.positions.append({e.name: e.position for e in (*w.agents, *w.predators)})
        if not any(a.alive for a in engine.world.agents):
            break
    return trace
