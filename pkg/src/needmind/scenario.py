"""Scenario files: flat ``key = value`` text with dotted sections.

Example::

    horizon = 90
    agents = alice
    predators = p1 p2
    prey = f1
    alice.pos = 88 105
    alice.view = 23
    p1.pos = 112 84
    f1.pos = 100 100
    params.level2.alpha = -1
    params.friendship.gamma = 0.3
    schedule = 30 spawn_prey 95 95; 40 set_sat alice energy 2

Entity sections are named by the lists in ``agents``, ``predators`` and
``prey``. Unknown keys are rejected with the key name and line number.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from needmind.errors import ScenarioError
from needmind.needs import (
    DEFAULT_DECAY,
    DEFAULT_RECOVERY,
    LEVELS,
    NEEDS,
    Need,
    NeedHierarchy,
    WeightParams,
    min_delta,
    needs_at,
)

Point = tuple[float, float]

AGENT_SPEED = 0.5
AGENT_VIEW = 23.0
AUDITORY_RADIUS = 50.0
PREDATOR_SPEED = 1.0
PREDATOR_VIEW = 23.0
PREDATOR_RETURN = 0.0
SCHEDULE_ACTIONS = {"spawn_prey": 2, "remove_prey": 1, "move": 3, "set_sat": 3}


@dataclass(frozen=True)
class AgentSpec:
    name: str
    position: Point
    speed: float = AGENT_SPEED
    view_radius: float = AGENT_VIEW
    auditory_radius: float = AUDITORY_RADIUS
    friends: tuple[str, ...] = ()
    possessions: tuple[str, ...] = ()
    sat: Mapping[Need, float] = field(default_factory=dict)


@dataclass(frozen=True)
class PredatorSpec:
    name: str
    position: Point
    speed: float = PREDATOR_SPEED
    view_radius: float = PREDATOR_VIEW
    territorial: bool = True
    # pace of the walk back to the lair once nobody is in the territory; 0 holds
    return_speed: float = PREDATOR_RETURN


@dataclass(frozen=True)
class PreySpec:
    name: str
    position: Point


@dataclass(frozen=True)
class ScheduledEvent:
    slot: int
    action: str
    args: tuple[str, ...]

    def __str__(self) -> str:
        return " ".join((str(self.slot), self.action, *self.args))


@dataclass(frozen=True)
class ScenarioConfig:
    agents: tuple[AgentSpec, ...]
    predators: tuple[PredatorSpec, ...] = ()
    prey: tuple[PreySpec, ...] = ()
    params: WeightParams = field(default_factory=WeightParams.default)
    hierarchy: NeedHierarchy = field(default_factory=NeedHierarchy.default)
    decay: Mapping[Need, float] = field(default_factory=lambda: dict(DEFAULT_DECAY))
    recovery: Mapping[Need, float] = field(default_factory=lambda: dict(DEFAULT_RECOVERY))
    sat_level1: float = 5.1
    sat_higher: float = 10.0
    horizon: int = 90
    seed: int = 0
    jitter: float = 0.0
    sleep_gain: float = 1.0
    schedule: tuple[ScheduledEvent, ...] = ()
    # feeling processors wired to the Up-Tree, one leaf each
    feelings: tuple[Need, ...] = NEEDS

    def __post_init__(self):
        if self.horizon < 0:
            raise ScenarioError("horizon must be nonnegative", "horizon")
        names = [e.name for e in (*self.agents, *self.predators, *self.prey)]
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise ScenarioError(f"duplicate entity name {sorted(dupes)[0]!r}")
        agent_names = {a.name for a in self.agents}
        for a in self.agents:
            if a.speed < 0 or a.view_radius < 0 or a.auditory_radius < 0:
                raise ScenarioError("speeds and radii must be nonnegative", a.name)
            for friend in a.friends:
                if friend not in agent_names or friend == a.name:
                    raise ScenarioError(f"unknown friend {friend!r}", f"{a.name}.friends")
        if not self.feelings or len(set(self.feelings)) != len(self.feelings):
            raise ScenarioError("feelings must name distinct needs", "feelings")
        for p in self.predators:
            if p.speed < 0 or p.view_radius < 0 or p.return_speed < 0:
                raise ScenarioError("speeds and radii must be nonnegative", p.name)
        for ev in self.schedule:
            _check_event(ev, set(names), agent_names)

    def with_params(self, params: WeightParams) -> "ScenarioConfig":
        return replace(self, params=params)

    def replace(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)


def _check_event(ev: ScheduledEvent, names: set[str], agents: set[str]) -> None:
    key = "schedule"
    if ev.action not in SCHEDULE_ACTIONS:
        raise ScenarioError(f"unknown schedule action {ev.action!r}", key)
    if len(ev.args) != SCHEDULE_ACTIONS[ev.action]:
        raise ScenarioError(f"{ev.action} takes {SCHEDULE_ACTIONS[ev.action]} arguments", key)
    if ev.action == "remove_prey" and ev.args[0] not in names:
        raise ScenarioError(f"unknown entity {ev.args[0]!r}", key)
    if ev.action == "move" and ev.args[0] not in names:
        raise ScenarioError(f"unknown entity {ev.args[0]!r}", key)
    if ev.action == "set_sat":
        if ev.args[0] not in agents:
            raise ScenarioError(f"unknown agent {ev.args[0]!r}", key)
        if ev.args[1] not in {n.value for n in NEEDS}:
            raise ScenarioError(f"unknown need {ev.args[1]!r}", key)


# -- parsing --------------------------------------------------------------------


class _Source:
    """Key/value pairs with the line each came from; tracks which were used."""

    def __init__(self, text: str):
        self.values: dict[str, tuple[str, int]] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ScenarioError("expected 'key = value'", line=lineno)
            key, value = (part.strip() for part in line.split("=", 1))
            if not key:
                raise ScenarioError("empty key", line=lineno)
            if key in self.values:
                raise ScenarioError("duplicate key", key, lineno)
            self.values[key] = (value, lineno)
        self.used: set[str] = set()

    def has(self, key: str) -> bool:
        return key in self.values

    def raw(self, key: str) -> tuple[str, int]:
        self.used.add(key)
        return self.values[key]

    def get(self, key: str, kind, default=None):
        if key not in self.values:
            return default
        text, line = self.raw(key)
        try:
            return kind(text)
        except (TypeError, ValueError):
            raise ScenarioError(f"cannot read {text!r} as {getattr(kind, '__name__', kind)}", key, line) from None

    def keys_under(self, prefix: str) -> list[str]:
        return [k for k in self.values if k.startswith(prefix)]

    def unused(self) -> list[str]:
        return [k for k in self.values if k not in self.used]


def _point(text: str) -> Point:
    parts = text.split()
    if len(parts) != 2:
        raise ValueError(text)
    return (float(parts[0]), float(parts[1]))


def _names(text: str) -> tuple[str, ...]:
    return tuple(text.split())


def _bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ValueError(text)


def _int(text: str) -> int:
    return int(text)


def _schedule(text: str) -> tuple[ScheduledEvent, ...]:
    events = []
    for chunk in text.split(";"):
        parts = chunk.split()
        if not parts:
            continue
        if len(parts) < 2:
            raise ValueError(chunk)
        events.append(ScheduledEvent(int(parts[0]), parts[1], tuple(parts[2:])))
    return tuple(sorted(events, key=lambda e: e.slot))


def _need_key(src: _Source, key: str, name: str) -> Need:
    try:
        return Need(name)
    except ValueError:
        raise ScenarioError(f"unknown need {name!r}", key, src.values[key][1]) from None


def parse_scenario(source: str | Path) -> ScenarioConfig:
    """Parse scenario text (or a path to it) into a validated config."""
    text = Path(source).read_text() if isinstance(source, Path) else source
    src = _Source(text)
    if not src.has("agents"):
        raise ScenarioError("missing: agents", "agents")

    agent_names = src.get("agents", _names)
    if not agent_names:
        raise ScenarioError("missing: agents", "agents", src.values["agents"][1])
    predator_names = src.get("predators", _names, ())
    prey_names = src.get("prey", _names, ())

    def pos(name: str) -> Point:
        key = f"{name}.pos"
        if not src.has(key):
            raise ScenarioError(f"missing: {key}", key)
        return src.get(key, _point)

    agents = []
    for name in agent_names:
        sat = {}
        for key in src.keys_under(f"{name}.sat."):
            sat[_need_key(src, key, key.rsplit(".", 1)[1])] = src.get(key, float)
        agents.append(
            AgentSpec(
                name,
                pos(name),
                speed=src.get(f"{name}.speed", float, AGENT_SPEED),
                view_radius=src.get(f"{name}.view", float, AGENT_VIEW),
                auditory_radius=src.get(f"{name}.hearing", float, AUDITORY_RADIUS),
                friends=src.get(f"{name}.friends", _names, ()),
                possessions=src.get(f"{name}.possess", _names, ()),
                sat=sat,
            )
        )
    predators = [
        PredatorSpec(
            name,
            pos(name),
            speed=src.get(f"{name}.speed", float, PREDATOR_SPEED),
            view_radius=src.get(f"{name}.view", float, PREDATOR_VIEW),
            territorial=src.get(f"{name}.territorial", _bool, True),
            return_speed=src.get(f"{name}.return", float, PREDATOR_RETURN),
        )
        for name in predator_names
    ]
    prey = [PreySpec(name, pos(name)) for name in prey_names]

    decay = dict(DEFAULT_DECAY)
    for key in src.keys_under("decay."):
        decay[_need_key(src, key, key.split(".", 1)[1])] = src.get(key, float)
    recovery = dict(DEFAULT_RECOVERY)
    for key in src.keys_under("recovery."):
        recovery[_need_key(src, key, key.split(".", 1)[1])] = src.get(key, float)

    hierarchy = _hierarchy(src)
    params = _params(src, hierarchy, WeightParams.default(hierarchy))

    try:
        config = ScenarioConfig(
            agents=tuple(agents),
            predators=tuple(predators),
            prey=tuple(prey),
            params=params,
            hierarchy=hierarchy,
            decay=decay,
            recovery=recovery,
            sat_level1=src.get("sat.level1", float, 5.1),
            sat_higher=src.get("sat.higher", float, 10.0),
            horizon=src.get("horizon", _int, 90),
            seed=src.get("seed", _int, 0),
            jitter=src.get("jitter", float, 0.0),
            sleep_gain=src.get("sleep_gain", float, 1.0),
            schedule=src.get("schedule", _schedule, ()),
            feelings=_feelings(src),
        )
    except ScenarioError as exc:
        if exc.key in src.values and exc.line is None:
            raise ScenarioError(str(exc).split(" (")[0], exc.key, src.values[exc.key][1]) from None
        raise
    leftover = src.unused()
    if leftover:
        key = leftover[0]
        raise ScenarioError("unknown key", key, src.values[key][1])
    return config


def _feelings(src: _Source) -> tuple[Need, ...]:
    if not src.has("feelings"):
        return NEEDS
    return tuple(_need_key(src, "feelings", name) for name in src.get("feelings", _names))


def _hierarchy(src: _Source) -> NeedHierarchy:
    base = NeedHierarchy.default()
    sons = dict(base.sons)
    for key in src.keys_under("hierarchy."):
        need = _need_key(src, key, key.split(".", 1)[1])
        kids = []
        for name in src.get(key, _names):
            kids.append(_need_key(src, key, name))
        sons[need] = frozenset(kids)
    try:
        return NeedHierarchy(sons)
    except ValueError as exc:
        key = src.keys_under("hierarchy.")[0]
        raise ScenarioError(str(exc), key, src.values[key][1]) from None


def _params(src: _Source, hierarchy: NeedHierarchy, base: WeightParams) -> WeightParams:
    tables = {"alpha": dict(base.alpha), "beta": dict(base.beta), "gamma": dict(base.gamma)}
    delta: dict[int, float | None] = dict(base.delta)
    auto_levels = {2, 3, 4}
    # level-wide values first, then per-need overrides
    for level in LEVELS:
        for coef in tables:
            key = f"params.level{level}.{coef}"
            if src.has(key):
                value = src.get(key, float)
                for need in needs_at(level):
                    tables[coef][need] = value
        key = f"params.level{level}.delta"
        if src.has(key):
            text, _ = src.raw(key)
            if text == "auto":
                auto_levels.add(level)
            else:
                delta[level] = src.get(key, float)
                auto_levels.discard(level)
    for key in src.keys_under("params."):
        parts = key.split(".")
        if len(parts) != 3 or parts[1].startswith("level"):
            continue
        need = _need_key(src, key, parts[1])
        if parts[2] not in tables:
            raise ScenarioError("unknown key", key, src.values[key][1])
        tables[parts[2]][need] = src.get(key, float)
    try:
        params = WeightParams(tables["alpha"], tables["beta"], tables["gamma"], {**delta})
        for level in sorted(auto_levels):
            params = params.replace(delta={**params.delta, level: min_delta(params, hierarchy, level)})
    except ValueError as exc:
        key = (src.keys_under("params.") or ["params"])[0]
        raise ScenarioError(str(exc), key, src.values.get(key, ("", None))[1]) from None
    return params


# -- printing -------------------------------------------------------------------


def _fmt(value: float) -> str:
    return repr(float(value))


def print_params(params: WeightParams) -> str:
    """Params as a scenario fragment, every value explicit."""
    lines = []
    for need in NEEDS:
        for coef in ("alpha", "beta", "gamma"):
            lines.append(f"params.{need.value}.{coef} = {_fmt(getattr(params, coef)[need])}")
    for level in LEVELS:
        lines.append(f"params.level{level}.delta = {_fmt(params.delta[level])}")
    return "\n".join(lines) + "\n"


def print_scenario(config: ScenarioConfig) -> str:
    out = [
        f"horizon = {config.horizon}",
        f"seed = {config.seed}",
        f"jitter = {_fmt(config.jitter)}",
        f"sleep_gain = {_fmt(config.sleep_gain)}",
        f"sat.level1 = {_fmt(config.sat_level1)}",
        f"sat.higher = {_fmt(config.sat_higher)}",
        f"feelings = {' '.join(n.value for n in config.feelings)}",
        f"agents = {' '.join(a.name for a in config.agents)}",
    ]
    if config.predators:
        out.append(f"predators = {' '.join(p.name for p in config.predators)}")
    if config.prey:
        out.append(f"prey = {' '.join(p.name for p in config.prey)}")
    for a in config.agents:
        out += [
            f"{a.name}.pos = {_fmt(a.position[0])} {_fmt(a.position[1])}",
            f"{a.name}.speed = {_fmt(a.speed)}",
            f"{a.name}.view = {_fmt(a.view_radius)}",
            f"{a.name}.hearing = {_fmt(a.auditory_radius)}",
        ]
        if a.friends:
            out.append(f"{a.name}.friends = {' '.join(a.friends)}")
        if a.possessions:
            out.append(f"{a.name}.possess = {' '.join(a.possessions)}")
        for need, value in a.sat.items():
            out.append(f"{a.name}.sat.{need.value} = {_fmt(value)}")
    for p in config.predators:
        out += [
            f"{p.name}.pos = {_fmt(p.position[0])} {_fmt(p.position[1])}",
            f"{p.name}.speed = {_fmt(p.speed)}",
            f"{p.name}.view = {_fmt(p.view_radius)}",
            f"{p.name}.territorial = {'true' if p.territorial else 'false'}",
            f"{p.name}.return = {_fmt(p.return_speed)}",
        ]
    for p in config.prey:
        out.append(f"{p.name}.pos = {_fmt(p.position[0])} {_fmt(p.position[1])}")
    for need in NEEDS:
        if need in config.decay:
            out.append(f"decay.{need.value} = {_fmt(config.decay[need])}")
    for need in NEEDS:
        if need in config.recovery:
            out.append(f"recovery.{need.value} = {_fmt(config.recovery[need])}")
    for need in NEEDS:
        if need.level > 1:
            kids = sorted(config.hierarchy.sons[need], key=NEEDS.index)
            out.append(f"hierarchy.{need.value} = {' '.join(k.value for k in kids)}")
    if config.schedule:
        out.append("schedule = " + "; ".join(str(e) for e in config.schedule))
    return "\n".join(out) + "\n" + print_params(config.params)


def apply_params_fragment(config: ScenarioConfig, text: str) -> ScenarioConfig:
    """Override a config's params with a ``params.*`` fragment."""
    src = _Source(text)
    stray = [k for k in src.values if not k.startswith("params.")]
    if stray:
        raise ScenarioError("params fragment may only hold params.* keys", stray[0], src.values[stray[0]][1])
    params = _params(src, config.hierarchy, config.params)
    leftover = src.unused()
    if leftover:
        raise ScenarioError("unknown key", leftover[0], src.values[leftover[0]][1])
    return config.with_params(params)


def bundled(name: str) -> str:
    """Text of a scenario shipped with the package (``single_agent`` or ``double_agent``)."""
    filename = name if name.endswith(".scenario") else f"{name}.scenario"
    return resources.files("needmind.scenarios").joinpath(filename).read_text()


def bundled_names() -> Iterable[str]:
    return sorted(
        p.name.removesuffix(".scenario")
        for p in resources.files("needmind.scenarios").iterdir()
        if p.name.endswith(".scenario")
    )


def load_scenario(name_or_path: str | Path) -> ScenarioConfig:
    path = Path(name_or_path)
    if path.exists():
        return parse_scenario(path)
    return parse_scenario(bundled(str(name_or_path)))
