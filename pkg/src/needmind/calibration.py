"""Fitting weight parameters.

Two searches live here. :func:`calibrate` fits the coefficients to labeled
satisfaction samples, scoring a candidate by how many samples it picks
the right winner for. :func:`survival_optimize` scores candidates by how
long agents live in a scenario.

A candidate is a flat vector: ``alpha``, ``beta`` and ``gamma`` per level
(or per need, in canonical order), then one raw delta per level. Adding the same
constant to every level's delta never changes which need wins, so the raw
deltas are lifted by one common shift until no weight can go negative.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from needmind.engine import run
from needmind.errors import ConfigurationError
from needmind.needs import (
    INDEX,
    LEVELS,
    NEEDS,
    S_MAX,
    THRESHOLD,
    Need,
    NeedHierarchy,
    WeightParams,
    min_delta,
    needs_at,
    weight_matrix,
)

COEFFICIENTS = ("alpha", "beta", "gamma")
K = len(NEEDS)


@dataclass(frozen=True)
class LabeledSample:
    sats: tuple[float, ...]
    label: Need

    def __post_init__(self):
        if len(self.sats) != K:
            raise ValueError(f"a sample holds {K} satisfactions, got {len(self.sats)}")
        object.__setattr__(self, "sats", tuple(min(S_MAX, max(0.0, float(s))) for s in self.sats))
        object.__setattr__(self, "label", Need(self.label))


@dataclass(frozen=True)
class ParamSpace:
    alpha: tuple[float, float] = (-2.0, -0.01)
    beta: tuple[float, float] = (-1.0, -0.001)
    gamma: tuple[float, float] = (0.001, 1.0)
    # raw delta per level, before the common nonnegativity shift
    offset: tuple[float, float] = (0.0, 20.0)
    # share each coefficient across a level; per-need search rarely lines the
    # level-1 alphas up closely enough to rank bodily needs by satisfaction alone
    per_level: bool = True

    def __post_init__(self):
        for name in (*COEFFICIENTS, "offset"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ConfigurationError(f"empty bounds for {name}: [{lo}, {hi}]")
        if not self.alpha[1] < 0 or not self.beta[1] < 0:
            raise ConfigurationError("alpha and beta must stay negative")
        if not self.gamma[0] > 0:
            raise ConfigurationError("gamma must stay positive")
        if self.offset[0] < 0:
            raise ConfigurationError("delta offsets must be nonnegative")

    @property
    def width(self) -> int:
        """Coefficients per table: one per level or one per need."""
        return len(LEVELS) if self.per_level else K

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        w, L = self.width, len(LEVELS)
        lo = [self.alpha[0]] * w + [self.beta[0]] * w + [self.gamma[0]] * w + [self.offset[0]] * L
        hi = [self.alpha[1]] * w + [self.beta[1]] * w + [self.gamma[1]] * w + [self.offset[1]] * L
        return np.array(lo), np.array(hi)

    def contains(self, params: WeightParams) -> bool:
        for name in COEFFICIENTS:
            lo, hi = getattr(self, name)
            if not all(lo <= v <= hi for v in getattr(params, name).values()):
                return False
        return all(d >= 0 for d in params.delta.values())


@dataclass(frozen=True)
class Candidate:
    index: int
    params: WeightParams
    score: float


@dataclass(frozen=True)
class SurvivalRecord:
    params: WeightParams
    survival_slots: int
    seed: int


@dataclass
class SearchResult:
    params: WeightParams
    score: float
    history: list[Candidate] = field(default_factory=list)

    def __iter__(self):
        # unpacks as (params, score)
        return iter((self.params, self.score))


# -- candidate vectors ------------------------------------------------------------


def to_params(theta: np.ndarray, hierarchy: NeedHierarchy, space: ParamSpace | None = None) -> WeightParams:
    space = space or ParamSpace()
    w = space.width
    col = (lambda n: LEVELS.index(n.level)) if space.per_level else INDEX.__getitem__
    tables = [{n: float(theta[k * w + col(n)]) for n in NEEDS} for k in range(3)]
    base = WeightParams(*tables, {lvl: 0.0 for lvl in LEVELS})
    raw = {lvl: float(theta[3 * w + j]) for j, lvl in enumerate(LEVELS)}
    shift = max(0.0, *(min_delta(base, hierarchy, lvl) - raw[lvl] for lvl in LEVELS))
    return base.replace(delta={lvl: raw[lvl] + shift for lvl in LEVELS})


def from_params(params: WeightParams, hierarchy: NeedHierarchy, space: ParamSpace) -> np.ndarray:
    """A vector mapping back to ``params`` (up to the common shift), clipped into the space.

    With a per-level space each level takes its first need's coefficients.
    """
    keys = [needs_at(lvl)[0] for lvl in LEVELS] if space.per_level else list(NEEDS)
    parts = [getattr(params, name)[n] for name in COEFFICIENTS for n in keys]
    floor = min(params.delta.values())
    parts += [params.delta[lvl] - floor for lvl in LEVELS]
    lo, hi = space.bounds()
    return np.clip(np.array(parts), lo, hi)


# -- scoring -----------------------------------------------------------------------


def sample_matrix(samples: Sequence[LabeledSample]) -> tuple[np.ndarray, np.ndarray]:
    if not samples:
        return np.zeros((0, K)), np.zeros(0, dtype=int)
    sats = np.array([s.sats for s in samples])
    labels = np.array([INDEX[s.label] for s in samples])
    return sats, labels


def margins(params: WeightParams, hierarchy: NeedHierarchy, sats: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Labeled weight minus the strongest other weight, per sample."""
    if len(labels) == 0:
        return np.zeros(0)
    A, b = weight_matrix(params, hierarchy)
    w = sats @ A.T + b
    rows = np.arange(len(labels))
    own = w[rows, labels]
    w[rows, labels] = -np.inf
    return own - w.max(axis=1)


def _score_arrays(params: WeightParams, hierarchy: NeedHierarchy, sats: np.ndarray, labels: np.ndarray) -> int:
    # a tie for first place has margin 0 and counts as a miss
    return int((margins(params, hierarchy, sats, labels) > 0).sum())


def score(params: WeightParams, hierarchy: NeedHierarchy, samples: Sequence[LabeledSample]) -> int:
    """Number of samples whose unique strongest need is the labeled one."""
    return _score_arrays(params, hierarchy, *sample_matrix(samples))


# -- samples -----------------------------------------------------------------------


def reference_label(sats: Sequence[float]) -> Need:
    """Lowest level with an unmet need wins, at its least satisfied need.

    With nothing below threshold the least satisfied need overall wins.
    Ties go to canonical order.
    """
    for lvl in LEVELS:
        pool = [n for n in NEEDS if n.level == lvl and sats[INDEX[n]] < THRESHOLD]
        if pool:
            return min(pool, key=lambda n: (sats[INDEX[n]], INDEX[n]))
    return min(NEEDS, key=lambda n: (sats[INDEX[n]], INDEX[n]))


def generate_samples(seed: int, n: int) -> list[LabeledSample]:
    if n <= 0:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    draws = rng.uniform(0.0, S_MAX, size=(n, K))
    return [LabeledSample(tuple(row), reference_label(row)) for row in draws]


# -- search --------------------------------------------------------------------------


def live_coordinates(space: ParamSpace) -> np.ndarray:
    """Indices of vector entries that can move a weight.

    Bodily needs have nothing below them, so their ``beta`` and ``gamma``
    multiply zero and are left out of the refinement.
    """
    w = space.width
    keys = [needs_at(lvl)[0] for lvl in LEVELS] if space.per_level else list(NEEDS)
    dead = {k * w + i for k in (1, 2) for i, n in enumerate(keys) if n.level == 1}
    return np.array([i for i in range(3 * w + len(LEVELS)) if i not in dead])


def features(sats: np.ndarray, hierarchy: NeedHierarchy, space: ParamSpace) -> np.ndarray:
    """``F[sample, need, coordinate]`` with weights ``F @ theta``, common delta shift aside."""
    w = space.width
    F = np.zeros((len(sats), K, 3 * w + len(LEVELS)))
    for i, need in enumerate(NEEDS):
        col = LEVELS.index(need.level) if space.per_level else i
        F[:, i, col] = sats[:, i]
        F[:, i, w + col] = sats[:, [INDEX[j] for j in hierarchy.sons[need]]].sum(axis=1)
        F[:, i, 2 * w + col] = sats[:, [INDEX[j] for j in hierarchy.lower(need)]].sum(axis=1)
        F[:, i, 3 * w + LEVELS.index(need.level)] = 1.0
    return F


def pair_margins(F: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Design of the labeled-minus-rival margins: ``margin = D @ theta``, one row per pair."""
    rows = np.arange(len(labels))
    D = F[rows, labels][:, None, :] - F  # sample x rival x coordinate
    keep = np.ones(D.shape[:2], dtype=bool)
    keep[rows, labels] = False
    return D[keep], rows.repeat(K)[keep.ravel()]


def hinge_loss(margin: np.ndarray, floor: float) -> float:
    return float((np.maximum(floor - margin, 0.0) ** 2).sum())


def line_minimize(margin: np.ndarray, slope: np.ndarray, floor: float, u_lo: float, u_hi: float) -> float:
    """Exact minimiser over ``[u_lo, u_hi]`` of ``sum(max(floor - margin - slope*u, 0)**2)``.

    The loss is convex and piecewise quadratic in ``u``; bisect on its derivative.
    """

    def grad(u: float) -> float:
        short = np.maximum(floor - margin - slope * u, 0.0)
        return float(-2.0 * (short * slope).sum())

    if grad(u_lo) >= 0:
        return u_lo
    if grad(u_hi) <= 0:
        return u_hi
    a, b = u_lo, u_hi
    for _ in range(60):
        mid = (a + b) / 2
        if grad(mid) > 0:
            b = mid
        else:
            a = mid
    return (a + b) / 2


def calibrate(
    samples: Sequence[LabeledSample],
    space: ParamSpace | None = None,
    budget: int = 10_000,
    seed: int = 0,
    hierarchy: NeedHierarchy | None = None,
    random_fraction: float = 0.01,
    floor: float = 0.3,
) -> SearchResult:
    """Seeded random search, then coordinate-wise refinement of the best point.

    The refinement is coordinate descent on a squared hinge: for every
    sample and every rival need, the shortfall of the labeled weight's lead
    below ``floor``. The loss is convex and smooth in the coefficients and
    vanishes exactly when every sample is won with room to spare. Each step
    moves one coordinate to the exact minimiser along its axis; after each
    sweep one more exact step follows the sweep's net move. Every step costs
    one evaluation.

    The result is the first candidate reaching the highest score seen.
    """
    if budget <= 0:
        raise ValueError("budget must be positive")
    space = space or ParamSpace()
    hierarchy = hierarchy or NeedHierarchy.default()
    sats, labels = sample_matrix(samples)
    rng = np.random.default_rng(seed)
    lo, hi = space.bounds()
    live = live_coordinates(space)
    n = len(labels)
    D, _ = pair_margins(features(sats, hierarchy, space), labels)

    history: list[Candidate] = []
    best: list = [None, -1]  # params, score

    def evaluate(theta: np.ndarray) -> int:
        params = to_params(theta, hierarchy, space)
        s = _score_arrays(params, hierarchy, sats, labels)
        history.append(Candidate(len(history), params, s))
        if s > best[1]:
            best[:] = [params, s]
        return s

    def done() -> bool:
        return len(history) >= budget or best[1] == n

    theta, start_loss = None, np.inf
    for _ in range(max(1, int(budget * random_fraction))):
        if done():
            break
        trial = rng.uniform(lo, hi)
        evaluate(trial)
        loss = hinge_loss(D @ trial, floor)
        if loss < start_loss:
            theta, start_loss = trial, loss

    margin = D @ theta
    while not done():
        before = theta
        for k in rng.permutation(live):
            if done():
                break
            u = line_minimize(margin, D[:, k], floor, lo[k] - theta[k], hi[k] - theta[k])
            theta = theta.copy()
            theta[k] = np.clip(theta[k] + u, lo[k], hi[k])
            margin = D @ theta
            evaluate(theta)
        # one more exact step along the sweep's net move damps the zigzag
        move = theta - before
        if done() or not move.any():
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            reach = np.where(move != 0, np.maximum((lo - theta) / move, (hi - theta) / move), np.inf)
        u = line_minimize(margin, D @ move, floor, 0.0, float(reach.min()))
        theta = np.clip(theta + u * move, lo, hi)
        margin = D @ theta
        evaluate(theta)
    return SearchResult(best[0], best[1], history)


def survival_slots(config, agent: str | None = None) -> int:
    """Slots until the first death among the watched agents, or the horizon."""
    trace = run(config)
    deaths = [e.slot for e in trace.of("death") if agent is None or e.agent == agent]
    return min(deaths) if deaths else config.horizon


def survival_optimize(
    scenario,
    space: ParamSpace | None = None,
    budget: int = 20,
    repeats: int = 1,
    seed: int = 0,
    agent: str | None = None,
) -> SearchResult:
    """Pick the candidate with the longest mean survival.

    The scenario's own params are the first candidate; the rest are drawn
    at random from ``space``. Ties keep the earlier candidate.
    """
    if budget <= 0 or repeats <= 0:
        raise ValueError("budget and repeats must be positive")
    space = space or ParamSpace()
    rng = np.random.default_rng(seed)
    lo, hi = space.bounds()
    history: list[Candidate] = []
    best: Candidate | None = None
    for index in range(budget):
        params = scenario.params if index == 0 else to_params(rng.uniform(lo, hi), scenario.hierarchy, space)
        runs = [survival_slots(scenario.replace(params=params, seed=seed + r), agent) for r in range(repeats)]
        cand = Candidate(index, params, float(np.mean(runs)))
        history.append(cand)
        if best is None or cand.score > best.score:
            best = cand
    return SearchResult(best.params, best.score, history)


# -- output --------------------------------------------------------------------------


def candidate_columns() -> list[str]:
    cols = [f"{name}.{n.value}" for name in COEFFICIENTS for n in NEEDS]
    return ["index", *cols, *(f"delta.{lvl}" for lvl in LEVELS), "score"]


def write_candidates(history: Iterable[Candidate], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(candidate_columns())
        for c in history:
            values = [getattr(c.params, name)[n] for name in COEFFICIENTS for n in NEEDS]
            values += [c.params.delta[lvl] for lvl in LEVELS]
            writer.writerow([c.index, *(f"{v:.9g}" for v in values), f"{c.score:.9g}"])
