"""Scenarios, the robustness fitness, and the bookkeeping shared by all optimizers."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from ..boundary import Box, BoundaryCurve, Metric, WorkingPoint, feasible, trace
from ..csvio import write_csv
from ..errors import NoContactWithinRMax, TraceUnavailable
from ..radius import RadiusResult, RadiusSearchParams, distance_to_curve

#: Fitness floor for infeasible points; the distance back to feasibility is subtracted.
PENALTY = -1e6
SNAP = 1e-4


class ScenarioKind(str, enum.Enum):
    PROFIT_ONLY = "profit_only"
    DEADLINE_ONLY = "deadline_only"
    JOINT = "joint"


class JointObjective(str, enum.Enum):
    MIN_RADIUS = "min_radius"  # maximise min(r_profit, r_wait)
    BALANCE = "balance"  # maximise -|r_profit - r_wait|


@dataclass(frozen=True)
class Scenario:
    kind: ScenarioKind
    curves: Tuple[BoundaryCurve, ...]
    radius: RadiusSearchParams = field(default_factory=RadiusSearchParams)
    wait_radius: Optional[RadiusSearchParams] = None  # overrides ``radius`` for mean-wait curves
    joint_objective: JointObjective = JointObjective.MIN_RADIUS

    def __post_init__(self):
        kind = ScenarioKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "curves", tuple(self.curves))
        object.__setattr__(self, "joint_objective", JointObjective(self.joint_objective))
        metrics = sorted(c.metric.value for c in self.curves)
        expected = {
            ScenarioKind.PROFIT_ONLY: ["profit"],
            ScenarioKind.DEADLINE_ONLY: ["mean_wait"],
            ScenarioKind.JOINT: ["mean_wait", "profit"],
        }[kind]
        if metrics != expected:
            raise ValueError(f"{kind.value} scenario needs curves {expected}, got {metrics}")
        boxes = {c.box for c in self.curves}
        if len(boxes) != 1:
            raise ValueError("all scenario curves must share one search box")

    @property
    def box(self) -> Box:
        return self.curves[0].box

    def params_for(self, curve: BoundaryCurve) -> RadiusSearchParams:
        if curve.metric is Metric.MEAN_WAIT and self.wait_radius is not None:
            return self.wait_radius
        return self.radius

    def curve(self, metric: Metric) -> BoundaryCurve:
        for c in self.curves:
            if c.metric is Metric(metric):
                return c
        raise KeyError(metric)

    def check_traceable(self, n_columns: int = 64) -> None:
        for c in self.curves:
            if trace(c, n_columns).empty:
                raise TraceUnavailable(
                    f"{c.metric.value} curve at level {c.level} does not cross {c.box}"
                )


def _radius_or_cap(pt: WorkingPoint, curve: BoundaryCurve, params: RadiusSearchParams):
    try:
        return distance_to_curve(pt, curve, params)
    except NoContactWithinRMax:
        return None


class Fitness:
    """Robustness fitness of a working point, cached on a ``SNAP`` lattice.

    Feasible points score their robustness radius (the smaller of the two
    for joint scenarios).  Infeasible points score ``PENALTY`` minus the
    largest distance to a violated curve, so the optimizers are pulled back
    toward the feasible region without ever raising.
    """

    def __init__(self, scenario: Scenario, record: bool = False):
        self.scenario = scenario
        self.calls = 0
        self.cache = {}
        self.record = record
        self.evaluated: List[Tuple[float, float]] = []

    def snap(self, x) -> np.ndarray:
        box = self.scenario.box
        x = np.round(np.asarray(x, dtype=float) / SNAP) * SNAP
        return box.clip(x)

    def details(self, x):
        """``(fitness, radius results)`` for a point, bypassing the cache."""
        sc = self.scenario
        pt = WorkingPoint(float(x[0]), float(x[1]))
        if not feasible(pt, sc.curves):
            worst = 0.0
            for c in sc.curves:
                if not c.is_feasible(pt.m, pt.s):
                    res = _radius_or_cap(pt, c, sc.params_for(c))
                    worst = max(worst, res.r if res else sc.box.diagonal)
            return PENALTY - worst, ()
        results = []
        radii = []
        for c in sc.curves:
            res = _radius_or_cap(pt, c, sc.params_for(c))
            results.append(res)
            # no contact anywhere in the box: the curve is at least a diagonal away
            radii.append(res.r if res else sc.box.diagonal)
        if sc.kind is ScenarioKind.JOINT and sc.joint_objective is JointObjective.BALANCE:
            value = -abs(radii[0] - radii[1])
        else:
            value = min(radii)
        return value, tuple(results)

    def __call__(self, x) -> float:
        self.calls += 1
        x = self.snap(x)
        key = (float(x[0]), float(x[1]))
        if self.record:
            self.evaluated.append(key)
        if key not in self.cache:
            self.cache[key] = self.details(x)[0]
        return self.cache[key]


def fitness(scenario: Scenario, pt: WorkingPoint) -> float:
    """Robustness fitness of one working point (see :class:`Fitness`)."""
    box = scenario.box
    if not box.contains(pt.m, pt.s):
        raise ValueError(f"({pt.m}, {pt.s}) outside {box}")
    return Fitness(scenario).details(np.array([pt.m, pt.s]))[0]


# --- configuration -----------------------------------------------------------


class Algorithm(str, enum.Enum):
    DBO = "dbo"
    DE = "de"
    PSO = "pso"


@dataclass(frozen=True)
class DboParams:
    roll_fraction: float = 6 / 30
    brood_fraction: float = 6 / 30
    forage_fraction: float = 7 / 30
    thief_fraction: float = 11 / 30
    k: float = 0.1  # deflection coefficient
    b_coef: float = 0.3  # light-intensity coefficient
    alpha_prob: float = 0.1  # chance that the natural coefficient is -1
    S: float = 0.5  # thief step scale

    def __post_init__(self):
        fr = (self.roll_fraction, self.brood_fraction, self.forage_fraction, self.thief_fraction)
        if min(fr) < 0 or not math.isclose(sum(fr), 1.0, abs_tol=1e-9):
            raise ValueError("role fractions must be non-negative and sum to 1")
        if not 0 < self.k <= 0.2:
            raise ValueError("k must lie in (0, 0.2]")
        if not 0 < self.b_coef < 1:
            raise ValueError("b_coef must lie in (0, 1)")
        if not 0 <= self.alpha_prob <= 1:
            raise ValueError("alpha_prob must lie in [0, 1]")

    def role_counts(self, n: int) -> Tuple[int, int, int, int]:
        roll = round(n * self.roll_fraction)
        brood = round(n * self.brood_fraction)
        forage = round(n * self.forage_fraction)
        return roll, brood, forage, n - roll - brood - forage


@dataclass(frozen=True)
class DeParams:
    F: float = 0.5
    CR: float = 0.9


@dataclass(frozen=True)
class PsoParams:
    w: float = 0.72
    c1: float = 1.49
    c2: float = 1.49
    v_max_fraction: float = 0.2  # velocity clamp as a fraction of the box extent


@dataclass(frozen=True)
class OptimizerConfig:
    algorithm: Algorithm = Algorithm.DBO
    population: int = 30
    max_iters: int = 100
    seed: int = 0
    dbo: DboParams = field(default_factory=DboParams)
    de: DeParams = field(default_factory=DeParams)
    pso: PsoParams = field(default_factory=PsoParams)

    def __post_init__(self):
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        if self.population < 4:
            raise ValueError("population must be >= 4")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


def agent_rngs(seed: int, n: int) -> List[np.random.Generator]:
    """One independent generator per agent, all derived from the run seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


# --- results -----------------------------------------------------------------


@dataclass
class ConvergenceTrace:
    best_fitness: List[float] = field(default_factory=list)
    best_m: List[float] = field(default_factory=list)
    best_s: List[float] = field(default_factory=list)
    evals: List[int] = field(default_factory=list)

    CSV_HEADER = ("iter", "best_fitness", "best_m", "best_s", "evals")

    def record(self, f: float, x, evals: int) -> None:
        self.best_fitness.append(float(f))
        self.best_m.append(float(x[0]))
        self.best_s.append(float(x[1]))
        self.evals.append(int(evals))

    def __len__(self):
        return len(self.best_fitness)

    def iters_to_within(self, frac: float = 0.01) -> int:
        """First iteration whose best fitness is within ``frac`` of the final best."""
        final = self.best_fitness[-1]
        target = final - frac * abs(final)
        for i, f in enumerate(self.best_fitness):
            if f >= target:
                return i
        return len(self.best_fitness) - 1

    def rows(self):
        return zip(range(len(self)), self.best_fitness, self.best_m, self.best_s, self.evals)

    def write_csv(self, fh) -> None:
        write_csv(fh, self.CSV_HEADER, self.rows())


@dataclass
class OptimizerRun:
    algorithm: Algorithm
    seed: int
    population: int
    best: WorkingPoint
    fitness: float
    radii: Tuple[RadiusResult, ...]
    trace: ConvergenceTrace


@dataclass
class SearchOutcome:
    """Raw result of a box-constrained maximisation."""

    x: np.ndarray
    f: float
    trace: ConvergenceTrace
    initial_fitness: np.ndarray


def run_on_scenario(search: Callable, scenario: Scenario, cfg: OptimizerConfig,
                    fit: Optional[Fitness] = None) -> OptimizerRun:
    scenario.check_traceable()
    fit = fit or Fitness(scenario)
    out = search(fit, scenario.box, cfg)
    x = fit.snap(out.x)
    value, radii = fit.details(x)
    return OptimizerRun(
        algorithm=cfg.algorithm,
        seed=cfg.seed,
        population=cfg.population,
        best=WorkingPoint(float(x[0]), float(x[1])),
        fitness=value,
        radii=radii,
        trace=out.trace,
    )


def clamp(x, box: Box) -> np.ndarray:
    return np.clip(x, box.lower, box.upper)


def init_population(rngs: Sequence[np.random.Generator], box: Box) -> np.ndarray:
    return np.array([box.lower + rng.random(2) * (box.upper - box.lower) for rng in rngs])
