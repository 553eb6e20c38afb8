"""Scenario files: one YAML document describing a whole experiment.

Every section maps onto a frozen dataclass; unknown keys, wrong types and
invalid values are rejected with a :class:`~robsched.errors.ConfigError`
that carries the line and column of the offending entry where possible.
"""
from __future__ import annotations

import dataclasses
import enum
import typing
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional, Tuple, Union

import yaml

from .boundary import Box, BoundaryCurve, Metric
from .economics import EconomicParams
from .errors import ConfigError
from .optim.core import (Algorithm, DboParams, DeParams, JointObjective, OptimizerConfig,
                         PsoParams, Scenario, ScenarioKind)
from .radius import RadiusSearchParams


@dataclass(frozen=True)
class Platform:
    lam: float = 4.0
    r_bar: float = 1.0
    a: float = 15.0
    beta: float = 3.0
    delta: float = 1.0
    e_frac: float = 0.7
    xi: float = 2.0
    alpha: float = 2.1
    p_static: float = 4.0
    deadline: float = 1.0

    def __post_init__(self):
        if not (self.lam > 0 and self.r_bar > 0):
            raise ValueError("lam and r_bar must be positive")

    def econ(self) -> EconomicParams:
        return EconomicParams(a=self.a, beta=self.beta, delta=self.delta, e_frac=self.e_frac,
                              p_static=self.p_static, xi=self.xi, alpha=self.alpha,
                              deadline=self.deadline)


@dataclass(frozen=True)
class Levels:
    profit: Optional[float] = None
    wait: Optional[float] = None


@dataclass(frozen=True)
class LevelTable:
    profit_only: Levels = field(default_factory=Levels)
    deadline_only: Levels = field(default_factory=Levels)
    joint: Levels = field(default_factory=Levels)


@dataclass(frozen=True)
class OptimizerSection:
    algorithm: Algorithm = Algorithm.DBO
    population: int = 30
    max_iters: int = 100
    dbo: DboParams = field(default_factory=DboParams)
    de: DeParams = field(default_factory=DeParams)
    pso: PsoParams = field(default_factory=PsoParams)


@dataclass(frozen=True)
class SimulationSection:
    n_arrivals: int = 1_000_000
    warmup: int = 10_000


@dataclass(frozen=True)
class ScenarioFile:
    platform: Platform = field(default_factory=Platform)
    box: Box = field(default_factory=Box)
    scenario: ScenarioKind = ScenarioKind.PROFIT_ONLY
    levels: LevelTable = field(default_factory=LevelTable)
    joint_objective: JointObjective = JointObjective.MIN_RADIUS
    radius: RadiusSearchParams = field(default_factory=RadiusSearchParams)
    wait_radius: Optional[RadiusSearchParams] = None
    optimizer: OptimizerSection = field(default_factory=OptimizerSection)
    simulation: SimulationSection = field(default_factory=SimulationSection)
    seed: int = 0

    def curves(self, kind: Optional[ScenarioKind] = None) -> Tuple[BoundaryCurve, ...]:
        kind = ScenarioKind(kind or self.scenario)
        lv = getattr(self.levels, kind.value)
        need = {ScenarioKind.PROFIT_ONLY: ("profit",), ScenarioKind.DEADLINE_ONLY: ("wait",),
                ScenarioKind.JOINT: ("profit", "wait")}[kind]
        missing = [n for n in need if getattr(lv, n) is None]
        if missing:
            raise ConfigError(f"levels.{kind.value} lacks {', '.join(missing)}")
        return tuple(self.curve(Metric.PROFIT if n == "profit" else Metric.MEAN_WAIT,
                                getattr(lv, n)) for n in need)

    def curve(self, metric: Metric, level: float) -> BoundaryCurve:
        if self.platform.r_bar != 1.0:
            raise ConfigError("boundary curves use the closed forms, which need r_bar = 1")
        if Metric(metric) is Metric.PROFIT:
            return BoundaryCurve(Metric.PROFIT, level, self.box, self.platform.lam,
                                 self.platform.econ())
        return BoundaryCurve(Metric.MEAN_WAIT, level, self.box, self.platform.lam)

    def level(self, kind: ScenarioKind, metric: Metric) -> float:
        """Threshold of ``metric`` in ``kind``, else in the matching single-curve scenario."""
        name = "profit" if Metric(metric) is Metric.PROFIT else "wait"
        value = getattr(getattr(self.levels, ScenarioKind(kind).value), name)
        if value is None:
            single = "profit_only" if name == "profit" else "deadline_only"
            value = getattr(getattr(self.levels, single), name)
        if value is None:
            raise ConfigError(f"no {name} threshold configured")
        return value

    def radius_params(self, metric: Metric) -> RadiusSearchParams:
        if Metric(metric) is Metric.MEAN_WAIT and self.wait_radius is not None:
            return self.wait_radius
        return self.radius

    def build_scenario(self, kind: Optional[ScenarioKind] = None) -> Scenario:
        kind = ScenarioKind(kind or self.scenario)
        return Scenario(kind, self.curves(kind), self.radius, self.wait_radius,
                        self.joint_objective)

    def optimizer_config(self, algorithm: Optional[Algorithm] = None,
                         seed: Optional[int] = None) -> OptimizerConfig:
        o = self.optimizer
        return OptimizerConfig(algorithm=Algorithm(algorithm or o.algorithm),
                               population=o.population, max_iters=o.max_iters,
                               seed=self.seed if seed is None else seed,
                               dbo=o.dbo, de=o.de, pso=o.pso)


# --- parsing -----------------------------------------------------------------


def _marks(node, path=(), out=None):
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            p = path + (str(k.value),)
            out[p] = k.start_mark
            _marks(v, p, out)
    return out


def _where(marks, path) -> str:
    while path and path not in marks:
        path = path[:-1]
    if not path:
        return ""
    m = marks[path]
    return f" (line {m.line + 1}, column {m.column + 1})"


def _convert(tp, value, path, marks):
    name = ".".join(path) or "<root>"
    origin = typing.get_origin(tp)
    if origin is Union:
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        if value is None:
            return None
        return _convert(args[0], value, path, marks)
    if dataclasses.is_dataclass(tp):
        if value is None:
            value = {}
        if not isinstance(value, dict):
            raise ConfigError(f"{name} must be a mapping{_where(marks, path)}")
        hints = typing.get_type_hints(tp)
        known = {f.name for f in dataclasses.fields(tp) if f.init}
        for key in value:
            if key not in known:
                raise ConfigError(f"unknown key {'.'.join(path + (str(key),))}"
                                  f"{_where(marks, path + (str(key),))}")
        kwargs = {k: _convert(hints[k], v, path + (k,), marks) for k, v in value.items()}
        try:
            return tp(**kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid {name}: {exc}{_where(marks, path)}") from exc
    if isinstance(tp, type) and issubclass(tp, enum.Enum):
        try:
            return tp(value)
        except ValueError:
            choices = ", ".join(str(e.value) for e in tp)
            raise ConfigError(f"{name} must be one of {choices}{_where(marks, path)}") from None
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{name} must be true or false{_where(marks, path)}")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name} must be an integer{_where(marks, path)}")
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name} must be a number{_where(marks, path)}")
        return float(value)
    raise ConfigError(f"unsupported field type for {name}")  # pragma: no cover


def loads(text: str) -> ScenarioFile:
    try:
        data = yaml.safe_load(text)
        node = yaml.compose(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f" (line {mark.line + 1}, column {mark.column + 1})" if mark else ""
        raise ConfigError(f"malformed scenario file: {exc.problem}{where}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed scenario file: {exc}") from exc
    return _convert(ScenarioFile, data, (), _marks(node) if node is not None else {})


def load(path: str) -> ScenarioFile:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return loads(text)


def load_reference() -> ScenarioFile:
    """The bundled scenario with the reference parameters and calibrated thresholds."""
    return loads(resources.files("robsched.data").joinpath("reference.scenario").read_text("utf-8"))


def _plain(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _plain(getattr(obj, f.name)) for f in dataclasses.fields(obj) if f.init}
    if isinstance(obj, enum.Enum):
        return obj.value
    return obj


def dumps(cfg: ScenarioFile) -> str:
    return yaml.safe_dump(_plain(cfg), sort_keys=False, allow_unicode=True)
