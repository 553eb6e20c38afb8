"""Performance boundaries as implicit level sets in the (m, s) plane.

A boundary is ``{(m, s) : l(m, s) = level}`` where ``l`` is the closed-form
profit or mean wait.  The sign of ``l - level`` tells on which side of the
boundary a working point lies.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import economics, queueing
from .csvio import write_csv
from .economics import EconomicParams
from .errors import NonErgodic, StencilOutOfBox

#: Residual tolerance met by every traced polyline vertex.
TRACE_TOL = 1e-8
#: Residual slack under which a point counts as lying on a curve.
ON_CURVE_TOL = 1e-6


class Metric(str, enum.Enum):
    PROFIT = "profit"
    MEAN_WAIT = "mean_wait"
    CUSTOM = "custom"


class Side(str, enum.Enum):
    ABOVE = "above"  # feasible when l >= level
    BELOW = "below"  # feasible when l <= level


@dataclass(frozen=True)
class Box:
    m_min: float = 3.0
    m_max: float = 4.0
    s_min: float = 2.0
    s_max: float = 3.0

    def __post_init__(self):
        if not (self.m_min < self.m_max and self.s_min < self.s_max):
            raise ValueError(f"degenerate box {self}")
        if self.m_min <= 0 or self.s_min <= 0:
            raise ValueError(f"box must lie in the positive quadrant: {self}")

    @property
    def lower(self) -> np.ndarray:
        return np.array([self.m_min, self.s_min])

    @property
    def upper(self) -> np.ndarray:
        return np.array([self.m_max, self.s_max])

    @property
    def width(self) -> float:
        return self.m_max - self.m_min

    @property
    def height(self) -> float:
        return self.s_max - self.s_min

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    def contains(self, m, s):
        return (m >= self.m_min) & (m <= self.m_max) & (s >= self.s_min) & (s <= self.s_max)

    def clip(self, x):
        return np.clip(x, self.lower, self.upper)


@dataclass(frozen=True)
class WorkingPoint:
    m: float
    s: float

    def as_array(self) -> np.ndarray:
        return np.array([self.m, self.s])


@dataclass(frozen=True)
class BoundaryCurve:
    """Level set ``l(m, s) = level`` of one performance metric.

    ``fn`` replaces the model with an arbitrary vectorised function of
    ``(m, s)``; it is meant for synthetic test curves.  ``exact=True`` switches
    the profit and wait models from the closed forms to the exact queueing
    formulas (slow, scalar loop).
    """

    metric: Metric
    level: float
    box: Box = field(default_factory=Box)
    lam: float = 4.0
    econ: Optional[EconomicParams] = None
    feasible_side: Optional[Side] = None
    exact: bool = False
    fn: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        metric = Metric(self.metric)
        object.__setattr__(self, "metric", metric)
        if self.feasible_side is None:
            if metric is Metric.CUSTOM:
                raise ValueError("custom curves need an explicit feasible_side")
            side = Side.ABOVE if metric is Metric.PROFIT else Side.BELOW
            object.__setattr__(self, "feasible_side", side)
        else:
            object.__setattr__(self, "feasible_side", Side(self.feasible_side))
        if self.fn is None:
            if metric is Metric.CUSTOM:
                raise ValueError("custom curves need fn")
            if not self.box.m_min * self.box.s_min > self.lam:
                raise NonErgodic(f"search box {self.box} is not entirely ergodic for lam={self.lam}")
            if metric is Metric.PROFIT and self.econ is None:
                object.__setattr__(self, "econ", EconomicParams())

    def value(self, m, s):
        """Metric value at ``(m, s)`` (broadcasts over arrays)."""
        if self.fn is not None:
            return self.fn(m, s)
        if self.exact:
            return self._exact_value(m, s)
        if self.metric is Metric.PROFIT:
            return economics.profit_closed(m, s, self.lam, self.econ)
        return queueing.mean_wait_approx(m, s, self.lam)

    def _exact_value(self, m, s):
        def one(mi, si):
            q = queueing.QueueParams(mi, si, self.lam, 1.0)
            if self.metric is Metric.PROFIT:
                return economics.profit_exact(q, self.econ).profit
            return queueing.mean_wait_exact(q)

        out = np.vectorize(one, otypes=[float])(m, s)
        return float(out) if np.ndim(out) == 0 else out

    def residual(self, m, s):
        return self.value(m, s) - self.level

    def is_feasible(self, m, s, tol: float = ON_CURVE_TOL):
        r = self.residual(m, s)
        if self.feasible_side is Side.ABOVE:
            return r >= -tol
        return r <= tol

    def infeasible_sign(self) -> float:
        """Sign of the residual on the infeasible side."""
        return -1.0 if self.feasible_side is Side.ABOVE else 1.0

    def flipped(self) -> "BoundaryCurve":
        side = Side.BELOW if self.feasible_side is Side.ABOVE else Side.ABOVE
        return BoundaryCurve(self.metric, self.level, self.box, self.lam, self.econ,
                             side, self.exact, self.fn)


def residual(curve: BoundaryCurve, pt: WorkingPoint) -> float:
    """``l(m, s) - level``; its sign tells the side of the curve."""
    return float(curve.residual(pt.m, pt.s))


def central_gradient(curve: BoundaryCurve, m, s, h: float):
    """Central-difference gradient without any domain checks (vectorised)."""
    dm = (curve.value(m + h, s) - curve.value(m - h, s)) / (2.0 * h)
    ds = (curve.value(m, s + h) - curve.value(m, s - h)) / (2.0 * h)
    return dm, ds


def gradient(curve: BoundaryCurve, pt: WorkingPoint, h: Optional[float] = None):
    """Central-difference gradient ``(dl/dm, dl/ds)`` at ``pt``.

    The default step is ``1e-6`` times the box diagonal.
    """
    if h is None:
        h = 1e-6 * curve.box.diagonal
    if h == 0:
        raise ValueError("step must be non-zero")
    a = abs(h)
    box = curve.box
    for m, s in ((pt.m - a, pt.s), (pt.m + a, pt.s), (pt.m, pt.s - a), (pt.m, pt.s + a)):
        if not box.contains(m, s):
            raise StencilOutOfBox(f"stencil point ({m}, {s}) outside {box}")
    dm, ds = central_gradient(curve, pt.m, pt.s, h)
    return float(dm), float(ds)


@dataclass(frozen=True)
class Polyline:
    points: np.ndarray  # shape (n, 2), sorted by m
    residuals: np.ndarray
    multi_root: tuple = ()
    columns: Optional[np.ndarray] = None  # column index of each vertex

    @property
    def max_residual(self) -> float:
        return float(np.max(np.abs(self.residuals))) if len(self.residuals) else 0.0

    def __len__(self):
        return len(self.points)

    @property
    def empty(self) -> bool:
        return len(self.points) == 0

    def write_csv(self, fh) -> None:
        rows = ((p[0], p[1], r) for p, r in zip(self.points, self.residuals))
        write_csv(fh, ("m", "s", "residual"), rows)


def column_positions(box: Box, n_columns: int) -> np.ndarray:
    # w * i / (n - 1) makes doubled grids (2n - 1 columns) bitwise supersets
    i = np.arange(n_columns, dtype=float)
    return box.m_min + box.width * i / (n_columns - 1)


def trace(curve: BoundaryCurve, n_columns: int = 200, n_scan: int = 64) -> Polyline:
    """Trace the curve across the box, one root per m-column.

    Each column is sampled at ``n_scan`` speeds to bracket sign changes of
    the residual, then bisected until ``|residual| <= TRACE_TOL``.  Columns
    with no sign change are skipped.  When a column has several roots the
    one bordering the feasible part of the column nearest ``s_min`` is kept
    and the column's m is recorded in ``multi_root``.
    """
    if n_columns < 2:
        raise ValueError("n_columns must be >= 2")
    box = curve.box
    ms = column_positions(box, n_columns)
    ss = np.linspace(box.s_min, box.s_max, n_scan)
    M, S = np.meshgrid(ms, ss, indexing="ij")
    R = np.asarray(curve.residual(M, S), dtype=float)

    lo_s, hi_s, keep_m, keep_i, multi = [], [], [], [], []
    for i, m in enumerate(ms):
        r = R[i]
        exact_hits = np.flatnonzero(r == 0.0)
        crossings = np.flatnonzero(np.sign(r[:-1]) * np.sign(r[1:]) < 0)
        brackets = [(j, j) for j in exact_hits] + [(j, j + 1) for j in crossings]
        if not brackets:
            continue
        brackets.sort()
        if len(brackets) > 1:
            multi.append(float(m))
            feasible_low = curve.is_feasible(m, box.s_min)
            # bottom feasible: its upper edge is the first root; otherwise the
            # feasible part sits above the last root
            j0, j1 = brackets[0] if feasible_low else brackets[-1]
        else:
            j0, j1 = brackets[0]
        lo_s.append(ss[j0])
        hi_s.append(ss[j1])
        keep_m.append(m)
        keep_i.append(i)

    if not keep_m:
        return Polyline(np.empty((0, 2)), np.empty(0), tuple(multi), np.empty(0, dtype=int))

    m_arr = np.array(keep_m)
    lo = np.array(lo_s)
    hi = np.array(hi_s)
    r_lo = np.asarray(curve.residual(m_arr, lo), dtype=float)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        r_mid = np.asarray(curve.residual(m_arr, mid), dtype=float)
        if np.all(np.abs(r_mid) <= TRACE_TOL) or np.all(hi - lo <= 4 * np.spacing(hi)):
            break
        left = np.sign(r_mid) == np.sign(r_lo)
        lo = np.where(left, mid, lo)
        r_lo = np.where(left, r_mid, r_lo)
        hi = np.where(left, hi, mid)
    s_root = 0.5 * (lo + hi)
    res = np.asarray(curve.residual(m_arr, s_root), dtype=float)
    pts = np.column_stack([m_arr, s_root])
    return Polyline(pts, res, tuple(multi), np.array(keep_i))


def feasible(pt: WorkingPoint, curves: Sequence[BoundaryCurve], tol: float = ON_CURVE_TOL) -> bool:
    """True when ``pt`` is on the feasible side of every curve (boundary included)."""
    return all(bool(c.is_feasible(pt.m, pt.s, tol)) for c in curves)
