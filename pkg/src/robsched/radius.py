"""Shortest robustness radius from a working point to a boundary curve.

The brute-force search grows a circle around the working point in steps of
``r_step`` and scans a fixed grid of ``n_theta`` polar angles on every shell;
the first shell holding a point inside the search box with
``|l(x, y) - level| <= tol_on_curve`` gives the radius.

Scanning every shell literally costs ``(r / r_step) * n_theta`` model
evaluations, so the search is organised per ray instead: along each polar
ray the residual is sampled every ``coarse_stride`` lattice steps until it
reaches the tolerance band or changes sign, and the lattice indices of the
bracketing coarse interval are then scanned in full.  The minimum over rays
of that index is the first contact shell.  Rays are first scanned on a
coarse angular subset and only refined next to the coarse minima.  Both the
lattice and the angle grid are the same as the shell scan's, so the two give
the same shell unless the curve enters and leaves the band between two
coarse samples of one ray.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from .boundary import BoundaryCurve, Polyline, WorkingPoint, central_gradient, trace
from .errors import EmptyPolyline, InfeasibleCenter, NoContactWithinRMax

_NO_CONTACT = np.iinfo(np.int64).max


class Method(str, enum.Enum):
    BRUTE_FORCE = "brute_force"
    SAMPLED_ORACLE = "sampled_oracle"


@dataclass(frozen=True)
class RadiusSearchParams:
    r_step: float = 1e-4
    r_max: float = 1e4
    n_theta: int = 3600
    tol_on_curve: float = 1e-3
    tol_tangent: float = 1e-2
    coarse_stride: int = 200
    coarse_angles: int = 360
    exhaustive: bool = False  # scan every ray instead of refining coarse minima

    def __post_init__(self):
        if not self.r_step > 0:
            raise ValueError("r_step must be positive")
        if not self.r_max > self.r_step:
            raise ValueError("r_max must exceed r_step")
        if self.n_theta < 16:
            raise ValueError("n_theta must be >= 16")
        if not (self.tol_on_curve > 0 and self.tol_tangent > 0):
            raise ValueError("tolerances must be positive")
        if self.coarse_stride < 1 or self.coarse_angles < 1:
            raise ValueError("coarse_stride and coarse_angles must be >= 1")


@dataclass(frozen=True)
class RadiusResult:
    r: float
    contact: WorkingPoint
    theta: float
    evaluations: int
    method: Method
    center: WorkingPoint
    metric: str = ""
    level: float = float("nan")
    tangent: Optional[bool] = None  # tangency test passed at the contact

    CSV_HEADER = ("center_m", "center_s", "metric", "level", "r",
                  "contact_m", "contact_s", "theta", "evals", "method")

    def csv_row(self):
        return (self.center.m, self.center.s, self.metric, self.level, self.r,
                self.contact.m, self.contact.s, self.theta, self.evaluations,
                self.method.value)


def _exit_distance(center: np.ndarray, dirs: np.ndarray, lower: np.ndarray, upper: np.ndarray):
    """Distance along each unit direction until the ray leaves the box."""
    with np.errstate(divide="ignore", invalid="ignore"):
        t_hi = np.where(dirs > 0, (upper - center) / dirs, np.inf)
        t_lo = np.where(dirs < 0, (lower - center) / dirs, np.inf)
    return np.min(np.minimum(t_hi, t_lo), axis=1)


class _RaySearch:
    """First tolerance-band hit along a set of polar rays from one center."""

    def __init__(self, center: WorkingPoint, curve: BoundaryCurve, params: RadiusSearchParams):
        self.curve = curve
        self.params = params
        self.c = center.as_array()
        self.box = curve.box
        self.evaluations = 0
        res0 = float(curve.residual(center.m, center.s))
        self.evaluations += 1
        self.sign0 = math.copysign(1.0, res0) if res0 != 0.0 else 0.0
        self.k_max = int(math.floor(params.r_max / params.r_step))
        self.angles = 2.0 * math.pi * np.arange(params.n_theta) / params.n_theta

    def points(self, j: np.ndarray, k: np.ndarray):
        r = k * self.params.r_step
        x = self.c[0] + r * np.cos(self.angles[j])
        y = self.c[1] + r * np.sin(self.angles[j])
        # roundoff only; the lattice limit already keeps points in the box
        x = np.clip(x, self.box.m_min, self.box.m_max)
        y = np.clip(y, self.box.s_min, self.box.s_max)
        return x, y

    def residual(self, j, k):
        x, y = self.points(j, k)
        self.evaluations += int(np.size(x))
        return np.asarray(self.curve.residual(x, y), dtype=float)

    def hit(self, res):
        tol = self.params.tol_on_curve
        return (np.abs(res) <= tol) | (np.sign(res) != self.sign0)

    def first_hits(self, j: np.ndarray, k_cap: int) -> np.ndarray:
        """Smallest lattice index with a band hit on each ray (``_NO_CONTACT`` if none)."""
        p = self.params
        out = np.full(j.shape, _NO_CONTACT, dtype=np.int64)
        if j.size == 0:
            return out
        dirs = np.column_stack([np.cos(self.angles[j]), np.sin(self.angles[j])])
        t_exit = _exit_distance(self.c, dirs, self.box.lower, self.box.upper)
        k_lim = np.floor(t_exit / p.r_step * (1.0 + 1e-12)).astype(np.int64)
        k_lim = np.minimum(k_lim, min(k_cap, self.k_max))
        live = k_lim >= 1
        if not np.any(live):
            return out
        j, k_lim, idx = j[live], k_lim[live], np.flatnonzero(live)

        stride = p.coarse_stride
        n_coarse = int((k_lim.max() - 1) // stride) + 1
        if (k_lim.max() - 1) % stride:
            n_coarse += 1
        steps = np.arange(n_coarse, dtype=np.int64)
        K = np.minimum(1 + steps[None, :] * stride, k_lim[:, None])
        # columns past a ray's limit duplicate its last point; mask them out
        valid = np.ones_like(K, dtype=bool)
        valid[:, 1:] = K[:, 1:] > K[:, :-1]
        J = np.broadcast_to(j[:, None], K.shape)
        res = np.full(K.shape, np.nan)
        res[valid] = self.residual(J[valid], K[valid])
        hits = self.hit(res) & valid
        has = hits.any(axis=1)
        first = np.argmax(hits, axis=1)

        rows = np.flatnonzero(has)
        if rows.size == 0:
            return out
        hi = K[rows, first[rows]]
        lo = np.where(first[rows] > 0, K[rows, np.maximum(first[rows] - 1, 0)], 0)
        # only brackets that can still hold the minimum are resolved exactly;
        # the others keep their coarse upper bound, which exceeds that minimum
        out[idx[rows]] = hi
        sel = np.flatnonzero(lo + 1 <= hi.min())
        if sel.size:
            width = int((hi[sel] - lo[sel]).max())
            offs = np.arange(1, width + 1, dtype=np.int64)
            KK = lo[sel, None] + offs[None, :]
            inside = KK <= hi[sel, None]
            JJ = np.broadcast_to(j[rows][sel, None], KK.shape)
            hh = np.zeros(KK.shape, dtype=bool)
            hh[inside] = self.hit(self.residual(JJ[inside], KK[inside]))
            out[idx[rows[sel]]] = KK[np.arange(sel.size), np.argmax(hh, axis=1)]
        return out

    def tangency(self, j: np.ndarray, k: np.ndarray) -> np.ndarray:
        """Is the implicit-curve tangent aligned with the circle's at these points?"""
        x, y = self.points(j, k)
        h = 1e-6 * self.box.diagonal
        gm, gs = central_gradient(self.curve, x, y, h)
        self.evaluations += 4 * int(np.size(x))
        nm, ns = x - self.c[0], y - self.c[1]
        cross = np.abs(gm * ns - gs * nm)
        norm = np.hypot(gm, gs) * np.hypot(nm, ns)
        with np.errstate(divide="ignore", invalid="ignore"):
            sin_angle = np.where(norm > 0, cross / norm, np.inf)
        return sin_angle <= self.params.tol_tangent


def _search(center: WorkingPoint, curve: BoundaryCurve, params: RadiusSearchParams) -> RadiusResult:
    rs = _RaySearch(center, curve, params)
    n = params.n_theta
    all_j = np.arange(n)
    stride = max(1, n // params.coarse_angles)
    if params.exhaustive or stride == 1:
        k = rs.first_hits(all_j, rs.k_max)
    else:
        k = np.full(n, _NO_CONTACT, dtype=np.int64)
        coarse = all_j[::stride]
        # a sparse first pass bounds how far the other coarse rays must march
        probe = coarse[::10]
        k[probe] = rs.first_hits(probe, rs.k_max)
        bound = int(k[probe].min())
        cap = rs.k_max if bound == _NO_CONTACT else int(bound * 1.02) + 2
        others = np.setdiff1d(coarse, probe)
        k[others] = rs.first_hits(others, cap)
        k_best = int(k[coarse].min())
        if k_best == _NO_CONTACT:
            rest = np.setdiff1d(all_j, coarse)
            k[rest] = rs.first_hits(rest, rs.k_max)
        else:
            near = coarse[k[coarse] <= k_best * 1.02 + 2]
            window = (near[:, None] + np.arange(-stride + 1, stride)[None, :]) % n
            fine = np.setdiff1d(np.unique(window), coarse)
            k[fine] = rs.first_hits(fine, k_best)

    k_min = int(k.min())
    if k_min == _NO_CONTACT:
        raise NoContactWithinRMax(
            f"no contact with {curve.metric.value} curve at level {curve.level} "
            f"from ({center.m}, {center.s}) inside {curve.box}"
        )
    shell = np.flatnonzero(k == k_min)
    tangent = rs.tangency(shell, np.full(shell.shape, k_min))
    pick = shell[np.argmax(tangent)] if tangent.any() else shell[0]
    x, y = rs.points(np.array([pick]), np.array([k_min]))
    return RadiusResult(
        r=k_min * params.r_step,
        contact=WorkingPoint(float(x[0]), float(y[0])),
        theta=float(rs.angles[pick]),
        evaluations=rs.evaluations,
        method=Method.BRUTE_FORCE,
        center=center,
        metric=curve.metric.value,
        level=curve.level,
        tangent=bool(tangent.any()),
    )


def _check_center(center: WorkingPoint, curve: BoundaryCurve, params: RadiusSearchParams):
    if not curve.box.contains(center.m, center.s):
        raise ValueError(f"center ({center.m}, {center.s}) outside {curve.box}")
    res = float(curve.residual(center.m, center.s))
    if abs(res) > params.tol_on_curve and not curve.is_feasible(center.m, center.s, tol=0.0):
        raise InfeasibleCenter(
            f"({center.m}, {center.s}) is on the infeasible side of the "
            f"{curve.metric.value} curve at level {curve.level} (residual {res:.6g})"
        )


def radius_bruteforce(center: WorkingPoint, curve: BoundaryCurve,
                      params: Optional[RadiusSearchParams] = None) -> RadiusResult:
    """Polar brute-force radius from a feasible ``center`` to ``curve``.

    Only curve points inside the search box count as contacts; the box edge
    itself never limits the radius.
    """
    params = params or RadiusSearchParams()
    _check_center(center, curve, params)
    return _search(center, curve, params)


def distance_to_curve(center: WorkingPoint, curve: BoundaryCurve,
                      params: Optional[RadiusSearchParams] = None) -> RadiusResult:
    """Same search as :func:`radius_bruteforce` but from either side of the curve."""
    params = params or RadiusSearchParams()
    if not curve.box.contains(center.m, center.s):
        raise ValueError(f"center ({center.m}, {center.s}) outside {curve.box}")
    return _search(center, curve, params)


def radius_pair(center: WorkingPoint, profit_curve: BoundaryCurve, wait_curve: BoundaryCurve,
                params: Optional[RadiusSearchParams] = None):
    """Radii to the profit curve and to the mean-wait curve, in that order."""
    return (radius_bruteforce(center, profit_curve, params),
            radius_bruteforce(center, wait_curve, params))


def _segments(poly: Polyline):
    pts = poly.points
    if len(pts) < 2:
        return pts[:0], pts[:0]
    a, b = pts[:-1], pts[1:]
    if poly.columns is not None:
        joined = np.diff(poly.columns) == 1
        a, b = a[joined], b[joined]
    return a, b


def polyline_distances(xy: np.ndarray, poly: Polyline):
    """Distance from each row of ``xy`` to the polyline, with the nearest point.

    Vertices and segments between adjacent traced columns both count.
    """
    if poly.empty:
        raise EmptyPolyline("polyline has no vertices")
    xy = np.atleast_2d(np.asarray(xy, dtype=float))
    pts = poly.points
    a, b = _segments(poly)
    best_d = np.full(len(xy), np.inf)
    best_p = np.zeros_like(xy)
    chunk = max(1, 2_000_000 // max(1, len(pts) + len(a)))
    for lo in range(0, len(xy), chunk):
        q = xy[lo:lo + chunk]
        d_v = np.hypot(q[:, None, 0] - pts[None, :, 0], q[:, None, 1] - pts[None, :, 1])
        iv = np.argmin(d_v, axis=1)
        d = d_v[np.arange(len(q)), iv]
        p = pts[iv]
        if len(a):
            ab = b - a
            L2 = np.einsum("ij,ij->i", ab, ab)
            t = ((q[:, None, 0] - a[None, :, 0]) * ab[None, :, 0]
                 + (q[:, None, 1] - a[None, :, 1]) * ab[None, :, 1]) / np.where(L2 > 0, L2, 1.0)
            t = np.clip(t, 0.0, 1.0)
            px = a[None, :, 0] + t * ab[None, :, 0]
            py = a[None, :, 1] + t * ab[None, :, 1]
            d_s = np.hypot(q[:, None, 0] - px, q[:, None, 1] - py)
            isg = np.argmin(d_s, axis=1)
            ds = d_s[np.arange(len(q)), isg]
            better = ds < d
            d = np.where(better, ds, d)
            p = np.where(better[:, None],
                         np.column_stack([px[np.arange(len(q)), isg], py[np.arange(len(q)), isg]]), p)
        best_d[lo:lo + chunk] = d
        best_p[lo:lo + chunk] = p
    return best_d, best_p


def radius_sampled(center: WorkingPoint, poly: Polyline) -> RadiusResult:
    """Distance from ``center`` to a traced polyline (vertices and segments)."""
    d, p = polyline_distances(center.as_array()[None, :], poly)
    contact = WorkingPoint(float(p[0, 0]), float(p[0, 1]))
    theta = math.atan2(contact.s - center.s, contact.m - center.m) % (2.0 * math.pi)
    n_seg = len(_segments(poly)[0])
    return RadiusResult(
        r=float(d[0]),
        contact=contact,
        theta=theta,
        evaluations=len(poly) + n_seg,
        method=Method.SAMPLED_ORACLE,
        center=center,
    )


def calibrate_level(center: WorkingPoint, curve_at: Callable[[float], BoundaryCurve],
                    target_r: float, bracket: Tuple[float, float], n_columns: int = 801) -> float:
    """Level at which the distance from ``center`` to ``curve_at(level)`` equals ``target_r``.

    Uses the traced-polyline distance, which is smooth in the level, and
    Brent's method inside ``bracket``.
    """
    def gap(level):
        return radius_sampled(center, trace(curve_at(level), n_columns)).r - target_r

    return float(brentq(gap, bracket[0], bracket[1], xtol=1e-12))
