"""Discrete-event simulation of a FIFO M/M/c queue.

Used as a Monte Carlo oracle for the analytic waiting-time results.  The
engine keeps pending departures on a time-ordered heap and merges them with
the (pre-sampled, already sorted) arrival stream.  Customers who miss the
deadline still wait for service; the deadline only affects what is counted.
"""
from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from .csvio import write_csv
from .errors import NegativeDeadline, NonErgodic
from .queueing import RHO_MAX, QueueParams

N_BATCHES = 20


@dataclass(frozen=True)
class SimConfig:
    params: QueueParams
    n_arrivals: int = 1_000_000
    warmup: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.warmup < self.n_arrivals:
            raise ValueError("need n_arrivals > warmup >= 0")
        if self.n_arrivals - self.warmup < N_BATCHES:
            raise ValueError(f"need at least {N_BATCHES} post-warmup arrivals")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def servers(self) -> int:
        """Number of servers actually simulated (m rounded to the nearest integer)."""
        return max(1, int(math.floor(self.params.m + 0.5)))


@dataclass(frozen=True)
class Estimate:
    value: float
    half_width: float  # of the 95% batch-means confidence interval

    @property
    def low(self) -> float:
        return self.value - self.half_width

    @property
    def high(self) -> float:
        return self.value + self.half_width

    def contains(self, x: float) -> bool:
        return self.low <= x <= self.high


@dataclass(frozen=True)
class SimResult:
    requested_m: float
    simulated_m: int
    mean_wait: Estimate
    frac_delayed: Estimate
    frac_within_deadline: Estimate
    completed: int
    deadline: float
    arrival_times: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    waits: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    SUMMARY_HEADER = ("m_requested", "m_simulated", "completed", "deadline",
                      "mean_wait", "mean_wait_ci", "frac_delayed", "frac_delayed_ci",
                      "frac_within_deadline", "frac_within_deadline_ci")

    def summary_row(self):
        return (self.requested_m, self.simulated_m, self.completed, self.deadline,
                self.mean_wait.value, self.mean_wait.half_width,
                self.frac_delayed.value, self.frac_delayed.half_width,
                self.frac_within_deadline.value, self.frac_within_deadline.half_width)

    def write_summary(self, fh) -> None:
        write_csv(fh, self.SUMMARY_HEADER, [self.summary_row()])

    def write_waits(self, fh) -> None:
        if self.waits is None:
            raise ValueError("run_sim was called with keep_waits=False")
        write_csv(fh, ("arrival_time", "wait"), zip(self.arrival_times, self.waits))


def simulate_waits(servers: int, arrivals: np.ndarray, services: np.ndarray) -> np.ndarray:
    """FIFO waiting time of every request, by event-driven simulation."""
    n = len(arrivals)
    waits = np.zeros(n)
    departures = []  # heap of pending departure times
    queue = deque()
    busy = 0
    i = 0
    arr = arrivals.tolist()
    svc = services.tolist()
    while i < n or departures:
        if i < n and (not departures or arr[i] < departures[0]):
            t = arr[i]
            if busy < servers:
                busy += 1
                heapq.heappush(departures, t + svc[i])
            else:
                queue.append(i)
            i += 1
        else:
            t = heapq.heappop(departures)
            if queue:
                j = queue.popleft()
                waits[j] = t - arr[j]
                heapq.heappush(departures, t + svc[j])
            else:
                busy -= 1
    return waits


def _batch_means(x: np.ndarray) -> Estimate:
    batches = np.array([b.mean() for b in np.array_split(x, N_BATCHES)])
    half = stats.t.ppf(0.975, N_BATCHES - 1) * batches.std(ddof=1) / math.sqrt(N_BATCHES)
    return Estimate(float(x.mean()), float(half))


def run_sim(cfg: SimConfig, deadline: float, keep_waits: bool = False) -> SimResult:
    if deadline < 0:
        raise NegativeDeadline(f"deadline must be >= 0, got {deadline!r}")
    p = cfg.params
    c = cfg.servers
    if not p.lam * p.r_bar / (c * p.s) <= RHO_MAX:
        raise NonErgodic(f"{c} simulated servers cannot carry lam={p.lam} at s={p.s}")
    rng = np.random.default_rng(cfg.seed)
    arrivals = np.cumsum(rng.exponential(1.0 / p.lam, cfg.n_arrivals))
    services = rng.exponential(1.0 / p.mu, cfg.n_arrivals)
    waits = simulate_waits(c, arrivals, services)

    w = waits[cfg.warmup:]
    return SimResult(
        requested_m=p.m,
        simulated_m=c,
        mean_wait=_batch_means(w),
        frac_delayed=_batch_means((w > 0).astype(float)),
        frac_within_deadline=_batch_means((w <= deadline).astype(float)),
        completed=len(w),
        deadline=float(deadline),
        arrival_times=arrivals[cfg.warmup:] if keep_waits else None,
        waits=w if keep_waits else None,
    )
