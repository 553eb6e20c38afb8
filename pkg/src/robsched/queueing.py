"""M/M/m queueing analytics.

Exact state probabilities and waiting-time quantities for a pool of ``m``
identical servers of speed ``s`` fed by Poisson arrivals of rate ``lam`` with
exponentially distributed task sizes of mean ``r_bar`` (so the per-server
service rate is ``mu = s / r_bar``).

``m`` is allowed to be non-integer.  The exact path then evaluates factorials
through the log-gamma function and truncates the ``p0`` series after
``ceil(m)`` terms.  The Stirling-based closed forms (``*_approx``) are smooth
in ``m`` and assume ``r_bar = 1``; they accept numpy arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NegativeDeadline, NegativeTime, NonErgodic

#: Largest admissible utilization.  Mean wait diverges at rho = 1.
RHO_MAX = 1.0 - 1e-9

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class QueueParams:
    m: float
    s: float
    lam: float
    r_bar: float = 1.0

    def __post_init__(self):
        for name in ("m", "s", "lam", "r_bar"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        rho = self.lam * self.r_bar / (self.m * self.s)
        if not rho <= RHO_MAX:
            raise NonErgodic(
                f"utilization {rho:.6g} >= 1 (m={self.m}, s={self.s}, "
                f"lam={self.lam}, r_bar={self.r_bar})"
            )

    @property
    def mu(self) -> float:
        """Per-server service rate."""
        return self.s / self.r_bar

    @property
    def rho(self) -> float:
        return self.lam * self.r_bar / (self.m * self.s)


@dataclass(frozen=True)
class QueueMetrics:
    rho: float
    p0: float
    pm: float
    pq: float
    t_mean: float
    fw_at_deadline: float


@dataclass(frozen=True)
class WaitingDensity:
    """Waiting-time law at one instant: a continuous density plus the atom at 0."""

    density: float
    atom: float


def utilization(p: QueueParams) -> float:
    return p.lam * p.r_bar / (p.m * p.s)


def _log_tail_term(p: QueueParams) -> float:
    # log of (m rho)^m / m!
    a = p.m * p.rho
    return p.m * math.log(a) - math.lgamma(p.m + 1.0)


def p0_exact(p: QueueParams) -> float:
    """Probability that the system is empty."""
    rho = p.rho
    log_a = math.log(p.m * rho)
    n_terms = math.ceil(p.m)
    logs = [k * log_a - math.lgamma(k + 1.0) for k in range(n_terms)]
    logs.append(_log_tail_term(p) - math.log1p(-rho))
    top = max(logs)
    total = math.fsum(math.exp(v - top) for v in logs)
    return math.exp(-top) / total


def pm_exact(p: QueueParams) -> float:
    """``p0 * (m rho)^m / m!``; equals the probability of exactly m requests for integer m."""
    return math.exp(math.log(p0_exact(p)) + _log_tail_term(p))


def pk_exact(p: QueueParams, k: int) -> float:
    """Probability of exactly ``k`` requests in the system."""
    if k < 0 or int(k) != k:
        raise ValueError(f"k must be a non-negative integer, got {k!r}")
    k = int(k)
    log_p0 = math.log(p0_exact(p))
    if k < p.m:
        return math.exp(log_p0 + k * math.log(p.m * p.rho) - math.lgamma(k + 1.0))
    return math.exp(
        log_p0 + p.m * math.log(p.m) + k * math.log(p.rho) - math.lgamma(p.m + 1.0)
    )


def pq_exact(p: QueueParams) -> float:
    """Erlang-C probability that an arrival has to wait."""
    return pm_exact(p) / (1.0 - p.rho)


def waiting_pdf(p: QueueParams, t: float) -> WaitingDensity:
    if t < 0:
        raise NegativeTime(f"t must be >= 0, got {t!r}")
    pm = pm_exact(p)
    rate = p.m * p.mu
    density = rate * pm * math.exp(-(1.0 - p.rho) * rate * t)
    return WaitingDensity(density=density, atom=1.0 - pm / (1.0 - p.rho))


def mean_wait_exact(p: QueueParams) -> float:
    rho = p.rho
    return pm_exact(p) / (p.m * p.mu * (1.0 - rho) ** 2)


def fw_exact(p: QueueParams, d: float) -> float:
    """Probability that the wait does not exceed the deadline ``d``."""
    if d < 0:
        raise NegativeDeadline(f"deadline must be >= 0, got {d!r}")
    rho = p.rho
    return 1.0 - pq_exact(p) * math.exp(-(1.0 - rho) * p.m * p.mu * d)


def metrics(p: QueueParams, deadline: float) -> QueueMetrics:
    pm = pm_exact(p)
    rho = p.rho
    pq = pm / (1.0 - rho)
    return QueueMetrics(
        rho=rho,
        p0=p0_exact(p),
        pm=pm,
        pq=pq,
        t_mean=pm / (p.m * p.mu * (1.0 - rho) ** 2),
        fw_at_deadline=fw_exact(p, deadline),
    )


# --- Stirling closed forms (r_bar = 1) -------------------------------------


def _check_ergodic(m, s, lam):
    m = np.asarray(m, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(m <= 0) or np.any(s <= 0):
        raise ValueError("m and s must be positive")
    if lam <= 0:
        raise ValueError("lam must be positive")
    rho = lam / (m * s)
    if np.any(~(rho <= RHO_MAX)):
        raise NonErgodic(f"utilization >= 1 somewhere (max rho {np.max(rho):.6g})")
    return m, s


def _unwrap(x):
    return float(x) if np.ndim(x) == 0 else x


def pm_approx(m, rho):
    """Closed form for ``p_m`` using ``m! ~ sqrt(2 pi m) (m/e)^m`` and
    ``sum_{k<m} (m rho)^k / k! ~ exp(m rho)``."""
    m = np.asarray(m, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if np.any(~((rho > 0) & (rho <= RHO_MAX))):
        raise NonErgodic("rho must lie in (0, 1)")
    # sqrt(2 pi m) (1 - rho) (e^rho / (e rho))^m, in log space
    log_x = (
        _LOG_SQRT_2PI + 0.5 * np.log(m) + np.log1p(-rho) + m * (rho - 1.0 - np.log(rho))
    )
    return _unwrap((1.0 - rho) / (np.exp(log_x) + 1.0))


def _log_stirling_ratio(m, s, lam):
    # log of sqrt(2 pi m) (sm - lam) e^{lam/s} (sm)^{m-1} / (e lam)^m
    sm = s * m
    return (
        _LOG_SQRT_2PI
        + 0.5 * np.log(m)
        + np.log(sm - lam)
        + lam / s
        + (m - 1.0) * np.log(sm)
        - m * (1.0 + math.log(lam))
    )


def pq_approx(m, s, lam):
    m, s = _check_ergodic(m, s, lam)
    return _unwrap(1.0 / (np.exp(_log_stirling_ratio(m, s, lam)) + 1.0))


def mean_wait_approx(m, s, lam):
    """Closed-form mean wait T(m, s)."""
    m, s = _check_ergodic(m, s, lam)
    x = np.exp(_log_stirling_ratio(m, s, lam))
    return _unwrap(1.0 / ((s * m - lam) * (x + 1.0)))


def fw_approx(m, s, lam, d):
    """Closed-form deadline-hit probability F_W(d)."""
    if np.any(np.asarray(d) < 0):
        raise NegativeDeadline(f"deadline must be >= 0, got {d!r}")
    m, s = _check_ergodic(m, s, lam)
    x = np.exp(_log_stirling_ratio(m, s, lam))
    return _unwrap(1.0 - np.exp(-(s * m - lam) * d) / (x + 1.0))
