"""Revenue, power, cost and profit of the service provider.

All money and time quantities are in abstract model units.  The switching
factor, load capacitance and proportionality constant of the dynamic power
model only ever appear as their product, stored as ``xi``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import queueing
from .queueing import QueueParams


@dataclass(frozen=True)
class EconomicParams:
    a: float = 15.0
    beta: float = 3.0
    delta: float = 1.0
    e_frac: float = 0.7
    p_static: float = 4.0
    xi: float = 2.0
    alpha: float = 2.1
    deadline: float = 1.0
    phi: Optional[float] = field(default=None)

    def __post_init__(self):
        for name in ("a", "beta", "delta", "p_static", "xi"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not 0.0 <= self.e_frac <= 1.0:
            raise ValueError(f"e_frac must lie in [0, 1], got {self.e_frac!r}")
        if not self.alpha > 1.0:
            raise ValueError(f"alpha must exceed 1, got {self.alpha!r}")
        if not self.deadline >= 0:
            raise ValueError(f"deadline must be >= 0, got {self.deadline!r}")
        if self.phi is not None:
            if not 0.0 < self.phi <= 1.0:
                raise ValueError(f"phi must lie in (0, 1], got {self.phi!r}")
            if not math.isclose(self.alpha, 2.0 * self.phi + 1.0, rel_tol=1e-12):
                raise ValueError(f"alpha={self.alpha} inconsistent with phi={self.phi}")

    @classmethod
    def from_phi(cls, phi: float, **kwargs) -> "EconomicParams":
        return cls(alpha=2.0 * phi + 1.0, phi=phi, **kwargs)


@dataclass(frozen=True)
class ProfitBreakdown:
    revenue: float
    cost: float
    profit: float


def charge_expectation(q: QueueParams, econ: EconomicParams) -> float:
    """Expected fee collected per request: ``a * r_bar * F_W(D)``."""
    return econ.a * q.r_bar * queueing.fw_exact(q, econ.deadline)


def revenue(q: QueueParams, econ: EconomicParams) -> float:
    return q.lam * charge_expectation(q, econ)


def dynamic_power(s, econ: EconomicParams):
    return econ.xi * np.power(s, econ.alpha)


def cost(q: QueueParams, econ: EconomicParams) -> float:
    rho = q.rho
    energy = econ.e_frac * rho * econ.xi * q.s**econ.alpha + econ.p_static * (1.0 - econ.e_frac)
    return q.m * (econ.beta + econ.delta * energy)


def profit_exact(q: QueueParams, econ: EconomicParams) -> ProfitBreakdown:
    rev = revenue(q, econ)
    c = cost(q, econ)
    return ProfitBreakdown(revenue=rev, cost=c, profit=rev - c)


def profit_closed(m, s, lam, econ: EconomicParams):
    """Closed-form profit G(m, s) with ``r_bar = 1``; vectorised over m and s.

    Dynamic energy per server is ``e * rho * xi * s^alpha``; with
    ``rho = lam / (s m)`` the fleet total becomes ``e * lam * xi * s^(alpha-1)``.
    """
    fw = queueing.fw_approx(m, s, lam, econ.deadline)
    m = np.asarray(m, dtype=float)
    s = np.asarray(s, dtype=float)
    per_server = econ.beta + econ.delta * (
        econ.e_frac * lam * s ** (econ.alpha - 1.0) * econ.xi / m
        + econ.p_static * (1.0 - econ.e_frac)
    )
    g = lam * econ.a * fw - m * per_server
    return float(g) if np.ndim(g) == 0 else g
