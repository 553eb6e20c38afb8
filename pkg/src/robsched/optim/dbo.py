"""Dung beetle optimizer (rolling, brood, foraging and thieving beetles)."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..boundary import Box
from .core import (Algorithm, ConvergenceTrace, OptimizerConfig, OptimizerRun, Scenario,
                   SearchOutcome, agent_rngs, clamp, init_population, run_on_scenario)


def dbo_maximize(objective: Callable, box: Box, cfg: OptimizerConfig) -> SearchOutcome:
    """Maximise ``objective`` over ``box`` with the dung beetle optimizer."""
    p = cfg.dbo
    n = cfg.population
    n_roll, n_brood, n_forage, _ = p.role_counts(n)
    rngs = agent_rngs(cfg.seed, n)
    lb, ub = box.lower, box.upper

    x = init_population(rngs, box)
    fit = np.array([objective(xi) for xi in x])
    initial = fit.copy()
    pbest, pfit = x.copy(), fit.copy()
    prev = pbest.copy()  # personal bests one iteration back
    g = int(np.argmax(pfit))
    gbest, gfit = pbest[g].copy(), float(pfit[g])
    evals = n
    tr = ConvergenceTrace()
    tr.record(gfit, gbest, evals)

    for t in range(1, cfg.max_iters + 1):
        worst = x[int(np.argmin(fit))].copy()
        new = x.copy()

        for i in range(n_roll):
            rng = rngs[i]
            if rng.random() < 0.9:
                a = -1.0 if rng.random() < p.alpha_prob else 1.0
                new[i] = pbest[i] + p.b_coef * np.abs(pbest[i] - worst) + a * p.k * prev[i]
            else:
                deg = int(rng.integers(1, 181))
                if deg in (90, 180):  # tan undefined or zero: stay put
                    new[i] = pbest[i]
                else:
                    new[i] = pbest[i] + math.tan(math.radians(deg)) * np.abs(pbest[i] - prev[i])
            new[i] = clamp(new[i], box)
            fit[i] = objective(new[i])
        evals += n_roll

        # best of the current population once the rollers have moved
        lbest = new[int(np.argmax(fit))].copy()

        shrink = (1.0 - t / cfg.max_iters) ** 2
        lo = np.maximum(gbest - shrink * (gbest - lb), lb)
        hi = np.minimum(gbest + shrink * (ub - gbest), ub)

        for i in range(n_roll, n_roll + n_brood):
            rng = rngs[i]
            b1, b2 = rng.random(2), rng.random(2)
            new[i] = np.clip(gbest + b1 * (pbest[i] - lo) + b2 * (pbest[i] - hi), lo, hi)
            fit[i] = objective(new[i])

        for i in range(n_roll + n_brood, n_roll + n_brood + n_forage):
            rng = rngs[i]
            c1, c2 = rng.standard_normal(), rng.random(2)
            new[i] = clamp(pbest[i] + c1 * (pbest[i] - lo) + c2 * (pbest[i] - hi), box)
            fit[i] = objective(new[i])

        for i in range(n_roll + n_brood + n_forage, n):
            rng = rngs[i]
            step = np.abs(pbest[i] - gbest) + np.abs(pbest[i] - lbest)
            new[i] = clamp(lbest + p.S * rng.standard_normal(2) * step, box)
            fit[i] = objective(new[i])
        evals += n - n_roll

        x = new
        prev = pbest.copy()
        better = fit > pfit
        pbest[better] = x[better]
        pfit[better] = fit[better]
        g = int(np.argmax(pfit))
        if pfit[g] > gfit:
            gbest, gfit = pbest[g].copy(), float(pfit[g])
        tr.record(gfit, gbest, evals)

    return SearchOutcome(gbest, gfit, tr, initial)


def dbo_optimize(scenario: Scenario, cfg: OptimizerConfig = OptimizerConfig(), fit=None) -> OptimizerRun:
    if cfg.algorithm is not Algorithm.DBO:
        raise ValueError(f"config is for {cfg.algorithm.value}, not dbo")
    return run_on_scenario(dbo_maximize, scenario, cfg, fit)
