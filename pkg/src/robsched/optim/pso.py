"""Global-best particle swarm with inertia weight and velocity clamping."""
from __future__ import annotations

from typing import Callable

import numpy as np

from ..boundary import Box
from .core import (Algorithm, ConvergenceTrace, OptimizerConfig, OptimizerRun, Scenario,
                   SearchOutcome, agent_rngs, clamp, init_population, run_on_scenario)


def pso_maximize(objective: Callable, box: Box, cfg: OptimizerConfig) -> SearchOutcome:
    p = cfg.pso
    n = cfg.population
    rngs = agent_rngs(cfg.seed, n)
    x = init_population(rngs, box)
    vmax = p.v_max_fraction * (box.upper - box.lower)
    v = np.array([(rng.random(2) * 2.0 - 1.0) * vmax for rng in rngs])
    fit = np.array([objective(xi) for xi in x])
    initial = fit.copy()
    pbest, pfit = x.copy(), fit.copy()
    g = int(np.argmax(pfit))
    gbest, gfit = pbest[g].copy(), float(pfit[g])
    evals = n
    tr = ConvergenceTrace()
    tr.record(gfit, gbest, evals)

    for _ in range(cfg.max_iters):
        for i, rng in enumerate(rngs):
            r1, r2 = rng.random(2), rng.random(2)
            v[i] = p.w * v[i] + p.c1 * r1 * (pbest[i] - x[i]) + p.c2 * r2 * (gbest - x[i])
            v[i] = np.clip(v[i], -vmax, vmax)
            x[i] = clamp(x[i] + v[i], box)
            fit[i] = objective(x[i])
        evals += n
        better = fit > pfit
        pbest[better] = x[better]
        pfit[better] = fit[better]
        g = int(np.argmax(pfit))
        if pfit[g] > gfit:
            gbest, gfit = pbest[g].copy(), float(pfit[g])
        tr.record(gfit, gbest, evals)

    return SearchOutcome(gbest, gfit, tr, initial)


def pso_optimize(scenario: Scenario, cfg: OptimizerConfig, fit=None) -> OptimizerRun:
    if cfg.algorithm is not Algorithm.PSO:
        raise ValueError(f"config is for {cfg.algorithm.value}, not pso")
    return run_on_scenario(pso_maximize, scenario, cfg, fit)
