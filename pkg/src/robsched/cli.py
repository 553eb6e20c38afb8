"""``robsched`` command-line front end.

Exit codes: 0 success, 1 configuration or usage error, 2 model error
(non-ergodic or infeasible input), 3 search error (no contact, no curve).
"""
from __future__ import annotations

import argparse
import contextlib
import dataclasses
import sys

import numpy as np

from . import config as cfgmod
from . import economics, queueing
from .boundary import Metric, WorkingPoint, trace
from .csvio import write_csv
from .errors import ConfigError, NoContactWithinRMax, RobschedError, TraceUnavailable
from .optim import Algorithm, ScenarioKind, compare, optimize
from .queueing import QueueParams
from .radius import RadiusResult, radius_bruteforce, radius_sampled
from .simulate import SimConfig, run_sim

EXIT_OK, EXIT_CONFIG, EXIT_MODEL, EXIT_SEARCH = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _global_flags(p, default):
    kw = {} if default else {"default": argparse.SUPPRESS}
    p.add_argument("--config", metavar="PATH", help="scenario file (default: bundled reference)", **kw)
    p.add_argument("--seed", type=int, metavar="N", help="override the scenario seed", **kw)
    p.add_argument("--out", metavar="PATH", help="write CSV here instead of stdout", **kw)
    p.add_argument("--dump-config", action="store_true",
                   help="print the resolved scenario file and exit", **kw)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="robsched", description="Robust M/M/m server-count and speed configuration.")
    _global_flags(parser, default=True)
    common = _Parser(add_help=False)
    _global_flags(common, default=False)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    metrics = [Metric.PROFIT.value, Metric.MEAN_WAIT.value]
    kinds = [k.value for k in ScenarioKind]

    p = sub.add_parser("eval", parents=[common], help="exact and closed-form metrics at one point")
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--s", type=float, required=True)

    p = sub.add_parser("surface", parents=[common], help="closed-form metric on a grid")
    p.add_argument("--metric", choices=metrics, required=True)
    p.add_argument("--grid-n", type=int, default=50)

    p = sub.add_parser("trace", parents=[common], help="boundary polyline")
    p.add_argument("--metric", choices=metrics, required=True)
    p.add_argument("--scenario", choices=kinds)
    p.add_argument("--level", type=float, help="override the scenario threshold")
    p.add_argument("--columns", type=int, default=200)

    p = sub.add_parser("radius", parents=[common], help="robustness radius of one point")
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--metric", choices=metrics, required=True)
    p.add_argument("--scenario", choices=kinds)
    p.add_argument("--level", type=float, help="override the scenario threshold")
    p.add_argument("--oracle", action="store_true", help="add the traced-polyline distance")

    p = sub.add_parser("optimize", parents=[common], help="search the most robust point")
    p.add_argument("--scenario", choices=kinds)
    p.add_argument("--algorithm", choices=[a.value for a in Algorithm])
    p.add_argument("--trace", metavar="PATH", help="write the convergence trace CSV here")

    p = sub.add_parser("compare", parents=[common], help="repeated runs of several optimizers")
    p.add_argument("--scenario", choices=kinds)
    p.add_argument("--algos", default="dbo,de,pso")
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--trace-dir", metavar="DIR", help="write one convergence trace per run")

    p = sub.add_parser("simulate", parents=[common], help="discrete-event M/M/m simulation")
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--deadline", type=float, help="default: platform deadline")
    p.add_argument("--n-arrivals", type=int)
    p.add_argument("--warmup", type=int)
    p.add_argument("--waits", metavar="PATH", help="dump per-request waits (arrival_time,wait)")
    return parser


@contextlib.contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def _curve(sc: cfgmod.ScenarioFile, args, metric: Metric):
    kind = ScenarioKind(args.scenario or sc.scenario)
    level = sc.level(kind, metric) if args.level is None else args.level
    return sc.curve(metric, level), sc.radius_params(metric)


def cmd_eval(sc, args, out):
    p = sc.platform
    q = QueueParams(args.m, args.s, p.lam, p.r_bar)
    econ = p.econ()
    qm = queueing.metrics(q, p.deadline)
    pb = economics.profit_exact(q, econ)
    closed = {}
    if p.r_bar == 1.0:
        fw = queueing.fw_approx(q.m, q.s, p.lam, p.deadline)
        g = economics.profit_closed(q.m, q.s, p.lam, econ)
        rev = p.lam * econ.a * fw
        closed = {
            "rho": q.rho,
            "pm": queueing.pm_approx(q.m, q.rho),
            "pq": queueing.pq_approx(q.m, q.s, p.lam),
            "t_mean": queueing.mean_wait_approx(q.m, q.s, p.lam),
            "fw_at_deadline": fw,
            "revenue": rev,
            "cost": rev - g,
            "profit": g,
        }
    exact = dict(dataclasses.asdict(qm), **dataclasses.asdict(pb))
    rows = []
    for name, value in exact.items():
        c = closed.get(name)
        rows.append((name, value, "" if c is None else c, "" if c is None else abs(c - value)))
    write_csv(out, ("quantity", "exact", "closed_form", "abs_gap"), rows)


def cmd_surface(sc, args, out):
    if args.grid_n < 2:
        raise ConfigError("--grid-n must be >= 2")
    box = sc.box
    ms = np.linspace(box.m_min, box.m_max, args.grid_n)
    ss = np.linspace(box.s_min, box.s_max, args.grid_n)
    M, S = np.meshgrid(ms, ss, indexing="ij")
    if args.metric == Metric.PROFIT.value:
        V = economics.profit_closed(M, S, sc.platform.lam, sc.platform.econ())
    else:
        V = queueing.mean_wait_approx(M, S, sc.platform.lam)
    write_csv(out, ("m", "s", "value"), zip(M.ravel(), S.ravel(), V.ravel()))


def cmd_trace(sc, args, out):
    curve, _ = _curve(sc, args, Metric(args.metric))
    poly = trace(curve, args.columns)
    if poly.empty:
        raise TraceUnavailable(f"{curve.metric.value} curve at level {curve.level} does not cross the box")
    poly.write_csv(out)


def cmd_radius(sc, args, out):
    curve, params = _curve(sc, args, Metric(args.metric))
    center = WorkingPoint(args.m, args.s)
    res = radius_bruteforce(center, curve, params)
    rows = [res.csv_row()]
    if args.oracle:
        poly = trace(curve, 801)
        orc = radius_sampled(center, poly)
        rows.append(dataclasses.replace(orc, metric=curve.metric.value, level=curve.level).csv_row())
    write_csv(out, RadiusResult.CSV_HEADER, rows)


RESULT_HEADER = ("scenario", "algorithm", "seed", "m", "s", "fitness", "r_profit", "r_wait",
                 "iters_to_1pct", "total_evals")


def cmd_optimize(sc, args, out):
    kind = ScenarioKind(args.scenario or sc.scenario)
    scenario = sc.build_scenario(kind)
    run = optimize(scenario, sc.optimizer_config(args.algorithm))
    radii = {res.metric: res.r for res in run.radii if res is not None}
    row = (kind.value, run.algorithm.value, run.seed, run.best.m, run.best.s, run.fitness,
           radii.get(Metric.PROFIT.value, ""), radii.get(Metric.MEAN_WAIT.value, ""),
           run.trace.iters_to_within(0.01), run.trace.evals[-1])
    write_csv(out, RESULT_HEADER, [row])
    if args.trace:
        with open(args.trace, "w", newline="", encoding="utf-8") as fh:
            run.trace.write_csv(fh)


def cmd_compare(sc, args, out):
    kind = ScenarioKind(args.scenario or sc.scenario)
    try:
        algos = [Algorithm(a.strip()) for a in args.algos.split(",") if a.strip()]
    except ValueError as exc:
        raise ConfigError(f"--algos: {exc}") from exc
    if not algos or args.runs < 1:
        raise ConfigError("need at least one algorithm and one run")
    result = compare(sc.build_scenario(kind), algos, args.runs, sc.optimizer_config())
    result.write_summary(out)
    if args.trace_dir:
        result.write_traces(args.trace_dir)


def cmd_simulate(sc, args, out):
    p = sc.platform
    sim = SimConfig(
        QueueParams(args.m, args.s, p.lam, p.r_bar),
        n_arrivals=args.n_arrivals or sc.simulation.n_arrivals,
        warmup=sc.simulation.warmup if args.warmup is None else args.warmup,
        seed=sc.seed,
    )
    deadline = p.deadline if args.deadline is None else args.deadline
    res = run_sim(sim, deadline, keep_waits=bool(args.waits))
    res.write_summary(out)
    if args.waits:
        with open(args.waits, "w", newline="", encoding="utf-8") as fh:
            res.write_waits(fh)


COMMANDS = {"eval": cmd_eval, "surface": cmd_surface, "trace": cmd_trace, "radius": cmd_radius,
            "optimize": cmd_optimize, "compare": cmd_compare, "simulate": cmd_simulate}


def _load(args) -> cfgmod.ScenarioFile:
    sc = cfgmod.load(args.config) if args.config else cfgmod.load_reference()
    if args.seed is not None:
        sc = dataclasses.replace(sc, seed=args.seed)
    return sc


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help or a usage error
        return exc.code
    try:
        sc = _load(args)
        if args.dump_config:
            with _output(args.out) as out:
                out.write(cfgmod.dumps(sc))
            return EXIT_OK
        if args.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_CONFIG
        with _output(args.out) as out:
            COMMANDS[args.command](sc, args, out)
        return EXIT_OK
    except ConfigError as exc:
        print(f"robsched: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NoContactWithinRMax, TraceUnavailable) as exc:
        print(f"robsched: search error: {exc}", file=sys.stderr)
        return EXIT_SEARCH
    except (RobschedError, ValueError) as exc:
        print(f"robsched: model error: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
