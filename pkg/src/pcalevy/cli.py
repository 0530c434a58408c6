"""Command-line front end.  Every subcommand writes CSV to stdout or ``--out``.

Exit status: 0 success, 2 invalid input, 3 divergent result where a finite
one was required.
"""

from __future__ import annotations

import argparse
import math
import sys

from .errors import DivergenceError, InfeasibleDomainError, PcaError
from .fluctuation import critical_bprime
from .levy_core import build_scale
from .mc_oracle import SimConfig, estimate_trigger_law, simulate_paths
from .optimizer import comparative_statics, optimize_bprime, sweep_bprime
from .pca_cost import StatePair, branch, cost_breakdown, scale_functions, total_cost
from .scenario_io import read_scenario, render_csv

EXIT_OK, EXIT_INVALID, EXIT_DIVERGENT = 0, 2, 3


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def cmd_scale(args, sf_file):
    scn = sf_file.scenario
    sf = build_scale(scn.regime0 if args.regime == 0 else scn.regime1, args.q or scn.q)
    rows = [(x, sf.w(x), sf.w(x, 1), sf.w(x, 2), sf.z(x)) for x in args.x]
    return render_csv(["x", "W", "W1", "W2", "Z"], rows)


def cmd_cost(args, sf_file):
    scn = sf_file.scenario
    if args.bprime is not None:
        scn = scn.with_bprime(args.bprime)
    st = StatePair(args.x, args.s)
    br = cost_breakdown(scn, st)
    header = ["x", "s", "bprime", "branch", "initial", "running", "penalty", "cost_first"]
    row = [st.x, st.s, scn.bprime, branch(scn, st), br.initial, br.running, br.penalty, br.total]
    if args.series:
        header.append("total_cost")
        row.append(total_cost(scn, st))
    return render_csv(header, [row])


def cmd_sweep(args, sf_file):
    w = sf_file.window
    lo = w.lo if args.lo is None else args.lo
    hi = w.hi if args.hi is None else args.hi
    steps = w.steps if args.steps is None else args.steps
    rows = sweep_bprime(sf_file.scenario, lo, hi, steps)
    return render_csv(["bprime", "cost"], [(r.bprime, r.cost) for r in rows])


def _domain(args):
    if args.lo is None and args.hi is None:
        return None
    return (args.lo if args.lo is not None else 0.0, args.hi if args.hi is not None else math.inf)


def cmd_optimize(args, sf_file):
    opt = optimize_bprime(sf_file.scenario, _domain(args))
    lo, hi = opt.domain
    return render_csv(["bstar", "cost", "boundary", "lo", "hi"],
                      [(opt.bstar, opt.cost_at_bstar, opt.boundary_flag, lo, hi)])


def cmd_statics(args, sf_file):
    rows = []
    for r in comparative_statics(sf_file.scenario, args.param, args.values):
        if r.optimum is None:
            rows.append((r.param, r.value, math.nan, None, False, r.error))
        else:
            o = r.optimum
            rows.append((r.param, r.value, o.bstar, o.cost_at_bstar, o.boundary_flag, ""))
    return render_csv(["param", "value", "bstar", "cost", "boundary", "error"], rows)


def cmd_mc(args, sf_file):
    scn = sf_file.scenario
    if args.bprime is not None:
        scn = scn.with_bprime(args.bprime)
    st = StatePair(args.x, args.s)
    cfg = SimConfig(n_paths=args.paths, dt=args.dt, seed=args.seed, horizon=args.horizon,
                    max_pca_rounds=args.rounds, tilt=args.tilt)
    header = ["quantity", "mean", "stderr", "n"]
    if args.what == "trigger":
        tl = estimate_trigger_law(scn, cfg, st)
        rows = [(name, e.mean, e.stderr, e.n) for name, e in
                (("creep", tl.creep), ("jump", tl.jump), ("overshoot", tl.overshoot))]
        rows.append(("decay", tl.decay_rate, math.nan, cfg.n_paths))
        return render_csv(header, rows)
    batch = simulate_paths(scn, cfg, st)
    rows = [(name, e.mean, e.stderr, e.n) for name, e in
            ((name, batch.estimate(name)) for name in ("total", "initial", "running", "penalty"))]
    rows.append(("horizon_hits", float(batch.horizon_hit.sum()), 0.0, cfg.n_paths))
    return render_csv(header, rows)


def cmd_critical(args, sf_file):
    sf0, _ = scale_functions(sf_file.scenario)
    crit = critical_bprime(sf0, args.level)
    return render_csv(["critical_bprime"], [(math.inf if crit is None else crit,)])


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pcalevy", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--scenario", default="paper.scenario",
                        help="scenario file (bundled 'paper.scenario' if no such file exists)")
        sp.add_argument("--out", help="write CSV here instead of stdout")
        sp.set_defaults(func=func)
        return sp

    sp = add("scale", cmd_scale, "evaluate W, W', W'' and Z")
    sp.add_argument("--regime", type=int, choices=(0, 1), default=0)
    sp.add_argument("--x", type=_floats, required=True, help="comma-separated points")
    sp.add_argument("--q", type=float, help="discount rate (default: scenario q)")

    sp = add("cost", cmd_cost, "first-PCA cost with its breakdown")
    sp.add_argument("--x", type=float, default=0.0)
    sp.add_argument("--s", type=float, default=0.0)
    sp.add_argument("--bprime", type=float)
    sp.add_argument("--series", action="store_true", help="also sum the cost over all PCAs")

    sp = add("sweep", cmd_sweep, "cost at the origin over a trigger-level grid")
    sp.add_argument("--lo", type=float)
    sp.add_argument("--hi", type=float)
    sp.add_argument("--steps", type=int)

    sp = add("optimize", cmd_optimize, "cost-minimizing trigger level")
    sp.add_argument("--lo", type=float)
    sp.add_argument("--hi", type=float)

    sp = add("statics", cmd_statics, "optimum as one parameter varies")
    sp.add_argument("--param", choices=("sigma1", "mu1", "a_target"), required=True)
    sp.add_argument("--values", type=_floats, required=True)

    sp = add("mc", cmd_mc, "Monte Carlo estimate of the first-PCA cost or trigger law")
    sp.add_argument("--what", choices=("cost", "trigger"), default="cost")
    sp.add_argument("--x", type=float, default=0.0)
    sp.add_argument("--s", type=float, default=0.0)
    sp.add_argument("--bprime", type=float)
    sp.add_argument("--paths", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--dt", type=float, default=1e-4)
    sp.add_argument("--horizon", type=float, default=200.0)
    sp.add_argument("--rounds", type=int, default=1)
    sp.add_argument("--tilt", type=float, default=0.0,
                    help="exponential tilt of the normal regime (about 1.5 near the optimum)")

    sp = add("critical", cmd_critical, "trigger level beyond which costs diverge")
    sp.add_argument("--level", type=float, default=1.0, help=argparse.SUPPRESS)
    return p


def run_command(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        text = args.func(args, read_scenario(args.scenario))
    except (DivergenceError, InfeasibleDomainError) as exc:
        print(f"pcalevy {args.command}: {exc}", file=sys.stderr)
        return EXIT_DIVERGENT
    except (PcaError, ValueError, ArithmeticError) as exc:
        print(f"pcalevy {args.command}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run_command())
