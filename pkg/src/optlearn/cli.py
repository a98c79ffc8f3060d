"""Command-line entry point: ``optlearn {run,tune,voi,check,bound}``.

Exit codes: 0 on success, 2 on configuration or usage errors, 3 on
runtime failures.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .belief import IndependentBelief
from .errors import ConfigError, InputError, UsageError
from .harness import (
    RunConfig,
    load_config,
    parse_policy_flag,
    run_replications,
    tune,
    write_csv,
    write_experiment,
    write_json,
)
from .harness.config import coerce_value
from .harness.metrics import aggregate
from .voi import (
    MultisetFunctionTable,
    TwoArmSetup,
    adaptive_submodularity_counterexample,
    counterexample_sweep,
    kg_guarantee_bound,
    lp_bound,
    multiset_submodularity_check,
    submodular_region_check,
    voi_monte_carlo,
    voi_two_alt_closed,
    voi_two_alt_derivatives,
)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3
VOI_COLUMNS = ("z1", "z2", "v_closed", "v_mc", "mc_se", "dv_dz1", "d2v_dz1dz2", "in_submodular_region")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _key_value(text):
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key.strip(), coerce_value(value.strip())


def build_parser():
    p = _Parser(prog="optlearn", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run a policy tournament")
    run.add_argument("--config", type=Path)
    run.add_argument("--problem")
    run.add_argument("--param", action="append", type=_key_value, default=[],
                     metavar="KEY=VALUE", help="problem parameter override")
    run.add_argument("--policy", action="append", default=[],
                     metavar="KIND[:KEY=VALUE,...]", help="replaces the config's policy list")
    run.add_argument("--budget", type=int)
    run.add_argument("--replications", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--output-dir")
    run.add_argument("--threads", type=int)
    run.add_argument("--no-ratio", action="store_true", help="skip OC ratios")
    run.add_argument("--final-only", action="store_true", help="write only final-step rows")

    tn = sub.add_parser("tune", help="grid-search a policy parameter")
    tn.add_argument("--config", type=Path, help="take problem and run settings from a config")
    tn.add_argument("--problem")
    tn.add_argument("--param", action="append", type=_key_value, default=[], metavar="KEY=VALUE")
    tn.add_argument("--kind", required=True, choices=["ie", "ucbe"])
    tn.add_argument("--grid", required=True, help="comma-separated parameter values")
    tn.add_argument("--belief", choices=["independent", "correlated"], default="independent")
    tn.add_argument("--budget", type=int)
    tn.add_argument("--replications", type=int)
    tn.add_argument("--seed", type=int)
    tn.add_argument("--threads", type=int)
    tn.add_argument("--output", type=Path, default=Path("tune.csv"))

    voi = sub.add_parser("voi", help="two-arm value of information on a grid")
    voi.add_argument("--theta1", type=float, default=0.0)
    voi.add_argument("--theta2", type=float, default=0.0)
    voi.add_argument("--var1", type=float, default=1.0)
    voi.add_argument("--var2", type=float, default=1.0)
    voi.add_argument("--noise-var", type=float, default=1.0)
    voi.add_argument("--z1-min", type=float, default=1.0)
    voi.add_argument("--z1-max", type=float, default=10.0)
    voi.add_argument("--z2-min", type=float, default=1.0)
    voi.add_argument("--z2-max", type=float, default=10.0)
    voi.add_argument("--points", type=int, default=10, help="grid points per axis")
    voi.add_argument("--samples", type=int, default=10_000,
                     help="Monte Carlo samples at integer grid points (0 disables)")
    voi.add_argument("--seed", type=int, default=0)
    voi.add_argument("--output", type=Path, default=Path("voi.csv"))

    chk = sub.add_parser("check", help="counterexample and submodularity audits")
    chk.add_argument("--counterexample", action="store_true")
    chk.add_argument("--submodularity", action="store_true")
    chk.add_argument("--theta1", type=float, default=1.0)
    chk.add_argument("--theta2", type=float, default=0.0)
    chk.add_argument("--precision1", type=float, default=1.0)
    chk.add_argument("--precision2", type=float, default=1.0)
    chk.add_argument("--noise-precision", type=float, default=1.0)
    chk.add_argument("--w2", type=float, help="observation of arm 2 (default: window midpoint)")
    chk.add_argument("--cap", type=int, default=6, help="per-arm cap of the audited table")
    chk.add_argument("--output", type=Path, help="also write the JSON report here")

    bd = sub.add_parser("bound", help="approximation bound of the knowledge gradient")
    bd.add_argument("--n", type=int, help="single budget; prints the bound alone")
    bd.add_argument("--n-min", type=int, default=1)
    bd.add_argument("--n-max", type=int, default=10)
    return p


def _config_for_run(args) -> RunConfig:
    policies = tuple(parse_policy_flag(t) for t in args.policy)
    if args.config is not None:
        cfg = load_config(args.config)
    else:
        if not args.problem or not policies or args.budget is None:
            raise ConfigError("without --config, --problem, --policy and --budget are required")
        cfg = RunConfig(problem=args.problem, problem_params={}, policies=policies, budget=args.budget)
    return cfg.with_overrides(
        problem=args.problem,
        problem_params=dict(args.param),
        policies=policies or None,
        budget=args.budget,
        replications=args.replications,
        seed=args.seed,
        output_dir=args.output_dir,
        threads=args.threads,
        oc_ratio=False if args.no_ratio else None,
        trajectory=False if args.final_only else None,
    )


def _print_table(header, rows, out=None):
    out = out or sys.stdout
    rows = [[str(c) for c in r] for r in rows]
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(header)]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)), file=out)
    for r in rows:
        print("  ".join(c.ljust(w) for c, w in zip(r, widths)), file=out)


def cmd_run(args):
    cfg = _config_for_run(args)
    problem = cfg.build_problem()
    reps = run_replications(problem, list(cfg.policies), cfg.budget, cfg.replications,
                            cfg.seed, cfg.threads)
    result = aggregate(reps, ratio_enabled=problem.ratio_enabled and cfg.oc_ratio)
    meta = {
        "version": __version__,
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "problem": problem.metadata(),
        "design_measurements": [r.design_size for r in reps],
        "hyperparameters": [r.hyperparams for r in reps],
    }
    out = write_experiment(cfg.output_dir, result, meta, trajectory=cfg.trajectory)
    _print_table(
        ["policy", "mean_oc", "sd_oc", "p_optimal", "p_win"],
        [[n, f"{s.mean_oc:.4g}", f"{s.sd_oc:.4g}", f"{s.p_optimal:.3f}", f"{s.p_win:.3f}"]
         for n, s in result.policies.items()],
    )
    print(f"wrote {out}/results.csv, summary.csv, trajectory.csv, meta.json")
    return EXIT_OK


def cmd_tune(args):
    if args.config is not None:
        cfg = load_config(args.config)
        cfg = cfg.with_overrides(problem=args.problem, problem_params=dict(args.param),
                                 budget=args.budget, replications=args.replications,
                                 seed=args.seed, threads=args.threads)
    else:
        if not args.problem or args.budget is None:
            raise ConfigError("without --config, --problem and --budget are required")
        cfg = RunConfig(problem=args.problem, problem_params=dict(args.param),
                        policies=(parse_policy_flag(args.kind),), budget=args.budget,
                        replications=args.replications or 200, seed=args.seed or 0,
                        threads=args.threads)
    try:
        grid = [float(v) for v in args.grid.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad --grid {args.grid!r}") from None
    res = tune(args.kind, grid, cfg.build_problem(), cfg.budget, cfg.replications, cfg.seed,
               belief=args.belief, threads=cfg.threads)
    write_csv(args.output, (res.parameter, "mean_oc", "se_oc"), res.rows())
    _print_table([res.parameter, "mean_oc", "se_oc"],
                 [[f"{g:g}", f"{m:.4g}", f"{s:.3g}"] for g, m, s in res.rows()])
    print(f"best {res.parameter} = {res.best:g}")
    return EXIT_OK


def cmd_voi(args):
    if args.points < 1:
        raise UsageError("--points must be >= 1")
    setup = TwoArmSetup((args.theta1, args.theta2), (args.var1, args.var2), args.noise_var)
    prior = setup.to_belief()
    rng = np.random.default_rng(args.seed)
    rows = []
    for z1 in np.linspace(args.z1_min, args.z1_max, args.points):
        for z2 in np.linspace(args.z2_min, args.z2_max, args.points):
            z = (float(z1), float(z2))
            v = voi_two_alt_closed(setup, z)
            v_mc = se = None
            if args.samples > 0 and z1 == round(z1) and z2 == round(z2):
                v_mc, se = voi_monte_carlo(prior, (int(z1), int(z2)), args.samples, rng)
            d1 = d12 = None
            if z1 > 0 and z2 > 0:
                d1, d12 = voi_two_alt_derivatives(setup, z)
            rows.append((z[0], z[1], v, v_mc, se, d1, d12, submodular_region_check(setup, z)))
    write_csv(args.output, VOI_COLUMNS, rows)
    print(f"wrote {len(rows)} rows to {args.output}")
    return EXIT_OK


def cmd_check(args):
    both = not (args.counterexample or args.submodularity)
    report = {}
    prior = IndependentBelief((args.theta1, args.theta2), (args.precision1, args.precision2),
                              args.noise_precision)
    if args.counterexample or both:
        primary = adaptive_submodularity_counterexample(prior, args.w2)
        sweep = counterexample_sweep(prior)
        report["counterexample"] = {
            **primary.to_dict(),
            "sweep_points": len(sweep),
            "sweep_all_increased": all(r.increased for r in sweep),
        }
    if args.submodularity or both:
        if args.cap < 1:
            raise UsageError("--cap must be >= 1")
        setup = TwoArmSetup.from_belief(prior)
        table = MultisetFunctionTable.from_function(2, args.cap, lambda z: voi_two_alt_closed(setup, z))
        audit = multiset_submodularity_check(table)
        report["submodularity"] = {
            "cap": args.cap,
            **audit.to_dict(),
            "region_all": all(submodular_region_check(setup, (a, b))
                              for a in range(1, args.cap + 1) for b in range(1, args.cap + 1)),
        }
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if args.output is not None:
        write_json(args.output, report)
    return EXIT_OK


def cmd_bound(args):
    if args.n is not None:
        print(repr(kg_guarantee_bound(args.n)))
        return EXIT_OK
    if args.n_min < 1 or args.n_max < args.n_min:
        raise UsageError("need 1 <= --n-min <= --n-max")
    print("n,lp_bound,kg_guarantee_bound")
    for n in range(args.n_min, args.n_max + 1):
        print(f"{n},{lp_bound(n)!r},{kg_guarantee_bound(n)!r}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "tune": cmd_tune, "voi": cmd_voi, "check": cmd_check, "bound": cmd_bound}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, UsageError, InputError) as exc:
        print(f"optlearn: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"optlearn: runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
