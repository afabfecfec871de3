"""Command-line interface.

Exit codes: 0 success, 2 validation failure, 3 I/O error, 64 usage error,
70 internal assertion (e.g. a monotonicity violation).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bandit, bench, dp, gradient, io, model
from .errors import (IdIndexError, IntractableError, MissingFileError,
                     MmdpError, NonMonotoneError, ProbabilityError, SchemaError)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_USAGE = 64
EXIT_INTERNAL = 70

SOLVE_ALGORITHMS = ("mvp", "wsu", "cadp", "mirror", "gradient")
COMPARE_ALGORITHMS = ("mvp", "wsu", "cadp", "mirror", "gradient", "mixts", "oracle")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class UsageError(Exception):
    pass


def build_parser():
    parser = _Parser(prog="mmdp",
                     description="Finite-horizon multi-model MDP solver toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=0,
                       help="master seed; all randomness derives from it (default 0)")
        p.add_argument("--threads", type=int, default=1,
                       help="worker cap; results are independent of it (default 1)")

    p = sub.add_parser("validate", parents=[], help="validate a CSV domain directory")
    p.add_argument("domain", help="domain directory")
    p.add_argument("--horizon", type=int, default=1, help="horizon to load at (default 1)")

    p = sub.add_parser("solve", help="solve a domain with one algorithm")
    p.add_argument("domain", help="domain directory")
    p.add_argument("--algorithm", required=True, help="one of " + ", ".join(SOLVE_ALGORITHMS))
    p.add_argument("--horizon", type=int, required=True, help="decision horizon")
    p.add_argument("--init", default="wsu",
                   help="CADP initial policy: wsu, mvp, or random (default wsu)")
    p.add_argument("--tol", type=float, default=1e-9,
                   help="CADP absolute improvement tolerance (default 1e-9)")
    p.add_argument("--max-iters", type=int, default=100,
                   help="CADP iteration cap (default 100)")
    p.add_argument("--step-size", type=float, default=None,
                   help="gradient step size (default 0.1 mirror, 0.01 gradient)")
    p.add_argument("--iterations", type=int, default=200,
                   help="gradient iterations (default 200)")
    p.add_argument("--trace", default=None,
                   help="write per-iteration returns to this CSV file")
    p.add_argument("--policy-csv", default=None,
                   help="write the policy as idtime,idstate,idaction CSV")
    p.add_argument("--output", default=None, help="write the report JSON here")
    add_common(p)

    p = sub.add_parser("compare", help="solve on training models, evaluate on test models")
    p.add_argument("domain", help="domain directory")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--algorithms", default="mvp,wsu,cadp",
                   help="comma-separated subset of " + ", ".join(COMPARE_ALGORITHMS))
    p.add_argument("--episodes", type=int, default=10_000,
                   help="Monte-Carlo episodes per row (default 10000)")
    p.add_argument("--format", choices=("csv", "md", "json"), default="md")
    p.add_argument("--output", default=None)
    add_common(p)

    p = sub.add_parser("grad-check", help="verify the analytic policy gradient")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--domain", help="domain directory (training models)")
    src.add_argument("--random", nargs=4, type=int, metavar=("S", "A", "M", "T"),
                     help="use a random instance of the given dimensions")
    p.add_argument("--horizon", type=int, default=5, help="horizon for --domain")
    p.add_argument("--h", type=float, default=1e-5, help="finite-difference step")
    p.add_argument("--policy", choices=("uniform", "random"), default="uniform")
    add_common(p)

    p = sub.add_parser("regret-demo",
                       help="regret scan on the linear-regret example")
    p.add_argument("--weight", type=float, default=0.5,
                   help="first model's weight (default 0.5)")
    p.add_argument("--horizons", default="4,8,12,16,20,24,28,32,36,40",
                   help="comma-separated even horizons")
    p.add_argument("--policy", default="markov-best",
                   help="markov-best, mvp, wsu, or cadp (default markov-best)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", default=None)
    add_common(p)

    p = sub.add_parser("gen", help="generate a random CSV domain")
    p.add_argument("--states", type=int, required=True)
    p.add_argument("--actions", type=int, required=True)
    p.add_argument("--models", type=int, required=True)
    p.add_argument("--horizon", type=int, default=10)
    p.add_argument("--sparsity", type=float, default=1.0)
    p.add_argument("--out", required=True, help="output directory")
    add_common(p)

    return parser


def _emit(text, output):
    if output:
        with open(output, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def cmd_validate(args):
    bundle = io.load_domain(args.domain, args.horizon)
    report = model.validate(bundle.training)
    test_report = model.validate(bundle.test)
    report.violations.extend(f"test: {v}" for v in test_report.violations)
    print(report)
    return EXIT_OK if report.ok else EXIT_VALIDATION


def cmd_solve(args):
    if args.algorithm not in SOLVE_ALGORITHMS:
        raise UsageError(f"unknown algorithm {args.algorithm!r}")
    bundle = io.load_domain(args.domain, args.horizon)
    mmdp = bundle.training
    if args.algorithm == "mvp":
        report = dp.solve_mvp(mmdp)
    elif args.algorithm == "wsu":
        report = dp.solve_wsu(mmdp)
    elif args.algorithm == "cadp":
        if args.init not in ("wsu", "mvp", "random"):
            raise UsageError(f"unknown init {args.init!r}")
        report = dp.solve_cadp(mmdp, init=args.init, max_iters=args.max_iters,
                               tol=args.tol, seed=args.seed)
    else:
        variant = "mirror" if args.algorithm == "mirror" else "projected"
        step = args.step_size
        if step is None:
            step = 0.1 if variant == "mirror" else 0.01
        cfg = gradient.FirstOrderConfig(step_size=step, iterations=args.iterations,
                                        seed=args.seed, variant=variant)
        report = gradient.solve_first_order(mmdp, cfg)
    doc = report.to_dict()
    doc["algorithm"] = args.algorithm
    _emit(json.dumps(doc, indent=2) + "\n", args.output)
    if args.trace:
        with open(args.trace, "w") as handle:
            handle.write("iteration,return\n")
            for i, r in enumerate(report.iterate_returns):
                handle.write(f"{i},{r!r}\n")
    if args.policy_csv:
        io.write_policy_csv(report.policy, args.policy_csv)
    return EXIT_OK


def cmd_compare(args):
    algorithms = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    unknown = [a for a in algorithms if a not in COMPARE_ALGORITHMS]
    if unknown:
        raise UsageError(f"unknown algorithms {unknown}")
    bundle = io.load_domain(args.domain, args.horizon)
    table = bench.compare(bundle, algorithms, horizon=args.horizon,
                          episodes=args.episodes, seed=args.seed)
    if args.format == "csv":
        _emit(table.to_csv(), args.output)
    elif args.format == "json":
        _emit(table.to_json() + "\n", args.output)
    else:
        _emit(table.to_markdown(), args.output)
    return EXIT_OK


def cmd_grad_check(args):
    if args.random:
        s, a, m, t = args.random
        mmdp = bench.random_instance(s, a, m, t, seed=args.seed)
    else:
        mmdp = io.load_domain(args.domain, args.horizon).training
    if args.policy == "uniform":
        policy = model.Policy.uniform(mmdp.horizon, mmdp.n_states, mmdp.n_actions)
    else:
        rng = np.random.default_rng(args.seed)
        probs = rng.random((mmdp.horizon, mmdp.n_states, mmdp.n_actions)) + 0.1
        policy = model.Policy.randomized(probs / probs.sum(axis=2, keepdims=True))
    report = gradient.grad_check(mmdp, policy, h=args.h)
    print(json.dumps(report.to_dict()))
    return EXIT_OK


def cmd_regret_demo(args):
    horizons = [int(x) for x in args.horizons.split(",") if x.strip()]
    mmdp = bandit.counterexample_mmdp(args.weight, max(horizons))
    report = bandit.regret_scan(mmdp, args.policy, horizons)
    if args.format == "json":
        _emit(json.dumps(report.to_dict(), indent=2) + "\n", args.output)
    else:
        _emit(report.to_csv(), args.output)
    return EXIT_OK


def cmd_gen(args):
    mmdp = bench.random_instance(args.states, args.actions, args.models,
                                 args.horizon, seed=args.seed,
                                 sparsity=args.sparsity)
    io.write_domain(model.DomainBundle(training=mmdp, test=mmdp), args.out)
    print(args.out)
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "solve": cmd_solve,
    "compare": cmd_compare,
    "grad-check": cmd_grad_check,
    "regret-demo": cmd_regret_demo,
    "gen": cmd_gen,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"mmdp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MissingFileError as exc:
        print(f"mmdp: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SchemaError, ProbabilityError, IdIndexError) as exc:
        print(f"mmdp: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NonMonotoneError as exc:
        print(f"mmdp: internal assertion failed: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (IntractableError, MmdpError) as exc:
        print(f"mmdp: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"mmdp: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
