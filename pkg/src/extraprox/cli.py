"""Command-line entry points: ``extraprox bench`` and ``extraprox klbound``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .solvers import ConfigurationError, StepSchedule

__all__ = ["main"]


def _csv_list(text: str) -> tuple:
    return tuple(tok.strip() for tok in text.split(",") if tok.strip())


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="extraprox",
        description="Composite-minimization solvers: benchmark and KL bound tables.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="run the synthetic l1 least-squares benchmark")
    b.add_argument("--n", type=int, default=600)
    b.add_argument("--p", type=int, default=300)
    b.add_argument("--delta", type=str, default="0.1,0.3,0.9",
                   help="comma-separated conditioning exponents")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="l1 weight (default 1/n)")
    b.add_argument("--methods", type=str, default="eeg,fb,fista",
                   help="comma-separated subset of eeg,fb,fista")
    b.add_argument("--rules", type=str, default="1/L,2/L,backtracking,exact",
                   help="comma-separated subset of 1/L,2/L,backtracking,exact")
    b.add_argument("--max-iters", type=int, default=50_000)
    b.add_argument("--tol", type=float, default=1e-12)
    b.add_argument("--out-dir", type=Path, default=Path("bench_out"))
    b.add_argument("--plot", action=argparse.BooleanOptionalAction, default=True)

    k = sub.add_parser("klbound", help="emit a small-prox bound table as CSV")
    k.add_argument("--theta", type=float, required=True,
                   help="Lojasiewicz exponent in [1/2, 1)")
    k.add_argument("--c", type=float, required=True, help="desingularization scale")
    k.add_argument("--r0", type=float, required=True, help="initial objective gap")
    k.add_argument("--L", type=float, required=True, help="gradient Lipschitz constant")
    k.add_argument("--s", type=float, default=None,
                   help="scout step (default: the c3 default schedule)")
    k.add_argument("--alpha", type=float, default=None,
                   help="update step (default: the c3 default schedule)")
    k.add_argument("--k-max", type=int, default=100)
    k.add_argument("--out", type=Path, default=None,
                   help="output CSV path (default: stdout)")
    return parser


def _cmd_bench(args) -> int:
    from .bench import BenchConfig, run_benchmark

    config = BenchConfig(
        n=args.n,
        p=args.p,
        deltas=tuple(float(d) for d in _csv_list(args.delta)),
        seed=args.seed,
        lam=args.lam,
        methods=_csv_list(args.methods),
        rules=_csv_list(args.rules),
        max_iters=args.max_iters,
        tol=args.tol,
        out_dir=args.out_dir,
        plot=args.plot,
    )
    result = run_benchmark(config)
    print(f"wrote {result['csv']}")
    for path in result["plots"]:
        print(f"wrote {path}")
    return 0


def _cmd_klbound(args) -> int:
    from .klbound import KLParams, beta_sequence, bounds, constants, zeta

    params = KLParams.power(args.theta, args.c, args.r0)
    if (args.s is None) != (args.alpha is None):
        raise ConfigurationError("--s and --alpha must be given together")
    if args.s is None:
        schedule = StepSchedule.c3_default(args.L)
    else:
        schedule = StepSchedule.constant(args.s, args.alpha, regime="c3")
    C, B = constants(schedule, args.L)
    z = zeta(params.ell, C, B)
    betas = beta_sequence(params, z, args.k_max)
    table = bounds(params, C, B, betas)

    fh = open(args.out, "w") if args.out is not None else sys.stdout
    try:
        fh.write("k,beta,obj_bound,dist_bound\n")
        for k in range(len(betas)):
            fh.write(
                f"{k},{table.betas[k]:.17g},{table.objective_bounds[k]:.17g},"
                f"{table.distance_bounds[k]:.17g}\n"
            )
    finally:
        if args.out is not None:
            fh.close()
    if args.out is not None:
        print(f"wrote {args.out}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "bench":
            return _cmd_bench(args)
        return _cmd_klbound(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
