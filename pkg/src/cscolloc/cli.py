"""Command-line entry point: ``cscolloc <subcommand> [options]``.

Exit codes: 0 success, 1 invalid configuration, 2 resource cap exceeded,
3 numerical failure (including a failed ``verify`` check).
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from . import verification
from .assembly import assemble_full
from .errors import (
    ConfigError,
    InvalidArgumentError,
    InvalidIndexError,
    NumericalError,
    ResourceLimitError,
)
from .rip import rip_constant, verify_rip_theorem
from .sampling import SampleDraw, build_compressive
from .solver import relative_L2_function_error, solve_compressive, solve_full

EXIT_OK, EXIT_CONFIG, EXIT_RESOURCE, EXIT_NUMERICAL = 0, 1, 2, 3


def _csv(cast):
    def parse(text):
        try:
            return tuple(cast(v) for v in text.split(",") if v.strip())
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return parse


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="INI file with an [experiment] section")
    p.add_argument("--n", type=int, help="truncation order (default 32)")
    p.add_argument("--d", type=int, help="dimension (default 2)")
    p.add_argument("--sparsity", type=_csv(int), help="comma-separated sparsity levels")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, dest="seed_base", help="base seed; trial t uses seed+t")
    p.add_argument("--eta-affine", type=_csv(float),
                   help="weights w of eta = 1 + w.z (all zeros for the Poisson case)")
    p.add_argument("--full-recovery", type=_csv(str),
                   help="full-system recovery: direct, omp, both (direct,omp) or none")
    p.add_argument("--out", type=str, dest="out_dir", help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cscolloc",
                                     description="Compressive spectral collocation for diffusion")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve the bubble test problem once, print a JSON report")
    _common(p)
    p.add_argument("--method", choices=("full", "full-omp", "compressive"), default="compressive")
    p.add_argument("--s", type=int, help="target sparsity (sets m and K by default)")
    p.add_argument("--m", type=int)
    p.add_argument("--K", type=int)
    p.add_argument("--coefficients", action="store_true", help="include coefficients in JSON")
    p.add_argument("--dump-system", type=Path, help="write the full (B, c) in CSCB format")

    for name, helptext in (("sparse-exp", "random sparse solutions study"),
                           ("compressible-exp", "compressible bubble solution study")):
        p = sub.add_parser(name, help=helptext)
        _common(p)

    p = sub.add_parser("rip-check", help="brute-force RIP constants on tiny instances")
    _common(p)
    p.add_argument("--m", type=_csv(int), default=(2, 4, 8), help="numbers of rows to compare")
    p.add_argument("--delta", type=float, default=0.5, help="target RIP constant")

    p = sub.add_parser("verify", help="run the matrix-property suite")
    _common(p)
    return parser


def _config(args, kind: str, **defaults) -> ex.ExperimentConfig:
    cfg = ex.ExperimentConfig.from_file(args.config) if args.config else ex.ExperimentConfig()
    updates = dict(kind=kind)
    if not args.config:
        updates.update(defaults)
    for name in ("n", "d", "sparsity", "trials", "seed_base", "out_dir", "full_recovery"):
        val = getattr(args, name, None)
        if val is not None:
            updates[name] = val
    if args.eta_affine is not None:
        updates["eta_affine"] = None if not any(args.eta_affine) else args.eta_affine
    if "full_recovery" in updates and updates["full_recovery"] == ("none",):
        updates["full_recovery"] = ()
    cfg = dataclasses.replace(cfg, **updates)
    if cfg.eta_affine is not None and len(cfg.eta_affine) != cfg.d and args.eta_affine is None:
        cfg = dataclasses.replace(cfg, eta_affine=(0.25,) * cfg.d)
    if args.sparsity is None and not args.config:
        # default levels that do not fit a small N are dropped rather than rejected
        fitting = tuple(s for s in cfg.sparsity if s <= cfg.N) or (1,)
        cfg = dataclasses.replace(cfg, sparsity=fitting)
    return cfg.validate()


def _write_outputs(cfg, records, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    ex.write_csv(records, out_dir / f"{cfg.kind}_trials.csv")
    cfg.to_file(out_dir / f"{cfg.kind}_config.ini")
    summary = {"config": ex.config_dict(cfg), "summary": ex.summarize(records)}
    (out_dir / f"{cfg.kind}_summary.json").write_text(json.dumps(summary, indent=2))


def cmd_experiment(args, kind: str) -> int:
    cfg = _config(args, kind)
    runner = ex.run_sparse_experiment if kind == "sparse" else ex.run_compressible_experiment
    records = runner(cfg)
    _write_outputs(cfg, records, Path(cfg.out_dir))
    for entry in ex.summarize(records, metrics=("error",)):
        e = entry["error"]
        print(f"{entry['method']:<12} s={entry['s']:<4} median error {e['median']:.3e} "
              f"[{e['min']:.3e}, {e['max']:.3e}]")
    return EXIT_OK


def cmd_solve(args) -> int:
    cfg = _config(args, "compressible", trials=1)
    problem = ex.compressible_problem(cfg)
    if args.method == "compressive":
        s = args.s if args.s is not None or (args.m and args.K) else min(32, problem.N)
        report = solve_compressive(problem, s=s, m=args.m, K=args.K, seed=cfg.seed_base)
    elif args.method == "full-omp":
        K = args.K or args.s
        if K is None:
            raise ConfigError("--method full-omp needs --K or --s")
        report = solve_full(problem, "omp", K=K)
    else:
        report = solve_full(problem, "direct")
    report.extras["l2_error"] = relative_L2_function_error(report.expansion(), problem.exact.u,
                                                           problem.d)
    if args.dump_system:
        system = assemble_full(problem.eta, problem.forcing, cfg.n, cfg.d)
        system.dump(args.dump_system)
    print(report.to_json(include_coefficients=args.coefficients, indent=2))
    return EXIT_OK


def cmd_rip(args) -> int:
    cfg = _config(args, "rip", n=3, sparsity=(2,), trials=100)
    eta = cfg.eta()
    results = []
    for s in cfg.sparsity:
        for m in args.m:
            rep = verify_rip_theorem(eta, cfg.n, cfg.d, s, args.delta, cfg.trials,
                                     cfg.seed_base, m)
            results.append({"s": s, "m": m, "delta_target": args.delta,
                            "success_rate": rep.success_rate,
                            "median_delta": float(np.median(rep.deltas)), "R": rep.R})
    full = build_compressive(eta, None, cfg.n, cfg.d,
                             SampleDraw.from_rows(np.arange(cfg.N), cfg.n, cfg.d)).A
    deterministic = {s: rip_constant(full, s).delta for s in cfg.sparsity}
    out = {"config": ex.config_dict(cfg), "trend": results,
           "all_rows_delta": {str(k): v for k, v in deterministic.items()}}
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_verify(args) -> int:
    weights = args.eta_affine if args.eta_affine is not None else (0.25,) * (args.d or 2)
    checks = verification.run_all(weights)
    for c in checks:
        print(c.line())
    return EXIT_OK if all(c.passed for c in checks) else EXIT_NUMERICAL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "solve":
            return cmd_solve(args)
        if args.command in ("sparse-exp", "compressible-exp"):
            return cmd_experiment(args, args.command.split("-")[0])
        if args.command == "rip-check":
            return cmd_rip(args)
        return cmd_verify(args)
    except (ConfigError, InvalidArgumentError, InvalidIndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
