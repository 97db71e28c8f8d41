"""Command-line interface.

Subcommands:
  run       simulate `trials` frames at a single configuration
  sweep     grid over user counts and Pa/Pk ratios, write a CSV
  selftest  run the built-in invariant suites
  leakage   analytic equivocation report, no link simulation

Exit codes: 0 success, 1 selftest failure, 2 configuration error, 3 I/O error.
"""

import argparse
import sys
from dataclasses import replace

import numpy as np

from .config import ConfigError, SystemConfig, desk_scale, load_config
from .harness import (emit_csv, equivocation_lower, run_point, run_sweep,
                      selftest, split_power_budget)
from .leakage import leakage_eigen
from .params import generate_public_params
from .rng import complex_normal, stream


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="secure-ura",
        description="Monte Carlo link simulator for secure unsourced random access")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--trials", type=int, help="trials per grid point")
        p.add_argument("--desk-scale", action="store_true",
                       help="reduced preset: 8 antennas each side, 200 trials")

    p_run = sub.add_parser("run", help="simulate one configuration")
    common(p_run)
    p_run.add_argument("--out", help="optional CSV output path")

    p_sweep = sub.add_parser("sweep", help="run a (Ka, Pa/Pk) grid")
    common(p_sweep)
    p_sweep.add_argument("--ka", type=_int_list, default=[1, 25, 50, 75, 100],
                         help="comma-separated user counts")
    p_sweep.add_argument("--ratio", type=_float_list, default=[1, 2, 3, 5, 7],
                         help="comma-separated Pa/Pk ratios")
    p_sweep.add_argument("--out", required=True, help="CSV output path")

    p_self = sub.add_parser("selftest", help="run the invariant suites")
    common(p_self)

    p_leak = sub.add_parser("leakage", help="analytic equivocation report")
    common(p_leak)
    p_leak.add_argument("--ratio", type=_float_list, default=None,
                        help="comma-separated Pa/Pk ratios (default: the config's split)")
    p_leak.add_argument("--out", help="optional CSV output path")

    return parser


def _load(args) -> SystemConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.desk_scale:
        cfg = desk_scale(cfg, trials=args.trials)
    elif args.trials is not None:
        if args.trials < 1:
            raise ConfigError(f"trials: must be a positive integer, got {args.trials}")
        cfg = replace(cfg, trials=args.trials)
    return cfg


def _cmd_run(args) -> int:
    cfg = _load(args)
    res = run_point(cfg)
    print(f"ka={res.ka} pa={res.pa:.6g} pk={res.pk:.6g} trials={res.trials} "
          f"pupe={res.pupe_mean:.6g}±{res.pupe_stderr:.3g} "
          f"zeta_lower={res.zeta_lower_mean:.6g}")
    if args.out:
        emit_csv([res], args.out)
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load(args)
    def progress(r):
        print(f"ka={r.ka} ratio={r.ratio:g} pupe={r.pupe_mean:.4g} "
              f"zeta_lower={r.zeta_lower_mean:.4g}", flush=True)
    results = run_sweep(cfg, args.ka, args.ratio, cfg.trials, progress)
    emit_csv(results, args.out)
    print(f"wrote {len(results)} rows to {args.out}")
    return 0


def _cmd_selftest(args) -> int:
    cfg = _load(args)
    return 0 if selftest(cfg) else 1


def _cmd_leakage(args) -> int:
    cfg = _load(args)
    params = generate_public_params(cfg)
    budget = cfg.key_budget
    ratios = args.ratio
    if ratios is None:
        ratios = [cfg.Pa / cfg.Pk if cfg.Pk > 0 else float("inf")]
    rows = []
    for ratio in ratios:
        pa, pk = split_power_budget(budget, ratio)
        zetas = []
        for t in range(cfg.trials):
            g = complex_normal(stream(cfg.seed, "eve-channel", t), (1, cfg.E))[0]
            leak = leakage_eigen(g, params.C2, pk, pa, cfg.sigma_e2)
            zetas.append(equivocation_lower(leak, cfg.S))
        rows.append((ratio, pa, pk, float(np.mean(zetas))))
        print(f"ratio={ratio:g} pa={pa:.6g} pk={pk:.6g} "
              f"zeta_lower_mean={rows[-1][3]:.6g}")
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write("ratio,pa,pk,zeta_lower_mean\n")
                for ratio, pa, pk, z in rows:
                    fh.write(f"{ratio:.12g},{pa:.12g},{pk:.12g},{z:.12g}\n")
        except OSError as exc:
            raise OSError(f"cannot write {args.out}: {exc}") from exc
    return 0


_COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep,
             "selftest": _cmd_selftest, "leakage": _cmd_leakage}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
