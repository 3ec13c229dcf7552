"""Command-line front end.

Exit codes: 0 success, 1 usage or I/O problem, 2 domain error (no secrecy,
validation failure, enumeration budget, failed structural audit).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import experiments
from .channel import load_channel
from .errors import WiretapError
from .infotheory import GaussianWiretapParams, RateProfile, gaussian_rates, rate_profile

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _print_profile(profile: RateProfile) -> None:
    print(f"C={profile.main_capacity:.6f}")
    print(f"R_s={profile.secrecy_capacity:.6f}")
    print(f"lambda={profile.lam}")
    print(f"ratio_is_integer={str(profile.ratio_is_integer).lower()}")
    print(f"keyed_rate={profile.keyed_rate:.6f}")
    if profile.optimizer_c is not None:
        print("optimizer_c=" + json.dumps([round(p, 6) for p in profile.optimizer_c.probs]))
        print("optimizer_rs=" + json.dumps([round(p, 6) for p in profile.optimizer_rs.probs]))


def _load_config(args) -> experiments.ExperimentConfig:
    if not args.config:
        raise UsageError("--config is required")
    path = Path(args.config)
    if not path.is_file():
        raise UsageError(f"config file not found: {path}")
    try:
        cfg = experiments.ExperimentConfig.from_file(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "trials", None) is not None:
        cfg.trials = args.trials
    return cfg


def cmd_rates(args) -> int:
    path = Path(args.config) if args.config else None
    if path is None or not path.is_file():
        raise UsageError(f"channel file not found: {args.config}")
    try:
        model = load_channel(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    profile = rate_profile(model, args.grid_steps)
    _print_profile(profile)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        experiments.write_json(out / "rates.json", profile.to_dict())
    return EXIT_OK


def cmd_gaussian(args) -> int:
    for name in ("power", "sigma_b_sq", "sigma_e_sq"):
        if not getattr(args, name) > 0:
            raise UsageError(f"--{name.replace('_', '-')} must be positive")
    profile = gaussian_rates(GaussianWiretapParams(args.power, args.sigma_b_sq, args.sigma_e_sq))
    _print_profile(profile)
    return EXIT_OK


def cmd_schedule(args) -> int:
    cfg = _load_config(args)
    setup = experiments.prepare(cfg)
    print("slot,local,mini_slots,wiretap_msgs,keyed_msgs,key_rate_bits,slot_rate")
    for row in setup.schedule.to_rows():
        print("{slot},{local},{mini_slots},{wiretap_msgs},{keyed_msgs},{key_rate_bits},{slot_rate:.6f}"
              .format(**row))
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    threads = args.threads or experiments.default_threads()
    curve = experiments.run_simulation(cfg, args.out, threads)
    for r in curve.rows:
        print(f"slot {r.slot}: p_err={r.estimate.p:.4f} bound={r.bound:.4f} "
              f"{'VIOLATION' if r.flag else 'ok'}")
    print(f"wrote results to {args.out}")
    return EXIT_OK


def cmd_leakage(args) -> int:
    cfg = _load_config(args)
    report = experiments.run_leakage(cfg, args.out)
    for (m, k), v in sorted(report.leakage.items()):
        print(f"I(W{m};Z^({k})) = {v:.6g} bits  rate={v / report.n:.6g}")
    failed = report.failures()
    for c in failed:
        print(f"FAILED {c.key}: {c.expr} lhs={c.lhs:.3g} rhs={c.rhs:.3g}", file=sys.stderr)
    print(f"structural checks: {'all pass' if not failed else f'{len(failed)} failed'}")
    return EXIT_OK if not failed else EXIT_DOMAIN


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wiretap-chain", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("rates", help="capacity, secrecy capacity and lambda of a channel file")
    p.add_argument("--config", required=True, help="channel JSON file")
    p.add_argument("--grid-steps", type=int, default=201)
    p.add_argument("--out", help="directory for rates.json")
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("gaussian", help="closed-form AWGN wiretap rates")
    p.add_argument("--power", type=float, required=True)
    p.add_argument("--sigma-b-sq", type=float, required=True)
    p.add_argument("--sigma-e-sq", type=float, required=True)
    p.set_defaults(func=cmd_gaussian)

    p = sub.add_parser("schedule", help="print the slot schedule of a session config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_schedule)

    for name, func, helptext in (("simulate", cmd_simulate, "Monte-Carlo error curves and rate ramp"),
                                 ("leakage", cmd_leakage, "exact enumeration leakage audit")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int)
        p.add_argument("--out", default="results")
        if name == "simulate":
            p.add_argument("--trials", type=int)
            p.add_argument("--threads", type=int, help="worker processes (default: all cores)")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"wiretap-chain: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except WiretapError as exc:
        print(f"wiretap-chain: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"wiretap-chain: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
