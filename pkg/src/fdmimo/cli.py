"""Command line entry point: ``fdmimo {run,fig2,fig3,fig4,validate}``."""

from __future__ import annotations

import argparse
import logging
import sys

from .analog import EnumerationTooLarge
from .config import ConfigError, SystemConfig, config_from_mapping, load_config, normalize_key
from .harness import ExperimentError, ExperimentResult, run_experiment, to_csv, write_csv
from .presets import PINNED_FIELDS, PRESET_TRIALS, PRESETS
from .validate import run_checks

log = logging.getLogger("fdmimo")


class UsageError(Exception):
    pass


def _parse_overrides(extra: list[str]) -> dict[str, str]:
    """``--key=value`` or ``--key value`` pairs for any config field."""
    out = {}
    it = iter(extra)
    for tok in it:
        if not tok.startswith("--"):
            raise UsageError(f"unexpected argument {tok!r}")
        if "=" in tok:
            key, value = tok[2:].split("=", 1)
        else:
            key = tok[2:]
            try:
                value = next(it)
            except StopIteration:
                raise UsageError(f"flag {tok} needs a value") from None
        out[key] = value
    return out


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdmimo",
        allow_abbrev=False,
        description="Full-duplex MIMO reduced-tap analog cancellation + beamforming simulator.",
        epilog="Any config field may be overridden as --key=value, e.g. --m_q=4 --p_k_dbm=20,30,40.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress per sweep point")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, default_trials):
        p.add_argument("--config", help="flat TOML config file")
        p.add_argument("--out", help="CSV output path (default: stdout)")
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int, help=f"trials per sweep point (default {default_trials})")
        p.add_argument("--jobs", type=int, help="worker processes")

    run = sub.add_parser("run", allow_abbrev=False, help="run the experiment described by a config")
    add_common(run, SystemConfig.n_trials)
    run.add_argument("--design", help="proposed, sota_full, sota_zero (comma-separated for several)")
    for name in PRESETS:
        add_common(sub.add_parser(name, allow_abbrev=False, help=f"preset reproducing {name} (M_q and designs fixed)"), PRESET_TRIALS)
    val = sub.add_parser("validate", allow_abbrev=False, help="check invariants on random instances")
    val.add_argument("--instances", type=int, default=200)
    val.add_argument("--seed", type=int, default=0)
    return parser


def _config_for(args, overrides: dict[str, str], base: SystemConfig) -> SystemConfig:
    cfg = load_config(args.config, base) if args.config else base
    flags = {k: v for k, v in (("seed", args.seed), ("n_trials", args.trials), ("jobs", args.jobs)) if v is not None}
    if getattr(args, "design", None):
        flags["design"] = args.design
    return config_from_mapping({**flags, **overrides}, cfg)


def _emit(result: ExperimentResult, out: str | None):
    if out:
        write_csv(result, out)
        log.info("wrote %s", out)
    else:
        sys.stdout.write(to_csv(result))


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args, extra = parser.parse_known_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s"
    )
    try:
        if args.command == "validate":
            if extra:
                raise UsageError(f"unknown arguments {extra}")
            results = run_checks(args.instances, args.seed)
            for r in results:
                print(r.line())
            return 0 if all(r.passed for r in results) else 1

        overrides = _parse_overrides(extra)
        if args.command == "run":
            cfg = _config_for(args, overrides, SystemConfig())
            _emit(run_experiment(cfg), args.out)
            return 0

        pinned = [k for k in overrides if normalize_key(k) in PINNED_FIELDS]
        if pinned:
            raise UsageError(f"{args.command} fixes {', '.join(PINNED_FIELDS)}; use `run` to change {pinned}")
        cfg = _config_for(args, overrides, SystemConfig(n_trials=PRESET_TRIALS))
        configs = PRESETS[args.command](cfg)
        _emit(ExperimentResult.merge(run_experiment(c) for c in configs), args.out)
        return 0
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"fdmimo: error: {e}", file=sys.stderr)
        return 2
    except ConfigError as e:
        print(f"fdmimo: config error: {e}", file=sys.stderr)
        return 2
    except EnumerationTooLarge as e:
        print(f"fdmimo: error: {e}", file=sys.stderr)
        return 2
    except (ExperimentError, OSError) as e:
        print(f"fdmimo: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
