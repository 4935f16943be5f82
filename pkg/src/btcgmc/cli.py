"""Command-line entry point: ``btc {evolve,ness,thermo,fit,sweep}``.

Exit codes: 0 success, 1 at least one task failed, 2 configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from .records import ConfigError, RunConfig, load_config
from .pipeline import run_commands

log = logging.getLogger("btcgmc")

EXIT_OK, EXIT_PARTIAL, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--output", help="output directory (overrides output_dir)")
    common.add_argument("--workers", type=int, help="worker processes (overrides worker_count)")
    common.add_argument("--oracle", action="store_true",
                        help="cross-check small-N steady states against the dense Lindbladian")
    common.add_argument("--seed", type=int,
                        help="reserved; the pipeline is deterministic and ignores it")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="btc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "evolve": "integrate the master equation from |->^N and write trajectories",
        "ness": "exact steady states: correlations, QFI, coherence",
        "thermo": "infinite-size correlations from the asymptotic series",
        "fit": "lifetime, frequency and critical-exponent fits of existing outputs",
        "sweep": "run the commands listed in the config over the whole grid",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = {}
    if args.output is not None:
        overrides["output_dir"] = args.output
    if args.workers is not None:
        overrides["worker_count"] = args.workers
    if args.oracle:
        overrides["oracle_enabled"] = True
    cfg = dataclasses.replace(cfg, **overrides)
    return cfg.validate(args.command)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        log.info("--seed %d ignored: the pipeline has no random component", args.seed)

    commands = cfg.commands if args.command == "sweep" else (args.command,)
    manifest, ok = run_commands(cfg, args.command, commands)
    failed = [e for e in manifest.tasks.values() if e.status != "ok"]
    for e in failed:
        print(f"task {e.task_id} {e.status}: {e.message}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
