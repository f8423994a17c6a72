"""Command-line entry point.

    vacuumforge <command> [--config PATH] [--paper-defaults] [--out DIR]
                [--threads N] [--save-matrices] [--decimate K] [--no-plots]

Commands: spectrum, evolve, observables, decay.  At least one of --config
or --paper-defaults is required; a config file overlays the published
defaults key by key, so partial files are fine.  Exit codes: 0 on success,
2 for configuration and usage errors, 3 when a numerical contract fails
(lost unitarity, indefinite overlap matrix).
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from typing import Optional, Sequence

from .config import COMMANDS, load_config, paper_defaults
from .errors import ConfigError, ContractViolationError
from .runner import run_command

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONTRACT = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vacuumforge",
        description="Fermion pair creation by a supercritical potential "
                    "well: spectra, time evolution, pair statistics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    help_lines = {
        "spectrum": "single-particle spectrum and supercritical counts "
                    "over a V0 sweep",
        "evolve": "pair numbers and probabilities over a plateau-length "
                  "sweep",
        "observables": "densities, momentum spectra, and peaks at one "
                       "(V0, T) point",
        "decay": "distance to the asymptotic pair probability and its "
                 "exponential rate",
    }
    for name in COMMANDS:
        cmd = sub.add_parser(name, help=help_lines[name])
        cmd.add_argument("--config", metavar="PATH",
                         help="INI file overlaying the published defaults")
        cmd.add_argument("--paper-defaults", action="store_true",
                         help="run with the published figure parameters")
        cmd.add_argument("--out", metavar="DIR", default=f"out_{name}",
                         help="output directory (default: out_<command>)")
        cmd.add_argument("--threads", type=int, metavar="N",
                         help="worker threads for sweep points")
        cmd.add_argument("--save-matrices", action="store_true",
                         help="persist transition and overlap matrices as .npy")
        cmd.add_argument("--decimate", type=int, metavar="K",
                         help="keep every K-th grid point in the "
                              "two-particle position table")
        cmd.add_argument("--no-plots", action="store_true",
                         help="skip SVG rendering, emit tables only")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if not args.config and not args.paper_defaults:
            raise ConfigError(
                "at least one of --config or --paper-defaults is required"
            )
        cfg = paper_defaults(args.command)
        if args.config:
            cfg = load_config(args.config, args.command, cfg)
        overrides = {}
        if args.threads is not None:
            overrides["threads"] = args.threads
        if args.save_matrices:
            overrides["save_matrices"] = True
        if args.decimate is not None:
            overrides["decimate"] = args.decimate
        if args.no_plots:
            overrides["plots"] = False
        if overrides:
            cfg = replace(cfg, **overrides).validate()
        result = run_command(cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ContractViolationError as exc:
        print(f"numerical contract violated: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    print(f"wrote {len(result.files)} files + manifest to {result.out_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
