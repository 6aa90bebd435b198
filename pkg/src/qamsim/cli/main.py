"""`qam` entry point: subcommand + config path + output options.

Exit codes are a stable contract: 0 success, 2 configuration error,
3 numerical failure, 4 I/O error.  Progress goes to stdout, diagnostics
to stderr.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from ..errors import ConfigError, NumericsError, QamError
from .config import KINDS, load_config
from .runner import diagnostic, progress, resolve_threads

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICS = 3
EXIT_IO = 4

_KIND_HELP = {
    "simulate": "evolve one initial state or ensemble; momentum histograms",
    "scan-tau": "momentum distributions stacked over a kick-period grid",
    "portrait": "phase portrait of one band's pseudoclassical map",
    "bands": "eigenphase bands and geometric potentials per kick strength",
    "farey": "winding-number arithmetic for a list of resonances",
    "husimi": "phase-space densities of an evolving state",
    "beta-scan": "trapped probability versus quasimomentum",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qam",
        description=(
            "Quantum accelerator mode experiments for the gravity-kicked "
            "rotor near high-order resonances."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for kind in KINDS:
        sp = sub.add_parser(kind, help=_KIND_HELP[kind])
        sp.add_argument("config", type=Path, help="YAML run configuration")
        sp.add_argument(
            "--out-dir",
            type=Path,
            default=Path("."),
            help="directory for output files (default: current directory)",
        )
        sp.add_argument(
            "--threads",
            type=int,
            default=None,
            help="worker threads (default: QAM_THREADS or cpu count)",
        )
        sp.add_argument(
            "--no-figures",
            action="store_true",
            help="write only data files, skip PNG rendering",
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        from .commands import COMMANDS

        cfg = load_config(args.config)
        if cfg.kind != args.command:
            raise ConfigError(
                f"config kind {cfg.kind!r} does not match subcommand "
                f"{args.command!r}"
            )
        threads = resolve_threads(args.threads)
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        progress(
            f"qam {cfg.kind}: seed {cfg.seed}, {threads} thread(s), "
            f"output {out_dir}"
        )
        start = time.perf_counter()
        written = COMMANDS[cfg.kind](cfg, out_dir, threads, not args.no_figures)
        progress(
            f"done: {len(written)} file(s) in {time.perf_counter() - start:.1f}s"
        )
        return EXIT_OK
    except ConfigError as exc:
        diagnostic(f"config error: {exc}")
        return EXIT_CONFIG
    except NumericsError as exc:
        diagnostic(f"numerical failure: {exc}")
        return EXIT_NUMERICS
    except QamError as exc:
        diagnostic(f"error: {exc}")
        return EXIT_NUMERICS
    except OSError as exc:
        diagnostic(f"i/o error: {exc}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
