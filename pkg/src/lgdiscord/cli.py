"""Command-line interface.

Subcommands: modes, run, sweep, recover, oracle. Global flags select the
JSON config file, override the RNG seed, and redirect the output directory.
Exit codes: 0 ok, 2 usage or invalid input, 3 I/O failure, 4 image shape
mismatch, 5 degenerate data, 6 empty image.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .bell import BellSpectrum, analytic_discord, oracle_discord
from .config import load_config
from .errors import (
    ConfigError,
    DegenerateBasis,
    EmptyImage,
    GridMismatch,
    LgDiscordError,
    NonPhysical,
)
from .pipeline import recover_from_files, write_modes, write_run, write_sweep

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_SHAPE = 4
EXIT_DEGENERATE = 5
EXIT_EMPTY = 6


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lgdiscord",
        description="Virtual Laguerre-Gauss interferometer: set a discord, capture it, recover it.",
    )
    parser.add_argument("--config", metavar="PATH", help="JSON config file ({} is valid)")
    parser.add_argument("--seed", type=int, metavar="U64", help="override the RNG seed")
    parser.add_argument("--out", metavar="DIR", help="override the output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("modes", help="write mode profiles and the Gram-matrix report")
    sub.add_parser("run", help="run one experiment and write images plus the run record")

    p_sweep = sub.add_parser("sweep", help="run one experiment per discord value per seed")
    p_sweep.add_argument(
        "discords",
        nargs="*",
        type=float,
        metavar="D",
        help="required discord values (default: the config sweep list)",
    )

    p_rec = sub.add_parser("recover", help="recover the weight from three PGM images")
    p_rec.add_argument("measured", help="measured combined-beam PGM")
    p_rec.add_argument("basis_psi", help="blocked-arm psi+ basis PGM")
    p_rec.add_argument("basis_phi", help="blocked-arm phi+ basis PGM")

    p_orc = sub.add_parser("oracle", help="compare closed-form and brute-force discord")
    p_orc.add_argument("spectrum", nargs=4, type=float, metavar="LAMBDA")
    p_orc.add_argument("--grid-n", type=int, default=64, help="direction-scan resolution")
    return parser


def _load(args):
    config = load_config(args.config)
    if args.seed is not None:
        config = replace(config, noise=replace(config.noise, seed=args.seed))
    if args.out is not None:
        config = replace(config, output_dir=args.out)
    return config


def _cmd_modes(args) -> int:
    write_modes(_load(args))
    return EXIT_OK


def _cmd_run(args) -> int:
    record, _ = write_run(_load(args))
    print(json.dumps(record.to_dict(), sort_keys=True))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    config = _load(args)
    discords = list(args.discords) if args.discords else list(config.sweep_discords)
    if not discords:
        print("sweep: no required discord values given", file=sys.stderr)
        return EXIT_USAGE
    for d in discords:
        if not 0.0 <= d <= 1.0:
            print(f"sweep: discord {d!r} outside [0, 1]", file=sys.stderr)
            return EXIT_USAGE
    paths = write_sweep(config, discords)
    print(str(paths["csv"]))
    return EXIT_OK


def _cmd_recover(args) -> int:
    result = recover_from_files(args.measured, args.basis_psi, args.basis_phi)
    print(
        json.dumps(
            {
                "lambda0_rec": result.lambda0_rec,
                "lambda1_rec": result.lambda1_rec,
                "residual": result.residual,
                "discord_measured": result.discord_measured,
            },
            sort_keys=True,
        )
    )
    return EXIT_OK


def _cmd_oracle(args) -> int:
    spectrum = BellSpectrum.from_values(args.spectrum)
    analytic = analytic_discord(spectrum)
    oracle = oracle_discord(spectrum, grid_n=args.grid_n)
    print(
        json.dumps(
            {"analytic": analytic, "oracle": oracle, "abs_diff": abs(analytic - oracle)},
            sort_keys=True,
        )
    )
    return EXIT_OK


_HANDLERS = {
    "modes": _cmd_modes,
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "recover": _cmd_recover,
    "oracle": _cmd_oracle,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (ConfigError, NonPhysical, ValueError) as exc:
        print(f"lgdiscord {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GridMismatch as exc:
        print(f"lgdiscord {args.command}: {exc}", file=sys.stderr)
        return EXIT_SHAPE
    except DegenerateBasis as exc:
        print(f"lgdiscord {args.command}: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except EmptyImage as exc:
        print(f"lgdiscord {args.command}: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except OSError as exc:
        print(f"lgdiscord {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO
    except LgDiscordError as exc:
        print(f"lgdiscord {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
