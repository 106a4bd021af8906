#!/usr/bin/python
"""Contrast-enhancement forensics.

Run `contrast-forensics <command> --help` for the options of a command.
"""

import argparse
import importlib

COMMANDS = {
    "synth": "contrast_forensics.synth",
    "synth-composite": "contrast_forensics.synth_composite",
    "estimate-gamma": "contrast_forensics.estimate_gamma",
    "estimate-curve": "contrast_forensics.estimate_curve",
    "recover-hist": "contrast_forensics.recover_hist",
    "localize": "contrast_forensics.localize",
    "eval-gamma": "contrast_forensics.eval_gamma",
    "eval-curve": "contrast_forensics.eval_curve",
    "eval-localize": "contrast_forensics.eval_localize",
    "eval-empty-bins": "contrast_forensics.eval_empty_bins",
}


def build_argument_parser() -> argparse.ArgumentParser:
    """Build and return the argument parser."""

    parser = argparse.ArgumentParser(
        description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument("command", choices=sorted(COMMANDS), help="Command to run.")
    parser.add_argument(
        "arguments", nargs=argparse.REMAINDER, help="Arguments passed to the command."
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    """Main process."""

    # Parse command line arguments.
    argparser = build_argument_parser()
    args = argparser.parse_args(argv)

    module = importlib.import_module(COMMANDS[args.command])
    return module.main(args.arguments)


if __name__ == "__main__":
    exit(main())
