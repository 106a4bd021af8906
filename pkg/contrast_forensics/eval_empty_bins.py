#!/usr/bin/python
"""Count empty histogram bins before and after enhancement of synthetic images.

Without noise a monotone curve can only keep or increase the number of empty
bins; the report counts any case that breaks this as a violation.
"""

import argparse

from contrast_forensics.evaluation import DEFAULT_GAMMAS, empty_bin_study
from contrast_forensics.synthesis import CurveSpec, SynthSpec
from contrast_forensics.util import (
    InputError,
    NumericalError,
    configure_logging,
    parse_float_list,
    provenance,
    report_error,
    write_json,
)


def build_argument_parser() -> argparse.ArgumentParser:
    """Build and return the argument parser."""

    parser = argparse.ArgumentParser(
        description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument(
        "--gammas",
        default=",".join(f"{g:g}" for g in DEFAULT_GAMMAS),
        help="Gamma values, comma-separated.",
    )
    parser.add_argument(
        "--equalize", action="store_true", help="Also test histogram equalization."
    )
    parser.add_argument("--images", type=int, default=20, help="Images per curve.")
    parser.add_argument("--bits", type=int, default=8, help="Bit depth.")
    parser.add_argument("--pixels", type=int, default=65_536, help="Pixels per image.")
    parser.add_argument("--sigma", type=float, default=0.0, help="Added noise level.")
    parser.add_argument("--seed", type=int, default=0, help="Seed of the first image.")
    parser.add_argument("--workers", type=int, help="Parallel cases (1 runs serially).")
    parser.add_argument("--json", help="Write the study report as JSON.")
    parser.add_argument("--verbose", action="store_true", help="Log progress.")
    return parser


def build_specs(args: argparse.Namespace) -> list[SynthSpec]:
    if args.images < 1:
        raise InputError(f"image count must be positive, not {args.images}")
    curves = [CurveSpec("gamma", (gamma,)) for gamma in parse_float_list(args.gammas)]
    if args.equalize:
        curves.append(CurveSpec("equalize"))
    side = max(1, int(round(args.pixels**0.5)))
    return [
        SynthSpec(
            bits=args.bits,
            width=side,
            height=max(1, args.pixels // side),
            curve=curve,
            sigma=args.sigma,
            seed=args.seed + k,
        )
        for curve in curves
        for k in range(args.images)
    ]


def main(argv: list[str] | None = None) -> int:
    """Main process."""

    # Parse command line arguments.
    argparser = build_argument_parser()
    args = argparser.parse_args(argv)
    configure_logging(args.verbose)

    try:
        report = empty_bin_study(build_specs(args), workers=args.workers)
        if args.json:
            write_json(
                args.json,
                {**report.to_dict(), "provenance": provenance("eval-empty-bins", vars(args))},
            )
    except (InputError, NumericalError, OSError) as err:
        return report_error("eval-empty-bins", err)

    rates = report.rates
    print(
        f"eval-empty-bins: mean empty bins {rates['mean_before']:.1f} before, "
        f"{rates['mean_after']:.1f} after, {rates['violations']} violation(s)"
    )
    return 0


if __name__ == "__main__":
    exit(main())
