#!/usr/bin/python
"""Measure parametric recovery accuracy on synthetic images.

Each truth value is applied to the same set of seeded images at every noise
level; a case is accurate when the estimate lies within --eps of the truth.
"""

import argparse

from contrast_forensics.evaluation import DEFAULT_GAMMAS, run_gamma_eval
from contrast_forensics.histogram_solver import SolverConfig
from contrast_forensics.parametric_estimator import (
    DEFAULT_GAMMA_GRID,
    DEFAULT_SIGMOID_ALPHAS,
    DEFAULT_SIGMOID_MUS,
    ParamGrid,
)
from contrast_forensics.util import (
    InputError,
    NumericalError,
    config_section,
    configure_logging,
    parse_float_list,
    provenance,
    read_config,
    report_error,
    write_json,
)

DEFAULT_SIGMOIDS = "0.1:0.5,0.2:0.4"


def build_argument_parser() -> argparse.ArgumentParser:
    """Build and return the argument parser."""

    parser = argparse.ArgumentParser(
        description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument(
        "--family", choices=("gamma", "sigmoid"), default="gamma", help="Curve family."
    )
    parser.add_argument(
        "--gammas",
        default=",".join(f"{g:g}" for g in DEFAULT_GAMMAS),
        help="True gamma values, comma-separated.",
    )
    parser.add_argument(
        "--sigmoids", default=DEFAULT_SIGMOIDS, help="True sigmoids as alpha:mu,alpha:mu."
    )
    parser.add_argument("--grid", default=DEFAULT_GAMMA_GRID, help="Gamma search grid.")
    parser.add_argument("--alphas", default=DEFAULT_SIGMOID_ALPHAS, help="Sigmoid widths.")
    parser.add_argument("--mus", default=DEFAULT_SIGMOID_MUS, help="Sigmoid centres.")
    parser.add_argument("--images", type=int, default=20, help="Images per truth value.")
    parser.add_argument("--sigmas", default="0.01", help="Noise levels, comma-separated.")
    parser.add_argument("--pixels", type=int, default=1_000_000, help="Pixels per image.")
    parser.add_argument("--eps", type=float, default=0.05, help="Accuracy tolerance.")
    parser.add_argument("--seed", type=int, default=0, help="Seed of the first image.")
    parser.add_argument("--workers", type=int, help="Parallel cases (1 runs serially).")
    parser.add_argument("--config", help="Configuration file (.yaml or .json).")
    parser.add_argument("--timing", action="store_true", help="Record wall-clock times.")
    parser.add_argument("--json", help="Write the evaluation report as JSON.")
    parser.add_argument("--verbose", action="store_true", help="Log progress.")
    return parser


def parse_sigmoids(text: str) -> list[tuple[float, float]]:
    """Parse 'alpha:mu,alpha:mu,...'."""
    pairs = []
    for item in text.split(","):
        parts = parse_float_list(item.replace(":", ","))
        if len(parts) != 2:
            raise InputError(f"sigmoid truth must be alpha:mu, not '{item}'")
        pairs.append((parts[0], parts[1]))
    return pairs


def main(argv: list[str] | None = None) -> int:
    """Main process."""

    # Parse command line arguments.
    argparser = build_argument_parser()
    args = argparser.parse_args(argv)
    configure_logging(args.verbose)

    try:
        config = read_config(args.config)
        solver = SolverConfig.from_mapping(config_section(config, "solver"))
        if args.family == "gamma":
            grid = ParamGrid.gamma(args.grid)
            truths = [(g,) for g in parse_float_list(args.gammas)]
        else:
            grid = ParamGrid.sigmoid(args.alphas, args.mus)
            truths = parse_sigmoids(args.sigmoids)
        report = run_gamma_eval(
            truths=truths,
            images=args.images,
            sigmas=parse_float_list(args.sigmas),
            grid=grid,
            pixels=args.pixels,
            eps=args.eps,
            seed=args.seed,
            solver=solver,
            workers=args.workers,
            timing=args.timing,
        )
        if args.json:
            write_json(
                args.json,
                {**report.to_dict(), "provenance": provenance("eval-gamma", vars(args))},
            )
    except (InputError, NumericalError, OSError) as err:
        return report_error("eval-gamma", err)

    for sigma, rates in report.rates.items():
        print(f"eval-gamma: {sigma}: accuracy {rates['accuracy']:.3f} at eps {args.eps:g}")
    return 0


if __name__ == "__main__":
    exit(main())
