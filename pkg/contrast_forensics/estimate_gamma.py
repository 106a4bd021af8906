#!/usr/bin/python
"""Estimate a gamma or sigmoid enhancement from an image by grid search.

Every grid parameter is scored by the best histogram fit its curve allows;
the smallest objective wins.
"""

import argparse

from contrast_forensics.histogram_core import from_pixels
from contrast_forensics.histogram_solver import SolverConfig
from contrast_forensics.image_io import read_image
from contrast_forensics.noise_model import gaussian_noise_matrix
from contrast_forensics.parametric_estimator import (
    DEFAULT_GAMMA_GRID,
    DEFAULT_SIGMOID_ALPHAS,
    DEFAULT_SIGMOID_MUS,
    ParamGrid,
    estimate_parametric,
)
from contrast_forensics.util import (
    InputError,
    NumericalError,
    config_section,
    configure_logging,
    explicit,
    provenance,
    read_config,
    report_error,
    write_csv,
    write_json,
)


def build_argument_parser() -> argparse.ArgumentParser:
    """Build and return the argument parser."""

    parser = argparse.ArgumentParser(
        description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument("--input", required=True, help="Grayscale image (.pgm or .png).")
    parser.add_argument(
        "--family", choices=("gamma", "sigmoid"), default="gamma", help="Curve family."
    )
    parser.add_argument(
        "--grid", default=DEFAULT_GAMMA_GRID, help="Gamma grid as start:step:stop or a list."
    )
    parser.add_argument("--alphas", default=DEFAULT_SIGMOID_ALPHAS, help="Sigmoid widths.")
    parser.add_argument("--mus", default=DEFAULT_SIGMOID_MUS, help="Sigmoid centres.")
    parser.add_argument("--sigma", type=float, default=0.01, help="Noise level to model.")
    parser.add_argument("--lambda", dest="lam", type=float, help="Empty-bin weight.")
    parser.add_argument("--rho", type=float, help="Surrogate sharpness.")
    parser.add_argument(
        "--no-dedupe",
        action="store_true",
        help="Solve every grid entry even when curves coincide.",
    )
    parser.add_argument("--workers", type=int, help="Parallel solves (1 runs serially).")
    parser.add_argument("--config", help="Configuration file (.yaml or .json).")
    parser.add_argument("--json", help="Write the estimate as JSON.")
    parser.add_argument("--landscape", help="Write the objective landscape as CSV.")
    parser.add_argument("--verbose", action="store_true", help="Log progress.")
    return parser


def main(argv: list[str] | None = None) -> int:
    """Main process."""

    # Parse command line arguments.
    argparser = build_argument_parser()
    args = argparser.parse_args(argv)
    configure_logging(args.verbose)

    try:
        config = read_config(args.config)
        cfg = SolverConfig.from_mapping(
            {**config_section(config, "solver"), **explicit(lam=args.lam, rho=args.rho)}
        )
        if args.family == "gamma":
            grid = ParamGrid.gamma(args.grid)
        else:
            grid = ParamGrid.sigmoid(args.alphas, args.mus)
        image = read_image(args.input)
        h_obs = from_pixels(image.pixels, image.bits)
        noise = gaussian_noise_matrix(args.sigma, h_obs.n)
        estimate = estimate_parametric(
            h_obs, grid, noise, cfg, dedupe=not args.no_dedupe, workers=args.workers
        )
        if args.json:
            write_json(
                args.json,
                {**estimate.to_dict(), "provenance": provenance("estimate-gamma", vars(args))},
            )
        if args.landscape:
            names = ["param"] if args.family == "gamma" else ["alpha", "mu"]
            write_csv(
                args.landscape,
                names + ["objective"],
                (list(param) + [value] for param, value in estimate.landscape),
            )
    except (InputError, NumericalError, OSError) as err:
        return report_error(args.input, err)

    best = ", ".join(f"{value:g}" for value in estimate.best_param)
    print(
        f"{args.input}: best {args.family} {best} "
        f"(objective {estimate.best_objective:.6g})"
    )
    return 0


if __name__ == "__main__":
    exit(main())
