#!/usr/bin/python
"""Estimate a free-form monotone enhancement curve from an image."""

import argparse

from contrast_forensics.histogram_core import from_pixels
from contrast_forensics.image_io import read_image
from contrast_forensics.noise_model import gaussian_noise_matrix
from contrast_forensics.nonparametric_estimator import NonparamConfig, estimate_nonparametric
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
    parser.add_argument("--sigma", type=float, default=0.01, help="Noise level to model.")
    parser.add_argument("--xi", type=float, help="Coupling weight (default 10).")
    parser.add_argument("--alt-max", type=int, help="Maximum alternations (default 15).")
    parser.add_argument("--lambda", dest="lam", type=float, help="Empty-bin weight.")
    parser.add_argument("--rho", type=float, help="Surrogate sharpness.")
    parser.add_argument("--config", help="Configuration file (.yaml or .json).")
    parser.add_argument("--out", help="Write the estimated curve as JSON.")
    parser.add_argument("--json", help="Write the full estimate as JSON.")
    parser.add_argument("--trace", help="Write the objective trace as CSV.")
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
        solver = {**config_section(config, "solver"), **explicit(lam=args.lam, rho=args.rho)}
        cfg = NonparamConfig.from_mapping(
            {
                **config_section(config, "nonparametric"),
                **explicit(xi=args.xi, alt_max=args.alt_max),
                "solver": solver,
            }
        )
        image = read_image(args.input)
        h_obs = from_pixels(image.pixels, image.bits)
        estimate = estimate_nonparametric(h_obs, gaussian_noise_matrix(args.sigma, h_obs.n), cfg)
        if args.out:
            write_json(args.out, estimate.curve.to_dict())
        if args.json:
            write_json(
                args.json,
                {**estimate.to_dict(), "provenance": provenance("estimate-curve", vars(args))},
            )
        if args.trace:
            write_csv(args.trace, ["alternation", "objective"], enumerate(estimate.objective_trace))
    except (InputError, NumericalError, OSError) as err:
        return report_error(args.input, err)

    print(
        f"{args.input}: curve estimated in {estimate.alternations} alternation(s), "
        f"objective {estimate.objective_trace[-1]:.6g}"
    )
    return 0


if __name__ == "__main__":
    exit(main())
