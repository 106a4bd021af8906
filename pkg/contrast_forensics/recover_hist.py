#!/usr/bin/python
"""Recover the pre-enhancement histogram of an image for a known curve.

The curve file is JSON with "n" and "phi", as written by estimate-curve --out
or synth --curve-out.
"""

import argparse
from typing import Any

from contrast_forensics.histogram_core import from_pixels
from contrast_forensics.histogram_solver import SolverConfig, recover_histogram
from contrast_forensics.image_io import read_image
from contrast_forensics.noise_model import gaussian_noise_matrix
from contrast_forensics.transforms import TransformCurve
from contrast_forensics.util import (
    InputError,
    NumericalError,
    config_section,
    configure_logging,
    explicit,
    provenance,
    read_config,
    read_json,
    report_error,
    write_json,
)


def build_argument_parser() -> argparse.ArgumentParser:
    """Build and return the argument parser."""

    parser = argparse.ArgumentParser(
        description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument("--input", required=True, help="Grayscale image (.pgm or .png).")
    parser.add_argument("--curve", required=True, help="Curve JSON file.")
    parser.add_argument("--sigma", type=float, default=0.01, help="Noise level to model.")
    parser.add_argument("--lambda", dest="lam", type=float, help="Empty-bin weight (0.75).")
    parser.add_argument("--rho", type=float, help="Surrogate sharpness (1).")
    parser.add_argument("--config", help="Configuration file (.yaml or .json).")
    parser.add_argument("--out", help="Write the solver report as JSON.")
    parser.add_argument("--json", help="Write the solver report with provenance.")
    parser.add_argument("--verbose", action="store_true", help="Log progress.")
    return parser


def load_curve(path: str) -> TransformCurve:
    """Read a curve record, bare or under a "curve" key."""
    data: Any = read_json(path)
    if isinstance(data, dict) and isinstance(data.get("curve"), dict):
        data = data["curve"]
    if not isinstance(data, dict):
        raise InputError(f"{path}: expected a curve object")
    try:
        return TransformCurve.from_dict(data)
    except InputError as err:
        raise InputError(f"{path}: {err}") from err


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
        curve = load_curve(args.curve)
        image = read_image(args.input)
        h_obs = from_pixels(image.pixels, image.bits)
        report = recover_histogram(h_obs, curve, gaussian_noise_matrix(args.sigma, h_obs.n), cfg)
        if args.out:
            write_json(args.out, report.to_dict())
        if args.json:
            write_json(
                args.json,
                {**report.to_dict(), "provenance": provenance("recover-hist", vars(args))},
            )
    except (InputError, NumericalError, OSError) as err:
        return report_error(args.input, err)

    print(
        f"{args.input}: objective {report.objective:.6g} after {report.iterations} "
        f"iteration(s), {report.empty_bins} empty bin(s)"
    )
    return 0


if __name__ == "__main__":
    exit(main())
