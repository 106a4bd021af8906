#!/usr/bin/python
"""Generate a synthetic enhanced grayscale image with a known curve.

The image spec can come from a YAML or JSON file (--spec); flags given on the
command line override the file's values.
"""

import argparse
from typing import Any

from contrast_forensics.image_io import write_image
from contrast_forensics.synthesis import SynthSpec, parse_control_points, synth_image
from contrast_forensics.util import (
    InputError,
    NumericalError,
    configure_logging,
    explicit,
    load_config,
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
    parser.add_argument("--spec", help="Synthesis spec file (.yaml or .json).")
    parser.add_argument("--bits", type=int, help="Bit depth (default 8).")
    parser.add_argument("--width", type=int, help="Image width (default 256).")
    parser.add_argument("--height", type=int, help="Image height (default 256).")
    parser.add_argument(
        "--curve",
        choices=("identity", "gamma", "sigmoid", "spline", "equalize"),
        help="Curve family applied to the base image.",
    )
    parser.add_argument(
        "--params", help="Curve parameters, comma-separated (gamma, or alpha,mu)."
    )
    parser.add_argument("--control-points", help="Spline control points as i:j,i:j,...")
    parser.add_argument("--base-image", help="Take the base histogram from this image.")
    parser.add_argument("--sigma", type=float, help="Additive noise level (default 0).")
    parser.add_argument("--seed", type=int, help="Random seed (default 0).")
    parser.add_argument("--out", required=True, help="Enhanced image (.pgm or .png).")
    parser.add_argument("--pre", help="Also write the pre-enhancement image here.")
    parser.add_argument("--curve-out", help="Write the true curve as JSON.")
    parser.add_argument("--json", help="Write a JSON report.")
    parser.add_argument("--verbose", action="store_true", help="Log progress.")
    return parser


def spec_from_args(args: argparse.Namespace) -> SynthSpec:
    """Merge the spec file with command-line overrides."""
    values: dict[str, Any] = {}
    if args.spec:
        values = load_config(args.spec)
        if values is None:
            raise InputError(f"{args.spec}: spec could not be loaded")
    if args.curve:
        curve = {"family": args.curve}
        if args.params:
            curve["params"] = parse_float_list(args.params)
        if args.control_points:
            curve["control_points"] = parse_control_points(args.control_points)
        values["curve"] = curve
    if args.base_image:
        values.update(base="image", base_path=args.base_image)
    values.update(
        explicit(
            bits=args.bits,
            width=args.width,
            height=args.height,
            sigma=args.sigma,
            seed=args.seed,
        )
    )
    return SynthSpec.from_mapping(values)


def main(argv: list[str] | None = None) -> int:
    """Main process."""

    # Parse command line arguments.
    argparser = build_argument_parser()
    args = argparser.parse_args(argv)
    configure_logging(args.verbose)

    try:
        spec = spec_from_args(args)
        pre, out, curve = synth_image(spec)
        write_image(out, args.out)
        if args.pre:
            write_image(pre, args.pre)
        if args.curve_out:
            write_json(args.curve_out, curve.to_dict())
        if args.json:
            write_json(
                args.json,
                {
                    "curve": curve.to_dict(),
                    "provenance": provenance("synth", vars(args)),
                    "spec": spec.to_dict(),
                },
            )
    except (InputError, NumericalError, OSError) as err:
        return report_error(args.out, err)

    print(
        f"{args.out}: {spec.width}x{spec.height} {spec.bits}-bit image, "
        f"curve {spec.curve.family}, sigma {spec.sigma:g}"
    )
    return 0


if __name__ == "__main__":
    exit(main())
