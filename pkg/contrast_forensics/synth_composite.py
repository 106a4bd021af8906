#!/usr/bin/python
"""Splice two differently enhanced versions of one synthetic image.

Pixels inside the region take the second curve, the rest the first. The base
histogram, pixels and seed are shared; the truth mask is written as 0/255.
"""

import argparse

import numpy as np

from contrast_forensics.image_io import read_mask, write_image, write_mask
from contrast_forensics.synthesis import Region, SynthSpec, curve_from_text, synth_composite
from contrast_forensics.util import (
    InputError,
    NumericalError,
    configure_logging,
    provenance,
    report_error,
    write_json,
)


def build_argument_parser() -> argparse.ArgumentParser:
    """Build and return the argument parser."""

    parser = argparse.ArgumentParser(
        description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument("--bits", type=int, default=8, help="Bit depth.")
    parser.add_argument("--width", type=int, default=512, help="Image width.")
    parser.add_argument("--height", type=int, default=512, help="Image height.")
    parser.add_argument(
        "--curve0", default="gamma", help="Curve family outside the region."
    )
    parser.add_argument("--params0", default="1.4", help="Parameters of curve0 (i:j,... for spline).")
    parser.add_argument("--curve1", default="gamma", help="Curve family inside the region.")
    parser.add_argument("--params1", default="0.6", help="Parameters of curve1 (i:j,... for spline).")
    region = parser.add_mutually_exclusive_group(required=True)
    region.add_argument("--region", help="Rectangle as x,y,width,height.")
    region.add_argument("--region-mask", help="Region as a mask image (nonzero inside).")
    parser.add_argument("--sigma", type=float, default=0.0, help="Noise level of both parts.")
    parser.add_argument("--seed", type=int, default=0, help="Random seed.")
    parser.add_argument("--out", required=True, help="Composite image (.pgm or .png).")
    parser.add_argument("--truth-out", help="Write the truth mask here.")
    parser.add_argument("--json", help="Write a JSON report.")
    parser.add_argument("--verbose", action="store_true", help="Log progress.")
    return parser


def main(argv: list[str] | None = None) -> int:
    """Main process."""

    # Parse command line arguments.
    argparser = build_argument_parser()
    args = argparser.parse_args(argv)
    configure_logging(args.verbose)

    try:
        specs = [
            SynthSpec(
                bits=args.bits,
                width=args.width,
                height=args.height,
                curve=curve_from_text(family, params),
                sigma=args.sigma,
                seed=args.seed,
            )
            for family, params in ((args.curve0, args.params0), (args.curve1, args.params1))
        ]
        region = Region.parse(args.region) if args.region else read_mask(args.region_mask)
        image, truth = synth_composite(specs[0], specs[1], region)
        write_image(image, args.out)
        if args.truth_out:
            write_mask(truth, args.truth_out)
        share = float(np.mean(truth))
        if args.json:
            write_json(
                args.json,
                {
                    "provenance": provenance("synth-composite", vars(args)),
                    "region_share": share,
                    "spec0": specs[0].to_dict(),
                    "spec1": specs[1].to_dict(),
                },
            )
    except (InputError, NumericalError, OSError) as err:
        return report_error(args.out, err)

    print(f"{args.out}: composite with {share:.1%} of pixels in the region")
    return 0


if __name__ == "__main__":
    exit(main())
