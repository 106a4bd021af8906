#!/usr/bin/python
"""Localize regions of an image enhanced by a different curve than the rest.

Writes the pixel mask as a 0/255 image and, with --truth, scores it.
"""

import argparse

from contrast_forensics.image_io import read_image, read_mask, write_mask
from contrast_forensics.local_detector import EnergyParams, de_fp_metrics, detect_regions
from contrast_forensics.util import (
    InputError,
    NumericalError,
    config_section,
    configure_logging,
    explicit,
    provenance,
    read_config,
    report_error,
    write_json,
)


def build_argument_parser() -> argparse.ArgumentParser:
    """Build and return the argument parser."""

    parser = argparse.ArgumentParser(
        description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument("--input", required=True, help="Grayscale image (.pgm or .png).")
    parser.add_argument("--block", type=int, help="Block size in pixels (default 50).")
    parser.add_argument("--stride", type=int, help="Block stride in pixels (default 2).")
    parser.add_argument("--beta", type=float, help="Neighbour disagreement weight (0.1).")
    parser.add_argument("--sigma", type=float, help="Noise level to model (0.01).")
    parser.add_argument("--em-max", type=int, help="Maximum alternations (default 10).")
    parser.add_argument("--workers", type=int, help="Parallel block solves.")
    parser.add_argument("--config", help="Configuration file (.yaml or .json).")
    parser.add_argument("--mask", help="Write the detected mask (.pgm or .png).")
    parser.add_argument("--truth", help="Ground-truth mask for DE/FP scores.")
    parser.add_argument("--report", "--json", dest="report", help="Write a JSON report.")
    parser.add_argument("--verbose", action="store_true", help="Log progress.")
    return parser


def params_from_args(args: argparse.Namespace, config: dict) -> EnergyParams:
    """Detector parameters from the config file, overridden by flags."""
    return EnergyParams.from_mapping(
        {
            **config_section(config, "detector"),
            **explicit(
                beta=args.beta,
                sigma=args.sigma,
                em_max=args.em_max,
                block_size=args.block,
                stride=args.stride,
                workers=args.workers,
            ),
            "nonparametric": {
                **config_section(config, "nonparametric"),
                "solver": config_section(config, "solver"),
            },
        }
    )


def main(argv: list[str] | None = None) -> int:
    """Main process."""

    # Parse command line arguments.
    argparser = build_argument_parser()
    args = argparser.parse_args(argv)
    configure_logging(args.verbose)

    try:
        params = params_from_args(args, read_config(args.config))
        image = read_image(args.input)
        detection = detect_regions(image, params)
        mask = detection.labels.pixel_mask
        if args.mask:
            write_mask(mask, args.mask)
        scores = None
        if args.truth:
            de, fp = de_fp_metrics(mask, read_mask(args.truth))
            scores = {"de": de, "fp": fp}
        if args.report:
            report = {
                "curve0": detection.curve0.to_dict(),
                "curve1": detection.curve1.to_dict(),
                "diagnostics": detection.diagnostics,
                "labels": detection.labels.labels,
                "provenance": provenance("localize", vars(args)),
            }
            if scores is not None:
                report["scores"] = scores
            write_json(args.report, report)
    except (InputError, NumericalError, OSError) as err:
        return report_error(args.input, err)

    summary = f"{args.input}: {float(mask.mean()):.1%} of pixels flagged"
    if detection.diagnostics["degenerate"]:
        summary += " (single label, no inconsistent region found)"
    if scores is not None:
        summary += f", DE {scores['de']:.3f}, FP {scores['fp']:.3f}"
    print(summary)
    return 0


if __name__ == "__main__":
    exit(main())
