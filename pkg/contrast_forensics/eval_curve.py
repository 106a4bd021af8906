#!/usr/bin/python
"""Measure free-form curve recovery on synthetic images.

By default a set of spline curves and histogram equalization are tested. A
YAML or JSON file given with --cases replaces them with a list of curve
mappings (family, params, control_points).
"""

import argparse
import json

from ruamel.yaml.error import YAMLError

from contrast_forensics.evaluation import DEFAULT_CURVE_CASES, run_curve_eval
from contrast_forensics.nonparametric_estimator import NonparamConfig
from contrast_forensics.synthesis import CurveSpec
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
    yaml,
)


def build_argument_parser() -> argparse.ArgumentParser:
    """Build and return the argument parser."""

    parser = argparse.ArgumentParser(
        description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument("--cases", help="Curve list file (.yaml or .json).")
    parser.add_argument("--images", type=int, default=2, help="Images per curve.")
    parser.add_argument("--sigma", type=float, default=0.0, help="Noise level.")
    parser.add_argument("--pixels", type=int, default=250_000, help="Pixels per image.")
    parser.add_argument("--eps", type=float, default=0.05, help="Relative error tolerance.")
    parser.add_argument("--xi", type=float, help="Coupling weight (default 10).")
    parser.add_argument("--alt-max", type=int, help="Maximum alternations (default 15).")
    parser.add_argument("--seed", type=int, default=0, help="Seed of the first image.")
    parser.add_argument("--workers", type=int, help="Parallel cases (1 runs serially).")
    parser.add_argument("--config", help="Configuration file (.yaml or .json).")
    parser.add_argument("--timing", action="store_true", help="Record wall-clock times.")
    parser.add_argument("--json", help="Write the evaluation report as JSON.")
    parser.add_argument("--verbose", action="store_true", help="Log progress.")
    return parser


def load_cases(path: str) -> list[CurveSpec]:
    """Read a list of curve mappings from yaml or json."""
    try:
        with open(path, "rb") as f:
            data = json.load(f) if path.endswith(".json") else yaml.load(f)
    except (json.JSONDecodeError, YAMLError) as err:
        raise InputError(f"{path}: parsing error: {err}") from err
    if not isinstance(data, list) or not data:
        raise InputError(f"{path}: expected a non-empty list of curves")
    if not all(isinstance(item, dict) for item in data):
        raise InputError(f"{path}: every curve must be a mapping")
    return [CurveSpec.from_mapping(item) for item in data]


def main(argv: list[str] | None = None) -> int:
    """Main process."""

    # Parse command line arguments.
    argparser = build_argument_parser()
    args = argparser.parse_args(argv)
    configure_logging(args.verbose)

    try:
        config = read_config(args.config)
        cfg = NonparamConfig.from_mapping(
            {
                **config_section(config, "nonparametric"),
                **explicit(xi=args.xi, alt_max=args.alt_max),
                "solver": config_section(config, "solver"),
            }
        )
        curves = load_cases(args.cases) if args.cases else list(DEFAULT_CURVE_CASES)
        report = run_curve_eval(
            curves=curves,
            images=args.images,
            sigma=args.sigma,
            pixels=args.pixels,
            eps=args.eps,
            seed=args.seed,
            cfg=cfg,
            workers=args.workers,
            timing=args.timing,
        )
        if args.json:
            write_json(
                args.json,
                {**report.to_dict(), "provenance": provenance("eval-curve", vars(args))},
            )
    except (InputError, NumericalError, OSError) as err:
        return report_error("eval-curve", err)

    for name, rate in report.rates.items():
        print(f"eval-curve: {name}: {rate:.3f} within relative error {args.eps:g}")
    return 0


if __name__ == "__main__":
    exit(main())
