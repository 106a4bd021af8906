#!/usr/bin/python
"""Accuracy metrics and the synthetic experiments behind the eval commands."""

import logging
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from contrast_forensics.histogram_core import EPS_BIN, empty_bin_count, from_pixels
from contrast_forensics.histogram_solver import SolverConfig
from contrast_forensics.local_detector import EnergyParams, de_fp_metrics, detect_regions
from contrast_forensics.noise_model import gaussian_noise_matrix
from contrast_forensics.nonparametric_estimator import NonparamConfig, estimate_nonparametric
from contrast_forensics.parametric_estimator import ParamGrid, estimate_parametric
from contrast_forensics.synthesis import CurveSpec, Region, SynthSpec, synth_composite, synth_image
from contrast_forensics.transforms import TransformCurve
from contrast_forensics.util import InputError, parallel_map

logger = logging.getLogger(__name__)

DEFAULT_GAMMAS = (0.4, 0.7, 1.3, 1.8, 2.2)

DEFAULT_CURVE_CASES = (
    CurveSpec("spline", control_points=((64, 80), (128, 150), (192, 210))),
    CurveSpec("spline", control_points=((64, 48), (128, 110), (192, 180))),
    CurveSpec("spline", control_points=((50, 90), (200, 230))),
    CurveSpec("spline", control_points=((100, 60), (180, 200))),
    CurveSpec("spline", control_points=((40, 70), (120, 128), (220, 235))),
    CurveSpec("equalize"),
)

# Curves of the spliced region in localization experiments; the background
# keeps LOCALIZE_BACKGROUND
LOCALIZE_BACKGROUND = CurveSpec("gamma", (1.4,))
DEFAULT_REGION_CURVES = (
    CurveSpec("gamma", (0.6,)),
    CurveSpec("sigmoid", (0.2, 0.4)),
    CurveSpec("equalize"),
    CurveSpec("spline", control_points=((64, 112), (192, 224))),
)

# Tampered share of the image area in localization experiments
REGION_FRACTION = (0.2, 0.4)


@dataclass
class EvalReport:
    """Per-case records in case order, plus the aggregated rates."""

    kind: str
    cases: list[dict[str, Any]]
    rates: dict[str, Any]
    runtime: dict[str, float] | None = field(default=None)

    def to_dict(self) -> dict[str, Any]:
        report = {"cases": self.cases, "kind": self.kind, "rates": self.rates}
        if self.runtime is not None:
            report["runtime"] = self.runtime
        return report


def accuracy_rate(estimates: Sequence[float], truth: float, eps: float) -> float:
    """Fraction of estimates within eps of truth."""
    values = np.asarray(list(estimates), dtype=np.float64)
    if not values.size:
        raise InputError("accuracy rate needs at least one estimate")
    return float(np.mean(np.abs(values - truth) <= eps))


def relative_curve_error(estimate: TransformCurve, truth: TransformCurve) -> float:
    """||phi - phi*||_2 / ||phi*||_2 with the curves as real vectors."""
    if estimate.n != truth.n:
        raise InputError(f"curve sizes differ: 0..{estimate.n} vs 0..{truth.n}")
    norm = float(np.linalg.norm(truth.phi.astype(np.float64)))
    if norm == 0:
        raise InputError("reference curve has zero norm")
    return float(np.linalg.norm((estimate.phi - truth.phi).astype(np.float64)) / norm)


def curve_accuracy_rate(
    estimates: Sequence[TransformCurve], truth: TransformCurve, eps: float
) -> float:
    """Fraction of estimated curves whose relative L2 error is at most eps."""
    if not estimates:
        raise InputError("curve accuracy rate needs at least one estimate")
    errors = [relative_curve_error(estimate, truth) for estimate in estimates]
    return float(np.mean([error <= eps for error in errors]))


def _shape(pixels: int) -> tuple[int, int]:
    """Near-square width and height holding about this many pixels."""
    if pixels < 1:
        raise InputError(f"pixel count must be positive, not {pixels}")
    width = max(1, int(round(np.sqrt(pixels))))
    return width, max(1, pixels // width)


def _run_cases(
    run: Callable[[dict[str, Any]], dict[str, Any]],
    cases: list[dict[str, Any]],
    workers: int | None,
    timing: bool,
) -> tuple[list[dict[str, Any]], dict[str, float] | None]:
    def timed(case: dict[str, Any]) -> dict[str, Any]:
        start = time.perf_counter()
        record = run(case)
        if timing:
            record["seconds"] = time.perf_counter() - start
        return record

    start = time.perf_counter()
    records = parallel_map(timed, cases, workers)
    runtime = {"total_seconds": time.perf_counter() - start} if timing else None
    return records, runtime


def _within(estimate: Sequence[float], truth: Sequence[float], eps: float) -> bool:
    return all(abs(e - t) <= eps for e, t in zip(estimate, truth))


def _label(values: Sequence[float]) -> str:
    return ",".join(f"{v:g}" for v in values)


def run_gamma_eval(
    truths: Sequence[Sequence[float]] = tuple((g,) for g in DEFAULT_GAMMAS),
    images: int = 20,
    sigmas: Sequence[float] = (0.01,),
    grid: ParamGrid | None = None,
    pixels: int = 1_000_000,
    eps: float = 0.05,
    seed: int = 0,
    solver: SolverConfig | None = None,
    workers: int | None = None,
    timing: bool = False,
) -> EvalReport:
    """Parametric recovery over synthetic images for every (sigma, truth) pair.

    Image k uses seed + k at every sigma and truth, so noise levels are compared
    on the same images. The probing sigma is the generating sigma. A sigmoid
    case is a hit when both parameters are within eps.
    """
    grid = grid or ParamGrid.gamma()
    if images < 1:
        raise InputError(f"image count must be positive, not {images}")
    width, height = _shape(pixels)
    truths = [tuple(float(v) for v in truth) for truth in truths]
    cases = [
        {"image": k, "sigma": float(sigma), "truth": list(truth)}
        for sigma in sigmas
        for truth in truths
        for k in range(images)
    ]

    def run(case: dict[str, Any]) -> dict[str, Any]:
        spec = SynthSpec(
            width=width,
            height=height,
            curve=CurveSpec(grid.family, tuple(case["truth"])),
            sigma=case["sigma"],
            seed=seed + case["image"],
        )
        _, out, _ = synth_image(spec)
        h_obs = from_pixels(out.pixels, out.bits)
        noise = gaussian_noise_matrix(case["sigma"], h_obs.n)
        estimate = estimate_parametric(h_obs, grid, noise, solver, workers=1)
        return {
            **case,
            "estimate": list(estimate.best_param),
            "hit": _within(estimate.best_param, case["truth"], eps),
            "objective": estimate.best_objective,
        }

    records, runtime = _run_cases(run, cases, workers, timing)

    rates: dict[str, Any] = {}
    for sigma in sigmas:
        at_sigma = [r for r in records if r["sigma"] == float(sigma)]
        rates[f"sigma={float(sigma):g}"] = {
            "accuracy": float(np.mean([r["hit"] for r in at_sigma])),
            "per_parameter": [
                float(np.mean([abs(r["estimate"][p] - r["truth"][p]) <= eps for r in at_sigma]))
                for p in range(len(truths[0]))
            ],
            "per_truth": {
                _label(truth): float(
                    np.mean([r["hit"] for r in at_sigma if r["truth"] == list(truth)])
                )
                for truth in truths
            },
        }
        logger.info("sigma %g: accuracy %.3f", sigma, rates[f"sigma={float(sigma):g}"]["accuracy"])
    return EvalReport(f"{grid.family}-eval", records, rates, runtime)


def run_curve_eval(
    curves: Sequence[CurveSpec] = DEFAULT_CURVE_CASES,
    images: int = 2,
    sigma: float = 0.0,
    pixels: int = 250_000,
    eps: float = 0.05,
    seed: int = 0,
    cfg: NonparamConfig | None = None,
    workers: int | None = None,
    timing: bool = False,
) -> EvalReport:
    """Free-form recovery of each curve on synthetic 8-bit images."""
    cfg = cfg or NonparamConfig()
    if images < 1:
        raise InputError(f"image count must be positive, not {images}")
    width, height = _shape(pixels)
    cases = [{"case": c, "image": k} for c in range(len(curves)) for k in range(images)]

    def run(case: dict[str, Any]) -> dict[str, Any]:
        curve_spec = curves[case["case"]]
        spec = SynthSpec(
            width=width, height=height, curve=curve_spec, sigma=sigma, seed=seed + case["image"]
        )
        _, out, truth = synth_image(spec)
        h_obs = from_pixels(out.pixels, out.bits)
        estimate = estimate_nonparametric(h_obs, gaussian_noise_matrix(sigma, h_obs.n), cfg)
        error = relative_curve_error(estimate.curve, truth)
        return {
            **case,
            "alternations": estimate.alternations,
            "error": error,
            "family": curve_spec.family,
            "hit": error <= eps,
        }

    records, runtime = _run_cases(run, cases, workers, timing)
    rates: dict[str, Any] = {"accuracy": float(np.mean([r["hit"] for r in records]))}
    for family in sorted({r["family"] for r in records}):
        rates[family] = float(np.mean([r["hit"] for r in records if r["family"] == family]))
    return EvalReport("curve-eval", records, rates, runtime)


def random_region(width: int, height: int, rng: np.random.Generator) -> Region:
    """Rectangle covering a random share of the image within REGION_FRACTION."""
    share = rng.uniform(*REGION_FRACTION)
    aspect = rng.uniform(0.75, 1.33)
    region_w = int(np.clip(round(np.sqrt(share * width * height * aspect)), 1, width))
    region_h = int(np.clip(round(share * width * height / region_w), 1, height))
    x = int(rng.integers(0, width - region_w + 1))
    y = int(rng.integers(0, height - region_h + 1))
    return Region(x, y, region_w, region_h)


def _localize_rates(records: Sequence[dict[str, Any]]) -> dict[str, float]:
    return {
        "degenerate": float(np.mean([r["degenerate"] for r in records])),
        "mean_de": float(np.mean([r["de"] for r in records])),
        "mean_fp": float(np.mean([r["fp"] for r in records])),
    }


def run_localize_eval(
    images: int = 10,
    size: int = 512,
    background: CurveSpec = LOCALIZE_BACKGROUND,
    regions: Sequence[CurveSpec] = DEFAULT_REGION_CURVES,
    sigma: float = 0.0,
    params: EnergyParams | None = None,
    seed: int = 0,
    workers: int | None = None,
    timing: bool = False,
) -> EvalReport:
    """Detection and false-positive ratios on synthetic two-curve composites.

    Each region curve is spliced into that many composites over a background
    carrying the background curve. Rates are also broken down by the family of
    the region curve.
    """
    params = params or EnergyParams(stride=8)
    if images < 1:
        raise InputError(f"image count must be positive, not {images}")
    if not regions:
        raise InputError("localization needs at least one region curve")
    cases = [{"case": c, "image": k} for c in range(len(regions)) for k in range(images)]

    def run(case: dict[str, Any]) -> dict[str, Any]:
        rng = np.random.default_rng(seed + case["image"])
        region = random_region(size, size, rng)
        spec0, spec1 = (
            SynthSpec(width=size, height=size, curve=curve, sigma=sigma, seed=seed + case["image"])
            for curve in (background, regions[case["case"]])
        )
        image, truth = synth_composite(spec0, spec1, region)
        detection = detect_regions(image, params)
        de, fp = de_fp_metrics(detection.labels.pixel_mask, truth)
        return {
            **case,
            "alternations": detection.diagnostics["alternations"],
            "de": de,
            "degenerate": detection.diagnostics["degenerate"],
            "family": regions[case["case"]].family,
            "fp": fp,
            "region": [region.x, region.y, region.width, region.height],
        }

    records, runtime = _run_cases(run, cases, workers, timing)
    rates: dict[str, Any] = _localize_rates(records)
    for family in sorted({r["family"] for r in records}):
        rates[family] = _localize_rates([r for r in records if r["family"] == family])
    return EvalReport("localize-eval", records, rates, runtime)


def empty_bin_study(
    specs: Sequence[SynthSpec], eps_bin: float = EPS_BIN, workers: int | None = None
) -> EvalReport:
    """Empty-bin counts of the histogram before and after enhancement.

    Without noise a monotone curve never empties fewer bins, so any case with
    fewer empty bins afterwards is counted as a violation.
    """
    if not specs:
        raise InputError("empty-bin study needs at least one spec")

    def run(index: int) -> dict[str, Any]:
        spec = specs[index]
        pre, out, _ = synth_image(spec)
        before = empty_bin_count(from_pixels(pre.pixels, pre.bits), eps_bin)
        after = empty_bin_count(from_pixels(out.pixels, out.bits), eps_bin)
        return {
            "after": after,
            "before": before,
            "case": index,
            "curve": spec.curve.family,
            "params": list(spec.curve.params),
            "sigma": spec.sigma,
        }

    records = parallel_map(run, range(len(specs)), workers)
    noiseless = [r for r in records if r["sigma"] == 0]
    rates = {
        "increased": float(np.mean([r["after"] > r["before"] for r in records])),
        "mean_after": float(np.mean([r["after"] for r in records])),
        "mean_before": float(np.mean([r["before"] for r in records])),
        "violations": sum(r["after"] < r["before"] for r in noiseless),
    }
    return EvalReport("empty-bins", records, rates)
