#!/usr/bin/python
"""Synthetic test images with known curves, noise and spliced regions."""

import logging
from collections.abc import Mapping
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
from scipy.ndimage import gaussian_filter1d

from contrast_forensics.histogram_core import PixelHistogram, from_pixels
from contrast_forensics.image_io import GrayImage, read_image
from contrast_forensics.noise_model import NoiseSpec
from contrast_forensics.transforms import (
    TransformCurve,
    apply_to_pixels,
    gamma_curve,
    hist_eq_curve,
    sigmoid_curve,
    spline_curve,
)
from contrast_forensics.util import InputError, check_known_keys, parse_float_list

logger = logging.getLogger(__name__)

CURVE_FAMILIES = ("identity", "gamma", "sigmoid", "spline", "equalize")
BASE_KINDS = ("smooth", "image")

# Standardized walk values are clipped to +-3 before scaling and exponentiation
WALK_CLIP = 3.0


@dataclass(frozen=True)
class CurveSpec:
    family: str = "identity"
    params: tuple[float, ...] = ()
    control_points: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        if self.family not in CURVE_FAMILIES:
            raise InputError(
                f"unknown curve family '{self.family}' (expected one of {CURVE_FAMILIES})"
            )
        params = tuple(float(p) for p in self.params)
        expected = {"gamma": 1, "sigmoid": 2}.get(self.family, 0)
        if len(params) != expected:
            raise InputError(f"{self.family} curve needs {expected} parameter(s)")
        points = tuple((int(i), int(j)) for i, j in self.control_points)
        if self.family == "spline" and not points:
            raise InputError("spline curve needs control points")
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "control_points", points)

    def build(self, n: int, pre: PixelHistogram | None = None) -> TransformCurve:
        """Curve over 0..n; equalization uses the histogram of the pre image."""
        if self.family == "gamma":
            return gamma_curve(self.params[0], n)
        if self.family == "sigmoid":
            return sigmoid_curve(self.params[0], self.params[1], n)
        if self.family == "spline":
            return spline_curve(self.control_points, n)
        if self.family == "equalize":
            if pre is None:
                raise InputError("equalization needs the pre-enhancement histogram")
            return hist_eq_curve(pre)
        return TransformCurve.identity(n)

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> "CurveSpec":
        check_known_keys(mapping, ("family", "params", "control_points"), "curve")
        return cls(
            family=mapping.get("family", "identity"),
            params=tuple(mapping.get("params", ())),
            control_points=tuple(tuple(p) for p in mapping.get("control_points", ())),
        )


@dataclass(frozen=True)
class SynthSpec:
    bits: int = 8
    width: int = 256
    height: int = 256
    base: str = "smooth"
    base_path: str | None = None
    smoothness: float = 8.0
    amplitude: float = 1.0
    curve: CurveSpec = field(default_factory=CurveSpec)
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not 1 <= self.bits <= 16:
            raise InputError(f"bit depth must be in 1..16, not {self.bits}")
        if self.width < 1 or self.height < 1:
            raise InputError(f"image dimensions must be positive: {self.width}x{self.height}")
        if self.base not in BASE_KINDS:
            raise InputError(f"unknown base histogram '{self.base}'")
        if self.base == "image" and not self.base_path:
            raise InputError("base 'image' needs base_path")
        if self.smoothness <= 0 or self.amplitude < 0:
            raise InputError("smoothness must be positive and amplitude non-negative")
        if not isinstance(self.curve, CurveSpec):
            raise InputError(f"curve must be a mapping with a family, not {self.curve!r}")
        NoiseSpec(self.sigma)

    @property
    def n(self) -> int:
        return 2**self.bits - 1

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> "SynthSpec":
        values = dict(mapping)
        check_known_keys(values, cls.__dataclass_fields__, "synth")
        if isinstance(values.get("curve"), Mapping):
            values["curve"] = CurveSpec.from_mapping(values["curve"])
        return cls(**values)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class Region:
    """Axis-aligned rectangle in pixel coordinates."""

    x: int
    y: int
    width: int
    height: int

    def mask(self, width: int, height: int) -> np.ndarray:
        if min(self.x, self.y, self.width, self.height) < 0:
            raise InputError(f"region has negative coordinates: {self}")
        if self.x + self.width > width or self.y + self.height > height:
            raise InputError(f"region {self} exceeds the {width}x{height} image")
        mask = np.zeros((height, width), dtype=bool)
        mask[self.y : self.y + self.height, self.x : self.x + self.width] = True
        return mask

    @classmethod
    def parse(cls, text: str) -> "Region":
        try:
            x, y, w, h = (int(part) for part in text.split(","))
        except ValueError as err:
            raise InputError(f"region must be 'x,y,width,height', not '{text}'") from err
        return cls(x, y, w, h)


def curve_from_text(family: str, params: str = "") -> CurveSpec:
    """CurveSpec from a family name and its command-line parameters.

    gamma and sigmoid take comma-separated numbers, spline takes control points
    as 'i:j,i:j,...'; other families ignore params.
    """
    if family in ("gamma", "sigmoid"):
        return CurveSpec(family, tuple(parse_float_list(params)))
    if family == "spline":
        return CurveSpec(family, control_points=parse_control_points(params))
    return CurveSpec(family)


def parse_control_points(text: str) -> tuple[tuple[int, int], ...]:
    """Parse 'i:j,i:j,...' into spline control points."""
    try:
        return tuple(
            (int(i), int(j))
            for i, j in (item.split(":") for item in text.split(",") if item.strip())
        )
    except ValueError as err:
        raise InputError(f"control points must be 'i:j,i:j,...', not '{text}'") from err


def _streams(seed: int) -> list[np.random.Generator]:
    """Independent generators for the base histogram, the pixels and the noise."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)]


def smooth_random_histogram(
    bits: int,
    seed: int | np.random.Generator = 0,
    smoothness: float = 8.0,
    amplitude: float = 1.0,
) -> PixelHistogram:
    """exp of a smoothed, standardized, clipped Gaussian random walk, normalized.

    smoothness is the filter width in bins for 8-bit data and scales with depth.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    size = 2**bits
    walk = np.cumsum(rng.normal(size=size))
    smooth = gaussian_filter1d(walk, sigma=smoothness * size / 256, mode="nearest")
    spread = smooth.std()
    standard = (smooth - smooth.mean()) / spread if spread > 0 else np.zeros(size)
    mass = np.exp(amplitude * np.clip(standard, -WALK_CLIP, WALK_CLIP))
    return PixelHistogram(bits, mass / mass.sum())


def sample_pixels(
    h: PixelHistogram, shape: tuple[int, int], rng: np.random.Generator
) -> np.ndarray:
    return rng.choice(h.n + 1, size=shape, p=h.values).astype(np.uint16)


def base_histogram(spec: SynthSpec, rng: np.random.Generator) -> PixelHistogram:
    if spec.base == "image":
        source = read_image(spec.base_path)
        if source.bits != spec.bits:
            raise InputError(
                f"{spec.base_path}: base image is {source.bits}-bit, spec asks {spec.bits}"
            )
        return from_pixels(source.pixels, source.bits)
    return smooth_random_histogram(spec.bits, rng, spec.smoothness, spec.amplitude)


def synth_image(spec: SynthSpec) -> tuple[GrayImage, GrayImage, TransformCurve]:
    """Return the pre-enhancement image, the enhanced noisy image and the true curve."""
    hist_rng, pixel_rng, noise_rng = _streams(spec.seed)
    base = base_histogram(spec, hist_rng)
    pre = sample_pixels(base, (spec.height, spec.width), pixel_rng)
    curve = spec.curve.build(spec.n, from_pixels(pre, spec.bits))
    out = apply_to_pixels(curve, pre, NoiseSpec(spec.sigma), seed=noise_rng)
    logger.debug(
        "synthesized %dx%d %d-bit image, curve %s",
        spec.width,
        spec.height,
        spec.bits,
        spec.curve.family,
    )
    return (
        GrayImage.from_array(pre, spec.bits),
        GrayImage.from_array(out, spec.bits),
        curve,
    )


def synth_composite(
    spec0: SynthSpec, spec1: SynthSpec, region: Region | np.ndarray
) -> tuple[GrayImage, np.ndarray]:
    """Splice: region pixels take curve1, the rest curve0, over one shared base image.

    The base histogram, pixels and seed come from spec0; each part gets its own
    spec's noise level.
    """
    if (spec0.bits, spec0.width, spec0.height) != (spec1.bits, spec1.width, spec1.height):
        raise InputError("composite specs must share bit depth and dimensions")
    if isinstance(region, Region):
        mask = region.mask(spec0.width, spec0.height)
    else:
        mask = np.asarray(region).astype(bool)
        if mask.shape != (spec0.height, spec0.width):
            raise InputError(
                f"region mask shape {mask.shape} does not match "
                f"{spec0.height}x{spec0.width}"
            )
    hist_rng, pixel_rng, noise_rng = _streams(spec0.seed)
    base = base_histogram(spec0, hist_rng)
    pre = sample_pixels(base, (spec0.height, spec0.width), pixel_rng)
    pre_hist = from_pixels(pre, spec0.bits)
    out0, out1 = (
        apply_to_pixels(spec.curve.build(spec.n, pre_hist), pre, NoiseSpec(spec.sigma), noise_rng)
        for spec in (spec0, spec1)
    )
    image = np.where(mask, out1, out0)
    return GrayImage.from_array(image, spec0.bits), mask
