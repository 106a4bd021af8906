#!/usr/bin/python
"""Banded Toeplitz model of additive, rounded, clipped pixel noise."""

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from contrast_forensics.histogram_core import MASS_TOL, PixelHistogram
from contrast_forensics.util import InputError

NOISE_KINDS = ("gaussian",)
BOUNDARY_MODES = ("clip",)


@dataclass(frozen=True)
class NoiseSpec:
    """Additive zero-mean noise in pixel-value units."""

    sigma: float = 0.0
    kind: str = "gaussian"

    def __post_init__(self) -> None:
        if self.kind not in NOISE_KINDS:
            raise InputError(f"unsupported noise kind '{self.kind}'")
        if not np.isfinite(self.sigma) or self.sigma < 0:
            raise InputError(f"noise sigma must be non-negative, not {self.sigma}")


@dataclass(frozen=True, eq=False)
class NoiseMatrix:
    """Band r[d] for offsets d in [-D, D]; mass leaving 0..n is folded back."""

    n: int
    band: np.ndarray
    boundary_mode: str = "clip"
    sigma: float = 0.0

    def __post_init__(self) -> None:
        band = np.array(self.band, dtype=np.float64)
        if band.ndim != 1 or band.size % 2 != 1:
            raise InputError("noise band must have odd length")
        if np.any(band < 0) or abs(band.sum() - 1.0) > MASS_TOL:
            raise InputError("noise band must be non-negative and sum to 1")
        if self.boundary_mode not in BOUNDARY_MODES:
            raise InputError(f"unsupported boundary mode '{self.boundary_mode}'")
        band.setflags(write=False)
        object.__setattr__(self, "band", band)

    @property
    def half_width(self) -> int:
        return (self.band.size - 1) // 2

    def apply(self, values: np.ndarray) -> np.ndarray:
        """R @ values as a banded convolution with boundary folding."""
        width = self.half_width
        if width == 0:
            return values * self.band[0]
        full = np.convolve(values, self.band)
        out = full[width : width + self.n + 1].copy()
        out[0] += full[:width].sum()
        out[-1] += full[width + self.n + 1 :].sum()
        return out

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        """R.T @ y: edge-replicated correlation with the band."""
        width = self.half_width
        if width == 0:
            return y * self.band[0]
        padded = np.concatenate([np.full(width, y[0]), y, np.full(width, y[-1])])
        return np.correlate(padded, self.band, mode="valid")


def gaussian_noise_matrix(sigma: float, n: int) -> NoiseMatrix:
    """r[d] = Phi((d + 1/2)/sigma) - Phi((d - 1/2)/sigma) for |d| <= ceil(6 sigma) + 1."""
    NoiseSpec(sigma)
    if sigma == 0:
        return NoiseMatrix(n, np.ones(1), sigma=0.0)
    width = int(np.ceil(6 * sigma)) + 1
    offsets = np.arange(-width, width + 1, dtype=np.float64)
    band = ndtr((offsets + 0.5) / sigma) - ndtr((offsets - 0.5) / sigma)
    # tails past the band are below 1e-8
    band = np.maximum(band, 0.0)
    return NoiseMatrix(n, band / band.sum(), sigma=float(sigma))


def noise_matrix_for(spec: NoiseSpec | None, n: int) -> NoiseMatrix:
    """Noise matrix for a spec; None means noise-free."""
    return gaussian_noise_matrix(0.0 if spec is None else spec.sigma, n)


def apply_noise(r: NoiseMatrix, h: PixelHistogram) -> PixelHistogram:
    """Histogram of the noisy pixels given the clean histogram h."""
    if r.n != h.n:
        raise InputError(f"noise matrix covers 0..{r.n} but histogram 0..{h.n}")
    return PixelHistogram(h.bits, r.apply(h.values))
