#!/usr/bin/python
"""Monotone pixel-value transforms and their action on histograms."""

import logging
from collections.abc import Iterable
from dataclasses import dataclass
from typing import Any, Union

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import expit

from contrast_forensics.histogram_core import (
    HistogramLike,
    PixelHistogram,
    as_vector,
    prefix_sum,
)
from contrast_forensics.noise_model import NoiseSpec
from contrast_forensics.util import InputError

logger = logging.getLogger(__name__)

# Matching tolerance on cumulative sums; masses below it act as empty bins
MATCH_TOL = 1e-9


def round_half_away(x: np.ndarray) -> np.ndarray:
    """Round to the nearest integer, halves away from zero."""
    x = np.asarray(x, dtype=np.float64)
    return np.where(x >= 0, np.floor(x + 0.5), -np.floor(-x + 0.5))


@dataclass(frozen=True)
class TransferMatrix:
    """Sparse column-stochastic 0/1 matrix: column i has its one at column_target[i]."""

    n: int
    column_target: np.ndarray

    def __post_init__(self) -> None:
        target = np.array(self.column_target, dtype=np.int64)
        if target.shape != (self.n + 1,):
            raise InputError(f"transfer matrix needs {self.n + 1} columns")
        if target.min() < 0 or target.max() > self.n:
            raise InputError(f"transfer targets must lie in [0, {self.n}]")
        target.setflags(write=False)
        object.__setattr__(self, "column_target", target)

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Scatter-add: out[j] = sum of values[i] over i with target j."""
        return np.bincount(self.column_target, weights=values, minlength=self.n + 1)

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        """Gather: out[i] = y[target[i]]."""
        return y[self.column_target]


@dataclass(frozen=True, eq=False)
class TransformCurve:
    """Monotone non-decreasing map phi from {0..n} into {0..n}."""

    n: int
    phi: np.ndarray

    def __post_init__(self) -> None:
        if int(self.n) < 1:
            raise InputError(f"curve top value must be at least 1, not {self.n}")
        phi = np.array(self.phi)
        if phi.size and not np.all(np.equal(np.mod(phi, 1), 0)):
            raise InputError("curve values must be integers")
        phi = phi.astype(np.int64)
        if phi.shape != (int(self.n) + 1,):
            raise InputError(f"curve needs {int(self.n) + 1} values, got {phi.size}")
        if phi.min() < 0 or phi.max() > self.n:
            raise InputError(f"curve values must lie in [0, {self.n}]")
        if np.any(np.diff(phi) < 0):
            raise InputError("curve must be monotone non-decreasing")
        phi.setflags(write=False)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "phi", phi)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TransformCurve):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.phi, other.phi)

    __hash__ = None

    @classmethod
    def identity(cls, n: int) -> "TransformCurve":
        return cls(n, np.arange(n + 1))

    def transfer_matrix(self) -> TransferMatrix:
        return TransferMatrix(self.n, self.phi)

    def to_dict(self) -> dict[str, Any]:
        return {"n": self.n, "phi": self.phi.tolist()}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TransformCurve":
        try:
            return cls(int(data["n"]), np.asarray(data["phi"]))
        except (KeyError, TypeError, ValueError) as err:
            raise InputError(f"invalid curve record: {err}") from err


CurveLike = Union[TransformCurve, TransferMatrix]


def _transfer(t: CurveLike) -> TransferMatrix:
    return t.transfer_matrix() if isinstance(t, TransformCurve) else t


def gamma_curve(gamma: float, n: int) -> TransformCurve:
    """phi(i) = round(n * (i/n)**gamma)."""
    if not np.isfinite(gamma) or gamma <= 0:
        raise InputError(f"gamma must be positive, not {gamma}")
    i = np.arange(n + 1, dtype=np.float64)
    phi = round_half_away(n * (i / n) ** gamma)
    return TransformCurve(n, np.clip(phi, 0, n))


def sigmoid_curve(alpha: float, mu: float, n: int) -> TransformCurve:
    """Logistic stretch centred at mu*n with width alpha*n, pinned at 0 and n."""
    if not np.isfinite(alpha) or alpha <= 0:
        raise InputError(f"sigmoid alpha must be positive, not {alpha}")
    if not 0.0 <= mu <= 1.0:
        raise InputError(f"sigmoid mu must lie in [0, 1], not {mu}")
    x = np.arange(n + 1, dtype=np.float64) / n
    low = expit(-mu / alpha)
    high = expit((1.0 - mu) / alpha)
    if not high > low:
        raise InputError(f"sigmoid alpha={alpha} is too wide to resolve")
    phi = round_half_away(n * (expit((x - mu) / alpha) - low) / (high - low))
    return TransformCurve(n, np.clip(phi, 0, n))


def hist_eq_curve(h: PixelHistogram) -> TransformCurve:
    """Histogram equalization: phi(i) = round(n * C_h(i))."""
    phi = round_half_away(h.n * prefix_sum(h.values))
    return TransformCurve(h.n, np.clip(phi, 0, h.n))


def spline_curve(control_points: Iterable[tuple[int, int]], n: int) -> TransformCurve:
    """Shape-preserving cubic through control points, sampled at every level."""
    points = [(int(i), int(j)) for i, j in control_points]
    if not points or points[0][0] > 0:
        points.insert(0, (0, 0))
    if points[-1][0] < n:
        points.append((n, n))
    xs = np.array([p[0] for p in points], dtype=np.float64)
    ys = np.array([p[1] for p in points], dtype=np.float64)
    if np.any(np.diff(xs) <= 0):
        raise InputError("control points must be strictly increasing in i")
    if np.any(np.diff(ys) < 0):
        raise InputError("control point outputs must be non-decreasing")
    if xs[0] < 0 or xs[-1] > n or ys.min() < 0 or ys.max() > n:
        raise InputError(f"control points must lie in [0, {n}]")
    values = PchipInterpolator(xs, ys)(np.arange(n + 1, dtype=np.float64))
    phi = np.clip(round_half_away(values), 0, n)
    return TransformCurve(n, np.maximum.accumulate(phi))


def apply_to_histogram(t: CurveLike, h: PixelHistogram) -> PixelHistogram:
    """Histogram of phi(X) for X distributed as h."""
    transfer = _transfer(t)
    if transfer.n != h.n:
        raise InputError(f"curve covers 0..{transfer.n} but histogram 0..{h.n}")
    return PixelHistogram(h.bits, transfer.apply(h.values))


def apply_to_pixels(
    t: CurveLike,
    pixels: Any,
    noise: NoiseSpec | None = None,
    seed: int | np.random.Generator | None = None,
) -> np.ndarray:
    """Map pixels through the curve, then add rounded, clipped Gaussian noise."""
    transfer = _transfer(t)
    pixels = np.asarray(pixels)
    if pixels.size and (pixels.min() < 0 or pixels.max() > transfer.n):
        raise InputError(f"pixel values must lie in [0, {transfer.n}]")
    out = transfer.column_target[pixels.astype(np.int64)]
    if noise is not None and noise.sigma > 0:
        rng = np.random.default_rng(seed)
        noisy = out + rng.normal(0.0, noise.sigma, size=out.shape)
        out = np.clip(round_half_away(noisy), 0, transfer.n).astype(np.int64)
    dtype = pixels.dtype if np.issubdtype(pixels.dtype, np.integer) else np.int64
    return out.astype(dtype)


def gamma_interval(i: int, j: int, n: int) -> tuple[float, float]:
    """Gamma values mapping pixel i to output j: the half-open range (lower, upper].

    lower is clamped at 0 and upper is inf when j == 0.
    """
    if not 0 < i < n:
        raise InputError(f"pixel must lie strictly between 0 and {n}, not {i}")
    if not 0 <= j <= n:
        raise InputError(f"output must lie in [0, {n}], not {j}")
    denominator = np.log(n) - np.log(i)
    lower = max(0.0, (np.log(n) - np.log(j + 0.5)) / denominator)
    upper = np.inf if j == 0 else (np.log(n) - np.log(j - 0.5)) / denominator
    return float(lower), float(upper)


def gamma_breakpoints(n: int, gamma_max: float | None = None) -> np.ndarray:
    """Sorted gamma values at which some pixel changes its rounded output."""
    if n < 2:
        raise InputError(f"n must be at least 2, not {n}")
    log_n = np.log(n)
    levels = log_n - np.log(np.arange(n) + 0.5)
    found = []
    for i in range(1, n):
        row = levels / (log_n - np.log(i))
        row = row[row > 0]
        if gamma_max is not None:
            row = row[row <= gamma_max]
        found.append(row)
    return np.unique(np.concatenate(found))


def distinguishable_gammas(
    n: int, gamma_max: float | None = None
) -> list[tuple[float, float]]:
    """Intervals (lo, hi] of gamma on which gamma_curve(., n) is constant."""
    breaks = gamma_breakpoints(n, gamma_max)
    top = np.inf if gamma_max is None else float(gamma_max)
    edges = np.concatenate([[0.0], breaks])
    if edges[-1] < top:
        edges = np.append(edges, top)
    return [(float(lo), float(hi)) for lo, hi in zip(edges[:-1], edges[1:])]


def histogram_matching_transform(
    source: HistogramLike, target: HistogramLike, tol: float = MATCH_TOL
) -> TransformCurve:
    """phi(i) = smallest j with C_target(j) >= C_source(i)."""
    source, target = as_vector(source), as_vector(target)
    if source.shape != target.shape:
        raise InputError(f"histogram lengths differ: {source.size} vs {target.size}")
    n = source.size - 1
    phi = np.searchsorted(prefix_sum(target), prefix_sum(source) - tol, side="left")
    return TransformCurve(n, np.minimum(phi, n))
