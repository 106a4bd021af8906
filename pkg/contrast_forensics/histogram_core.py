#!/usr/bin/python
"""Pixel histograms on the probability simplex.

Cumulative sums stand in for the lower-triangular all-ones operator F and its
transpose, so nothing here is quadratic in the number of bins.
"""

from dataclasses import dataclass
from typing import Any, Union

import numpy as np

from contrast_forensics.util import InputError

# Bins at or below this mass count as empty
EPS_BIN = 1e-8

# Allowed deviation of a histogram's total mass from 1
MASS_TOL = 1e-9

MAX_BITS = 16


@dataclass(frozen=True, eq=False)
class PixelHistogram:
    """Normalized histogram of pixel values 0..n with n = 2**bits - 1."""

    bits: int
    values: np.ndarray

    def __post_init__(self) -> None:
        if not isinstance(self.bits, (int, np.integer)) or not (
            1 <= self.bits <= MAX_BITS
        ):
            raise InputError(f"bit depth must be in 1..{MAX_BITS}, not {self.bits}")
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size != 2**self.bits:
            raise InputError(
                f"{self.bits}-bit histogram needs {2 ** self.bits} values, "
                f"got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise InputError("histogram values must be finite")
        if np.any(values < 0):
            raise InputError("histogram values must be non-negative")
        if abs(values.sum() - 1.0) > MASS_TOL:
            raise InputError(f"histogram mass is {values.sum():.12g}, expected 1")
        values.setflags(write=False)
        object.__setattr__(self, "bits", int(self.bits))
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        """Top pixel value."""
        return 2**self.bits - 1

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PixelHistogram):
            return NotImplemented
        return self.bits == other.bits and np.array_equal(self.values, other.values)

    __hash__ = None

    @classmethod
    def from_values(cls, values: Any) -> "PixelHistogram":
        """Build a histogram, inferring the bit depth from the vector length."""
        values = np.asarray(values, dtype=np.float64)
        bits = int(np.log2(values.size)) if values.size > 0 else 0
        if values.size == 0 or 2**bits != values.size:
            raise InputError(f"histogram length {values.size} is not a power of two")
        return cls(bits, values)

    def to_dict(self) -> dict[str, Any]:
        return {"bits": self.bits, "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PixelHistogram":
        try:
            return cls(int(data["bits"]), np.asarray(data["values"], dtype=float))
        except (KeyError, TypeError, ValueError) as err:
            raise InputError(f"invalid histogram record: {err}") from err


@dataclass(frozen=True, eq=False)
class CumulativeHistogram:
    """Running sums of a histogram; the final entry is the total mass."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise InputError("cumulative histogram must be a non-empty vector")
        if np.any(np.diff(values) < 0):
            raise InputError("cumulative histogram must be non-decreasing")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


HistogramLike = Union[PixelHistogram, np.ndarray, list, tuple]


def as_vector(h: HistogramLike) -> np.ndarray:
    """Return the mass vector of a histogram or array-like as float64."""
    if isinstance(h, PixelHistogram):
        return h.values
    return np.asarray(h, dtype=np.float64)


def prefix_sum(x: np.ndarray) -> np.ndarray:
    """Apply F: out[i] = sum of x[0..i]."""
    return np.cumsum(x)


def prefix_sum_adjoint(y: np.ndarray) -> np.ndarray:
    """Apply F transpose: out[i] = sum of y[i..n]."""
    return np.cumsum(y[::-1])[::-1]


def from_pixels(pixels: Any, bits: int) -> PixelHistogram:
    """Normalized histogram of integer pixel values at the given bit depth."""
    if not 1 <= bits <= MAX_BITS:
        raise InputError(f"bit depth must be in 1..{MAX_BITS}, not {bits}")
    pixels = np.asarray(pixels)
    if pixels.size == 0:
        raise InputError("cannot build a histogram from zero pixels")
    if not np.issubdtype(pixels.dtype, np.integer):
        if not np.all(np.equal(np.mod(pixels, 1), 0)):
            raise InputError("pixel values must be integers")
        pixels = pixels.astype(np.int64)
    pixels = pixels.ravel()
    n = 2**bits - 1
    low, high = int(pixels.min()), int(pixels.max())
    if low < 0 or high > n:
        raise InputError(f"pixel values must lie in [0, {n}], found [{low}, {high}]")
    counts = np.bincount(pixels.astype(np.int64), minlength=n + 1)
    return PixelHistogram(bits, counts / pixels.size)


def cumulative(h: HistogramLike) -> CumulativeHistogram:
    """Cumulative histogram computed by prefix sum."""
    return CumulativeHistogram(prefix_sum(as_vector(h)))


def w1_distance(a: HistogramLike, b: HistogramLike) -> float:
    """Wasserstein-1 distance: l1 norm of the difference of the cumulative sums."""
    a, b = as_vector(a), as_vector(b)
    if a.shape != b.shape:
        raise InputError(f"histogram lengths differ: {a.size} vs {b.size}")
    return float(np.abs(prefix_sum(a - b)).sum())


def empty_bin_count(h: HistogramLike, eps_bin: float = EPS_BIN) -> int:
    """Number of bins whose mass is at most eps_bin."""
    return int(np.count_nonzero(as_vector(h) <= eps_bin))


def interior_empty_bin_count(h: HistogramLike, eps_bin: float = EPS_BIN) -> int:
    """Empty bins strictly between the first and the last occupied bin."""
    occupied = np.flatnonzero(as_vector(h) > eps_bin)
    if occupied.size < 2:
        return 0
    return int(occupied[-1] - occupied[0] + 1 - occupied.size)


def project_to_simplex(x: Any) -> np.ndarray:
    """Euclidean projection onto {h >= 0, sum(h) = 1}.

    The KKT conditions give h = max(x + xi, 0); xi is found exactly by sorting.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise InputError("projection needs a non-empty vector")
    if not np.all(np.isfinite(x)):
        raise InputError("projection input contains NaN or Inf")
    u = np.sort(x)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, x.size + 1)
    support = np.nonzero(u + (1.0 - css) / k > 0)[0]
    # the largest entry always qualifies, so support is never empty
    last = support[-1]
    xi = (1.0 - css[last]) / (last + 1)
    return np.maximum(x + xi, 0.0)
