#!/usr/bin/python
"""Joint estimation of a free-form monotone curve and the original histogram.

Three blocks are updated in turn: the original histogram h for the current
curve, the denoised observation h_hat coupling h to the observation, and the
curve itself by matching h onto h_hat.

The alternation starts from the better of the identity and a curve read off
the observation's occupancy: runs of empty bins mark stretched ranges where
every occupied level has one preimage, and the remaining source levels are
shared by the densely occupied bins in proportion to their mass.
"""

import logging
from collections.abc import Mapping
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
from scipy.ndimage import maximum_filter1d

from contrast_forensics.histogram_core import (
    EPS_BIN,
    HistogramLike,
    PixelHistogram,
    as_vector,
    interior_empty_bin_count,
    w1_distance,
)
from contrast_forensics.histogram_solver import (
    SolverConfig,
    SolverReport,
    W1Term,
    W1Problem,
    pull_back_histogram,
    recover_histogram,
)
from contrast_forensics.noise_model import NoiseMatrix
from contrast_forensics.transforms import (
    TransformCurve,
    apply_to_histogram,
    histogram_matching_transform,
)
from contrast_forensics.util import InputError, NumericalError, check_known_keys

logger = logging.getLogger(__name__)

# Occupied bins this close to an interior empty bin are taken to have one preimage
GAP_WINDOW = 6


@dataclass(frozen=True)
class NonparamConfig:
    xi: float = 10.0
    alt_max: int = 15
    tol: float = 1e-6
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self) -> None:
        if not np.isfinite(self.xi) or self.xi <= 0:
            raise InputError(f"xi must be positive, not {self.xi}")
        if int(self.alt_max) < 1:
            raise InputError(f"alt_max must be at least 1, not {self.alt_max}")
        if not 0 < self.tol < 1:
            raise InputError(f"tol must lie in (0, 1), not {self.tol}")

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> "NonparamConfig":
        values = dict(mapping)
        solver = values.pop("solver", {})
        check_known_keys(values, ("xi", "alt_max", "tol"), "nonparametric")
        return cls(solver=SolverConfig.from_mapping(solver), **values)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class NonparamEstimate:
    curve: TransformCurve
    h_star: PixelHistogram
    h_hat: PixelHistogram
    objective_trace: tuple[float, ...]
    alternations: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "alternations": self.alternations,
            "curve": self.curve.to_dict(),
            "h_hat": self.h_hat.to_dict(),
            "h_star": self.h_star.to_dict(),
            "objective_trace": list(self.objective_trace),
        }


def alternation_objective(
    h_obs: PixelHistogram,
    h: PixelHistogram,
    h_hat: PixelHistogram,
    curve: TransformCurve,
    noise: NoiseMatrix,
    xi: float,
) -> float:
    """W1(h_obs, R h_hat) + xi * W1(h_hat, T h)."""
    blurred = noise.apply(h_hat.values)
    return w1_distance(h_obs, blurred) + xi * w1_distance(
        h_hat, apply_to_histogram(curve, h)
    )


def solve_h_hat_with_report(
    h_obs: PixelHistogram,
    h: PixelHistogram,
    curve: TransformCurve,
    noise: NoiseMatrix,
    cfg: NonparamConfig | None = None,
    init: PixelHistogram | None = None,
) -> SolverReport:
    """Minimize W1(h_obs, R h_hat) + xi * W1(h_hat, T h) over the simplex.

    The start is the best of init, T h and h_obs under the exact objective.
    """
    cfg = cfg or NonparamConfig()
    if not h_obs.n == h.n == curve.n == noise.n:
        raise InputError("size mismatch between histograms, curve and noise")
    transformed = apply_to_histogram(curve, h).values
    problem = W1Problem(
        terms=[
            W1Term(1.0, h_obs.values, noise.apply, noise.adjoint),
            W1Term(cfg.xi, transformed),
        ],
        cfg=cfg.solver,
    )
    starts = [transformed, h_obs.values]
    if init is not None:
        starts.insert(0, init.values)
    start = min(starts, key=problem.exact)
    x, objective, iterations, trace = problem.minimize(start)
    return SolverReport(
        h_star=PixelHistogram(h_obs.bits, x),
        objective=objective,
        iterations=iterations,
        trace=tuple(trace),
        w1_term=objective,
    )


def solve_h_hat(
    h_obs: PixelHistogram,
    h: PixelHistogram,
    curve: TransformCurve,
    noise: NoiseMatrix,
    cfg: NonparamConfig | None = None,
    init: PixelHistogram | None = None,
) -> PixelHistogram:
    return solve_h_hat_with_report(h_obs, h, curve, noise, cfg, init).h_star


def _share_levels(mass: np.ndarray, total: float) -> np.ndarray:
    """Split total source levels over bins in proportion to mass, at least one each."""
    share = np.ones(mass.size)
    if total <= mass.size:
        return share
    active = np.ones(mass.size, dtype=bool)
    while True:
        scale = (total - np.count_nonzero(~active)) / mass[active].sum()
        low = active & (scale * mass < 1)
        if not low.any():
            break
        active &= ~low
    share[active] = scale * mass[active]
    return share


def occupancy_seed_curve(
    h: HistogramLike, window: int = GAP_WINDOW, eps_bin: float = EPS_BIN
) -> TransformCurve:
    """Monotone curve whose image is the occupied range of h.

    Levels outside the occupied range map to themselves. Without interior empty
    bins the result is the identity.
    """
    values = as_vector(h)
    n = values.size - 1
    occupied = values > eps_bin
    where = np.flatnonzero(occupied)
    if where.size < 2:
        return TransformCurve.identity(n)
    inside = np.zeros(n + 1, dtype=bool)
    inside[where[0] : where[-1] + 1] = True
    gaps = inside & ~occupied
    near = occupied & (maximum_filter1d(gaps.astype(np.uint8), size=2 * window + 1) > 0)
    dense = occupied & ~near

    levels = np.zeros(n + 1)
    levels[~inside] = 1.0
    levels[near] = 1.0
    spare = (n + 1) - np.count_nonzero(~inside) - np.count_nonzero(near)
    if dense.any():
        levels[dense] = _share_levels(values[dense], spare)
    else:
        levels[near] = _share_levels(values[near], spare + np.count_nonzero(near))
    phi = np.searchsorted(np.cumsum(levels), np.arange(n + 1) + 0.5, side="left")
    return TransformCurve(n, np.minimum(phi, n))


def penalized_objective(
    h_obs: PixelHistogram,
    h: PixelHistogram,
    h_hat: PixelHistogram,
    curve: TransformCurve,
    noise: NoiseMatrix,
    cfg: NonparamConfig,
) -> float:
    """alternation_objective plus lam per empty bin inside the occupied range of h."""
    gaps = interior_empty_bin_count(h, cfg.solver.eps_bin)
    return alternation_objective(h_obs, h, h_hat, curve, noise, cfg.xi) + cfg.solver.lam * gaps


def estimate_nonparametric(
    h_obs: PixelHistogram,
    noise: NoiseMatrix,
    cfg: NonparamConfig | None = None,
) -> NonparamEstimate:
    """Alternate histogram, denoised-histogram and curve updates.

    The start is the identity or the occupancy seed of the histogram recovered
    under the identity, whichever has the lower penalized_objective; ties keep
    the identity. A round is kept only if it does not increase that objective.
    """
    cfg = cfg or NonparamConfig()
    if noise.n != h_obs.n:
        raise InputError(f"noise matrix covers 0..{noise.n} but histogram 0..{h_obs.n}")

    identity = TransformCurve.identity(h_obs.n)
    recovered = recover_histogram(h_obs, identity, noise, cfg.solver).h_star
    seed = occupancy_seed_curve(recovered, eps_bin=cfg.solver.eps_bin)
    starts = [(identity, h_obs)]
    if seed != identity:
        starts.append((seed, PixelHistogram(h_obs.bits, pull_back_histogram(h_obs, seed))))
    scored = [
        (penalized_objective(h_obs, h, h_obs, curve, noise, cfg), curve, h)
        for curve, h in starts
    ]
    objective, curve, h = min(scored, key=lambda entry: entry[0])
    h_hat = h_obs
    logger.debug(
        "starting from %s curve, objective %.6g",
        "identity" if curve is identity else "occupancy",
        objective,
    )
    trace = [objective]
    rounds = 0
    for rounds in range(1, cfg.alt_max + 1):
        h_new = recover_histogram(h_obs, curve, noise, cfg.solver).h_star
        h_hat_new = solve_h_hat(h_obs, h_new, curve, noise, cfg, init=h_hat)
        curve_new = histogram_matching_transform(h_new, h_hat_new)
        value = penalized_objective(h_obs, h_new, h_hat_new, curve_new, noise, cfg)
        if not np.isfinite(value):
            raise NumericalError(f"alternation {rounds} produced a non-finite objective", trace)
        if value > objective:
            logger.debug("alternation %d rejected: %.6g > %.6g", rounds, value, objective)
            break
        settled = curve_new == curve
        change = objective - value
        curve, h, h_hat, objective = curve_new, h_new, h_hat_new, value
        trace.append(objective)
        logger.debug("alternation %d: objective %.6g", rounds, objective)
        if settled or objective <= 0 or change <= cfg.tol * objective:
            break
    return NonparamEstimate(
        curve=curve,
        h_star=h,
        h_hat=h_hat,
        objective_trace=tuple(trace),
        alternations=rounds,
    )
