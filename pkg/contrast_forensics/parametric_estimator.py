#!/usr/bin/python
"""Grid search over gamma or sigmoid parameters.

Each probed parameter gets its curve and the histogram solver returns the best
achievable objective for that curve. Candidates are ranked by that objective
plus lam for every empty bin inside the occupied range of the recovered
histogram, and the smallest score wins. Probes that produce the same discrete
curve share one solve.
"""

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from contrast_forensics.histogram_core import PixelHistogram
from contrast_forensics.histogram_solver import SolverConfig, SolverReport, recover_histogram
from contrast_forensics.noise_model import NoiseMatrix
from contrast_forensics.transforms import TransformCurve, gamma_curve, sigmoid_curve
from contrast_forensics.util import InputError, parallel_map, parse_grid

logger = logging.getLogger(__name__)

FAMILIES = {"gamma": 1, "sigmoid": 2}

DEFAULT_GAMMA_GRID = "0.1:0.01:2.5"
DEFAULT_SIGMOID_ALPHAS = "0.05:0.05:0.5"
DEFAULT_SIGMOID_MUS = "0.1:0.1:0.9"

Param = tuple[float, ...]


@dataclass(frozen=True)
class ParamGrid:
    """Parameters to probe, in order. duplicates maps a kept parameter to the
    parameters dropped because they produce the same curve."""

    family: str
    values: tuple[Param, ...]
    duplicates: dict[Param, tuple[Param, ...]] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise InputError(f"unknown curve family '{self.family}'")
        values = tuple(tuple(float(v) for v in np.atleast_1d(p)) for p in self.values)
        if not values:
            raise InputError("parameter grid is empty")
        arity = FAMILIES[self.family]
        for param in values:
            if len(param) != arity:
                raise InputError(f"{self.family} parameters need {arity} value(s): {param}")
            if self.family == "gamma" and not param[0] > 0:
                raise InputError(f"gamma values must be positive, not {param[0]}")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    @classmethod
    def gamma(cls, spec: str | list[float] = DEFAULT_GAMMA_GRID) -> "ParamGrid":
        values = parse_grid(spec) if isinstance(spec, str) else list(spec)
        return cls("gamma", tuple((g,) for g in values))

    @classmethod
    def sigmoid(
        cls,
        alphas: str | list[float] = DEFAULT_SIGMOID_ALPHAS,
        mus: str | list[float] = DEFAULT_SIGMOID_MUS,
    ) -> "ParamGrid":
        alphas = parse_grid(alphas) if isinstance(alphas, str) else list(alphas)
        mus = parse_grid(mus) if isinstance(mus, str) else list(mus)
        return cls("sigmoid", tuple((a, m) for a in alphas for m in mus))

    def curve(self, param: Param, n: int) -> TransformCurve:
        if self.family == "gamma":
            return gamma_curve(param[0], n)
        return sigmoid_curve(param[0], param[1], n)


@dataclass(frozen=True)
class ParametricEstimate:
    family: str
    best_param: Param
    best_objective: float
    landscape: tuple[tuple[Param, float], ...]
    best_curve: TransformCurve
    best_report: SolverReport

    def to_dict(self) -> dict[str, Any]:
        return {
            "best_curve": self.best_curve.to_dict(),
            "best_objective": self.best_objective,
            "best_param": list(self.best_param),
            "family": self.family,
            "landscape": [
                {"objective": value, "param": list(param)}
                for param, value in self.landscape
            ],
            "recovered": self.best_report.to_dict(),
        }


def dedupe_grid_by_curve(grid: ParamGrid, n: int) -> ParamGrid:
    """Drop grid entries whose curve equals the curve of an earlier entry."""
    kept: list[Param] = []
    duplicates: dict[Param, list[Param]] = {}
    seen: dict[bytes, Param] = {}
    for param in grid.values:
        key = grid.curve(param, n).phi.tobytes()
        if key in seen:
            duplicates[seen[key]].append(param)
            continue
        seen[key] = param
        kept.append(param)
        duplicates[param] = []
    logger.debug("deduplicated %d grid entries to %d curves", len(grid), len(kept))
    return ParamGrid(
        grid.family,
        tuple(kept),
        {param: tuple(dups) for param, dups in duplicates.items() if dups},
    )


def estimate_parametric(
    h_obs: PixelHistogram,
    grid: ParamGrid,
    noise: NoiseMatrix,
    cfg: SolverConfig | None = None,
    dedupe: bool = True,
    workers: int | None = None,
) -> ParametricEstimate:
    """Probe every grid parameter; ties go to the earliest entry in grid order."""
    cfg = cfg or SolverConfig()
    if not len(grid):
        raise InputError("parameter grid is empty")
    n = h_obs.n

    curves = [grid.curve(param, n) for param in grid.values]
    owner = list(range(len(curves)))
    if dedupe:
        first: dict[bytes, int] = {}
        for index, curve in enumerate(curves):
            owner[index] = first.setdefault(curve.phi.tobytes(), index)
    solve_indices = sorted(set(owner))

    def solve(index: int) -> SolverReport:
        return recover_histogram(h_obs, curves[index], noise, cfg)

    reports = dict(zip(solve_indices, parallel_map(solve, solve_indices, workers)))
    objectives = [reports[owner[index]].penalized(cfg.lam) for index in range(len(curves))]
    best = int(np.argmin(objectives))
    logger.info(
        "%s grid: %d probes, %d solves, best %s (score %.6g)",
        grid.family,
        len(curves),
        len(solve_indices),
        grid.values[best],
        objectives[best],
    )
    return ParametricEstimate(
        family=grid.family,
        best_param=grid.values[best],
        best_objective=objectives[best],
        landscape=tuple(zip(grid.values, objectives)),
        best_curve=curves[best],
        best_report=reports[owner[best]],
    )
