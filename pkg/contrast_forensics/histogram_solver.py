#!/usr/bin/python
"""Recover the pre-enhancement histogram for a known curve and noise level.

The objective is W1(h_obs, R T h) + lam * sum(exp(-rho * h)). Its l1 term is
relaxed through 0.5 * (c**2 / u + u) >= |c|, which turns each outer iteration
into a smooth problem at fixed u solved by projected gradient on the simplex;
u then has the closed form |c|, floored at a share of the largest residual so
that residuals near zero do not freeze the inner solve.
"""

import logging
from collections.abc import Callable, Mapping, Sequence
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from contrast_forensics.histogram_core import (
    EPS_BIN,
    PixelHistogram,
    as_vector,
    empty_bin_count,
    interior_empty_bin_count,
    prefix_sum,
    prefix_sum_adjoint,
    project_to_simplex,
)
from contrast_forensics.noise_model import NoiseMatrix
from contrast_forensics.transforms import TransformCurve
from contrast_forensics.util import InputError, NumericalError, check_known_keys

logger = logging.getLogger(__name__)

Operator = Callable[[np.ndarray], np.ndarray]

# Below this relative floor a rejected outer step retries with the bare u_floor
REL_FLOOR_CUTOFF = 1e-6


def _identity(x: np.ndarray) -> np.ndarray:
    return x


@dataclass(frozen=True)
class SolverConfig:
    lam: float = 0.75
    rho: float = 1.0
    eta0: float = 1.2
    outer_max: int = 50
    inner_max: int = 10
    tol: float = 1e-6
    u_floor: float = 1e-12
    u_rel: float = 1e-3
    eps_bin: float = EPS_BIN
    max_backtracks: int = 40

    def __post_init__(self) -> None:
        for name in ("lam", "rho", "eta0", "tol", "u_floor"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise InputError(f"solver {name} must be positive, not {value}")
        if self.tol >= 1:
            raise InputError(f"solver tol must be below 1, not {self.tol}")
        if not 0 <= self.u_rel < 1:
            raise InputError(f"solver u_rel must lie in [0, 1), not {self.u_rel}")
        if self.eps_bin < 0:
            raise InputError(f"eps_bin must be non-negative, not {self.eps_bin}")
        for name in ("outer_max", "inner_max", "max_backtracks"):
            if int(getattr(self, name)) < 1:
                raise InputError(f"solver {name} must be at least 1")

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> "SolverConfig":
        values = dict(mapping)
        if "lambda" in values:
            values["lam"] = values.pop("lambda")
        check_known_keys(values, cls.__dataclass_fields__, "solver")
        return cls(**values)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class SolverReport:
    h_star: PixelHistogram
    objective: float
    iterations: int
    trace: tuple[float, ...]
    w1_term: float = 0.0
    surrogate: float = 0.0
    empty_bins: int = 0
    interior_empty_bins: int = 0

    def penalized(self, lam: float) -> float:
        """objective plus lam per empty bin inside the occupied range of h_star."""
        return self.objective + lam * self.interior_empty_bins

    def to_dict(self) -> dict[str, Any]:
        return {
            "empty_bins": self.empty_bins,
            "h_star": self.h_star.to_dict(),
            "interior_empty_bins": self.interior_empty_bins,
            "iterations": self.iterations,
            "objective": self.objective,
            "surrogate": self.surrogate,
            "trace": list(self.trace),
            "w1_term": self.w1_term,
        }


@dataclass(frozen=True)
class W1Term:
    """weight * || F (target - forward(x)) ||_1 and its relaxation at fixed u."""

    weight: float
    target: np.ndarray
    forward: Operator = _identity
    adjoint: Operator = _identity

    def residual(self, x: np.ndarray) -> np.ndarray:
        return prefix_sum(self.target - self.forward(x))

    def exact(self, x: np.ndarray) -> float:
        return self.weight * float(np.abs(self.residual(x)).sum())

    def weights(self, x: np.ndarray, u_floor: float, rel: float = 0.0) -> np.ndarray:
        """|c| floored at u_floor and at rel times the largest |c|."""
        c = np.abs(self.residual(x))
        return np.maximum(c, max(u_floor, rel * float(c.max(initial=0.0))))

    def relaxed(self, x: np.ndarray, u: np.ndarray) -> float:
        c = self.residual(x)
        return self.weight * 0.5 * float(np.sum(c * c / u + u))

    def gradient(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        c = self.residual(x)
        return -self.weight * self.adjoint(prefix_sum_adjoint(c / u))


@dataclass(frozen=True)
class ExpSurrogate:
    """lam * sum(exp(-rho * x)), the smooth stand-in for the empty-bin count."""

    lam: float
    rho: float

    def value(self, x: np.ndarray) -> float:
        return self.lam * float(np.exp(-self.rho * x).sum())

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return -self.lam * self.rho * np.exp(-self.rho * x)


@dataclass
class W1Problem:
    terms: Sequence[W1Term]
    penalty: ExpSurrogate | None = None
    cfg: SolverConfig = field(default_factory=SolverConfig)

    def exact(self, x: np.ndarray) -> float:
        value = sum(term.exact(x) for term in self.terms)
        if self.penalty is not None:
            value += self.penalty.value(x)
        return value

    def weights(self, x: np.ndarray, rel: float = 0.0) -> list[np.ndarray]:
        return [term.weights(x, self.cfg.u_floor, rel) for term in self.terms]

    def relaxed(self, x: np.ndarray, us: list[np.ndarray]) -> float:
        value = sum(term.relaxed(x, u) for term, u in zip(self.terms, us))
        if self.penalty is not None:
            value += self.penalty.value(x)
        return value

    def gradient(self, x: np.ndarray, us: list[np.ndarray]) -> np.ndarray:
        grad = sum(term.gradient(x, u) for term, u in zip(self.terms, us))
        if self.penalty is not None:
            grad = grad + self.penalty.gradient(x)
        return grad

    def inner(self, x: np.ndarray, us: list[np.ndarray]) -> np.ndarray:
        """Projected gradient at fixed u; steps eta0/(tau+1) shrink by 4 until descent."""
        cfg = self.cfg
        current = self.relaxed(x, us)
        for tau in range(cfg.inner_max):
            grad = self.gradient(x, us)
            step = cfg.eta0 / (tau + 1)
            for _ in range(cfg.max_backtracks):
                candidate = project_to_simplex(x - step * grad)
                value = self.relaxed(candidate, us)
                if value < current:
                    break
                step *= 0.25
            else:
                # stationary at this u
                break
            x, current = candidate, value
        return x

    def minimize(self, x0: np.ndarray) -> tuple[np.ndarray, float, int, list[float]]:
        """Alternate inner solves and closed-form u updates.

        An outer step is kept only if the exact objective does not increase. A
        rejected step is retried with the relative floor on u cut tenfold, and
        the solve ends when a step is rejected with no relative floor left.
        """
        cfg = self.cfg
        x = x0
        objective = self.exact(x)
        trace = [objective]
        if not np.isfinite(objective):
            raise NumericalError("objective is not finite at the initial point", trace)
        rel = cfg.u_rel
        iterations = 0
        for iterations in range(1, cfg.outer_max + 1):
            candidate = self.inner(x, self.weights(x, rel))
            value = self.exact(candidate)
            if not np.isfinite(value):
                raise NumericalError(
                    f"objective became non-finite at outer iteration {iterations}",
                    trace,
                )
            if value > objective:
                logger.debug(
                    "outer step %d rejected at floor %.3g: %.6g > %.6g",
                    iterations,
                    rel,
                    value,
                    objective,
                )
                if rel == 0:
                    break
                rel = rel / 10 if rel / 10 >= REL_FLOOR_CUTOFF else 0.0
                continue
            change = objective - value
            x, objective = candidate, value
            trace.append(objective)
            if objective <= 0 or change <= cfg.tol * objective:
                break
        return x, objective, iterations, trace


def _check_sizes(h_obs: PixelHistogram, curve: TransformCurve, noise: NoiseMatrix) -> None:
    if curve.n != h_obs.n or noise.n != h_obs.n:
        raise InputError(
            f"size mismatch: histogram 0..{h_obs.n}, curve 0..{curve.n}, "
            f"noise 0..{noise.n}"
        )


def _forward_operators(curve: TransformCurve, noise: NoiseMatrix) -> tuple[Operator, Operator]:
    transfer = curve.transfer_matrix()

    def forward(x: np.ndarray) -> np.ndarray:
        return noise.apply(transfer.apply(x))

    def adjoint(y: np.ndarray) -> np.ndarray:
        return transfer.adjoint(noise.adjoint(y))

    return forward, adjoint


def _problem(
    h_obs: PixelHistogram, curve: TransformCurve, noise: NoiseMatrix, cfg: SolverConfig
) -> W1Problem:
    forward, adjoint = _forward_operators(curve, noise)
    return W1Problem(
        terms=[W1Term(1.0, h_obs.values, forward, adjoint)],
        penalty=ExpSurrogate(cfg.lam, cfg.rho),
        cfg=cfg,
    )


def pull_back_histogram(h_obs: PixelHistogram, curve: TransformCurve) -> np.ndarray:
    """Split each observed bin's mass evenly over its preimage under the curve.

    Mass in a bin outside the curve's range moves to the nearest value in the
    range, the lower one on ties.
    """
    if curve.n != h_obs.n:
        raise InputError(f"curve covers 0..{curve.n} but histogram 0..{h_obs.n}")
    counts = np.bincount(curve.phi, minlength=curve.n + 1)
    image = np.nonzero(counts)[0]
    routed = np.zeros(curve.n + 1)
    bins = np.arange(curve.n + 1)
    right = np.clip(np.searchsorted(image, bins), 0, image.size - 1)
    left = np.clip(right - 1, 0, image.size - 1)
    nearest = np.where(
        np.abs(image[left] - bins) <= np.abs(image[right] - bins),
        image[left],
        image[right],
    )
    nearest[image] = image
    np.add.at(routed, nearest, h_obs.values)
    return routed[curve.phi] / counts[curve.phi]


def recover_histogram(
    h_obs: PixelHistogram,
    curve: TransformCurve,
    noise: NoiseMatrix,
    cfg: SolverConfig | None = None,
) -> SolverReport:
    """Estimate h minimizing W1(h_obs, R T h) + lam * sum(exp(-rho * h))."""
    cfg = cfg or SolverConfig()
    _check_sizes(h_obs, curve, noise)
    problem = _problem(h_obs, curve, noise, cfg)
    x, objective, iterations, trace = problem.minimize(pull_back_histogram(h_obs, curve))
    h_star = PixelHistogram(h_obs.bits, x)
    w1_term = problem.terms[0].exact(x)
    logger.debug(
        "recovered histogram in %d outer iterations, objective %.6g", iterations, objective
    )
    return SolverReport(
        h_star=h_star,
        objective=objective,
        iterations=iterations,
        trace=tuple(trace),
        w1_term=w1_term,
        surrogate=objective - w1_term,
        empty_bins=empty_bin_count(x, cfg.eps_bin),
        interior_empty_bins=interior_empty_bin_count(x, cfg.eps_bin),
    )


def solver_objective(
    h: PixelHistogram,
    h_obs: PixelHistogram,
    curve: TransformCurve,
    noise: NoiseMatrix,
    cfg: SolverConfig | None = None,
) -> float:
    """W1(h_obs, R T h) + lam * sum(exp(-rho * h))."""
    cfg = cfg or SolverConfig()
    _check_sizes(h_obs, curve, noise)
    return _problem(h_obs, curve, noise, cfg).exact(as_vector(h))


def relaxed_objective(
    h: np.ndarray,
    h_obs: PixelHistogram,
    curve: TransformCurve,
    noise: NoiseMatrix,
    u: np.ndarray,
    cfg: SolverConfig | None = None,
) -> float:
    """The u-augmented objective 0.5 * sum(c**2/u + u) + lam * sum(exp(-rho * h))."""
    cfg = cfg or SolverConfig()
    _check_sizes(h_obs, curve, noise)
    return _problem(h_obs, curve, noise, cfg).relaxed(as_vector(h), [np.asarray(u)])


def relaxed_gradient(
    h: np.ndarray,
    h_obs: PixelHistogram,
    curve: TransformCurve,
    noise: NoiseMatrix,
    u: np.ndarray,
    cfg: SolverConfig | None = None,
) -> np.ndarray:
    """Gradient of relaxed_objective in h: M h - b - lam * rho * exp(-rho * h)."""
    cfg = cfg or SolverConfig()
    _check_sizes(h_obs, curve, noise)
    return _problem(h_obs, curve, noise, cfg).gradient(as_vector(h), [np.asarray(u)])


def l1_variational_check(x: np.ndarray) -> tuple[float, np.ndarray]:
    """Evaluate 0.5 * (x' D(z)^-1 x + 1'z) at its minimizer z = |x|; 0/0 counts as 0."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise InputError("variational check needs finite input")
    z = np.abs(x)
    nonzero = z > 0
    quadratic = float(np.sum(x[nonzero] ** 2 / z[nonzero]))
    return 0.5 * (quadratic + float(z.sum())), z
