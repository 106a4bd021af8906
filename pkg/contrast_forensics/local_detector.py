#!/usr/bin/python
"""Localize image regions whose contrast curve differs from the rest.

Overlapping blocks get binary labels. Each label owns a curve estimated from
the union of its blocks' pixels; a block's cost under a curve is the log of the
best achievable W1 fit plus the weighted empty-bin count. Labels are chosen by
an exact graph cut with a Potts penalty between 4-neighbours, and curves and
labels are re-estimated in turn.
"""

import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any, NamedTuple

import maxflow
import numpy as np
from scipy.spatial.distance import cdist

from contrast_forensics.histogram_core import PixelHistogram, empty_bin_count, from_pixels
from contrast_forensics.histogram_solver import SolverConfig, recover_histogram
from contrast_forensics.image_io import GrayImage
from contrast_forensics.noise_model import NoiseMatrix, gaussian_noise_matrix
from contrast_forensics.nonparametric_estimator import NonparamConfig, estimate_nonparametric
from contrast_forensics.transforms import TransformCurve
from contrast_forensics.util import InputError, NumericalError, check_known_keys, parallel_map

logger = logging.getLogger(__name__)

LOG_FLOOR = 1e-12
ENERGY_SLACK = 1e-9
KMEANS_ITERATIONS = 20

# Above this many blocks the farthest pair is found by a double sweep
EXACT_SEED_LIMIT = 1024


@dataclass(frozen=True)
class EnergyParams:
    beta: float = 0.1
    sigma: float = 0.01
    em_max: int = 10
    block_size: int = 50
    stride: int = 2
    workers: int | None = None
    nonparam: NonparamConfig = field(default_factory=NonparamConfig)

    def __post_init__(self) -> None:
        if not np.isfinite(self.beta) or self.beta < 0:
            raise InputError(f"beta must be non-negative, not {self.beta}")
        if not np.isfinite(self.sigma) or self.sigma < 0:
            raise InputError(f"sigma must be non-negative, not {self.sigma}")
        for name in ("em_max", "block_size", "stride"):
            if int(getattr(self, name)) < 1:
                raise InputError(f"{name} must be at least 1")

    @property
    def solver(self) -> SolverConfig:
        return self.nonparam.solver

    @property
    def lam(self) -> float:
        return self.nonparam.solver.lam

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> "EnergyParams":
        values = dict(mapping)
        nonparam = values.pop("nonparametric", {})
        check_known_keys(
            values,
            ("beta", "sigma", "em_max", "block_size", "stride", "workers"),
            "detector",
        )
        return cls(nonparam=NonparamConfig.from_mapping(nonparam), **values)


@dataclass(frozen=True)
class Block:
    x: int
    y: int
    histogram: PixelHistogram


@dataclass(frozen=True)
class BlockGrid:
    """Blocks in row-major lattice order; block k sits at row k // columns."""

    width: int
    height: int
    block_size: int
    stride: int
    columns: int
    rows: int
    blocks: tuple[Block, ...]

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def adjacency(self) -> list[list[int]]:
        """4-neighbourhood on the block lattice."""
        neighbours = []
        for k in range(len(self.blocks)):
            row, col = divmod(k, self.columns)
            adjacent = []
            if row > 0:
                adjacent.append(k - self.columns)
            if col > 0:
                adjacent.append(k - 1)
            if col < self.columns - 1:
                adjacent.append(k + 1)
            if row < self.rows - 1:
                adjacent.append(k + self.columns)
            neighbours.append(adjacent)
        return neighbours

    def votes(self, labels: np.ndarray, label: int) -> np.ndarray:
        """Per pixel, the number of covering blocks carrying label."""
        diff = np.zeros((self.height + 1, self.width + 1), dtype=np.int64)
        size = self.block_size
        for block, value in zip(self.blocks, labels):
            if value != label:
                continue
            diff[block.y, block.x] += 1
            diff[block.y, block.x + size] -= 1
            diff[block.y + size, block.x] -= 1
            diff[block.y + size, block.x + size] += 1
        return diff.cumsum(axis=0).cumsum(axis=1)[: self.height, : self.width]


@dataclass(frozen=True, eq=False)
class LabelField:
    labels: np.ndarray
    pixel_mask: np.ndarray | None = None

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels)
        if labels.size and not np.all(np.isin(labels, (0, 1))):
            raise InputError("labels must be 0 or 1")
        object.__setattr__(self, "labels", labels.astype(np.uint8))

    @property
    def degenerate(self) -> bool:
        return np.unique(self.labels).size < 2


class Detection(NamedTuple):
    labels: LabelField
    curve0: TransformCurve
    curve1: TransformCurve
    diagnostics: dict[str, Any]


def _image_pixels(image: GrayImage | np.ndarray, bits: int | None) -> tuple[np.ndarray, int]:
    if isinstance(image, GrayImage):
        return image.pixels, image.bits
    pixels = np.asarray(image)
    if pixels.ndim != 2:
        raise InputError(f"image must be 2-D, got shape {pixels.shape}")
    if bits is None:
        raise InputError("bit depth is required for raw pixel arrays")
    return pixels, bits


def extract_blocks(
    image: GrayImage | np.ndarray,
    block_size: int = 50,
    stride: int = 2,
    bits: int | None = None,
) -> BlockGrid:
    """All block_size squares anchored at multiples of stride that fit the image."""
    pixels, bits = _image_pixels(image, bits)
    height, width = pixels.shape
    if block_size < 1 or stride < 1:
        raise InputError("block size and stride must be positive")
    if height < block_size or width < block_size:
        raise InputError(f"{width}x{height} image is smaller than a {block_size}px block")
    xs = range(0, width - block_size + 1, stride)
    ys = range(0, height - block_size + 1, stride)
    blocks = tuple(
        Block(x, y, from_pixels(pixels[y : y + block_size, x : x + block_size], bits))
        for y in ys
        for x in xs
    )
    return BlockGrid(width, height, block_size, stride, len(xs), len(ys), blocks)


def unary_energy(
    block_hist: PixelHistogram,
    curve: TransformCurve,
    noise: NoiseMatrix,
    cfg: SolverConfig | None = None,
) -> float:
    """log(W1 fit + lam * hard empty-bin count of the recovered histogram)."""
    cfg = cfg or SolverConfig()
    report = recover_histogram(block_hist, curve, noise, cfg)
    value = report.w1_term + cfg.lam * empty_bin_count(report.h_star, cfg.eps_bin)
    return float(np.log(max(value, LOG_FLOOR)))


def _pair_weights(adjacency: Sequence[Sequence[int]], beta: float) -> dict[tuple[int, int], float]:
    """Each ordered neighbour entry contributes beta to its unordered pair."""
    weights: dict[tuple[int, int], float] = {}
    for k, neighbours in enumerate(adjacency):
        for other in neighbours:
            if other == k:
                continue
            pair = (min(k, other), max(k, other))
            weights[pair] = weights.get(pair, 0.0) + beta
    return weights


def labeling_energy(
    unaries: Any, adjacency: Sequence[Sequence[int]], beta: float, labels: Any
) -> float:
    """sum_k E_{y_k} + beta * sum_k sum_{k' in N(k)} |y_k - y_k'|."""
    unaries = np.asarray(unaries, dtype=np.float64).reshape(-1, 2)
    labels = np.asarray(labels, dtype=np.int64)
    energy = float(unaries[np.arange(labels.size), labels].sum())
    for k, neighbours in enumerate(adjacency):
        for other in neighbours:
            energy += beta * abs(int(labels[k]) - int(labels[other]))
    return energy


def graph_cut_labels(
    unaries: Any, adjacency: Sequence[Sequence[int]], beta: float
) -> LabelField:
    """Exact minimizer of labeling_energy by max-flow/min-cut.

    Source side is label 0; nodes left undecided by the flow stay on the
    source side, so ties resolve to label 0.
    """
    unaries = np.asarray(unaries, dtype=np.float64).reshape(-1, 2)
    if not np.all(np.isfinite(unaries)):
        raise InputError("unary energies must be finite")
    if beta < 0:
        raise InputError(f"beta must be non-negative, not {beta}")
    count = unaries.shape[0]
    pairs = _pair_weights(adjacency, beta) if beta > 0 else {}

    g = maxflow.Graph[float](count, len(pairs))
    nodes = g.add_nodes(count)
    for k, (e0, e1) in enumerate(unaries):
        base = min(e0, e1)
        # a sink-side node cuts its source edge and pays e1; source-side pays e0
        g.add_tedge(nodes[k], e1 - base, e0 - base)
    for (k, other), weight in pairs.items():
        g.add_edge(nodes[k], nodes[other], weight, weight)
    g.maxflow()
    labels = np.array([g.get_segment(nodes[k]) for k in range(count)], dtype=np.uint8)
    return LabelField(labels)


def initial_labels(grid: BlockGrid) -> np.ndarray:
    """2-means on block cumulative histograms under the W1 (cityblock) distance.

    Seeds are the two blocks farthest apart; identical blocks give one cluster.
    """
    count = len(grid)
    labels = np.zeros(count, dtype=np.uint8)
    if count < 2:
        return labels
    cdfs = np.array([np.cumsum(block.histogram.values) for block in grid.blocks])
    if count <= EXACT_SEED_LIMIT:
        distances = cdist(cdfs, cdfs, metric="cityblock")
        first, second = np.unravel_index(int(np.argmax(distances)), distances.shape)
        spread = distances[first, second]
    else:
        first = int(np.argmax(np.abs(cdfs - cdfs[0]).sum(axis=1)))
        gaps = np.abs(cdfs - cdfs[first]).sum(axis=1)
        second = int(np.argmax(gaps))
        spread = gaps[second]
    if spread <= 0:
        return labels

    centers = cdfs[[first, second]]
    for _ in range(KMEANS_ITERATIONS):
        d0 = np.abs(cdfs - centers[0]).sum(axis=1)
        d1 = np.abs(cdfs - centers[1]).sum(axis=1)
        updated = (d1 < d0).astype(np.uint8)
        if updated.all() or not updated.any():
            break
        converged = np.array_equal(updated, labels)
        labels = updated
        if converged:
            break
        centers = np.array([cdfs[labels == 0].mean(axis=0), cdfs[labels == 1].mean(axis=0)])
    return labels


def pixel_mask(grid: BlockGrid, labels: np.ndarray) -> np.ndarray:
    """Majority vote of covering blocks; ties and uncovered pixels get label 0."""
    return grid.votes(labels, 1) > grid.votes(labels, 0)


def _label_curves(
    pixels: np.ndarray,
    bits: int,
    grid: BlockGrid,
    labels: np.ndarray,
    noise: NoiseMatrix,
    params: EnergyParams,
) -> list[TransformCurve | None]:
    curves: list[TransformCurve | None] = []
    for label in (0, 1):
        covered = grid.votes(labels, label) > 0
        if not covered.any():
            curves.append(None)
            continue
        union = from_pixels(pixels[covered], bits)
        curves.append(estimate_nonparametric(union, noise, params.nonparam).curve)
    if curves[0] is None:
        curves[0] = curves[1]
    if curves[1] is None:
        curves[1] = curves[0]
    return curves


def _unaries(
    grid: BlockGrid,
    curves: Sequence[TransformCurve],
    noise: NoiseMatrix,
    params: EnergyParams,
) -> np.ndarray:
    same = curves[0] == curves[1]

    def block_energies(k: int) -> tuple[float, float]:
        block = grid.blocks[k]
        try:
            e0 = unary_energy(block.histogram, curves[0], noise, params.solver)
            e1 = e0 if same else unary_energy(block.histogram, curves[1], noise, params.solver)
        except NumericalError as err:
            raise NumericalError(f"block {k} at ({block.x}, {block.y}): {err}", err.trace) from err
        return e0, e1

    return np.array(parallel_map(block_energies, range(len(grid)), params.workers))


def detect_regions(
    image: GrayImage | np.ndarray,
    params: EnergyParams | None = None,
    bits: int | None = None,
) -> Detection:
    """Alternate curve estimation, unary energies and graph cut from a 2-means start."""
    params = params or EnergyParams()
    pixels, bits = _image_pixels(image, bits)
    height, width = pixels.shape
    if height < 2 * params.block_size or width < 2 * params.block_size:
        raise InputError(
            f"{width}x{height} image needs at least twice the {params.block_size}px block size"
        )
    grid = extract_blocks(pixels, params.block_size, params.stride, bits)
    adjacency = grid.adjacency
    noise = gaussian_noise_matrix(params.sigma, 2**bits - 1)
    labels = initial_labels(grid)
    logger.info("%d blocks on a %dx%d lattice", len(grid), grid.rows, grid.columns)

    energy_trace: list[float] = []
    curves: list[TransformCurve] = []
    converged = False
    rounds = 0
    for rounds in range(1, params.em_max + 1):
        round_curves = _label_curves(pixels, bits, grid, labels, noise, params)
        unaries = _unaries(grid, round_curves, noise, params)
        updated = graph_cut_labels(unaries, adjacency, params.beta).labels
        energy = labeling_energy(unaries, adjacency, params.beta, updated)
        if energy_trace and energy > energy_trace[-1] + ENERGY_SLACK:
            logger.info("alternation %d rejected: energy %.6g rose", rounds, energy)
            break
        energy_trace.append(energy)
        curves = round_curves
        logger.info(
            "alternation %d: energy %.6g, %d blocks labelled 1",
            rounds,
            energy,
            int(updated.sum()),
        )
        converged = np.array_equal(updated, labels)
        labels = updated
        if converged:
            break

    field_ = LabelField(labels, pixel_mask(grid, labels))
    diagnostics = {
        "alternations": rounds,
        "blocks": len(grid),
        "converged": bool(converged),
        "degenerate": field_.degenerate,
        "energy_trace": energy_trace,
        "lattice": [grid.rows, grid.columns],
    }
    return Detection(field_, curves[0], curves[1], diagnostics)


def de_fp_metrics(pred_mask: Any, truth_mask: Any, allow_flip: bool = True) -> tuple[float, float]:
    """Detection ratio |T & D| / |T| and false-positive ratio 1 - |T & D| / |D|.

    With allow_flip the complement of the prediction is also scored and the
    assignment with the larger detection ratio is reported. A prediction that
    is empty or covers the whole image is never flipped. An empty prediction
    has no false positives.
    """
    pred = np.asarray(pred_mask).astype(bool)
    truth = np.asarray(truth_mask).astype(bool)
    if pred.shape != truth.shape:
        raise InputError(f"mask shapes differ: {pred.shape} vs {truth.shape}")
    truth_area = int(truth.sum())
    if truth_area == 0:
        raise InputError("truth region is empty")

    def score(detected: np.ndarray) -> tuple[float, float]:
        hits = int((detected & truth).sum())
        area = int(detected.sum())
        return hits / truth_area, (1.0 - hits / area) if area else 0.0

    best = score(pred)
    if allow_flip and 0 < pred.sum() < pred.size:
        flipped = score(~pred)
        if flipped[0] > best[0]:
            best = flipped
    return best
