"""Sliding-window assembly: tile placement, Gaussian weighting, TTA, ensembling."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryMismatch, PatchLargerThanVolume, ShapeMismatch
from .geometry import LabelVolume

GAUSSIAN_SIGMA_FRACTION = 1.0 / 8.0
WEIGHT_FLOOR = 1e-6  # relative to the peak weight of 1
PROB_SUM_TOL = 1e-5


@dataclass(frozen=True)
class TilingPlan:
    volume_shape: tuple[int, ...]
    patch_size: tuple[int, ...]
    origins: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class ProbabilityVolume:
    """(classes, *spatial) probability grid; per-voxel class sums are 1."""

    probabilities: np.ndarray
    spacing: tuple[float, ...]

    def __post_init__(self):
        sums = self.probabilities.sum(axis=0)
        if not np.allclose(sums, 1.0, atol=PROB_SUM_TOL):
            raise ShapeMismatch("per-voxel class probabilities must sum to 1")

    @property
    def n_classes(self) -> int:
        return self.probabilities.shape[0]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.probabilities.shape[1:])


def _axis_origins(extent: int, patch: int) -> list[int]:
    step = math.ceil(patch / 2)
    last = extent - patch
    origins = list(range(0, last + 1, step))
    if origins[-1] != last:
        origins.append(last)
    return origins


def compute_tile_origins(shape, patch) -> TilingPlan:
    """Half-patch-overlap window origins with a clamped final window per axis."""
    shape = tuple(int(s) for s in shape)
    patch = tuple(int(p) for p in patch)
    if len(shape) != len(patch):
        raise ShapeMismatch(f"shape {shape} vs patch {patch}")
    for s, p in zip(shape, patch):
        if p > s:
            raise PatchLargerThanVolume(f"patch {patch} exceeds volume {shape}")
    per_axis = [_axis_origins(s, p) for s, p in zip(shape, patch)]
    mesh = np.meshgrid(*per_axis, indexing="ij")
    origins = sorted(set(zip(*(m.ravel().tolist() for m in mesh))))
    return TilingPlan(shape, patch, tuple(tuple(o) for o in origins))


def gaussian_importance_map(patch) -> np.ndarray:
    """Separable Gaussian weight map, peak 1 at the patch center.

    Sigma is patch/8 per axis; weights are floored at a small positive value so
    every voxel contributes to the aggregation.
    """
    axes = []
    for extent in patch:
        extent = int(extent)
        sigma = max(extent * GAUSSIAN_SIGMA_FRACTION, 1e-8)
        center = (extent - 1) / 2.0
        x = np.arange(extent, dtype=np.float64)
        axes.append(np.exp(-((x - center) ** 2) / (2.0 * sigma ** 2)))
    grid = axes[0]
    for ax in axes[1:]:
        grid = np.multiply.outer(grid, ax)
    grid = grid / grid.max()
    return np.maximum(grid, WEIGHT_FLOOR)


def aggregate_tiles(
    plan: TilingPlan, window_probs, weights: np.ndarray | None = None
) -> ProbabilityVolume:
    """Weighted per-voxel average of overlapping window probabilities.

    ``window_probs`` is one (classes, *patch) block per origin in plan order.
    Accumulation is commutative, so window order cannot matter.
    """
    window_probs = list(window_probs)
    if len(window_probs) != len(plan.origins):
        raise ShapeMismatch(
            f"{len(window_probs)} windows for {len(plan.origins)} origins"
        )
    n_classes = window_probs[0].shape[0]
    if weights is None:
        weights = np.ones(plan.patch_size, dtype=np.float64)
    if tuple(weights.shape) != tuple(plan.patch_size):
        raise ShapeMismatch(f"weights {weights.shape} vs patch {plan.patch_size}")

    acc = np.zeros((n_classes,) + plan.volume_shape, dtype=np.float64)
    norm = np.zeros(plan.volume_shape, dtype=np.float64)
    for origin, block in zip(plan.origins, window_probs):
        if tuple(block.shape) != (n_classes,) + tuple(plan.patch_size):
            raise ShapeMismatch(
                f"window block {block.shape}, expected {(n_classes,) + tuple(plan.patch_size)}"
            )
        sl = tuple(slice(o, o + p) for o, p in zip(origin, plan.patch_size))
        acc[(slice(None),) + sl] += block * weights
        norm[sl] += weights
    out = acc / norm
    return ProbabilityVolume(out, spacing=(1.0,) * len(plan.volume_shape))


def mirror_tta_average(predict, window: np.ndarray, spatial_dims: int | None = None) -> np.ndarray:
    """Average predictions over all mirror variants of the window.

    ``predict`` maps a (channels, *spatial) window to (classes, *spatial)
    probabilities; it is invoked exactly 2**d times.
    """
    nd = spatial_dims if spatial_dims is not None else window.ndim - 1
    offset = window.ndim - nd
    acc = None
    count = 0
    for bits in range(2 ** nd):
        axes = [offset + a for a in range(nd) if bits >> a & 1]
        flipped = np.flip(window, axis=axes) if axes else window
        pred = predict(flipped)
        out_axes = [pred.ndim - nd + a for a in range(nd) if bits >> a & 1]
        restored = np.flip(pred, axis=out_axes) if out_axes else pred
        acc = restored.astype(np.float64) if acc is None else acc + restored
        count += 1
    return acc / count


def ensemble_average(volumes: list[ProbabilityVolume]) -> ProbabilityVolume:
    """Unweighted per-voxel mean of softmax outputs."""
    if not volumes:
        raise GeometryMismatch("empty ensemble")
    first = volumes[0]
    for v in volumes[1:]:
        if v.probabilities.shape != first.probabilities.shape or not np.allclose(
            v.spacing, first.spacing
        ):
            raise GeometryMismatch("ensemble members disagree in geometry or classes")
    mean = np.mean([v.probabilities for v in volumes], axis=0)
    return ProbabilityVolume(mean, first.spacing)


def argmax_labels(volume: ProbabilityVolume, num_classes: int | None = None) -> LabelVolume:
    """Hard labels; ties go to the lower class index."""
    labels = np.argmax(volume.probabilities, axis=0).astype(np.int32)
    n = num_classes if num_classes is not None else volume.n_classes - 1
    spacing = volume.spacing if len(volume.spacing) == 3 else (1.0, 1.0, 1.0)
    return LabelVolume(labels.shape, spacing, labels, max(n, 1))
