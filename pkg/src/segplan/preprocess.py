"""Deterministic case preprocessing: crop, resample to target spacing, normalize.

Resampling follows a per-image rule: images whose own spacing anisotropy
(max/min) exceeds 3 are resampled with cubic spline in-plane and nearest
neighbour along their coarsest axis; everything else gets cubic spline on all
axes. Label maps go through one-hot channels with linear interpolation and an
argmax, never inventing labels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DegenerateTarget, ZeroVariance
from .fingerprint import crop_to_nonzero
from .geometry import Case, LabelVolume, Volume
from .planner import (
    NORM_CT_GLOBAL,
    NORM_MASKED_ZSCORE,
    NORM_ZSCORE,
    NormalizationScheme,
    UNetPlan,
)

ANISOTROPY_THRESHOLD = 3.0
VARIANCE_FLOOR = 1e-8


@dataclass(frozen=True)
class ResamplingPolicy:
    data_interp: str = "spline3"
    out_of_plane_interp: str = "nearest"
    anisotropy_threshold: float = ANISOTROPY_THRESHOLD


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _output_shape(shape, spacing, target) -> tuple[int, ...]:
    out = []
    for n, s, t in zip(shape, spacing, target):
        if t is None:
            out.append(int(n))
        else:
            if not t > 0:
                raise DegenerateTarget(f"target spacing {t} must be positive")
            out.append(max(1, _round_half_up(n * s / t)))
    return tuple(out)


def _axis_coords(n_in: int, n_out: int, ratio: float) -> np.ndarray:
    # index 0 aligned, step = target/source; identity when ratio == 1
    if n_out == n_in and abs(ratio - 1.0) < 1e-12:
        return np.arange(n_in, dtype=np.float64)
    return np.arange(n_out, dtype=np.float64) * ratio


def _resample_grid(data: np.ndarray, spacing, target, order: int) -> np.ndarray:
    """Separable resampling of selected axes (target None leaves an axis alone)."""
    shape_out = _output_shape(data.shape, spacing, target)
    if tuple(shape_out) == data.shape and order != 0:
        ratios = [1.0 if t is None else t / s for s, t in zip(spacing, target)]
        if all(abs(r - 1.0) < 1e-12 for r in ratios):
            return data.astype(np.float64, copy=True)
    axes_coords = []
    for axis, (s, t) in enumerate(zip(spacing, target)):
        ratio = 1.0 if t is None else t / s
        axes_coords.append(_axis_coords(data.shape[axis], shape_out[axis], ratio))
    mesh = np.meshgrid(*axes_coords, indexing="ij")
    return ndimage.map_coordinates(
        data.astype(np.float64), mesh, order=order, mode="mirror", prefilter=order > 1
    )


def _nearest_axis(data: np.ndarray, axis: int, n_out: int, ratio: float) -> np.ndarray:
    coords = _axis_coords(data.shape[axis], n_out, ratio)
    idx = np.clip(np.floor(coords + 0.5).astype(int), 0, data.shape[axis] - 1)
    return np.take(data, idx, axis=axis)


def _is_anisotropic(spacing) -> bool:
    return max(spacing) / min(spacing) > ANISOTROPY_THRESHOLD


def _resample_data(data: np.ndarray, spacing, target, order: int) -> np.ndarray:
    """Dispatch on the per-image anisotropy rule."""
    active = [t is not None for t in target]
    if _is_anisotropic(spacing):
        coarse = int(np.argmax(spacing))
        inplane_target = list(target)
        inplane_target[coarse] = None
        out = _resample_grid(data, spacing, tuple(inplane_target), order)
        if active[coarse]:
            n_out = _output_shape(data.shape, spacing, target)[coarse]
            out = _nearest_axis(out, coarse, n_out, target[coarse] / spacing[coarse])
        return out
    return _resample_grid(data, spacing, target, order)


def resample_volume(vol: Volume, target) -> Volume:
    """Resample image data to the target spacing (None axes stay untouched)."""
    for t in target:
        if t is not None and not t > 0:
            raise DegenerateTarget(f"target spacing {target}")
    out = _resample_data(vol.data, vol.spacing, tuple(target), order=3)
    new_spacing = tuple(
        vol.spacing[a] if target[a] is None else float(target[a]) for a in range(3)
    )
    return Volume(out.shape, new_spacing, out.astype(np.float32), vol.modality_tag)


def resample_labels(label: LabelVolume, target) -> LabelVolume:
    """Resample a label map via linearly interpolated one-hot channels + argmax."""
    for t in target:
        if t is not None and not t > 0:
            raise DegenerateTarget(f"target spacing {target}")
    shape_out = _output_shape(label.shape, label.spacing, tuple(target))
    present = np.unique(label.data)
    stack = np.zeros((len(present),) + tuple(shape_out), dtype=np.float64)
    for i, cls in enumerate(present):
        onehot = (label.data == cls).astype(np.float64)
        stack[i] = _resample_data(onehot, label.spacing, tuple(target), order=1)
    winner = np.argmax(stack, axis=0)
    out = present[winner].astype(np.int32)
    new_spacing = tuple(
        label.spacing[a] if target[a] is None else float(target[a]) for a in range(3)
    )
    return LabelVolume(shape_out, new_spacing, out, label.num_classes)


def normalize(
    vol: Volume, scheme: NormalizationScheme, nonzero_mask: np.ndarray | None = None
) -> Volume:
    """Apply one normalization scheme; see planner.select_normalization."""
    data = vol.data.astype(np.float64)
    if scheme.variant == NORM_ZSCORE:
        std = data.std()
        if std < VARIANCE_FLOOR:
            raise ZeroVariance("constant image under per-image z-score")
        out = (data - data.mean()) / std
    elif scheme.variant == NORM_MASKED_ZSCORE:
        mask = nonzero_mask if nonzero_mask is not None else data != 0
        if not mask.any():
            raise ZeroVariance("empty mask under masked z-score")
        sel = data[mask]
        std = sel.std()
        if std < VARIANCE_FLOOR:
            raise ZeroVariance("constant masked region under masked z-score")
        out = np.zeros_like(data)
        out[mask] = (sel - sel.mean()) / std
    elif scheme.variant == NORM_CT_GLOBAL:
        out = np.clip(data, scheme.clip_low, scheme.clip_high)
        out = (out - scheme.global_mean) / scheme.global_std
    else:
        raise ValueError(f"unknown normalization variant {scheme.variant!r}")
    return Volume(vol.shape, vol.spacing, out.astype(np.float32), vol.modality_tag)


def preprocess_case(case: Case, plan: UNetPlan) -> Case:
    """Crop to the nonzero region, resample to the plan's spacing, normalize."""
    if len(plan.normalization) not in (0, len(case.channels)):
        raise ValueError(
            f"plan carries {len(plan.normalization)} normalization schemes, "
            f"case has {len(case.channels)} channels"
        )
    cropped, _ = crop_to_nonzero(case)
    target = tuple(plan.target_spacing)

    channels = []
    for i, ch in enumerate(cropped.channels):
        res = resample_volume(ch, target)
        if plan.normalization:
            res = normalize(res, plan.normalization[i])
        channels.append(res)
    label = None
    if cropped.label is not None:
        label = resample_labels(cropped.label, target)
    return Case(case.id, tuple(channels), label)
