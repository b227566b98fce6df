"""Voxel-grid containers.

Axis convention: axis 0 is the out-of-plane (lowest resolution) axis, axes 1
and 2 are in-plane. All shapes and spacings are ordered accordingly; file
readers are responsible for mapping their native ordering onto this one.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryMismatch

SPACING_ATOL = 1e-6


def _check_grid(shape: tuple[int, ...], spacing: tuple[float, ...], data: np.ndarray) -> None:
    if len(shape) != 3 or len(spacing) != 3:
        raise GeometryMismatch(f"expected 3 axes, got shape={shape} spacing={spacing}")
    if any(int(s) < 1 for s in shape):
        raise GeometryMismatch(f"non-positive extent in shape {shape}")
    if any(not (s > 0) for s in spacing):
        raise GeometryMismatch(f"non-positive spacing {spacing}")
    if tuple(data.shape) != tuple(shape):
        raise GeometryMismatch(f"data shape {data.shape} != declared {shape}")


@dataclass(frozen=True)
class Volume:
    """A scalar image: dense float grid plus per-axis spacing in mm."""

    shape: tuple[int, int, int]
    spacing: tuple[float, float, float]
    data: np.ndarray = field(repr=False)
    modality_tag: str = ""

    def __post_init__(self):
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))
        object.__setattr__(self, "spacing", tuple(float(s) for s in self.spacing))
        if not np.issubdtype(self.data.dtype, np.floating):
            object.__setattr__(self, "data", self.data.astype(np.float32))
        _check_grid(self.shape, self.spacing, self.data)
        self.data.setflags(write=False)

    @property
    def voxel_count(self) -> int:
        return int(np.prod(self.shape))

    def same_geometry(self, other: "Volume | LabelVolume") -> bool:
        return self.shape == other.shape and np.allclose(
            self.spacing, other.spacing, atol=SPACING_ATOL, rtol=0.0
        )

    def with_data(self, data: np.ndarray) -> "Volume":
        return Volume(self.shape, self.spacing, data, self.modality_tag)


@dataclass(frozen=True)
class LabelVolume:
    """Integer segmentation grid; 0 is background, 1..num_classes foreground."""

    shape: tuple[int, int, int]
    spacing: tuple[float, float, float]
    data: np.ndarray = field(repr=False)
    num_classes: int = 1

    def __post_init__(self):
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))
        object.__setattr__(self, "spacing", tuple(float(s) for s in self.spacing))
        if not np.issubdtype(self.data.dtype, np.integer):
            data = self.data
            if not np.array_equal(data, np.round(data)):
                raise GeometryMismatch("label data must be integral")
            object.__setattr__(self, "data", data.astype(np.int32))
        _check_grid(self.shape, self.spacing, self.data)
        dmin = int(self.data.min()) if self.data.size else 0
        dmax = int(self.data.max()) if self.data.size else 0
        if dmin < 0 or dmax > self.num_classes:
            raise GeometryMismatch(
                f"label values [{dmin}, {dmax}] outside 0..{self.num_classes}"
            )
        self.data.setflags(write=False)

    @property
    def voxel_count(self) -> int:
        return int(np.prod(self.shape))

    def same_geometry(self, other: "Volume | LabelVolume") -> bool:
        return self.shape == other.shape and np.allclose(
            self.spacing, other.spacing, atol=SPACING_ATOL, rtol=0.0
        )

    def with_data(self, data: np.ndarray) -> "LabelVolume":
        return LabelVolume(self.shape, self.spacing, data, self.num_classes)


@dataclass(frozen=True)
class Case:
    """One training/inference unit: aligned channels plus an optional label."""

    id: str
    channels: tuple[Volume, ...]
    label: LabelVolume | None = None

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        if not self.channels:
            raise GeometryMismatch(f"case {self.id!r} has no channels")
        first = self.channels[0]
        for i, ch in enumerate(self.channels[1:], start=1):
            if not first.same_geometry(ch):
                raise GeometryMismatch(
                    f"case {self.id!r}: channel {i} geometry "
                    f"{ch.shape}/{ch.spacing} != {first.shape}/{first.spacing}"
                )
        if self.label is not None and not first.same_geometry(self.label):
            raise GeometryMismatch(
                f"case {self.id!r}: label geometry {self.label.shape}/"
                f"{self.label.spacing} != {first.shape}/{first.spacing}"
            )

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.channels[0].shape

    @property
    def spacing(self) -> tuple[float, float, float]:
        return self.channels[0].spacing
