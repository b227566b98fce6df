"""Dataset fingerprinting: nonzero-region cropping and statistics aggregation.

A case fingerprint records geometry before/after cropping plus a sample of
foreground intensities per channel; the dataset fingerprint pools those over
all training cases and is the sole input of the planner.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyInput, InconsistentChannels, NoLabel
from .geometry import Case, LabelVolume, Volume

FOREGROUND_SAMPLE_CAP = 10_000
SCHEMA_VERSION = 1


def percentile(values, q: float) -> float:
    """Linear-interpolation percentile: rank q*(n-1) between sorted neighbours."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise EmptyInput("percentile of empty list")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q={q} outside [0, 1]")
    return float(np.quantile(arr, q, method="linear"))


def nonzero_bounding_box(case: Case) -> tuple[tuple[int, int], ...]:
    """Tight inclusive bounds of voxels where any channel is nonzero.

    Falls back to the full extent when every voxel is zero.
    """
    mask = np.zeros(case.shape, dtype=bool)
    for ch in case.channels:
        mask |= ch.data != 0
    if not mask.any():
        return tuple((0, s - 1) for s in case.shape)
    bounds = []
    for axis in range(3):
        other = tuple(a for a in range(3) if a != axis)
        hit = mask.any(axis=other)
        idx = np.flatnonzero(hit)
        bounds.append((int(idx[0]), int(idx[-1])))
    return tuple(bounds)


def crop_to_nonzero(case: Case) -> tuple[Case, tuple[tuple[int, int], ...]]:
    """Restrict a case to the bounding box of its nonzero region."""
    box = nonzero_bounding_box(case)
    slicer = tuple(slice(lo, hi + 1) for lo, hi in box)
    if all(lo == 0 and hi == s - 1 for (lo, hi), s in zip(box, case.shape)):
        return case, box
    new_shape = tuple(hi - lo + 1 for lo, hi in box)
    channels = tuple(
        Volume(new_shape, ch.spacing, ch.data[slicer], ch.modality_tag)
        for ch in case.channels
    )
    label = None
    if case.label is not None:
        label = LabelVolume(
            new_shape, case.label.spacing, case.label.data[slicer], case.label.num_classes
        )
    return Case(case.id, channels, label), box


@dataclass(frozen=True)
class ForegroundStats:
    mean: float
    std: float
    p0_5: float
    p99_5: float

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std": self.std, "p0_5": self.p0_5, "p99_5": self.p99_5}

    @classmethod
    def from_dict(cls, d: dict) -> "ForegroundStats":
        return cls(d["mean"], d["std"], d["p0_5"], d["p99_5"])


@dataclass(frozen=True)
class CaseFingerprint:
    case_id: str
    shape_before_crop: tuple[int, int, int]
    shape_after_crop: tuple[int, int, int]
    spacing: tuple[float, float, float]
    classes_present: frozenset[int]
    modalities: tuple[str, ...]
    foreground_samples: tuple[np.ndarray, ...] = field(repr=False)  # one per channel
    num_classes: int = 0


def extract_case_fingerprint(
    case: Case,
    seed: int = 0,
    sample_cap: int = FOREGROUND_SAMPLE_CAP,
    require_label: bool = True,
) -> CaseFingerprint:
    """Crop a case and record its geometry and foreground intensity sample.

    The sample is every foreground voxel, or a seeded uniform subsample when a
    case holds more than ``sample_cap`` of them.
    """
    if require_label and case.label is None:
        raise NoLabel(f"case {case.id!r} has no label; cannot sample foreground")
    cropped, _ = crop_to_nonzero(case)

    classes: frozenset[int] = frozenset()
    samples: list[np.ndarray] = []
    if cropped.label is not None:
        fg = cropped.label.data > 0
        present = np.unique(cropped.label.data[fg]) if fg.any() else np.array([], dtype=int)
        classes = frozenset(int(c) for c in present)
        idx = np.flatnonzero(fg.ravel())
        if idx.size > sample_cap:
            rng = np.random.default_rng(seed)
            idx = np.sort(rng.choice(idx, size=sample_cap, replace=False))
        for ch in cropped.channels:
            samples.append(ch.data.ravel()[idx].astype(np.float64))
    else:
        samples = [np.empty(0, dtype=np.float64) for _ in cropped.channels]

    return CaseFingerprint(
        case_id=case.id,
        shape_before_crop=case.shape,
        shape_after_crop=cropped.shape,
        spacing=case.spacing,
        classes_present=classes,
        modalities=tuple(ch.modality_tag for ch in case.channels),
        foreground_samples=tuple(samples),
        num_classes=case.label.num_classes if case.label is not None else 0,
    )


@dataclass(frozen=True)
class DatasetFingerprint:
    n_cases: int
    median_shape: tuple[int, int, int]
    median_spacing: tuple[float, float, float]
    spacings: tuple[tuple[float, ...], ...]    # per axis: all case spacings
    modalities: tuple[str, ...]
    n_classes: int
    foreground_stats: tuple[ForegroundStats, ...]  # one per channel
    total_voxels: int                          # sum of cropped voxel counts
    crop_reduction: float                      # mean of 1 - cropped/original

    @property
    def n_channels(self) -> int:
        return len(self.modalities)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "n_cases": self.n_cases,
            "median_shape": list(self.median_shape),
            "median_spacing": list(self.median_spacing),
            "spacings": [list(ax) for ax in self.spacings],
            "modalities": list(self.modalities),
            "n_classes": self.n_classes,
            "foreground_stats": [s.to_dict() for s in self.foreground_stats],
            "total_voxels": self.total_voxels,
            "crop_reduction": self.crop_reduction,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetFingerprint":
        return cls(
            n_cases=int(d["n_cases"]),
            median_shape=tuple(int(v) for v in d["median_shape"]),
            median_spacing=tuple(float(v) for v in d["median_spacing"]),
            spacings=tuple(tuple(float(v) for v in ax) for ax in d["spacings"]),
            modalities=tuple(d["modalities"]),
            n_classes=int(d["n_classes"]),
            foreground_stats=tuple(ForegroundStats.from_dict(s) for s in d["foreground_stats"]),
            total_voxels=int(d["total_voxels"]),
            crop_reduction=float(d["crop_reduction"]),
        )


def _median_int(values: list[int]) -> int:
    """Median that stays integral: lower-middle element for even counts."""
    s = sorted(values)
    return int(s[(len(s) - 1) // 2])


def aggregate_dataset_fingerprint(cases: list[CaseFingerprint]) -> DatasetFingerprint:
    """Pool per-case fingerprints into the dataset fingerprint.

    Order independent: cases are sorted by id before any reduction.
    """
    if not cases:
        raise EmptyInput("no case fingerprints")
    cases = sorted(cases, key=lambda c: c.case_id)
    n_channels = len(cases[0].modalities)
    for c in cases:
        if len(c.modalities) != n_channels:
            raise InconsistentChannels(
                f"case {c.case_id!r} has {len(c.modalities)} channels, expected {n_channels}"
            )

    median_shape = tuple(
        _median_int([c.shape_after_crop[a] for c in cases]) for a in range(3)
    )
    spacings = tuple(
        tuple(float(c.spacing[a]) for c in cases) for a in range(3)
    )
    median_spacing = tuple(float(np.median(ax)) for ax in spacings)

    stats = []
    for ch in range(n_channels):
        pooled = np.concatenate([c.foreground_samples[ch] for c in cases])
        if pooled.size:
            stats.append(
                ForegroundStats(
                    mean=float(pooled.mean()),
                    std=float(pooled.std()),
                    p0_5=percentile(pooled, 0.005),
                    p99_5=percentile(pooled, 0.995),
                )
            )
        else:
            stats.append(ForegroundStats(0.0, 0.0, 0.0, 0.0))

    total = sum(int(np.prod(c.shape_after_crop)) for c in cases)
    reduction = float(
        np.mean(
            [
                1.0 - np.prod(c.shape_after_crop) / np.prod(c.shape_before_crop)
                for c in cases
            ]
        )
    )
    n_classes = max((c.num_classes for c in cases), default=0)
    if n_classes == 0:
        n_classes = max((max(c.classes_present, default=0) for c in cases), default=0)

    return DatasetFingerprint(
        n_cases=len(cases),
        median_shape=median_shape,
        median_spacing=median_spacing,
        spacings=spacings,
        modalities=cases[0].modalities,
        n_classes=n_classes,
        foreground_stats=tuple(stats),
        total_voxels=total,
        crop_reduction=reduction,
    )
