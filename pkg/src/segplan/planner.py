"""Heuristic pipeline planning.

Turns a dataset fingerprint plus an abstract memory budget into the full set
of network configurations: target spacings, normalization schemes, per-stage
topology (pooling strides and kernel sizes), patch and batch sizes, and the
low-resolution companion configuration for large datasets.

All sizes inside the iterative rules are tracked as reals; integer patch
sizes only appear after padding to the pooling grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BudgetTooSmall, MissingStats, NoConvergence, TooFewResolutions
from .fingerprint import DatasetFingerprint, percentile

KIND_2D = "2d"
KIND_3D_FULLRES = "3d_fullres"
KIND_3D_LOWRES = "3d_lowres"
KIND_3D_CASCADE_FULLRES = "3d_cascade_fullres"
ALL_KINDS = (KIND_2D, KIND_3D_FULLRES, KIND_3D_LOWRES, KIND_3D_CASCADE_FULLRES)

MIN_FEATURE_EXTENT = 4            # no axis is pooled below this extent
POOL_ELIGIBLE_SIZE = 2 * MIN_FEATURE_EXTENT
SPACING_COHORT_FACTOR = 2.0       # axes pool together while within this ratio
KERNEL_ANISO_FACTOR = 2.0         # kernel 1 while spacing ratio exceeds this
MIN_PATCH_EXTENT = 4

# Memory budgets are in abstract feature-map cost units (see estimate_memory).
# Calibrated so that the Liver/LiTS fingerprint yields a 128^3 patch at batch 2
# in 3D and a 512^2 patch at batch 12 in 2D. Any 3D budget in roughly
# [4.19e8, 4.46e8) reproduces the same published-configuration set; the value
# below sits mid-window. See tests/test_planner.py and tests/test_acceptance.py.
LIVER_ANCHOR_COST_3D = 357_212_160.0   # cost of the 128^3 / batch-2 configuration
LIVER_ANCHOR_COST_2D = 394_100_736.0   # cost of the 512^2 / batch-12 configuration
REFERENCE_BUDGET_3D = 430_000_000.0
REFERENCE_BUDGET_2D = 410_000_000.0

CASCADE_TRIGGER_COVERAGE = 0.125
LOWRES_TARGET_COVERAGE = 0.25
LOWRES_SPACING_STEP = 1.01
LOWRES_MAX_ITER = 10_000
BATCH_VOXEL_FRACTION = 0.05

NORM_ZSCORE = "zscore_per_image"
NORM_MASKED_ZSCORE = "masked_zscore_per_image"
NORM_CT_GLOBAL = "ct_global"


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class BlueprintParams:
    """Data-independent training constants attached to every plan."""

    epochs: int = 1000
    iters_per_epoch: int = 250
    lr0: float = 0.01
    poly_exponent: float = 0.9
    momentum: float = 0.99
    leaky_slope: float = 0.01
    base_features: int = 32
    feature_cap_3d: int = 320
    feature_cap_2d: int = 512
    min_batch: int = 2
    fg_oversample_fraction: float = 1.0 / 3.0
    loss: str = "CE+Dice"
    deep_supervision: str = "all but the two lowest resolutions"

    def to_dict(self) -> dict:
        return {
            "epochs": self.epochs,
            "iters_per_epoch": self.iters_per_epoch,
            "lr0": self.lr0,
            "poly_exponent": self.poly_exponent,
            "momentum": self.momentum,
            "leaky_slope": self.leaky_slope,
            "base_features": self.base_features,
            "feature_cap_3d": self.feature_cap_3d,
            "feature_cap_2d": self.feature_cap_2d,
            "min_batch": self.min_batch,
            "fg_oversample_fraction": self.fg_oversample_fraction,
            "loss": self.loss,
            "deep_supervision": self.deep_supervision,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BlueprintParams":
        return cls(**d)


@dataclass(frozen=True)
class NormalizationScheme:
    variant: str
    clip_low: float | None = None
    clip_high: float | None = None
    global_mean: float | None = None
    global_std: float | None = None

    def __post_init__(self):
        if self.variant == NORM_CT_GLOBAL:
            if None in (self.clip_low, self.clip_high, self.global_mean, self.global_std):
                raise MissingStats("ct_global scheme needs clip bounds and global stats")
            if not self.clip_low < self.clip_high:
                raise MissingStats(f"clip bounds [{self.clip_low}, {self.clip_high}] degenerate")
            if not self.global_std > 0:
                raise MissingStats("global std must be positive")

    def to_dict(self) -> dict:
        d: dict = {"variant": self.variant}
        if self.variant == NORM_CT_GLOBAL:
            d.update(
                clip_low=self.clip_low,
                clip_high=self.clip_high,
                global_mean=self.global_mean,
                global_std=self.global_std,
            )
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NormalizationScheme":
        return cls(
            variant=d["variant"],
            clip_low=d.get("clip_low"),
            clip_high=d.get("clip_high"),
            global_mean=d.get("global_mean"),
            global_std=d.get("global_std"),
        )


@dataclass(frozen=True)
class TopologySpec:
    """Compact architecture description: per-stage kernels, per-step strides."""

    dim: int
    kernel_sizes: tuple[tuple[int, ...], ...]
    strides: tuple[tuple[int, ...], ...]
    features_per_stage: tuple[int, ...]
    pools_per_axis: tuple[int, ...]

    def __post_init__(self):
        assert len(self.kernel_sizes) == len(self.strides) + 1
        assert len(self.features_per_stage) == len(self.kernel_sizes)

    @property
    def n_stages(self) -> int:
        return len(self.kernel_sizes)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "kernel_sizes": [list(k) for k in self.kernel_sizes],
            "strides": [list(s) for s in self.strides],
            "features_per_stage": list(self.features_per_stage),
            "pools_per_axis": list(self.pools_per_axis),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TopologySpec":
        return cls(
            dim=int(d["dim"]),
            kernel_sizes=tuple(tuple(int(v) for v in k) for k in d["kernel_sizes"]),
            strides=tuple(tuple(int(v) for v in s) for s in d["strides"]),
            features_per_stage=tuple(int(v) for v in d["features_per_stage"]),
            pools_per_axis=tuple(int(v) for v in d["pools_per_axis"]),
        )


@dataclass(frozen=True)
class MemoryModel:
    """Abstract activation-memory estimate: cost per voxel-feature-sample."""

    budget: float
    cost_per_unit: float = 1.0
    anchor: str = "reference-11g"

    def __post_init__(self):
        if not self.budget > 0:
            raise BudgetTooSmall(f"budget {self.budget} must be positive")


@dataclass(frozen=True)
class UNetPlan:
    kind: str
    target_spacing: tuple[float | None, float, float]
    median_resampled_shape: tuple[int, int, int]
    patch_size: tuple[int, ...]
    batch_size: int
    topology: TopologySpec
    normalization: tuple[NormalizationScheme, ...]
    input_channels: int
    patch_was_reduced: bool = False

    def __post_init__(self):
        assert self.batch_size >= 2
        for size, pools in zip(self.patch_size, self.topology.pools_per_axis):
            assert size % (2 ** pools) == 0, f"patch {self.patch_size} not divisible"

    @property
    def patch_voxels(self) -> int:
        return int(np.prod(self.patch_size))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "target_spacing": [s for s in self.target_spacing],
            "median_resampled_shape": list(self.median_resampled_shape),
            "patch_size": list(self.patch_size),
            "batch_size": self.batch_size,
            "topology": self.topology.to_dict(),
            "normalization": [n.to_dict() for n in self.normalization],
            "input_channels": self.input_channels,
            "patch_was_reduced": self.patch_was_reduced,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "UNetPlan":
        spacing = tuple(None if s is None else float(s) for s in d["target_spacing"])
        return cls(
            kind=d["kind"],
            target_spacing=spacing,
            median_resampled_shape=tuple(int(v) for v in d["median_resampled_shape"]),
            patch_size=tuple(int(v) for v in d["patch_size"]),
            batch_size=int(d["batch_size"]),
            topology=TopologySpec.from_dict(d["topology"]),
            normalization=tuple(NormalizationScheme.from_dict(n) for n in d["normalization"]),
            input_channels=int(d["input_channels"]),
            patch_was_reduced=bool(d.get("patch_was_reduced", False)),
        )


@dataclass(frozen=True)
class PipelineFingerprint:
    """Everything needed to build and train the configured pipelines."""

    dataset: DatasetFingerprint
    blueprint: BlueprintParams
    plans: tuple[UNetPlan, ...]
    cascade_enabled: bool
    provenance: dict = field(default_factory=dict)

    def plan(self, kind: str) -> UNetPlan:
        for p in self.plans:
            if p.kind == kind:
                return p
        raise KeyError(kind)

    @property
    def kinds(self) -> tuple[str, ...]:
        return tuple(p.kind for p in self.plans)


# ---------------------------------------------------------------------------
# blueprint formulas
# ---------------------------------------------------------------------------

def poly_lr(epoch: int, epoch_max: int, lr0: float) -> float:
    """Polynomial learning-rate decay, exponent 0.9."""
    if not 0 <= epoch <= epoch_max:
        raise ValueError(f"epoch {epoch} outside [0, {epoch_max}]")
    return lr0 * (1.0 - epoch / epoch_max) ** 0.9


def deep_supervision_weights(n_resolutions: int) -> tuple[float, ...]:
    """Loss weights for auxiliary outputs: halving per resolution, sum 1.

    Outputs exist at all but the two lowest resolutions.
    """
    if n_resolutions < 3:
        raise TooFewResolutions(f"need >= 3 resolutions, got {n_resolutions}")
    n_outputs = n_resolutions - 2
    raw = [0.5 ** i for i in range(n_outputs)]
    total = sum(raw)
    return tuple(w / total for w in raw)


# ---------------------------------------------------------------------------
# inferred parameters
# ---------------------------------------------------------------------------

def select_normalization(fp: DatasetFingerprint, channel: int) -> NormalizationScheme:
    """CT channels get the global clip+normalize scheme, others per-image z-score.

    Z-scoring is restricted to the nonzero mask when cropping shrank the data
    by 25% or more on average.
    """
    tag = fp.modalities[channel].strip().lower()
    if tag == "ct":
        stats = fp.foreground_stats[channel]
        if not (stats.std > 0 and stats.p0_5 < stats.p99_5):
            raise MissingStats(
                f"channel {channel} tagged CT but has no usable foreground stats"
            )
        return NormalizationScheme(
            NORM_CT_GLOBAL,
            clip_low=stats.p0_5,
            clip_high=stats.p99_5,
            global_mean=stats.mean,
            global_std=stats.std,
        )
    if fp.crop_reduction >= 0.25:
        return NormalizationScheme(NORM_MASKED_ZSCORE)
    return NormalizationScheme(NORM_ZSCORE)


def target_spacing_fullres(fp: DatasetFingerprint) -> tuple[float, float, float]:
    """Per-axis median spacing; for strongly anisotropic datasets the coarse
    axis drops to the 10th percentile of its spacing distribution instead."""
    med = [float(np.median(ax)) for ax in fp.spacings]
    spacing_aniso = max(med) / min(med)
    shape = fp.median_shape
    shape_aniso = max(shape) / min(shape)
    if spacing_aniso > 3.0 and shape_aniso > 3.0:
        coarse = int(np.argmax(med))
        med[coarse] = percentile(sorted(fp.spacings[coarse]), 0.10)
    return (med[0], med[1], med[2])


def target_spacing_2d(fp: DatasetFingerprint) -> tuple[tuple[int, int], tuple[float, float]]:
    """Pick the two finest axes as the slice plane; out-of-plane stays untouched.

    Ties (including full isotropy) resolve to the trailing axes.
    """
    med = [float(np.median(ax)) for ax in fp.spacings]
    order = sorted(range(3), key=lambda a: (med[a], -a))
    plane = tuple(sorted(order[:2]))
    return plane, (med[plane[0]], med[plane[1]])


def _pooling_cohort(spacing: list[float]) -> list[int]:
    """Largest set of axes whose spacings are pairwise within the cohort factor.

    Ties between equally large sets resolve toward the finer-spacing axes.
    """
    dim = len(spacing)
    best: list[int] = []
    best_key = None
    for a in range(dim):
        partners = [
            i
            for i in range(dim)
            if spacing[i] / spacing[a] < SPACING_COHORT_FACTOR
            and spacing[a] / spacing[i] < SPACING_COHORT_FACTOR
        ]
        key = (len(partners), -spacing[a])
        if best_key is None or key > best_key:
            best, best_key = partners, key
    return best


def configure_topology(
    patch: tuple[float, ...] | list[float],
    spacing: tuple[float, ...] | list[float],
    dim: int,
) -> TopologySpec:
    """Derive pooling strides and kernel sizes from patch size and spacing.

    Per step, the axes whose spacings lie pairwise within a factor 2 pool
    together, each only while its (fractional) size stays at or above 8.
    Pooling halves size and doubles spacing on the pooled axes. Stage kernels
    start at 1 on axes coarser than twice the stage minimum spacing and switch
    permanently to 3 once the resolutions align.
    """
    sizes = [float(s) for s in patch]
    spac = [float(s) for s in spacing]
    assert len(sizes) == dim and len(spac) == dim

    strides: list[tuple[int, ...]] = []
    kernels: list[tuple[int, ...]] = []
    reached_three = [False] * dim

    while True:
        mn = min(spac)
        kernel = []
        for a in range(dim):
            if not reached_three[a] and spac[a] / mn > KERNEL_ANISO_FACTOR:
                kernel.append(1)
            else:
                kernel.append(3)
                reached_three[a] = True
        kernels.append(tuple(kernel))

        cohort = _pooling_cohort(spac)
        pooled = [a for a in cohort if sizes[a] >= POOL_ELIGIBLE_SIZE]
        if not pooled:
            break
        strides.append(tuple(2 if a in pooled else 1 for a in range(dim)))
        for a in pooled:
            sizes[a] /= 2.0
            spac[a] *= 2.0

    cap = 512 if dim == 2 else 320
    features = tuple(min(32 * 2 ** s, cap) for s in range(len(kernels)))
    pools = tuple(sum(s[a] == 2 for s in strides) for a in range(dim))
    return TopologySpec(
        dim=dim,
        kernel_sizes=tuple(kernels),
        strides=tuple(strides),
        features_per_stage=features,
        pools_per_axis=pools,
    )


def pad_for_pooling(raw_patch, pools_per_axis) -> tuple[int, ...]:
    """Round each axis up to the next multiple of its pooling grid."""
    out = []
    for size, pools in zip(raw_patch, pools_per_axis):
        grid = 2 ** int(pools)
        out.append(int(math.ceil(size / grid - 1e-9)) * grid)
    return tuple(out)


def estimate_memory(
    topology: TopologySpec,
    patch: tuple[int, ...],
    batch: int,
    model: MemoryModel | None = None,
) -> float:
    """Feature-map cost of one step: batch x sum over stages of voxels x features.

    Encoder and decoder stages each count once; the decoder mirrors the encoder
    without the bottleneck. Monotone in batch and in every patch axis.
    """
    k = model.cost_per_unit if model is not None else 1.0
    sizes = [int(s) for s in patch]
    stage_cost = []
    for stage, feats in enumerate(topology.features_per_stage):
        stage_cost.append(float(np.prod(sizes)) * feats)
        if stage < len(topology.strides):
            sizes = [
                int(math.ceil(sz / st)) for sz, st in zip(sizes, topology.strides[stage])
            ]
    encoder = sum(stage_cost)
    decoder = encoder - stage_cost[-1]
    return batch * k * (encoder + decoder)


def median_resampled_shape(
    median_shape: tuple[int, ...],
    median_spacing: tuple[float, ...],
    target: tuple[float | None, ...],
) -> tuple[int, ...]:
    """Shape after resampling the median image to the target spacing.

    Axes with target None (2D out-of-plane) are left untouched.
    """
    out = []
    for size, src, dst in zip(median_shape, median_spacing, target):
        if dst is None:
            out.append(int(size))
        else:
            out.append(max(1, _round_half_up(size * src / dst)))
    return tuple(out)


def _patch_and_topology(
    shape_work: tuple[int, ...],
    spacing_work: tuple[float, ...],
    dim: int,
    budget: float,
    model: MemoryModel | None,
) -> tuple[tuple[int, ...], TopologySpec, bool]:
    """Iterate patch reduction until the memory estimate fits the budget.

    Starts from the (fractional) median shape; each over-budget round shrinks
    the axis largest relative to the median by one pooling grid step. Ties
    resolve to the highest axis index.
    """
    raw = [float(s) for s in shape_work]
    reduced = False
    while True:
        topo = configure_topology(raw, spacing_work, dim)
        patch = pad_for_pooling(raw, topo.pools_per_axis)
        if estimate_memory(topo, patch, 2, model) <= budget:
            return patch, topo, reduced
        steps = [2 ** p for p in topo.pools_per_axis]
        candidates = [
            a for a in range(dim) if patch[a] - steps[a] >= MIN_PATCH_EXTENT
        ]
        if not candidates:
            raise BudgetTooSmall(
                f"no patch >= {MIN_PATCH_EXTENT} per axis fits budget {budget}"
            )
        ratios = [patch[a] / shape_work[a] for a in range(dim)]
        axis = max(candidates, key=lambda a: (ratios[a], a))
        raw = list(patch)
        raw[axis] = patch[axis] - steps[axis]
        reduced = True


def plan_unet(
    shape_at_target: tuple[int, ...],
    target_spacing: tuple[float | None, ...],
    fp: DatasetFingerprint,
    budget: float,
    kind: str,
    normalization: tuple[NormalizationScheme, ...] = (),
    model: MemoryModel | None = None,
    input_channels: int | None = None,
) -> UNetPlan:
    """Configure one U-Net: patch, topology and batch under the memory budget.

    The patch starts at the median resampled shape. If it had to shrink, the
    batch is pinned at 2; otherwise spare budget grows the batch, capped so one
    minibatch stays below 5% of the dataset's voxels (rounded, floor 2).
    """
    dim = 2 if kind == KIND_2D else 3
    if dim == 2:
        work_axes = (1, 2)
        shape_work = tuple(shape_at_target[a] for a in work_axes)
        spacing_work = tuple(float(target_spacing[a]) for a in work_axes)
    else:
        shape_work = tuple(shape_at_target)
        spacing_work = tuple(float(s) for s in target_spacing)

    patch, topo, reduced = _patch_and_topology(shape_work, spacing_work, dim, budget, model)

    if reduced:
        batch = 2
    else:
        per_element = estimate_memory(topo, patch, 1, model)
        by_memory = int(budget // per_element)
        cap = _round_half_up(
            BATCH_VOXEL_FRACTION * fp.total_voxels / float(np.prod(patch))
        )
        batch = max(2, min(by_memory, cap))

    return UNetPlan(
        kind=kind,
        target_spacing=tuple(target_spacing),
        median_resampled_shape=tuple(int(s) for s in shape_at_target),
        patch_size=patch,
        batch_size=batch,
        topology=topo,
        normalization=tuple(normalization),
        input_channels=input_channels if input_channels is not None else fp.n_channels,
        patch_was_reduced=reduced,
    )


def cascade_required(fullres: UNetPlan) -> bool:
    """Large-data trigger: fullres patch covers < 12.5% of the median image."""
    median_voxels = float(np.prod(fullres.median_resampled_shape))
    return fullres.patch_voxels / median_voxels < CASCADE_TRIGGER_COVERAGE


def plan_lowres(
    fullres: UNetPlan,
    fp: DatasetFingerprint,
    budget: float,
    model: MemoryModel | None = None,
) -> UNetPlan:
    """Find the downsampled configuration whose patch covers >= 25% of the image.

    The spacing starts at the fullres target and grows in 1% steps; while the
    spacing is anisotropic beyond factor 2 only the finer axes grow. The patch
    machinery reruns at every step.
    """
    base_spacing = tuple(float(s) for s in fullres.target_spacing)
    base_shape = fullres.median_resampled_shape
    spacing = list(base_spacing)

    for _ in range(LOWRES_MAX_ITER):
        shape = median_resampled_shape(base_shape, base_spacing, tuple(spacing))
        plan = plan_unet(
            shape,
            tuple(spacing),
            fp,
            budget,
            KIND_3D_LOWRES,
            normalization=fullres.normalization,
            model=model,
            input_channels=fullres.input_channels,
        )
        if plan.patch_voxels >= LOWRES_TARGET_COVERAGE * float(np.prod(shape)):
            return plan
        mx = max(spacing)
        if mx / min(spacing) > 2.0:
            spacing = [s * LOWRES_SPACING_STEP if s < mx else s for s in spacing]
        else:
            spacing = [s * LOWRES_SPACING_STEP for s in spacing]
    raise NoConvergence(f"lowres spacing search exceeded {LOWRES_MAX_ITER} steps")


def assemble_pipeline_fingerprint(
    fp: DatasetFingerprint,
    budget_3d: float = REFERENCE_BUDGET_3D,
    budget_2d: float = REFERENCE_BUDGET_2D,
    configs: tuple[str, ...] | None = None,
    tool_version: str = "",
) -> PipelineFingerprint:
    """Produce every requested configuration plus the blueprint constants.

    Without an explicit subset this emits 2D and 3D fullres always, and the
    low-resolution pair exactly when the cascade trigger fires.
    """
    wanted = tuple(configs) if configs else None
    for kind in wanted or ():
        if kind not in ALL_KINDS:
            raise ValueError(f"unknown configuration {kind!r}")

    norm = tuple(select_normalization(fp, c) for c in range(fp.n_channels))

    full_target = target_spacing_fullres(fp)
    full_shape = median_resampled_shape(fp.median_shape, fp.median_spacing, full_target)
    fullres = plan_unet(
        full_shape, full_target, fp, budget_3d, KIND_3D_FULLRES, normalization=norm
    )

    plane, inplane = target_spacing_2d(fp)
    target_2d: list[float | None] = [None, None, None]
    target_2d[plane[0]], target_2d[plane[1]] = inplane
    shape_2d = median_resampled_shape(fp.median_shape, fp.median_spacing, tuple(target_2d))
    plan2d = plan_unet(
        shape_2d, tuple(target_2d), fp, budget_2d, KIND_2D, normalization=norm
    )

    cascade = cascade_required(fullres)
    plans = [plan2d, fullres]
    if cascade:
        lowres = plan_lowres(fullres, fp, budget_3d)
        cascade_full = replace(
            fullres,
            kind=KIND_3D_CASCADE_FULLRES,
            input_channels=fullres.input_channels + fp.n_classes + 1,
        )
        plans.extend([lowres, cascade_full])

    if wanted is not None:
        plans = [p for p in plans if p.kind in wanted]

    return PipelineFingerprint(
        dataset=fp,
        blueprint=BlueprintParams(),
        plans=tuple(plans),
        cascade_enabled=cascade,
        provenance={
            "tool_version": tool_version,
            "budget_3d": budget_3d,
            "budget_2d": budget_2d,
            "configs_requested": list(wanted) if wanted is not None else None,
        },
    )


# ---------------------------------------------------------------------------
# document form
# ---------------------------------------------------------------------------

PLAN_SCHEMA_VERSION = 1


def pipeline_to_dict(pipeline: PipelineFingerprint) -> dict:
    return {
        "schema_version": PLAN_SCHEMA_VERSION,
        "dataset_fingerprint": pipeline.dataset.to_dict(),
        "blueprint": pipeline.blueprint.to_dict(),
        "plans": [p.to_dict() for p in pipeline.plans],
        "cascade_enabled": pipeline.cascade_enabled,
        "provenance": pipeline.provenance,
    }


def pipeline_from_dict(d: dict) -> PipelineFingerprint:
    return PipelineFingerprint(
        dataset=DatasetFingerprint.from_dict(d["dataset_fingerprint"]),
        blueprint=BlueprintParams.from_dict(d["blueprint"]),
        plans=tuple(UNetPlan.from_dict(p) for p in d["plans"]),
        cascade_enabled=bool(d["cascade_enabled"]),
        provenance=dict(d.get("provenance", {})),
    )
