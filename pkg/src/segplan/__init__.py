"""segplan: self-configuring segmentation pipeline planner.

Computes dataset fingerprints from volumetric image collections, derives
complete pipeline configurations (topology, patch/batch sizes, spacings,
normalization, cascade) under an abstract memory budget, and implements the
deterministic pipeline stages around network training: preprocessing,
augmentation parameterization, sliding-window assembly, evaluation and
postprocessing selection.
"""

__version__ = "0.1.0"

from .fingerprint import (
    CaseFingerprint,
    DatasetFingerprint,
    ForegroundStats,
    aggregate_dataset_fingerprint,
    crop_to_nonzero,
    extract_case_fingerprint,
    percentile,
)
from .geometry import Case, LabelVolume, Volume
from .planner import (
    BlueprintParams,
    MemoryModel,
    NormalizationScheme,
    PipelineFingerprint,
    TopologySpec,
    UNetPlan,
    assemble_pipeline_fingerprint,
    cascade_required,
    configure_topology,
    deep_supervision_weights,
    estimate_memory,
    pad_for_pooling,
    plan_lowres,
    plan_unet,
    poly_lr,
    select_normalization,
    target_spacing_2d,
    target_spacing_fullres,
)

__all__ = [
    "__version__",
    "Case",
    "LabelVolume",
    "Volume",
    "CaseFingerprint",
    "DatasetFingerprint",
    "ForegroundStats",
    "aggregate_dataset_fingerprint",
    "crop_to_nonzero",
    "extract_case_fingerprint",
    "percentile",
    "BlueprintParams",
    "MemoryModel",
    "NormalizationScheme",
    "PipelineFingerprint",
    "TopologySpec",
    "UNetPlan",
    "assemble_pipeline_fingerprint",
    "cascade_required",
    "configure_topology",
    "deep_supervision_weights",
    "estimate_memory",
    "pad_for_pooling",
    "plan_lowres",
    "plan_unet",
    "poly_lr",
    "select_normalization",
    "target_spacing_2d",
    "target_spacing_fullres",
]
