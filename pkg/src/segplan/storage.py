"""On-disk formats: native volumes, case manifests, fingerprint and plan files.

The native volume format is a raw little-endian payload next to a JSON
sidecar carrying geometry and dtype. Case manifests are JSON files listing
channel files (NIfTI or native) with modality tags plus an optional label.
All JSON documents carry a ``schema_version``.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import fingerprint as fpmod
from . import planner
from .errors import (
    GeometryMismatch,
    IoFailure,
    MissingChannel,
    SchemaVersionMismatch,
)
from .geometry import Case, LabelVolume, Volume
from .nifti import read_nifti

SCHEMA_VERSION = 1
SIDECAR_SUFFIX = ".meta.json"
PAYLOAD_SUFFIX = ".raw"
MANIFEST_SUFFIX = ".case.json"

_DTYPES = {"float32": "<f4", "float64": "<f8", "int32": "<i4", "uint8": "|u1"}


def _check_schema(doc: dict, what: str) -> None:
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionMismatch(f"{what}: schema_version {version!r} != {SCHEMA_VERSION}")


def _json_dump(doc: dict, path: Path) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _json_load(path: Path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise IoFailure(f"{path}: {exc}") from exc


def _stem(path: Path) -> Path:
    name = path.name
    for suffix in (PAYLOAD_SUFFIX, SIDECAR_SUFFIX):
        if name.endswith(suffix):
            return path.with_name(name[: -len(suffix)])
    return path


def write_volume(vol: Volume | LabelVolume, path: str | Path) -> Path:
    """Write a volume as raw payload plus sidecar; returns the sidecar path.

    Lossless: float payloads keep their dtype bit-for-bit, labels are stored
    as int32.
    """
    stem = _stem(Path(path))
    is_label = isinstance(vol, LabelVolume)
    data = vol.data
    dtype = "int32" if is_label else ("float64" if data.dtype == np.float64 else "float32")
    payload = np.ascontiguousarray(data.astype(_DTYPES[dtype], copy=False))
    meta = {
        "schema_version": SCHEMA_VERSION,
        "kind": "label" if is_label else "image",
        "shape": list(vol.shape),
        "spacing": list(vol.spacing),
        "dtype": dtype,
    }
    if is_label:
        meta["num_classes"] = vol.num_classes
    else:
        meta["modality_tag"] = vol.modality_tag
    try:
        stem.parent.mkdir(parents=True, exist_ok=True)
        stem.with_name(stem.name + PAYLOAD_SUFFIX).write_bytes(payload.tobytes())
        sidecar = stem.with_name(stem.name + SIDECAR_SUFFIX)
        _json_dump(meta, sidecar)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    return sidecar


def read_volume(path: str | Path, modality_tag: str | None = None) -> Volume | LabelVolume:
    """Read a native volume (either the sidecar or payload path works)."""
    stem = _stem(Path(path))
    meta = _json_load(stem.with_name(stem.name + SIDECAR_SUFFIX))
    _check_schema(meta, str(path))
    shape = tuple(int(s) for s in meta["shape"])
    spacing = tuple(float(s) for s in meta["spacing"])
    dtype = _DTYPES[meta["dtype"]]
    raw_path = stem.with_name(stem.name + PAYLOAD_SUFFIX)
    try:
        payload = raw_path.read_bytes()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    expected = int(np.prod(shape)) * np.dtype(dtype).itemsize
    if len(payload) != expected:
        raise IoFailure(f"{raw_path}: payload {len(payload)} bytes, expected {expected}")
    data = np.frombuffer(payload, dtype=dtype).reshape(shape)
    if meta["kind"] == "label":
        return LabelVolume(shape, spacing, data.astype(np.int32), int(meta["num_classes"]))
    return Volume(
        shape,
        spacing,
        data.copy(),
        modality_tag if modality_tag is not None else meta.get("modality_tag", ""),
    )


def _load_channel(path: Path, modality: str) -> Volume:
    if path.name.endswith((".nii", ".nii.gz")):
        return read_nifti(path, modality_tag=modality)
    vol = read_volume(path, modality_tag=modality)
    if isinstance(vol, LabelVolume):
        raise GeometryMismatch(f"{path} stores labels, expected image data")
    return vol


def _load_label(path: Path, num_classes: int | None) -> LabelVolume:
    if path.name.endswith((".nii", ".nii.gz")):
        vol = read_nifti(path)
        data = np.rint(vol.data).astype(np.int32)
        n = int(num_classes) if num_classes else int(data.max())
        return LabelVolume(vol.shape, vol.spacing, data, max(n, 1))
    vol = read_volume(path)
    if not isinstance(vol, LabelVolume):
        data = np.rint(vol.data).astype(np.int32)
        n = int(num_classes) if num_classes else int(data.max())
        return LabelVolume(vol.shape, vol.spacing, data, max(n, 1))
    return vol


def write_case_manifest(
    case_dir: Path,
    case_id: str,
    channel_files: list[tuple[str, str]],
    label_file: str | None,
    num_classes: int | None = None,
    group: str | None = None,
) -> Path:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "id": case_id,
        "channels": [{"path": p, "modality": m} for p, m in channel_files],
        "label": label_file,
        "num_classes": num_classes,
        "group": group,
    }
    path = Path(case_dir) / f"{case_id}{MANIFEST_SUFFIX}"
    _json_dump(doc, path)
    return path


def read_case(manifest: str | Path) -> Case:
    """Load a case from its manifest, validating channel/label geometry."""
    manifest = Path(manifest)
    doc = _json_load(manifest)
    _check_schema(doc, str(manifest))
    entries = doc.get("channels") or []
    if not entries:
        raise MissingChannel(f"{manifest}: no channels listed")
    base = manifest.parent
    channels = []
    for entry in entries:
        path = base / entry["path"]
        if not (path.exists() or _stem(path).with_name(_stem(path).name + SIDECAR_SUFFIX).exists()):
            raise MissingChannel(f"{manifest}: channel file {entry['path']} not found")
        channels.append(_load_channel(path, entry.get("modality", "")))
    label = None
    if doc.get("label"):
        label = _load_label(base / doc["label"], doc.get("num_classes"))
    return Case(id=doc["id"], channels=tuple(channels), label=label)


def case_group(manifest: str | Path) -> str | None:
    doc = _json_load(Path(manifest))
    return doc.get("group")


def find_case_manifests(dataset_dir: str | Path) -> list[Path]:
    return sorted(Path(dataset_dir).glob(f"*{MANIFEST_SUFFIX}"))


# ---------------------------------------------------------------------------
# fingerprint and plan documents
# ---------------------------------------------------------------------------

def write_fingerprint(fp: fpmod.DatasetFingerprint, path: str | Path) -> None:
    _json_dump(fp.to_dict(), Path(path))


def read_fingerprint(path: str | Path) -> fpmod.DatasetFingerprint:
    doc = _json_load(Path(path))
    _check_schema(doc, str(path))
    return fpmod.DatasetFingerprint.from_dict(doc)


def write_plan(pipeline: planner.PipelineFingerprint, path: str | Path) -> None:
    _json_dump(planner.pipeline_to_dict(pipeline), Path(path))


def read_plan(path: str | Path) -> planner.PipelineFingerprint:
    doc = _json_load(Path(path))
    version = doc.get("schema_version")
    if version != planner.PLAN_SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            f"{path}: schema_version {version!r} != {planner.PLAN_SCHEMA_VERSION}"
        )
    return planner.pipeline_from_dict(doc)


# ---------------------------------------------------------------------------
# probability volumes (class-probability grids, e.g. for ensembling)
# ---------------------------------------------------------------------------

def write_probabilities(probs: np.ndarray, spacing, path: str | Path) -> Path:
    """Store a (classes, *spatial) float32 probability grid."""
    stem = _stem(Path(path))
    payload = np.ascontiguousarray(probs.astype("<f4", copy=False))
    meta = {
        "schema_version": SCHEMA_VERSION,
        "kind": "prob",
        "shape": list(probs.shape),
        "spacing": list(spacing),
        "dtype": "float32",
    }
    stem.parent.mkdir(parents=True, exist_ok=True)
    stem.with_name(stem.name + PAYLOAD_SUFFIX).write_bytes(payload.tobytes())
    sidecar = stem.with_name(stem.name + SIDECAR_SUFFIX)
    _json_dump(meta, sidecar)
    return sidecar


def read_probabilities(path: str | Path) -> tuple[np.ndarray, tuple[float, ...]]:
    stem = _stem(Path(path))
    meta = _json_load(stem.with_name(stem.name + SIDECAR_SUFFIX))
    _check_schema(meta, str(path))
    if meta["kind"] != "prob":
        raise IoFailure(f"{path}: kind {meta['kind']!r}, expected 'prob'")
    shape = tuple(int(s) for s in meta["shape"])
    raw = stem.with_name(stem.name + PAYLOAD_SUFFIX).read_bytes()
    data = np.frombuffer(raw, dtype="<f4").reshape(shape).copy()
    return data, tuple(float(s) for s in meta["spacing"])
