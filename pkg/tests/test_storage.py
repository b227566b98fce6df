"""Native format, manifests and plan-document round trips."""
import json

import numpy as np
import pytest

from segplan.errors import GeometryMismatch, MissingChannel, SchemaVersionMismatch
from segplan.fingerprint import DatasetFingerprint, ForegroundStats
from segplan.geometry import LabelVolume
from segplan.nifti import read_nifti
from segplan.planner import assemble_pipeline_fingerprint
from segplan.storage import (
    read_case,
    read_plan,
    read_probabilities,
    read_volume,
    write_case_manifest,
    write_plan,
    write_probabilities,
    write_volume,
)

from conftest import build_nifti_bytes, make_labels, make_volume


def test_label_round_trip_exact(tmp_path):
    lab = make_labels([[[0, 1], [1, 0]], [[1, 1], [0, 0]]])
    write_volume(lab, tmp_path / "lab")
    back = read_volume(tmp_path / "lab")
    assert isinstance(back, LabelVolume)
    np.testing.assert_array_equal(back.data, lab.data)
    assert back.num_classes == lab.num_classes


def test_float_round_trip_bitwise(tmp_path):
    rng = np.random.default_rng(3)
    vol = make_volume(rng.normal(size=(3, 4, 5)).astype(np.float32), spacing=(2.0, 1.0, 0.5))
    write_volume(vol, tmp_path / "vol")
    back = read_volume(tmp_path / "vol")
    assert back.data.tobytes() == vol.data.tobytes()
    assert back.spacing == vol.spacing
    assert back.modality_tag == vol.modality_tag == "MRI"


def test_write_then_manifest_then_read_case(tmp_path):
    vol = make_volume(np.arange(24, dtype=np.float32).reshape(2, 3, 4))
    lab = make_labels(np.zeros((2, 3, 4), dtype=np.int32), num_classes=1)
    write_volume(vol, tmp_path / "c0_ch0")
    write_volume(lab, tmp_path / "c0_label")
    write_case_manifest(tmp_path, "c0", [("c0_ch0", "MRI")], "c0_label")
    case = read_case(tmp_path / "c0.case.json")
    assert case.id == "c0"
    np.testing.assert_array_equal(case.channels[0].data, vol.data)
    assert case.label is not None


def test_manifest_geometry_mismatch(tmp_path):
    write_volume(make_volume(np.zeros((2, 3, 4))), tmp_path / "a")
    write_volume(make_volume(np.zeros((2, 3, 5))), tmp_path / "b")
    write_case_manifest(tmp_path, "bad", [("a", "T1"), ("b", "T2")], None)
    with pytest.raises(GeometryMismatch):
        read_case(tmp_path / "bad.case.json")


def test_manifest_missing_channel(tmp_path):
    write_case_manifest(tmp_path, "gone", [("nope", "T1")], None)
    with pytest.raises(MissingChannel):
        read_case(tmp_path / "gone.case.json")


def test_four_channel_case(tmp_path):
    # multi-modality MR exam: four co-registered channels
    for i, tag in enumerate(["T1", "T1c", "T2", "FLAIR"]):
        write_volume(make_volume(np.full((2, 2, 2), float(i)), modality=tag),
                     tmp_path / f"mc_ch{i}")
    write_case_manifest(
        tmp_path, "mc",
        [(f"mc_ch{i}", tag) for i, tag in enumerate(["T1", "T1c", "T2", "FLAIR"])],
        None,
    )
    case = read_case(tmp_path / "mc.case.json")
    assert len(case.channels) == 4
    assert [c.modality_tag for c in case.channels] == ["T1", "T1c", "T2", "FLAIR"]


def test_nifti_channel_in_manifest(tmp_path):
    (tmp_path / "img.nii").write_bytes(build_nifti_bytes())
    write_case_manifest(tmp_path, "nif", [("img.nii", "CT")], None)
    case = read_case(tmp_path / "nif.case.json")
    assert case.shape == (4, 4, 4)
    assert case.channels[0].modality_tag == "CT"


def test_nifti_to_native_round_trip(tmp_path):
    (tmp_path / "img.nii").write_bytes(
        build_nifti_bytes(shape_xyz=(3, 4, 5), pixdim_xyz=(0.5, 1.25, 2.0))
    )
    original = read_nifti(tmp_path / "img.nii")
    write_volume(original, tmp_path / "native")
    back = read_volume(tmp_path / "native")
    assert back.shape == original.shape
    np.testing.assert_allclose(back.spacing, original.spacing, atol=1e-6)
    np.testing.assert_allclose(back.data, original.data, rtol=1e-6)


def _tiny_fingerprint():
    return DatasetFingerprint(
        n_cases=3,
        median_shape=(18, 237, 208),
        median_spacing=(5.0, 1.56, 1.56),
        spacings=((5.0, 5.0, 5.0), (1.56, 1.56, 1.56), (1.56, 1.56, 1.56)),
        modalities=("MRI",),
        n_classes=2,
        foreground_stats=(ForegroundStats(10.0, 3.0, 1.0, 20.0),),
        total_voxels=3 * 18 * 237 * 208,
        crop_reduction=0.0,
    )


def test_plan_round_trip_identity(tmp_path):
    pipeline = assemble_pipeline_fingerprint(_tiny_fingerprint())
    write_plan(pipeline, tmp_path / "plan.json")
    back = read_plan(tmp_path / "plan.json")
    assert back.plans == pipeline.plans
    assert back.blueprint == pipeline.blueprint
    assert back.cascade_enabled == pipeline.cascade_enabled
    assert back.dataset == pipeline.dataset


def test_plan_document_contains_compact_lists(tmp_path):
    # the stored document exposes kernels and strides as plain nested lists
    pipeline = assemble_pipeline_fingerprint(_tiny_fingerprint())
    write_plan(pipeline, tmp_path / "plan.json")
    doc = json.loads((tmp_path / "plan.json").read_text())
    fullres = [p for p in doc["plans"] if p["kind"] == "3d_fullres"][0]
    assert fullres["topology"]["kernel_sizes"] == [
        [1, 3, 3], [3, 3, 3], [3, 3, 3], [3, 3, 3], [3, 3, 3], [3, 3, 3]
    ]
    assert fullres["topology"]["strides"] == [
        [1, 2, 2], [2, 2, 2], [2, 2, 2], [1, 2, 2], [1, 2, 2]
    ]


def test_plan_schema_version_mismatch(tmp_path):
    pipeline = assemble_pipeline_fingerprint(_tiny_fingerprint())
    write_plan(pipeline, tmp_path / "plan.json")
    doc = json.loads((tmp_path / "plan.json").read_text())
    doc["schema_version"] = 99
    (tmp_path / "plan.json").write_text(json.dumps(doc))
    with pytest.raises(SchemaVersionMismatch):
        read_plan(tmp_path / "plan.json")


def test_volume_schema_version_mismatch(tmp_path):
    vol = make_volume(np.zeros((2, 2, 2)))
    sidecar = write_volume(vol, tmp_path / "v")
    meta = json.loads(sidecar.read_text())
    meta["schema_version"] = 0
    sidecar.write_text(json.dumps(meta))
    with pytest.raises(SchemaVersionMismatch):
        read_volume(tmp_path / "v")


def test_probability_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    raw = rng.random((3, 4, 5, 6))
    probs = raw / raw.sum(axis=0)
    write_probabilities(probs.astype(np.float32), (1.0, 1.0, 1.0), tmp_path / "p")
    back, spacing = read_probabilities(tmp_path / "p")
    np.testing.assert_array_equal(back, probs.astype(np.float32))
    assert spacing == (1.0, 1.0, 1.0)
