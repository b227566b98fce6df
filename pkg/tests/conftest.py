"""Shared fixtures and the acceptance-suite result summary."""
import struct
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from segplan.geometry import Case, LabelVolume, Volume

_ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


def record_acceptance(name: str, outcome: str) -> None:
    _ACCEPTANCE_RESULTS.append((name, outcome))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, outcome in _ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{outcome:>4}  {name}")


# ---------------------------------------------------------------------------
# NIfTI fixture bytes, built field by field against the public header layout
# ---------------------------------------------------------------------------

def build_nifti_bytes(
    shape_xyz=(4, 4, 4),
    pixdim_xyz=(1.0, 1.0, 1.0),
    datatype=4,
    payload=None,
    scl_slope=0.0,
    scl_inter=0.0,
    magic=b"n+1\x00",
    vox_offset=352,
    big_endian=False,
) -> bytes:
    endian = ">" if big_endian else "<"
    hdr = bytearray(348)
    struct.pack_into(endian + "i", hdr, 0, 348)
    dim = [3, *shape_xyz, 1, 1, 1, 1]
    struct.pack_into(endian + "8h", hdr, 40, *dim)
    struct.pack_into(endian + "h", hdr, 70, datatype)
    bitpix = {2: 8, 4: 16, 8: 32, 16: 32, 64: 64}.get(datatype, 16)
    struct.pack_into(endian + "h", hdr, 72, bitpix)
    pixdim = [1.0, *pixdim_xyz, 0.0, 0.0, 0.0, 0.0]
    struct.pack_into(endian + "8f", hdr, 76, *pixdim)
    struct.pack_into(endian + "f", hdr, 108, float(vox_offset))
    struct.pack_into(endian + "f", hdr, 112, scl_slope)
    struct.pack_into(endian + "f", hdr, 116, scl_inter)
    hdr[344:348] = magic
    blob = bytes(hdr) + b"\x00" * (vox_offset - 348)
    if payload is None:
        n = int(np.prod(shape_xyz))
        dt = {2: "u1", 4: "i2", 8: "i4", 16: "f4", 64: "f8"}.get(datatype, "i2")
        payload = np.arange(n, dtype=(">" if big_endian else "<") + dt).tobytes()
    return blob + payload


@pytest.fixture
def nifti_bytes():
    return build_nifti_bytes


def make_volume(data, spacing=(1.0, 1.0, 1.0), modality="MRI") -> Volume:
    data = np.asarray(data, dtype=np.float32)
    return Volume(data.shape, spacing, data, modality)


def make_labels(data, spacing=(1.0, 1.0, 1.0), num_classes=None) -> LabelVolume:
    data = np.asarray(data, dtype=np.int32)
    n = int(num_classes) if num_classes is not None else max(1, int(data.max()))
    return LabelVolume(data.shape, spacing, data, n)


def make_case(case_id="case", channels=None, label=None) -> Case:
    if channels is None:
        channels = [make_volume(np.ones((4, 4, 4)))]
    return Case(case_id, tuple(channels), label)


def make_fingerprint_stub(entry, modalities=None):
    """DatasetFingerprint carrying a golden-table dataset's statistics.

    Spacing distributions are degenerate (every case at the median), and the
    total voxel count follows cases x median shape, which is how the published
    batch caps evaluate.
    """
    from segplan.fingerprint import DatasetFingerprint, ForegroundStats

    shape = tuple(entry["median_shape"])
    spacing = tuple(entry["median_spacing"])
    mods = tuple(modalities if modalities is not None else entry["modalities"])
    n = entry["n_cases"]
    ct = entry.get("ct_normalization")
    if ct is not None:
        stats = ForegroundStats(ct["mean"], ct["std"], ct["clip"][0], ct["clip"][1])
    else:
        stats = ForegroundStats(50.0, 10.0, 20.0, 90.0)
    return DatasetFingerprint(
        n_cases=n,
        median_shape=shape,
        median_spacing=spacing,
        spacings=tuple(tuple([s] * n) for s in spacing),
        modalities=mods,
        n_classes=entry["n_classes"],
        foreground_stats=tuple(stats for _ in mods),
        total_voxels=n * int(np.prod(shape)),
        crop_reduction=entry.get("crop_reduction", 0.0),
    )


def build_synthetic_dataset(root: Path, n_cases: int = 5, seed: int = 1234) -> Path:
    """Write a small deterministic dataset: native volumes plus manifests.

    Anisotropic spacing and a zero background exercise cropping, the
    10th-percentile spacing rule stays off, and each case carries a group tag
    so split stratification is observable.
    """
    from segplan.storage import write_case_manifest, write_volume

    rng = np.random.default_rng(seed)
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    for i in range(n_cases):
        shape = (10 + i, 18 + 2 * i, 16 + 2 * i)
        spacing = (2.5, 0.8, 0.8)
        data = np.zeros(shape, dtype=np.float32)
        core = tuple(slice(1, s - 1) for s in shape)
        data[core] = rng.normal(loc=60.0, scale=25.0,
                                size=tuple(s - 2 for s in shape)).astype(np.float32)
        labels = np.zeros(shape, dtype=np.int32)
        labels[3 : 3 + 2 + i % 2, 4:9, 4:9] = 1
        labels[2, 2:5, 2:5] = 2
        write_volume(make_volume(data, spacing, modality="CT"), root / f"case{i}_ch0")
        write_volume(make_labels(labels, spacing, num_classes=2), root / f"case{i}_label")
        write_case_manifest(
            root,
            f"case{i}",
            [(f"case{i}_ch0", "CT")],
            f"case{i}_label",
            num_classes=2,
            group=f"patient{i % 3}",
        )
    return root


@pytest.fixture
def synthetic_dataset(tmp_path):
    return build_synthetic_dataset(tmp_path / "dataset")


@pytest.fixture
def volume_factory():
    return make_volume


@pytest.fixture
def label_factory():
    return make_labels


@pytest.fixture
def case_factory():
    return make_case
