"""Minimal single-file NIfTI-1 reader.

Supports plain or gzip-compressed ``.nii`` with the ``n+1`` magic, datatypes
uint8/int16/int32/float32/float64, and both byte orders (detected through the
header-size field). Orientation affines are ignored; geometry is taken from
``dim``/``pixdim`` only, with the file's fastest-varying axis mapped to axis 2
so that axis 0 is the out-of-plane axis.
"""
from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BadMagic, TruncatedFile, UnsupportedDatatype
from .geometry import Volume

HEADER_SIZE = 348
MAGIC_SINGLE = b"n+1\x00"
GZIP_MAGIC = b"\x1f\x8b"

# NIfTI-1 datatype code -> numpy dtype (little-endian base)
DTYPES = {
    2: np.dtype(np.uint8),
    4: np.dtype(np.int16),
    8: np.dtype(np.int32),
    16: np.dtype(np.float32),
    64: np.dtype(np.float64),
}


@dataclass(frozen=True)
class NiftiHeader:
    dims: tuple[int, ...]          # dim[1..dim[0]]
    pixdim: tuple[float, ...]      # pixdim[1..dim[0]]
    datatype: int
    scl_slope: float
    scl_inter: float
    vox_offset: int
    magic: bytes
    byteswapped: bool

    @property
    def spatial_shape(self) -> tuple[int, int, int]:
        # file order is x,y,z with x fastest; expose as (z, y, x)
        d = self.dims
        return (int(d[2]), int(d[1]), int(d[0]))

    @property
    def spatial_spacing(self) -> tuple[float, float, float]:
        p = self.pixdim
        return (float(p[2]), float(p[1]), float(p[0]))


def _read_bytes(path: Path) -> bytes:
    raw = path.read_bytes()
    if path.suffix == ".gz" or raw[:2] == GZIP_MAGIC:
        raw = gzip.decompress(raw)
    return raw


def parse_header(raw: bytes) -> NiftiHeader:
    if len(raw) < HEADER_SIZE:
        raise TruncatedFile(f"file holds {len(raw)} bytes, header needs {HEADER_SIZE}")
    sizeof_hdr = struct.unpack_from("<i", raw, 0)[0]
    swapped = False
    if sizeof_hdr != HEADER_SIZE:
        sizeof_hdr = struct.unpack_from(">i", raw, 0)[0]
        swapped = True
        if sizeof_hdr != HEADER_SIZE:
            raise BadMagic("header size field is not 348 in either byte order")
    endian = ">" if swapped else "<"

    magic = raw[344:348]
    if magic != MAGIC_SINGLE:
        raise BadMagic(f"magic {magic!r} is not the single-file NIfTI-1 signature")

    dim = struct.unpack_from(endian + "8h", raw, 40)
    ndim = dim[0]
    if not 1 <= ndim <= 7:
        raise BadMagic(f"dim[0]={ndim} outside 1..7")
    datatype = struct.unpack_from(endian + "h", raw, 70)[0]
    pixdim = struct.unpack_from(endian + "8f", raw, 76)
    vox_offset = struct.unpack_from(endian + "f", raw, 108)[0]
    scl_slope = struct.unpack_from(endian + "f", raw, 112)[0]
    scl_inter = struct.unpack_from(endian + "f", raw, 116)[0]

    return NiftiHeader(
        dims=tuple(int(d) for d in dim[1 : ndim + 1]),
        pixdim=tuple(float(p) for p in pixdim[1 : ndim + 1]),
        datatype=int(datatype),
        scl_slope=float(scl_slope),
        scl_inter=float(scl_inter),
        vox_offset=int(vox_offset),
        magic=magic,
        byteswapped=swapped,
    )


def read_nifti(path: str | Path, modality_tag: str = "") -> Volume:
    """Read a single-file NIfTI-1 image into a Volume.

    Intensities are rescaled by scl_slope/scl_inter when the slope is nonzero.
    Trailing non-spatial dims of extent 1 are accepted; anything else is
    rejected since cases carry one channel per file.
    """
    raw = _read_bytes(Path(path))
    hdr = parse_header(raw)

    if hdr.datatype not in DTYPES:
        raise UnsupportedDatatype(f"datatype code {hdr.datatype}")
    dims = hdr.dims
    if len(dims) < 3:
        dims = dims + (1,) * (3 - len(dims))
    if any(d != 1 for d in dims[3:]):
        raise UnsupportedDatatype(f"non-singleton extra dims {dims[3:]}")
    nx, ny, nz = (int(dims[0]), int(dims[1]), int(dims[2]))

    dtype = DTYPES[hdr.datatype]
    if hdr.byteswapped:
        dtype = dtype.newbyteorder(">")
    n_vox = nx * ny * nz
    need = hdr.vox_offset + n_vox * dtype.itemsize
    if len(raw) < need:
        raise TruncatedFile(f"payload needs {need} bytes, file holds {len(raw)}")
    flat = np.frombuffer(raw, dtype=dtype, count=n_vox, offset=hdr.vox_offset)

    data = flat.reshape((nz, ny, nx)).astype(np.float32)
    if hdr.scl_slope != 0.0 and not (hdr.scl_slope == 1.0 and hdr.scl_inter == 0.0):
        data = data * hdr.scl_slope + hdr.scl_inter

    pix = hdr.pixdim + (1.0,) * max(0, 3 - len(hdr.pixdim))
    spacing = (abs(pix[2]) or 1.0, abs(pix[1]) or 1.0, abs(pix[0]) or 1.0)
    return Volume(shape=(nz, ny, nx), spacing=spacing, data=data, modality_tag=modality_tag)
