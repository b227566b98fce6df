"""On-the-fly augmentation: parameter sampling and deterministic transforms.

Randomness is confined to ``RngStream`` (a counter-based generator) and to
the explicit sampling functions; every transform is a pure function of its
inputs and sampled parameters, so identical seeds give bit-identical patches.

Augmentations and their trigger probabilities / value ranges:

========================  ==========================  =====================
augmentation              probability                 sampled value
========================  ==========================  =====================
rotation                  0.2                         iso 3D: 3 angles U(-30, 30)
                                                      aniso 3D / iso 2D: U(-180, 180)
                                                      aniso 2D: U(-15, 15)
scaling                   0.2                         factor U(0.7, 1.4)
additive Gaussian noise   0.15                        variance U(0, 0.1)
Gaussian blur             0.2 / sample, 0.5 / chan    sigma U(0.5, 1.5) per channel
brightness                0.15                        factor U(0.7, 1.3)
contrast (clipped)        0.15                        factor U(0.65, 1.5)
low-resolution simulation 0.25 / sample, 0.5 / chan   factor U(1, 2) per channel
gamma on inverted values  0.15                        gamma U(0.7, 1.5)
gamma                     0.15                        gamma U(0.7, 1.5)
mirroring                 0.5 per axis
========================  ==========================  =====================

Cascade mask corruption: one morphological operator (sphere radius U(1, 8))
with probability 0.4, removal of connected components below 15% of the patch
with probability 0.2.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import MarginTooSmall, NotOneHot
from .geometry import LabelVolume

P_ROTATION = 0.2
P_SCALING = 0.2
P_NOISE = 0.15
P_BLUR_SAMPLE = 0.2
P_BLUR_CHANNEL = 0.5
P_BRIGHTNESS = 0.15
P_CONTRAST = 0.15
P_LOWRES_SAMPLE = 0.25
P_LOWRES_CHANNEL = 0.5
P_GAMMA_INVERTED = 0.15
P_GAMMA = 0.15
P_MIRROR_AXIS = 0.5
P_MASK_OPERATOR = 0.4
P_COMPONENT_REMOVAL = 0.2

ROT_ISO_3D = (-30.0, 30.0)
ROT_FREE = (-180.0, 180.0)
ROT_ANISO_2D = (-15.0, 15.0)
SCALE_RANGE = (0.7, 1.4)
NOISE_VARIANCE_RANGE = (0.0, 0.1)
BLUR_SIGMA_RANGE = (0.5, 1.5)
BRIGHTNESS_RANGE = (0.7, 1.3)
CONTRAST_RANGE = (0.65, 1.5)
LOWRES_FACTOR_RANGE = (1.0, 2.0)
GAMMA_RANGE = (0.7, 1.5)
MASK_RADIUS_RANGE = (1.0, 8.0)
COMPONENT_FRACTION = 0.15
BLUR_TRUNCATE = 4.0

ANISO_PATCH_FACTOR = 3.0
MASK_OPERATORS = ("dilate", "erode", "open", "close")

FG_SAMPLE_FRACTION = 1.0 / 3.0


def derive_child_seed(parent_seed: int, worker_index: int) -> int:
    """Deterministic per-worker seed: hash of (parent seed, worker index)."""
    digest = hashlib.sha256(f"{parent_seed}:{worker_index}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


class RngStream:
    """Counter-based random stream; identical seed, identical sequence.

    ``counter`` counts draw calls, which makes divergence between two runs
    easy to localize in tests.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self.counter = 0
        self._gen = np.random.Generator(np.random.Philox(key=self.seed))

    def random(self) -> float:
        self.counter += 1
        return float(self._gen.random())

    def uniform(self, low: float, high: float) -> float:
        self.counter += 1
        return float(self._gen.uniform(low, high))

    def integers(self, low: int, high: int) -> int:
        """One integer in [low, high)."""
        self.counter += 1
        return int(self._gen.integers(low, high))

    def normal_field(self, std: float, shape) -> np.ndarray:
        self.counter += 1
        return self._gen.normal(0.0, std, size=shape)

    def shuffled(self, items: list) -> list:
        self.counter += 1
        out = list(items)
        self._gen.shuffle(out)
        return out

    def child(self, worker_index: int) -> "RngStream":
        return RngStream(derive_child_seed(self.seed, worker_index))


@dataclass(frozen=True)
class PatchGeometry:
    patch_size: tuple[int, ...]
    dim: int

    def __post_init__(self):
        assert len(self.patch_size) == self.dim or (
            self.dim == 2 and len(self.patch_size) == 2
        )

    @property
    def anisotropic(self) -> bool:
        return max(self.patch_size) >= ANISO_PATCH_FACTOR * min(self.patch_size)

    @property
    def out_of_plane_axis(self) -> int | None:
        """For anisotropic 3D patches: the axis treated as slice direction."""
        if self.dim == 3 and self.anisotropic:
            return int(np.argmin(self.patch_size))
        return None


@dataclass(frozen=True)
class CascadeMaskParams:
    operator: str | None
    radius: float
    label_order: tuple[int, ...]
    remove_components: bool


@dataclass(frozen=True)
class AugmentationParams:
    rotation_applied: bool = False
    angles: tuple[float, ...] = ()
    scaling_applied: bool = False
    scale: float | None = None
    noise_applied: bool = False
    noise_variance: float | None = None
    blur_applied: bool = False
    blur_sigmas: tuple[float | None, ...] = ()
    brightness_applied: bool = False
    brightness_factor: float | None = None
    contrast_applied: bool = False
    contrast_factor: float | None = None
    lowres_applied: bool = False
    lowres_factors: tuple[float | None, ...] = ()
    gamma_inverted_applied: bool = False
    gamma_inverted: float | None = None
    gamma_applied: bool = False
    gamma: float | None = None
    mirror_axes: tuple[int, ...] = ()
    cascade: CascadeMaskParams | None = None


def rotation_range(geom: PatchGeometry) -> tuple[float, float]:
    if geom.dim == 3 and not geom.anisotropic:
        return ROT_ISO_3D
    if geom.dim == 2 and geom.anisotropic:
        return ROT_ANISO_2D
    return ROT_FREE


def sample_params(rng: RngStream, geom: PatchGeometry, n_channels: int = 1) -> AugmentationParams:
    """Draw one parameter set. Values are drawn only for triggered items, in a
    fixed order, so the stream position is a pure function of the flags."""
    rotation = rng.random() < P_ROTATION
    scaling = rng.random() < P_SCALING
    angles: tuple[float, ...] = ()
    if rotation:
        lo, hi = rotation_range(geom)
        n_angles = 3 if (geom.dim == 3 and not geom.anisotropic) else 1
        angles = tuple(rng.uniform(lo, hi) for _ in range(n_angles))
    scale = rng.uniform(*SCALE_RANGE) if scaling else None

    noise = rng.random() < P_NOISE
    noise_variance = rng.uniform(*NOISE_VARIANCE_RANGE) if noise else None

    blur = rng.random() < P_BLUR_SAMPLE
    blur_sigmas: list[float | None] = [None] * n_channels
    if blur:
        for c in range(n_channels):
            if rng.random() < P_BLUR_CHANNEL:
                blur_sigmas[c] = rng.uniform(*BLUR_SIGMA_RANGE)

    brightness = rng.random() < P_BRIGHTNESS
    brightness_factor = rng.uniform(*BRIGHTNESS_RANGE) if brightness else None

    contrast = rng.random() < P_CONTRAST
    contrast_factor = rng.uniform(*CONTRAST_RANGE) if contrast else None

    lowres = rng.random() < P_LOWRES_SAMPLE
    lowres_factors: list[float | None] = [None] * n_channels
    if lowres:
        for c in range(n_channels):
            if rng.random() < P_LOWRES_CHANNEL:
                lowres_factors[c] = rng.uniform(*LOWRES_FACTOR_RANGE)

    gamma_inv = rng.random() < P_GAMMA_INVERTED
    gamma_inv_value = rng.uniform(*GAMMA_RANGE) if gamma_inv else None
    gamma = rng.random() < P_GAMMA
    gamma_value = rng.uniform(*GAMMA_RANGE) if gamma else None

    mirror_axes = tuple(a for a in range(geom.dim) if rng.random() < P_MIRROR_AXIS)

    return AugmentationParams(
        rotation_applied=rotation,
        angles=angles,
        scaling_applied=scaling,
        scale=scale,
        noise_applied=noise,
        noise_variance=noise_variance,
        blur_applied=blur,
        blur_sigmas=tuple(blur_sigmas),
        brightness_applied=brightness,
        brightness_factor=brightness_factor,
        contrast_applied=contrast,
        contrast_factor=contrast_factor,
        lowres_applied=lowres,
        lowres_factors=tuple(lowres_factors),
        gamma_inverted_applied=gamma_inv,
        gamma_inverted=gamma_inv_value,
        gamma_applied=gamma,
        gamma=gamma_value,
        mirror_axes=mirror_axes,
    )


# ---------------------------------------------------------------------------
# spatial transform
# ---------------------------------------------------------------------------

def _rotation_matrix(angles_deg, dim: int, plane: tuple[int, int] | None) -> np.ndarray:
    rad = np.deg2rad(angles_deg)
    if dim == 2:
        c, s = np.cos(rad[0]), np.sin(rad[0])
        return np.array([[c, -s], [s, c]])
    if plane is not None:
        # single in-plane rotation inside a 3D grid
        c, s = np.cos(rad[0]), np.sin(rad[0])
        m = np.eye(3)
        a, b = plane
        m[a, a], m[a, b], m[b, a], m[b, b] = c, -s, s, c
        return m
    mats = []
    for axis in range(3):
        c, s = np.cos(rad[axis]), np.sin(rad[axis])
        m = np.eye(3)
        other = [i for i in range(3) if i != axis]
        m[other[0], other[0]], m[other[0], other[1]] = c, -s
        m[other[1], other[0]], m[other[1], other[1]] = s, c
        mats.append(m)
    return mats[2] @ mats[1] @ mats[0]


def _inverse_map_matrix(params: AugmentationParams, geom: PatchGeometry) -> np.ndarray:
    dim = geom.dim
    m = np.eye(dim)
    if params.rotation_applied:
        plane = None
        if dim == 3 and geom.anisotropic:
            oop = geom.out_of_plane_axis
            plane = tuple(a for a in range(3) if a != oop)  # type: ignore[assignment]
        rot = _rotation_matrix(params.angles, dim, plane)
        m = rot.T  # inverse of a rotation
    if params.scaling_applied and params.scale:
        # factor < 1 zooms out: sample coordinates farther from the center
        m = m / params.scale
    return m


def required_input_extent(
    target_size, params: AugmentationParams, geom: PatchGeometry
) -> tuple[int, ...]:
    """Smallest centered input extent the transform can read from without
    escaping the zero-fill fringe."""
    dim = geom.dim
    m = _inverse_map_matrix(params, geom)
    half = np.array(target_size, dtype=float) / 2.0
    corners = np.array(np.meshgrid(*[[-h, h] for h in half], indexing="ij"))
    corners = corners.reshape(dim, -1)
    mapped = m @ corners
    reach = np.abs(mapped).max(axis=1)
    return tuple(int(np.ceil(2 * r)) for r in reach)


def spatial_transform(
    patch: np.ndarray, params: AugmentationParams, geom: PatchGeometry, target_size
) -> np.ndarray:
    """Apply rotation+scaling as one inverse map, then center-crop.

    ``patch`` is (channels, *spatial) and should be the oversized crop; reads
    up to one voxel outside it are zero-filled, anything farther raises
    MarginTooSmall.
    """
    dim = geom.dim
    target = tuple(int(t) for t in target_size)
    spatial = patch.shape[1:]
    if len(spatial) != dim or len(target) != dim:
        raise ValueError(f"patch {patch.shape} vs dim {dim} / target {target}")

    center_in = (np.array(spatial, dtype=float) - 1.0) / 2.0

    if not params.rotation_applied and not params.scaling_applied:
        if any(s < t for s, t in zip(spatial, target)):
            raise MarginTooSmall(f"crop {spatial} smaller than target {target}")
        starts = [(s - t) // 2 for s, t in zip(spatial, target)]
        slicer = (slice(None),) + tuple(
            slice(st, st + t) for st, t in zip(starts, target)
        )
        return patch[slicer].copy()

    needed = required_input_extent(target, params, geom)
    if any(n > s + 2 for n, s in zip(needed, spatial)):
        raise MarginTooSmall(
            f"transform needs extent {needed}, oversized crop is {spatial}"
        )

    m = _inverse_map_matrix(params, geom)
    out_axes = [np.arange(t, dtype=float) - (t - 1) / 2.0 for t in target]
    mesh = np.stack(np.meshgrid(*out_axes, indexing="ij"))
    coords = np.tensordot(m, mesh, axes=1) + center_in.reshape((dim,) + (1,) * dim)

    out = np.empty((patch.shape[0],) + target, dtype=patch.dtype)
    for c in range(patch.shape[0]):
        out[c] = ndimage.map_coordinates(
            patch[c].astype(np.float64), coords, order=1, mode="constant", cval=0.0
        )
    return out


# ---------------------------------------------------------------------------
# intensity transforms
# ---------------------------------------------------------------------------

def _simulate_lowres(channel: np.ndarray, factor: float, inplane_only: bool) -> np.ndarray:
    shape = channel.shape
    zoom_down = [1.0 / factor] * channel.ndim
    if inplane_only and channel.ndim == 3:
        zoom_down[int(np.argmin(shape))] = 1.0
    small = ndimage.zoom(channel, zoom_down, order=0, mode="nearest")
    zoom_up = [o / s for o, s in zip(shape, small.shape)]
    up = ndimage.zoom(small, zoom_up, order=3, mode="nearest")
    if up.shape != shape:  # rounding guard
        slicer = tuple(slice(0, n) for n in shape)
        padded = np.zeros(shape, dtype=up.dtype)
        padded[tuple(slice(0, min(a, b)) for a, b in zip(shape, up.shape))] = up[
            tuple(slice(0, min(a, b)) for a, b in zip(shape, up.shape))
        ]
        up = padded[slicer]
    return up


def _apply_gamma(channel: np.ndarray, gamma: float, inverted: bool) -> np.ndarray:
    mn, mx = float(channel.min()), float(channel.max())
    rng = mx - mn
    if rng == 0.0:
        return channel
    x = (channel - mn) / rng
    if inverted:
        x = 1.0 - (1.0 - x) ** gamma
    else:
        x = x ** gamma
    return x * rng + mn


def intensity_transform(
    patch: np.ndarray,
    params: AugmentationParams,
    rng: RngStream,
    geom: PatchGeometry | None = None,
) -> np.ndarray:
    """Apply the intensity chain in its fixed order to a (channels, *spatial) patch.

    ``rng`` supplies the additive noise field; it is untouched when noise is
    not triggered.
    """
    out = patch.astype(np.float64, copy=True)
    n_channels = out.shape[0]
    inplane_only = geom is not None and (geom.dim == 2 or geom.anisotropic)

    if params.noise_applied and params.noise_variance is not None:
        std = float(np.sqrt(params.noise_variance))
        out += rng.normal_field(std, out.shape)

    if params.blur_applied:
        for c in range(n_channels):
            sigma = params.blur_sigmas[c] if c < len(params.blur_sigmas) else None
            if sigma is not None:
                out[c] = ndimage.gaussian_filter(out[c], sigma, truncate=BLUR_TRUNCATE)

    if params.brightness_applied and params.brightness_factor is not None:
        out *= params.brightness_factor

    if params.contrast_applied and params.contrast_factor is not None:
        for c in range(n_channels):
            lo, hi = float(out[c].min()), float(out[c].max())
            out[c] = np.clip(out[c] * params.contrast_factor, lo, hi)

    if params.lowres_applied:
        for c in range(n_channels):
            factor = params.lowres_factors[c] if c < len(params.lowres_factors) else None
            if factor is not None and factor > 1.0:
                out[c] = _simulate_lowres(out[c], factor, inplane_only)

    if params.gamma_inverted_applied and params.gamma_inverted is not None:
        for c in range(n_channels):
            out[c] = _apply_gamma(out[c], params.gamma_inverted, inverted=True)

    if params.gamma_applied and params.gamma is not None:
        for c in range(n_channels):
            out[c] = _apply_gamma(out[c], params.gamma, inverted=False)

    return out


def mirror(patch: np.ndarray, axes, spatial_dims: int | None = None) -> np.ndarray:
    """Reverse the selected spatial axes (0-indexed within the spatial block)."""
    nd = spatial_dims if spatial_dims is not None else patch.ndim
    offset = patch.ndim - nd
    axes = sorted(set(int(a) for a in axes))
    if not axes:
        return patch.copy()
    return np.flip(patch, axis=[offset + a for a in axes]).copy()


# ---------------------------------------------------------------------------
# cascade mask corruption
# ---------------------------------------------------------------------------

def _ball(radius: float, dim: int) -> np.ndarray:
    r = int(np.floor(radius))
    grids = np.meshgrid(*([np.arange(-r, r + 1)] * dim), indexing="ij")
    dist2 = sum(g.astype(float) ** 2 for g in grids)
    return dist2 <= radius ** 2


def sample_cascade_params(rng: RngStream, n_labels: int) -> CascadeMaskParams:
    operator = None
    radius = 0.0
    order: tuple[int, ...] = ()
    if rng.random() < P_MASK_OPERATOR:
        operator = MASK_OPERATORS[rng.integers(0, len(MASK_OPERATORS))]
        radius = rng.uniform(*MASK_RADIUS_RANGE)
        order = tuple(rng.shuffled(list(range(1, n_labels + 1))))
    remove = rng.random() < P_COMPONENT_REMOVAL
    return CascadeMaskParams(operator, radius, order, remove)


def _check_one_hot(mask: np.ndarray) -> None:
    if mask.ndim < 2:
        raise NotOneHot("mask must be (labels, *spatial)")
    vals = np.unique(mask)
    if not np.all(np.isin(vals, (0, 1))):
        raise NotOneHot(f"values {vals} are not binary")
    if not np.array_equal(mask.sum(axis=0), np.ones(mask.shape[1:])):
        raise NotOneHot("channel columns must sum to exactly one")


def cascade_mask_transform(onehot: np.ndarray, rng: RngStream) -> np.ndarray:
    """Corrupt a one-hot mask the way a coarse first-stage model would err.

    Channel 0 is background. The one-hot property is preserved: dilating one
    label overwrites the others in the dilated area, erosion exposes
    background.
    """
    _check_one_hot(onehot)
    n_fg = onehot.shape[0] - 1
    params = sample_cascade_params(rng, n_fg)
    labels = np.argmax(onehot, axis=0)

    if params.operator is not None and n_fg > 0:
        element = _ball(params.radius, labels.ndim)
        for lab in params.label_order:
            mask = labels == lab
            if params.operator == "dilate":
                new = ndimage.binary_dilation(mask, structure=element)
                labels[new] = lab
            elif params.operator == "erode":
                new = ndimage.binary_erosion(mask, structure=element)
                labels[mask & ~new] = 0
            elif params.operator == "open":
                new = ndimage.binary_opening(mask, structure=element)
                labels[mask & ~new] = 0
                labels[new & ~mask] = lab
            else:  # close
                new = ndimage.binary_closing(mask, structure=element)
                labels[new & ~mask] = lab

    if params.remove_components and n_fg > 0:
        threshold = COMPONENT_FRACTION * labels.size
        structure = np.ones((3,) * labels.ndim, dtype=bool)
        for lab in range(1, n_fg + 1):
            comp, n = ndimage.label(labels == lab, structure=structure)
            if n == 0:
                continue
            sizes = np.bincount(comp.ravel())
            for cid in range(1, n + 1):
                if sizes[cid] < threshold:
                    labels[comp == cid] = 0

    out = np.zeros_like(onehot)
    for lab in range(onehot.shape[0]):
        out[lab] = labels == lab
    return out


# ---------------------------------------------------------------------------
# patch origin sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PatchSampling:
    origins: tuple[tuple[tuple[int, ...], int | None], ...]
    no_foreground_warning: bool = False

    @property
    def n_forced(self) -> int:
        return sum(1 for _, cls in self.origins if cls is not None)


def sample_patch_origins(
    label: LabelVolume, patch_size, batch_size: int, rng: RngStream
) -> PatchSampling:
    """Choose window origins for one minibatch.

    One third of the samples (rounded, minimum 1) are centered on a random
    voxel of a randomly chosen present foreground class; the rest are uniform.
    Origins are clamped so windows stay inside the volume.
    """
    shape = label.shape
    patch = tuple(int(p) for p in patch_size)
    max_origin = [max(0, s - p) for s, p in zip(shape, patch)]

    classes = sorted(int(c) for c in np.unique(label.data) if c > 0)
    n_forced = max(1, int(np.floor(batch_size / 3.0 + 0.5)))
    warning = False
    if not classes:
        n_forced = 0
        warning = True

    class_voxels = {
        c: np.argwhere(label.data == c) for c in classes
    }

    entries: list[tuple[tuple[int, ...], int | None]] = []
    for _ in range(batch_size - n_forced):
        origin = tuple(rng.integers(0, m + 1) for m in max_origin)
        entries.append((origin, None))
    for _ in range(n_forced):
        cls = classes[rng.integers(0, len(classes))]
        voxels = class_voxels[cls]
        voxel = voxels[rng.integers(0, len(voxels))]
        origin = tuple(
            int(np.clip(v - p // 2, 0, m))
            for v, p, m in zip(voxel, patch, max_origin)
        )
        entries.append((origin, cls))
    return PatchSampling(tuple(entries), warning)
