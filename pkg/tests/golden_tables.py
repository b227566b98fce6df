"""Published pipeline configurations for 19 public segmentation datasets.

Each entry carries the dataset statistics (median shape/spacing over training
cases, case count, modality) plus, per configuration, the published target
spacing, median shape at that spacing, patch size, batch size, downsampling
strides and convolution kernel sizes. Used as the golden corpus for the
planner test suites.

``spacing`` entries of None mark the untouched out-of-plane axis of 2D
configurations.
"""

S2 = [2, 2]
S222 = [2, 2, 2]
K2 = [3, 3]
K3 = [3, 3, 3]


def cfg(spacing, median, patch, batch, strides, kernels):
    return {
        "spacing": spacing,
        "median_at_target": median,
        "patch": patch,
        "batch": batch,
        "strides": strides,
        "kernels": kernels,
    }


GOLDEN = {
    "BrainTumour": {
        "median_shape": (138, 169, 138),
        "median_spacing": (1.0, 1.0, 1.0),
        "n_cases": 484,
        "n_classes": 3,
        "modalities": ("MRI", "MRI", "MRI", "MRI"),
        "2d": cfg([None, 1.0, 1.0], [138, 169, 138], [192, 160], 107, [S2] * 5, [K2] * 6),
        "3d_fullres": cfg([1.0, 1.0, 1.0], [138, 169, 138], [128, 128, 128], 2,
                          [S222] * 5, [K3] * 6),
    },
    "Heart": {
        "median_shape": (115, 320, 232),
        "median_spacing": (1.37, 1.25, 1.25),
        "n_cases": 20,
        "n_classes": 1,
        "modalities": ("MRI",),
        "2d": cfg([None, 1.25, 1.25], [115, 320, 232], [320, 256], 40,
                  [S2] * 5 + [[2, 1]], [K2] * 7),
        "3d_fullres": cfg([1.37, 1.25, 1.25], [115, 320, 232], [80, 192, 160], 2,
                          [S222] * 4 + [[1, 2, 2]], [K3] * 6),
    },
    "Liver": {
        "median_shape": (432, 512, 512),
        "median_spacing": (1.0, 0.7676, 0.7676),
        "n_cases": 131,
        "n_classes": 2,
        "modalities": ("CT",),
        "ct_normalization": {"clip": (-17.0, 201.0), "mean": 99.40, "std": 39.36},
        "2d": cfg([None, 0.7676, 0.7676], [432, 512, 512], [512, 512], 12,
                  [S2] * 7, [K2] * 8),
        "3d_fullres": cfg([1.0, 0.7676, 0.7676], [482, 512, 512], [128, 128, 128], 2,
                          [S222] * 5, [K3] * 6),
        "3d_lowres": cfg([2.47, 1.90, 1.90], [195, 207, 207], [128, 128, 128], 2,
                         [S222] * 5, [K3] * 6),
    },
    "Hippocampus": {
        "median_shape": (36, 50, 35),
        "median_spacing": (1.0, 1.0, 1.0),
        "n_cases": 260,
        "n_classes": 2,
        "modalities": ("MRI",),
        "2d": cfg([None, 1.0, 1.0], [36, 50, 35], [56, 40], 366, [S2] * 3, [K2] * 4),
        "3d_fullres": cfg([1.0, 1.0, 1.0], [36, 50, 35], [40, 56, 40], 9,
                          [S222] * 3, [K3] * 4),
    },
    "Prostate": {
        "median_shape": (20, 320, 319),
        "median_spacing": (3.6, 0.62, 0.62),
        "n_cases": 32,
        "n_classes": 2,
        "modalities": ("MRI", "MRI"),
        "2d": cfg([None, 0.62, 0.62], [20, 320, 319], [320, 320], 32,
                  [S2] * 6, [K2] * 7),
        "3d_fullres": cfg([3.6, 0.62, 0.62], [20, 320, 319], [20, 320, 256], 2,
                          [[1, 2, 2], [1, 2, 2], S222, S222, [1, 2, 2], [1, 2, 2]],
                          [[1, 3, 3], [1, 3, 3]] + [K3] * 5),
    },
    "Lung": {
        "median_shape": (252, 512, 512),
        "median_spacing": (1.24, 0.79, 0.79),
        "n_cases": 63,
        "n_classes": 1,
        "modalities": ("CT",),
        "ct_normalization": {"clip": (-1024.0, 325.0), "mean": -158.58, "std": 324.70},
        "2d": cfg([None, 0.79, 0.79], [252, 512, 512], [512, 512], 12,
                  [S2] * 7, [K2] * 8),
        "3d_fullres": cfg([1.24, 0.79, 0.79], [252, 512, 512], [80, 192, 160], 2,
                          [S222] * 4 + [[1, 2, 2]], [K3] * 6),
        "3d_lowres": cfg([2.35, 1.48, 1.48], [133, 271, 271], [80, 192, 160], 2,
                         [S222] * 4 + [[1, 2, 2]], [K3] * 6),
    },
    "Pancreas": {
        "median_shape": (93, 512, 512),
        "median_spacing": (2.5, 0.80, 0.80),
        "n_cases": 282,
        "n_classes": 2,
        "modalities": ("CT",),
        "ct_normalization": {"clip": (-96.0, 215.0), "mean": 77.99, "std": 75.40},
        "2d": cfg([None, 0.8, 0.8], [93, 512, 512], [512, 512], 12, [S2] * 7, [K2] * 8),
        "3d_fullres": cfg([2.5, 0.8, 0.8], [96, 512, 512], [40, 224, 224], 2,
                          [[1, 2, 2], S222, S222, S222, [1, 2, 2]],
                          [[1, 3, 3]] + [K3] * 5),
        "3d_lowres": cfg([2.58, 1.29, 1.29], [93, 318, 318], [64, 192, 192], 2,
                         [[1, 2, 2], S222, S222, S222, S222], [K3] * 6),
    },
    "HepaticVessel": {
        "median_shape": (49, 512, 512),
        "median_spacing": (5.0, 0.80, 0.80),
        "n_cases": 303,
        "n_classes": 2,
        "modalities": ("CT",),
        "ct_normalization": {"clip": (-3.0, 243.0), "mean": 104.37, "std": 52.62},
        "2d": cfg([None, 0.8, 0.8], [49, 512, 512], [512, 512], 12, [S2] * 7, [K2] * 8),
        "3d_fullres": cfg([1.5, 0.8, 0.8], [150, 512, 512], [64, 192, 192], 2,
                          [S222] * 4 + [[1, 2, 2]], [K3] * 6),
        "3d_lowres": cfg([2.42, 1.29, 1.29], [93, 318, 318], [64, 192, 192], 2,
                         [S222] * 4 + [[1, 2, 2]], [K3] * 6),
    },
    "Spleen": {
        "median_shape": (90, 512, 512),
        "median_spacing": (5.0, 0.79, 0.79),
        "n_cases": 41,
        "n_classes": 1,
        "modalities": ("CT",),
        "ct_normalization": {"clip": (-41.0, 176.0), "mean": 99.29, "std": 39.47},
        "2d": cfg([None, 0.79, 0.79], [90, 512, 512], [512, 512], 12, [S2] * 7, [K2] * 8),
        "3d_fullres": cfg([1.6, 0.79, 0.79], [187, 512, 512], [64, 192, 160], 2,
                          [[1, 2, 2], S222, S222, S222, S222], [[1, 3, 3]] + [K3] * 5),
        "3d_lowres": cfg([2.77, 1.38, 1.38], [108, 293, 293], [64, 192, 192], 2,
                         [S222] * 4 + [[1, 2, 2]], [K3] * 6),
    },
    "Colon": {
        "median_shape": (95, 512, 512),
        "median_spacing": (5.0, 0.78, 0.78),
        "n_cases": 126,
        "n_classes": 1,
        "modalities": ("CT",),
        "ct_normalization": {"clip": (-30.0, 165.82), "mean": 62.18, "std": 32.65},
        "2d": cfg([None, 0.78, 0.78], [95, 512, 512], [512, 512], 12, [S2] * 7, [K2] * 8),
        "3d_fullres": cfg([3.0, 0.78, 0.78], [150, 512, 512], [56, 192, 160], 2,
                          [[1, 2, 2], S222, S222, S222, [1, 2, 2]],
                          [[1, 3, 3]] + [K3] * 5),
        "3d_lowres": cfg([3.09, 1.55, 1.55], [146, 258, 258], [96, 160, 160], 2,
                         [S222] * 4 + [[1, 2, 2]], [K3] * 6),
    },
    "AbdOrgSeg": {
        "median_shape": (128, 512, 512),
        "median_spacing": (3.0, 0.76, 0.76),
        "n_cases": 30,
        "n_classes": 13,
        "modalities": ("CT",),
        "ct_normalization": {"clip": (-958.0, 327.0), "mean": 82.92, "std": 136.97},
        "2d": cfg([None, 0.76, 0.76], [128, 512, 512], [512, 512], 12, [S2] * 7, [K2] * 8),
        "3d_fullres": cfg([3.0, 0.76, 0.76], [148, 512, 512], [48, 192, 192], 2,
                          [[1, 2, 2], S222, S222, S222, [1, 2, 2]],
                          [[1, 3, 3]] + [K3] * 5),
        "3d_lowres": cfg([3.18, 1.60, 1.60], [140, 243, 243], [80, 160, 160], 2,
                         [S222] * 4 + [[1, 2, 2]], [K3] * 6),
    },
    "Promise": {
        "median_shape": (24, 320, 320),
        "median_spacing": (3.6, 0.61, 0.61),
        "n_cases": 50,
        "n_classes": 1,
        "modalities": ("MRI",),
        "2d": cfg([None, 0.61, 0.61], [24, 327, 327], [384, 384], 22, [S2] * 6, [K2] * 7),
        "3d_fullres": cfg([2.2, 0.61, 0.61], [39, 327, 327], [28, 256, 256], 2,
                          [[1, 2, 2], S222, S222, [1, 2, 2], [1, 2, 2]],
                          [[1, 3, 3]] + [K3] * 5),
    },
    "ACDC": {
        "median_shape": (9, 256, 216),
        "median_spacing": (10.0, 1.56, 1.56),
        "n_cases": 200,
        "n_classes": 3,
        "modalities": ("cine MRI",),
        "2d": cfg([None, 1.56, 1.56], [9, 237, 208], [256, 224], 58, [S2] * 5, [K2] * 6),
        "3d_fullres": cfg([5.0, 1.56, 1.56], [18, 237, 208], [20, 256, 224], 3,
                          [[1, 2, 2], S222, S222, [1, 2, 2], [1, 2, 2]],
                          [[1, 3, 3]] + [K3] * 5),
    },
    "LiTS": {
        "median_shape": (432, 512, 512),
        "median_spacing": (1.0, 0.77, 0.77),
        "n_cases": 131,
        "n_classes": 2,
        "modalities": ("CT",),
        "ct_normalization": {"clip": (-17.0, 201.0), "mean": 99.40, "std": 39.39},
        "2d": cfg([None, 0.77, 0.77], [432, 512, 512], [512, 512], 12, [S2] * 7, [K2] * 8),
        "3d_fullres": cfg([1.0, 0.77, 0.77], [482, 512, 512], [128, 128, 128], 2,
                          [S222] * 5, [K3] * 6),
        "3d_lowres": cfg([2.47, 1.90, 1.90], [195, 207, 207], [128, 128, 128], 2,
                         [S222] * 5, [K3] * 6),
    },
    "MSLesion": {
        "median_shape": (137, 180, 137),
        "median_spacing": (1.0, 1.0, 1.0),
        "n_cases": 42,
        "n_classes": 1,
        "modalities": ("MRI", "MRI", "MRI", "MRI"),
        "2d": cfg([None, 1.0, 1.0], [137, 180, 137], [192, 160], 107, [S2] * 5, [K2] * 6),
        "3d_fullres": cfg([1.0, 1.0, 1.0], [137, 180, 137], [112, 128, 96], 2,
                          [[1, 2, 1]] + [S222] * 4, [K3] * 6),
    },
    "CHAOS": {
        "median_shape": (30, 204, 256),
        "median_spacing": (9.0, 1.66, 1.66),
        "n_cases": 60,
        "n_classes": 4,
        "modalities": ("MRI",),
        "2d": cfg([None, 1.66, 1.66], [30, 195, 262], [224, 320], 45,
                  [S2] * 5 + [[1, 2]], [K2] * 7),
        "3d_fullres": cfg([5.95, 1.66, 1.66], [45, 195, 262], [40, 192, 256], 2,
                          [[1, 2, 2], S222, S222, S222, [1, 2, 2], [1, 1, 2]],
                          [[1, 3, 3]] + [K3] * 6),
    },
    "KiTS": {
        "median_shape": (107, 512, 512),
        "median_spacing": (3.0, 0.78, 0.78),
        "n_cases": 206,
        "n_classes": 2,
        "modalities": ("CT",),
        "ct_normalization": {"clip": (-79.0, 304.0), "mean": 100.93, "std": 76.90},
        "2d": cfg([None, 0.78, 0.78], [107, 512, 512], [512, 512], 12, [S2] * 7, [K2] * 8),
        "3d_fullres": cfg([0.78, 0.78, 0.78], [525, 512, 512], [128, 128, 128], 2,
                          [S222] * 5, [K3] * 6),
        "3d_lowres": cfg([1.99, 1.99, 1.99], [206, 201, 201], [128, 128, 128], 2,
                         [S222] * 5, [K3] * 6),
    },
    "SegTHOR": {
        "median_shape": (178, 512, 512),
        "median_spacing": (2.5, 0.98, 0.98),
        "n_cases": 40,
        "n_classes": 4,
        "modalities": ("CT",),
        "ct_normalization": {"clip": (-986.0, 271.0), "mean": 20.78, "std": 180.50},
        "2d": cfg([None, 0.89, 0.89], [178, 512, 512], [512, 512], 12, [S2] * 7, [K2] * 8),
        # Published strides list six entries against six kernels, which breaks
        # the representation's own length rule; kept verbatim.
        "3d_fullres": cfg([2.50, 0.89, 0.89], [171, 512, 512], [64, 192, 160], 2,
                          [[1, 2, 2]] + [S222] * 5, [[1, 3, 3]] + [K3] * 5),
        "3d_lowres": cfg([3.51, 1.76, 1.76], [122, 285, 285], [80, 192, 160], 2,
                         [S222] * 4 + [[1, 2, 2]], [K3] * 6),
    },
    "CREMI": {
        "median_shape": (125, 1250, 1250),
        "median_spacing": (40.0, 4.0, 4.0),
        "n_cases": 3,
        "n_classes": 1,
        "modalities": ("EM",),
        "3d_fullres": cfg([40.0, 4.0, 4.0], [125, 1250, 1250], [24, 256, 256], 2,
                          [[1, 2, 2], [1, 2, 2], [1, 2, 2], S222, S222, [1, 2, 2]],
                          [[1, 3, 3], [1, 3, 3], [1, 3, 3]] + [K3] * 4),
    },
}

# Datasets whose published tables include a 3D low-resolution configuration.
CASCADE_DATASETS = sorted(
    name for name, entry in GOLDEN.items() if "3d_lowres" in entry
)
NO_CASCADE_DATASETS = sorted(
    name for name, entry in GOLDEN.items() if "3d_lowres" not in entry
)

# Liver candidate scores: the four singles and the winning ensemble carry the
# published cross-validation values; the remaining ensembles are filler kept
# strictly below the winner so the argmax is uniquely determined.
LIVER_CANDIDATE_SCORES = {
    ("2d",): 0.7592,
    ("3d_fullres",): 0.7971,
    ("3d_lowres",): 0.7796,
    ("3d_cascade_fullres",): 0.7993,
    ("3d_lowres", "3d_fullres"): 0.8088,
    ("2d", "3d_fullres"): 0.7821,
    ("2d", "3d_lowres"): 0.7713,
    ("2d", "3d_cascade_fullres"): 0.7954,
    ("3d_fullres", "3d_cascade_fullres"): 0.8041,
    ("3d_lowres", "3d_cascade_fullres"): 0.8012,
}


def all_configs():
    """(dataset, kind, cfg) triples over every published configuration."""
    out = []
    for name in sorted(GOLDEN):
        entry = GOLDEN[name]
        for kind in ("2d", "3d_fullres", "3d_lowres"):
            if kind in entry:
                out.append((name, kind, entry[kind]))
    return out
