"""Scan mixing, test-time aggregation, and IoU evaluation for LiDAR
point-cloud segmentation experiments.

The library is organized around a small immutable :class:`PointCloud` and
pure functions over it:

- ``lasermix``: partition two scans into inclination bins and interleave them.
- ``polarmix``: swap an azimuth sector and paste rotated instance copies.
- ``tta``: aggregate predictions over rigid-transform views of one scan.
- ``metrics``: streaming confusion matrix, per-class IoU, and mIoU.
- ``model`` / ``scene``: a voxel-majority stand-in predictor and a synthetic
  scene generator so the whole path runs end to end at desk scale.
- ``io`` / ``pipeline`` / ``cli``: binary formats, replayable mix plans, and
  the ``scanmix`` command.
"""

__version__ = "0.1.0"

from .errors import (
    DataError,
    DegenerateInputError,
    FormatError,
    PairingError,
    PlanMismatchError,
    PredictorContractError,
    ScanMixError,
    UndefinedMetricError,
    ValidationError,
)
from .geometry import (
    IGNORE_LABEL,
    PointCloud,
    RigidAugmentation,
    apply_augmentation,
    azimuth,
    inclination,
    invert_augmentation,
    transform_coords,
)
from .lasermix import LaserMixPlan, laser_mix, make_plan
from .metrics import ConfusionMatrix, iou_per_class, mean_iou
from .model import VoxelMajorityModel
from .pipeline import mix_pair, replay_mix
from .polarmix import PolarMixPlan, polar_mix, sample_plan
from .scene import SceneSpec, generate_scene
from .tta import (
    CountingPredictor,
    argmax_labels,
    canonical_views,
    random_views,
    tta_predict,
)

__all__ = [
    "__version__",
    "IGNORE_LABEL",
    "PointCloud",
    "RigidAugmentation",
    "apply_augmentation",
    "inclination",
    "azimuth",
    "transform_coords",
    "invert_augmentation",
    "LaserMixPlan",
    "make_plan",
    "laser_mix",
    "PolarMixPlan",
    "sample_plan",
    "polar_mix",
    "canonical_views",
    "random_views",
    "tta_predict",
    "argmax_labels",
    "CountingPredictor",
    "ConfusionMatrix",
    "iou_per_class",
    "mean_iou",
    "VoxelMajorityModel",
    "SceneSpec",
    "generate_scene",
    "mix_pair",
    "replay_mix",
    "ScanMixError",
    "ValidationError",
    "PlanMismatchError",
    "PredictorContractError",
    "DataError",
    "FormatError",
    "PairingError",
    "DegenerateInputError",
    "UndefinedMetricError",
]
