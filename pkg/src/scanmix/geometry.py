"""Point cloud container, spherical angles, and invertible rigid augmentations.

Coordinate frame: x forward, y left, z up, sensor at the origin, units in
meters. Angles are radians everywhere in the library; degrees appear only
at the CLI surface.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

TWO_PI = 2.0 * np.pi

# Ground-truth sentinel for unlabeled points; kept outside [0, C) for any
# supported taxonomy and equal to its on-disk encoding.
IGNORE_LABEL = 255


@dataclass(frozen=True)
class PointCloud:
    """An unordered LiDAR scan of N points.

    Attributes:
        coords: (N, 3) float64 xyz positions in meters.
        intensity: (N,) float32 reflectance values, >= 0.
        labels: optional (N,) uint32 class ids (IGNORE_LABEL allowed).
    """

    coords: np.ndarray
    intensity: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self) -> None:
        coords = np.asarray(self.coords, dtype=np.float64)
        if coords.ndim != 2 or coords.shape[1] != 3:
            raise ValidationError(f"coords must be (N, 3), got {coords.shape}")
        intensity = np.asarray(self.intensity, dtype=np.float32)
        if intensity.shape != (coords.shape[0],):
            raise ValidationError(
                f"intensity must be ({coords.shape[0]},), got {intensity.shape}"
            )
        if not np.isfinite(coords).all():
            raise ValidationError("coords contain non-finite values")
        if not np.isfinite(intensity).all():
            raise ValidationError("intensity contains non-finite values")
        if intensity.size and intensity.min() < 0:
            raise ValidationError("intensity must be non-negative")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "intensity", intensity)
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.uint32)
            if labels.shape != (coords.shape[0],):
                raise ValidationError(
                    f"labels must be ({coords.shape[0]},), got {labels.shape}"
                )
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def has_labels(self) -> bool:
        return self.labels is not None

    @classmethod
    def empty(cls, labeled: bool = False) -> "PointCloud":
        return cls(
            coords=np.empty((0, 3), dtype=np.float64),
            intensity=np.empty((0,), dtype=np.float32),
            labels=np.empty((0,), dtype=np.uint32) if labeled else None,
        )

    def select(self, index: np.ndarray) -> "PointCloud":
        """Subset by boolean mask or integer index, preserving order."""
        return PointCloud(
            coords=self.coords[index],
            intensity=self.intensity[index],
            labels=self.labels[index] if self.labels is not None else None,
        )

    def with_coords(self, coords: np.ndarray) -> "PointCloud":
        """Same points with replaced coordinates (count must match)."""
        return PointCloud(coords=coords, intensity=self.intensity, labels=self.labels)

    @staticmethod
    def concat(clouds: list["PointCloud"]) -> "PointCloud":
        """Concatenate clouds in order. Labels must be all present or all absent."""
        if not clouds:
            return PointCloud.empty()
        labeled = [c.has_labels for c in clouds]
        if any(labeled) and not all(labeled):
            raise ValidationError("cannot concatenate labeled and unlabeled clouds")
        return PointCloud(
            coords=np.concatenate([c.coords for c in clouds], axis=0),
            intensity=np.concatenate([c.intensity for c in clouds], axis=0),
            labels=(
                np.concatenate([c.labels for c in clouds], axis=0)
                if all(labeled)
                else None
            ),
        )


def inclination(coords: np.ndarray) -> np.ndarray:
    """Vertical angle of each point's ray above the horizontal plane.

    Args:
        coords: (N, 3) array of xyz positions.

    Returns:
        (N,) float64 angles in [-pi/2, pi/2]; 0 on the horizontal plane.
    """
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[1] != 3:
        raise ValidationError(f"coords must be (N, 3), got {coords.shape}")
    horizontal = np.hypot(coords[:, 0], coords[:, 1])
    return np.arctan2(coords[:, 2], horizontal)


def azimuth(coords: np.ndarray) -> np.ndarray:
    """Horizontal angle of each point's ray around the vertical axis.

    Args:
        coords: (N, 3) array of xyz positions.

    Returns:
        (N,) float64 angles in [0, 2*pi); points on the z-axis map to 0.
    """
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[1] != 3:
        raise ValidationError(f"coords must be (N, 3), got {coords.shape}")
    return np.mod(np.arctan2(coords[:, 1], coords[:, 0]), TWO_PI)


@dataclass(frozen=True)
class RigidAugmentation:
    """Parametric rigid-ish transform: flip, then uniform scale, then yaw
    rotation about z, then translation. The order is fixed so every instance
    has an exact inverse in the same family.

    flip_x mirrors across the x-z plane (negates y); flip_y mirrors across
    the y-z plane (negates x).
    """

    yaw: float = 0.0
    scale: float = 1.0
    flip_x: bool = False
    flip_y: bool = False
    shift: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        yaw = float(self.yaw)
        scale = float(self.scale)
        shift = tuple(float(v) for v in self.shift)
        if not np.isfinite(yaw):
            raise ValidationError("invalid augmentation: yaw must be finite")
        if not np.isfinite(scale) or scale <= 0:
            raise ValidationError("invalid augmentation: scale must be finite and > 0")
        if len(shift) != 3 or not all(np.isfinite(v) for v in shift):
            raise ValidationError("invalid augmentation: shift must be a finite 3-vector")
        object.__setattr__(self, "yaw", float(np.mod(yaw, TWO_PI)))
        object.__setattr__(self, "scale", scale)
        object.__setattr__(self, "shift", shift)

    @classmethod
    def identity(cls) -> "RigidAugmentation":
        return cls()


def transform_coords(coords: np.ndarray, aug: RigidAugmentation) -> np.ndarray:
    """Apply an augmentation to bare coordinates, returning a new array."""
    coords = np.asarray(coords, dtype=np.float64)
    x = -coords[:, 0] if aug.flip_y else coords[:, 0]
    y = -coords[:, 1] if aug.flip_x else coords[:, 1]
    z = coords[:, 2]
    c, s = np.cos(aug.yaw), np.sin(aug.yaw)
    out = np.empty_like(coords)
    out[:, 0] = aug.scale * (c * x - s * y) + aug.shift[0]
    out[:, 1] = aug.scale * (s * x + c * y) + aug.shift[1]
    out[:, 2] = aug.scale * z + aug.shift[2]
    return out


def apply_augmentation(cloud: PointCloud, aug: RigidAugmentation) -> PointCloud:
    """Transform a cloud's coordinates; point order, labels, and intensity
    are untouched."""
    return cloud.with_coords(transform_coords(cloud.coords, aug))


def invert_augmentation(aug: RigidAugmentation) -> RigidAugmentation:
    """Exact inverse under the fixed flip -> scale -> rotate -> shift order.

    Conjugating a yaw rotation by a single axis flip reverses its sense, so
    the inverse keeps the original yaw when exactly one flip is set and
    negates it otherwise.
    """
    inv_yaw = aug.yaw if (aug.flip_x != aug.flip_y) else -aug.yaw
    linear_inverse = RigidAugmentation(
        yaw=inv_yaw,
        scale=1.0 / aug.scale,
        flip_x=aug.flip_x,
        flip_y=aug.flip_y,
    )
    moved = transform_coords(np.array([aug.shift]), linear_inverse)[0]
    return dataclasses.replace(
        linear_inverse, shift=(-moved[0] + 0.0, -moved[1] + 0.0, -moved[2] + 0.0)
    )
