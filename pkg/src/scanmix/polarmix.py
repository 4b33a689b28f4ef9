"""Azimuth-sector scene swapping and instance rotate-pasting.

Scene swap replaces one azimuth sector of scan A with the same sector of
scan B. Instance pasting adds yaw-rotated copies of B's points from a set
of movable-object classes, one copy per paste angle. The combined mix runs
the swap first, then the paste.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .geometry import TWO_PI, PointCloud, RigidAugmentation, apply_augmentation, azimuth

# Movable "thing" classes of the 22-class taxonomy (see io.CHALLENGE_CLASS_NAMES):
# car, truck, bus, other vehicle, motorcyclist, bicyclist, pedestrian,
# construction cone, bicycle, motorcycle.
DEFAULT_INSTANCE_CLASSES = frozenset({0, 1, 2, 3, 4, 5, 6, 10, 11, 12})

DEFAULT_SECTOR_WIDTH_RANGE = (np.pi / 6.0, np.pi)
DEFAULT_PASTE_COUNT = 2


@dataclass(frozen=True)
class PolarMixPlan:
    """Resolved randomness of one mix: the swap sector, the class set whose
    points get pasted, and the paste rotation angles."""

    sector_start: float
    sector_width: float
    instance_classes: frozenset[int] = DEFAULT_INSTANCE_CLASSES
    paste_angles: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        start = float(self.sector_start)
        width = float(self.sector_width)
        if not np.isfinite(start):
            raise ValidationError("sector_start must be finite")
        if not np.isfinite(width) or not (0.0 < width <= TWO_PI):
            raise ValidationError("sector_width must lie in (0, 2*pi]")
        angles = tuple(float(a) for a in self.paste_angles)
        if not all(np.isfinite(a) for a in angles):
            raise ValidationError("paste_angles must be finite")
        if len(set(angles)) != len(angles):
            raise ValidationError("paste_angles must be distinct")
        object.__setattr__(self, "sector_start", float(np.mod(start, TWO_PI)))
        object.__setattr__(self, "sector_width", width)
        object.__setattr__(self, "instance_classes", frozenset(int(c) for c in self.instance_classes))
        object.__setattr__(self, "paste_angles", angles)


def sample_plan(
    rng: np.random.Generator,
    instance_classes: frozenset[int] = DEFAULT_INSTANCE_CLASSES,
    sector_width_range: tuple[float, float] = DEFAULT_SECTOR_WIDTH_RANGE,
    paste_count: int = DEFAULT_PASTE_COUNT,
) -> PolarMixPlan:
    """Draw a plan: sector start uniform over the full circle, width uniform
    over ``sector_width_range``, and ``paste_count`` paste angles uniform
    over the full circle."""
    lo, hi = float(sector_width_range[0]), float(sector_width_range[1])
    if not (0.0 < lo <= hi <= TWO_PI):
        raise ValidationError("sector_width_range must satisfy 0 < lo <= hi <= 2*pi")
    if paste_count < 0:
        raise ValidationError("paste_count must be >= 0")
    start = float(rng.uniform(0.0, TWO_PI))
    width = float(rng.uniform(lo, hi))
    angles = tuple(float(a) for a in rng.uniform(0.0, TWO_PI, size=paste_count))
    return PolarMixPlan(
        sector_start=start,
        sector_width=width,
        instance_classes=instance_classes,
        paste_angles=angles,
    )


def in_sector(alpha: np.ndarray, plan: PolarMixPlan) -> np.ndarray:
    """Half-open membership test [start, start + width) modulo 2*pi."""
    rel = np.mod(alpha - plan.sector_start, TWO_PI)
    return rel < plan.sector_width


def scene_swap(cloud_a: PointCloud, cloud_b: PointCloud, plan: PolarMixPlan) -> PointCloud:
    """A's points outside the sector followed by B's points inside it."""
    keep_a = ~in_sector(azimuth(cloud_a.coords), plan)
    take_b = in_sector(azimuth(cloud_b.coords), plan)
    return PointCloud.concat([cloud_a.select(keep_a), cloud_b.select(take_b)])


def instance_paste(cloud_a: PointCloud, cloud_b: PointCloud, plan: PolarMixPlan) -> PointCloud:
    """A plus one yaw-rotated copy of B's instance-class points per paste angle.

    Copies keep their labels and intensities. Spatial collisions between
    copies are allowed; downstream voxelization copes with density.

    Raises:
        ValidationError: cloud_b carries no labels.
    """
    if not plan.paste_angles:
        return cloud_a
    if not cloud_b.has_labels:
        raise ValidationError("instance pasting requires a labeled donor cloud")
    mask = np.isin(cloud_b.labels, np.fromiter(plan.instance_classes, dtype=np.uint32))
    instances = cloud_b.select(mask)
    copies = [
        apply_augmentation(instances, RigidAugmentation(yaw=angle))
        for angle in plan.paste_angles
    ]
    return PointCloud.concat([cloud_a] + copies)


def polar_mix(cloud_a: PointCloud, cloud_b: PointCloud, plan: PolarMixPlan) -> PointCloud:
    """Scene swap followed by instance pasting, both driven by one plan."""
    return instance_paste(scene_swap(cloud_a, cloud_b, plan), cloud_b, plan)
