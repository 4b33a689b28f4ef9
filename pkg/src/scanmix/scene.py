"""Deterministic synthetic street scenes for desk-scale testing.

A scene is a labeled cloud around an ego sensor at the origin: a road strip
flanked by sidewalks, building facades further out, vegetation blobs, and
car / pedestrian clusters. Six taxonomy classes are used (Car, Pedestrian,
Building, Vegetation, Road, Sidewalk). The same seed always yields the same
scene, byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .geometry import PointCloud

CAR = 0
PEDESTRIAN = 6
BUILDING = 13
VEGETATION = 14
ROAD = 17
SIDEWALK = 21

GROUND_Z = -1.8  # sensor height above the road surface


@dataclass(frozen=True)
class SceneSpec:
    """Layout parameters for one synthetic scene."""

    seed: int = 0
    n_points: int = 20_000
    extent: float = 40.0  # half-length of the road strip in meters
    n_cars: int = 6
    n_pedestrians: int = 8
    n_vegetation: int = 10

    def __post_init__(self) -> None:
        if self.n_points < 0:
            raise ValidationError("n_points must be >= 0")
        if self.extent <= 0:
            raise ValidationError("extent must be > 0")


def _split_budget(n_points: int) -> dict[str, int]:
    fractions = {
        "road": 0.32,
        "sidewalk": 0.13,
        "building": 0.27,
        "vegetation": 0.12,
        "car": 0.11,
        "pedestrian": 0.05,
    }
    counts = {k: int(n_points * f) for k, f in fractions.items()}
    counts["road"] += n_points - sum(counts.values())
    return counts


def _box_points(rng, n, center, size, label):
    pts = center + rng.uniform(-0.5, 0.5, size=(n, 3)) * size
    return pts, np.full(n, label, dtype=np.uint32)


def generate_scene(spec: SceneSpec) -> PointCloud:
    """Build the labeled scene described by ``spec``."""
    rng = np.random.default_rng(spec.seed)
    budget = _split_budget(spec.n_points)
    ext = spec.extent
    coords_parts: list[np.ndarray] = []
    label_parts: list[np.ndarray] = []

    # Road: flat strip along x with mild surface noise.
    n = budget["road"]
    road = np.empty((n, 3))
    road[:, 0] = rng.uniform(-ext, ext, n)
    road[:, 1] = rng.uniform(-8.0, 8.0, n)
    road[:, 2] = GROUND_Z + rng.normal(0.0, 0.02, n)
    coords_parts.append(road)
    label_parts.append(np.full(n, ROAD, dtype=np.uint32))

    # Sidewalks: raised strips on both sides of the road.
    n = budget["sidewalk"]
    side = np.empty((n, 3))
    side[:, 0] = rng.uniform(-ext, ext, n)
    side[:, 1] = rng.choice([-1.0, 1.0], n) * rng.uniform(8.0, 12.0, n)
    side[:, 2] = GROUND_Z + 0.15 + rng.normal(0.0, 0.02, n)
    coords_parts.append(side)
    label_parts.append(np.full(n, SIDEWALK, dtype=np.uint32))

    # Buildings: vertical facades beyond the sidewalks.
    n = budget["building"]
    n_buildings = max(2, int(2 * ext // 20))
    per = np.full(n_buildings, n // n_buildings)
    per[: n - per.sum()] += 1
    for i, m in enumerate(per):
        cx = rng.uniform(-ext, ext)
        side_sign = -1.0 if i % 2 else 1.0
        wall_y = side_sign * rng.uniform(13.0, 18.0)
        height = rng.uniform(6.0, 15.0)
        pts = np.empty((m, 3))
        pts[:, 0] = cx + rng.uniform(-6.0, 6.0, m)
        pts[:, 1] = wall_y + rng.normal(0.0, 0.1, m)
        pts[:, 2] = GROUND_Z + rng.uniform(0.0, height, m)
        coords_parts.append(pts)
        label_parts.append(np.full(m, BUILDING, dtype=np.uint32))

    # Vegetation: ellipsoidal canopies scattered off the road.
    n = budget["vegetation"]
    per = np.full(spec.n_vegetation, n // spec.n_vegetation) if spec.n_vegetation else np.array([], dtype=int)
    if spec.n_vegetation:
        per[: n - per.sum()] += 1
    for m in per:
        center = np.array(
            [
                rng.uniform(-ext, ext),
                rng.choice([-1.0, 1.0]) * rng.uniform(9.0, 16.0),
                GROUND_Z + rng.uniform(1.5, 4.0),
            ]
        )
        pts = center + rng.normal(0.0, 1.0, size=(m, 3)) * np.array([1.5, 1.5, 1.2])
        coords_parts.append(pts)
        label_parts.append(np.full(m, VEGETATION, dtype=np.uint32))

    # Cars: boxes parked on the road.
    n = budget["car"]
    per = np.full(spec.n_cars, n // spec.n_cars) if spec.n_cars else np.array([], dtype=int)
    if spec.n_cars:
        per[: n - per.sum()] += 1
    for m in per:
        center = np.array(
            [rng.uniform(-ext, ext), rng.uniform(-6.0, 6.0), GROUND_Z + 0.75]
        )
        pts, labels = _box_points(rng, m, center, np.array([4.2, 1.8, 1.5]), CAR)
        coords_parts.append(pts)
        label_parts.append(labels)

    # Pedestrians: thin vertical clusters on the sidewalks.
    n = budget["pedestrian"]
    per = np.full(spec.n_pedestrians, n // spec.n_pedestrians) if spec.n_pedestrians else np.array([], dtype=int)
    if spec.n_pedestrians:
        per[: n - per.sum()] += 1
    for m in per:
        center = np.array(
            [
                rng.uniform(-ext, ext),
                rng.choice([-1.0, 1.0]) * rng.uniform(8.5, 11.5),
                GROUND_Z + 1.0,
            ]
        )
        pts, labels = _box_points(rng, m, center, np.array([0.5, 0.5, 1.7]), PEDESTRIAN)
        coords_parts.append(pts)
        label_parts.append(labels)

    coords = np.concatenate(coords_parts, axis=0) if coords_parts else np.empty((0, 3))
    labels = (
        np.concatenate(label_parts, axis=0) if label_parts else np.empty((0,), dtype=np.uint32)
    )
    intensity = rng.uniform(0.0, 1.0, coords.shape[0]).astype(np.float32)
    return PointCloud(coords=coords, intensity=intensity, labels=labels)
