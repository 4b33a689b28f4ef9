"""Multi-view test-time augmentation around any per-point predictor.

A predictor maps a cloud to an (N, C) score map with normalized rows.
The runner predicts once per view on the augmented cloud and averages the
score maps row-wise; augmentations preserve point order, so rows stay
index-aligned across views.
"""

from __future__ import annotations

from typing import Protocol, Sequence

import numpy as np

from .errors import PredictorContractError, ValidationError
from .geometry import PointCloud, RigidAugmentation, apply_augmentation

SUPPORTED_VIEW_COUNTS = (1, 2, 4, 8, 16)

# Maximum allowed deviation of a score row's sum from 1.
ROW_SUM_TOLERANCE = 1e-5

_CANONICAL_YAWS = (0.0, np.pi / 2.0, np.pi, 3.0 * np.pi / 2.0)
_EXTENDED_SCALES = (0.95, 1.05)


class Predictor(Protocol):
    """Per-point classifier interface consumed by the TTA runner."""

    @property
    def class_count(self) -> int: ...

    def predict(self, cloud: PointCloud) -> np.ndarray:
        """Return an (N, C) array of non-negative scores, each row
        summing to 1 within ROW_SUM_TOLERANCE."""
        ...


def check_score_map(scores: np.ndarray, n_points: int, class_count: int) -> np.ndarray:
    """Validate a predictor's output against the score-map contract."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.shape != (n_points, class_count):
        raise PredictorContractError(
            f"predictor returned shape {scores.shape}, expected ({n_points}, {class_count})"
        )
    if scores.size == 0:
        return scores
    if not np.isfinite(scores).all() or scores.min() < 0:
        raise PredictorContractError("scores must be finite and non-negative")
    sums = scores.sum(axis=1)
    if np.abs(sums - 1.0).max() > ROW_SUM_TOLERANCE:
        raise PredictorContractError("score rows must sum to 1 within tolerance")
    return scores


def canonical_views(k: int) -> list[RigidAugmentation]:
    """Deterministic view grid for k in {1, 2, 4, 8, 16}.

    k=1 is the identity alone; k=2 and k=4 are yaw quarter-turn subsets;
    k=8 is the full yaw grid crossed with the y-mirror flip; k=16 crosses
    the k=8 grid with scales 0.95 and 1.05.
    """
    if k not in SUPPORTED_VIEW_COUNTS:
        raise ValidationError(f"unsupported view count {k}, choose from {SUPPORTED_VIEW_COUNTS}")
    if k == 1:
        return [RigidAugmentation.identity()]
    if k == 2:
        return [RigidAugmentation(yaw=yaw) for yaw in (0.0, np.pi)]
    if k == 4:
        return [RigidAugmentation(yaw=yaw) for yaw in _CANONICAL_YAWS]
    if k == 8:
        return [
            RigidAugmentation(yaw=yaw, flip_x=flip)
            for flip in (False, True)
            for yaw in _CANONICAL_YAWS
        ]
    return [
        RigidAugmentation(yaw=yaw, flip_x=flip, scale=scale)
        for scale in _EXTENDED_SCALES
        for flip in (False, True)
        for yaw in _CANONICAL_YAWS
    ]


def random_views(
    k: int,
    rng: np.random.Generator,
    scale_range: tuple[float, float] = (0.95, 1.05),
    shift_extent: float = 0.2,
) -> list[RigidAugmentation]:
    """Seeded alternative to the canonical grid: per view a uniform yaw over
    the full circle, a uniform scale, and a per-axis uniform shift within
    ``[-shift_extent, shift_extent]`` meters."""
    if k < 1:
        raise ValidationError("view count must be >= 1")
    views = []
    for _ in range(k):
        yaw = float(rng.uniform(0.0, 2.0 * np.pi))
        scale = float(rng.uniform(scale_range[0], scale_range[1]))
        shift = tuple(float(v) for v in rng.uniform(-shift_extent, shift_extent, size=3))
        views.append(RigidAugmentation(yaw=yaw, scale=scale, shift=shift))
    return views


def tta_predict(
    predictor: Predictor,
    cloud: PointCloud,
    views: Sequence[RigidAugmentation],
) -> np.ndarray:
    """Aggregate one prediction per view into a single score map.

    Issues exactly ``len(views)`` predictor calls, averages the score maps
    row-wise, and renormalizes the rows. A single view short-circuits to the
    raw prediction so single-view TTA is exactly plain inference.

    Raises:
        ValidationError: views is empty.
        PredictorContractError: a prediction violates the score-map contract.
    """
    if len(views) == 0:
        raise ValidationError("tta_predict requires at least one view")
    total = np.zeros((cloud.n, predictor.class_count), dtype=np.float64)
    for view in views:
        scores = predictor.predict(apply_augmentation(cloud, view))
        total += check_score_map(scores, cloud.n, predictor.class_count)
    if len(views) == 1:
        return total
    mean = total / float(len(views))
    if mean.size:
        mean /= mean.sum(axis=1, keepdims=True)
    return mean


def argmax_labels(scores: np.ndarray) -> np.ndarray:
    """Per-row argmax as uint32 class ids; ties go to the lowest index."""
    scores = np.asarray(scores)
    if scores.ndim != 2:
        raise ValidationError(f"scores must be 2-D, got shape {scores.shape}")
    return np.argmax(scores, axis=1).astype(np.uint32)


class CountingPredictor:
    """Delegating wrapper that counts predict() calls.

    Lets callers assert the inference budget (k views -> exactly k calls).
    """

    def __init__(self, inner: Predictor):
        self.inner = inner
        self.calls = 0

    @property
    def class_count(self) -> int:
        return self.inner.class_count

    def predict(self, cloud: PointCloud) -> np.ndarray:
        self.calls += 1
        return self.inner.predict(cloud)
