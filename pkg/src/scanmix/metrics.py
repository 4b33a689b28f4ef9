"""Confusion-matrix accumulation and class-wise IoU / mIoU.

Rows are ground truth, columns are prediction. Ground-truth points labeled
IGNORE are skipped. Classes that never occur in ground truth or prediction
have no defined IoU and are reported as NaN ("absent"), and absent classes
are excluded from the mean rather than counted as zero.
"""

from __future__ import annotations

import numpy as np

from .errors import DataError, UndefinedMetricError, ValidationError
from .geometry import IGNORE_LABEL


class ConfusionMatrix:
    """C x C integer counts, accumulated additively and merged by addition."""

    def __init__(self, num_classes: int, ignore: int = IGNORE_LABEL):
        if num_classes < 1:
            raise ValidationError("num_classes must be >= 1")
        if 0 <= ignore < num_classes:
            raise ValidationError("ignore sentinel must lie outside [0, num_classes)")
        self.num_classes = int(num_classes)
        self.ignore = int(ignore)
        self.counts = np.zeros((num_classes, num_classes), dtype=np.int64)

    def accumulate(self, gt: np.ndarray, pred: np.ndarray) -> "ConfusionMatrix":
        """Tally one batch of (ground truth, prediction) label pairs.

        Raises:
            ValidationError: gt and pred lengths differ.
            DataError: a prediction or non-IGNORE ground truth id is
                outside [0, num_classes).
        """
        gt = np.asarray(gt)
        pred = np.asarray(pred)
        if gt.shape != pred.shape or gt.ndim != 1:
            raise ValidationError(
                f"gt and pred must be equal-length 1-D arrays, got {gt.shape} vs {pred.shape}"
            )
        keep = gt != self.ignore
        g = gt[keep].astype(np.int64)
        p = pred[keep].astype(np.int64)
        if g.size and (g.min() < 0 or g.max() >= self.num_classes):
            raise DataError("invalid label: ground truth id outside the class range")
        if p.size and (p.min() < 0 or p.max() >= self.num_classes):
            raise DataError("invalid label: prediction id outside the class range")
        self.counts += np.bincount(
            g * self.num_classes + p, minlength=self.num_classes**2
        ).reshape(self.num_classes, self.num_classes)
        return self

    def merge(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        """Element-wise addition; associative and commutative."""
        if other.num_classes != self.num_classes:
            raise ValidationError("cannot merge matrices of different class counts")
        self.counts += other.counts
        return self

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def iou_per_class(matrix: ConfusionMatrix) -> np.ndarray:
    """Per-class TP / (TP + FP + FN); NaN where the denominator is zero."""
    counts = matrix.counts
    tp = np.diag(counts).astype(np.float64)
    fp = counts.sum(axis=0) - np.diag(counts)
    fn = counts.sum(axis=1) - np.diag(counts)
    denom = tp + fp + fn
    out = np.full(matrix.num_classes, np.nan, dtype=np.float64)
    present = denom > 0
    out[present] = tp[present] / denom[present]
    return out


def mean_iou(ious: np.ndarray) -> float:
    """Arithmetic mean over present (non-NaN) classes.

    Raises:
        UndefinedMetricError: every class is absent.
    """
    ious = np.asarray(ious, dtype=np.float64)
    present = ~np.isnan(ious)
    if not present.any():
        raise UndefinedMetricError("mean IoU is undefined: no class was ever observed")
    return float(ious[present].mean())
