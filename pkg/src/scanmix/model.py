"""Voxel-majority stand-in predictor.

Fitting tallies per-class label counts inside a regular voxel grid.
Prediction returns the normalized counts of a point's voxel; points in
unseen voxels fall back to the nearest known voxel center within a search
radius, and beyond that to the global class prior. It is a geometry-aware
but deliberately simple predictor so the augmentation / TTA / evaluation
path can be exercised end to end without training a network.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .errors import DataError, DegenerateInputError, ValidationError
from .geometry import IGNORE_LABEL, PointCloud

# Quantized voxel coordinates are packed into one int64 with 21 bits per
# axis, so each axis must fall within +/- 2^20 voxels of the origin.
_PACK_BITS = 21
_PACK_OFFSET = 1 << 20


def _pack_keys(quantized: np.ndarray) -> np.ndarray:
    q = quantized + _PACK_OFFSET
    if q.size and (q.min() < 0 or q.max() >= (1 << _PACK_BITS)):
        raise DataError("coordinates too far from origin for this voxel size")
    return (q[:, 0] << (2 * _PACK_BITS)) | (q[:, 1] << _PACK_BITS) | q[:, 2]


class VoxelMajorityModel:
    """Per-point classifier backed by a voxel-grid label histogram."""

    def __init__(
        self,
        voxel_size: float,
        num_classes: int,
        keys: np.ndarray,
        counts: np.ndarray,
        prior: np.ndarray,
        search_radius: float,
    ):
        if voxel_size <= 0 or not np.isfinite(voxel_size):
            raise ValidationError("voxel_size must be finite and > 0")
        self.voxel_size = float(voxel_size)
        self.num_classes = int(num_classes)
        self.keys = keys  # (M,) packed int64, sorted
        self.counts = counts  # (M, C) int64
        self.prior = prior  # (C,) float64, normalized
        self.search_radius = float(search_radius)
        centers = self._unpack_centers(keys)
        self._tree = cKDTree(centers) if len(centers) else None

    @property
    def class_count(self) -> int:
        return self.num_classes

    def _quantize(self, coords: np.ndarray) -> np.ndarray:
        return np.floor(coords / self.voxel_size).astype(np.int64)

    def _unpack_centers(self, keys: np.ndarray) -> np.ndarray:
        mask = (1 << _PACK_BITS) - 1
        q = np.stack(
            [
                (keys >> (2 * _PACK_BITS)) & mask,
                (keys >> _PACK_BITS) & mask,
                keys & mask,
            ],
            axis=1,
        ).astype(np.float64)
        return (q - _PACK_OFFSET + 0.5) * self.voxel_size

    @classmethod
    def fit(
        cls,
        clouds: list[PointCloud],
        voxel_size: float,
        num_classes: int,
        search_radius: float | None = None,
    ) -> "VoxelMajorityModel":
        """Tally labeled points into voxels.

        Points labeled IGNORE are skipped. The search radius for unseen
        voxels defaults to twice the voxel size.

        Raises:
            DegenerateInputError: no labeled points at all.
        """
        if voxel_size <= 0 or not np.isfinite(voxel_size):
            raise ValidationError("voxel_size must be finite and > 0")
        if num_classes < 1:
            raise ValidationError("num_classes must be >= 1")
        key_parts, label_parts = [], []
        for cloud in clouds:
            if not cloud.has_labels:
                raise ValidationError("fitting requires labeled clouds")
            labels = cloud.labels
            keep = labels != IGNORE_LABEL
            if keep.any():
                labels = labels[keep].astype(np.int64)
                if labels.max() >= num_classes:
                    raise DataError("invalid label: class id outside the class range")
                quant = np.floor(cloud.coords[keep] / voxel_size).astype(np.int64)
                key_parts.append(_pack_keys(quant))
                label_parts.append(labels)
        if not key_parts or sum(k.size for k in key_parts) == 0:
            raise DegenerateInputError("cannot fit a model on zero labeled points")
        all_keys = np.concatenate(key_parts)
        all_labels = np.concatenate(label_parts)
        uniq, inverse = np.unique(all_keys, return_inverse=True)
        counts = np.zeros((uniq.size, num_classes), dtype=np.int64)
        np.add.at(counts, (inverse, all_labels), 1)
        class_totals = counts.sum(axis=0).astype(np.float64)
        prior = class_totals / class_totals.sum()
        radius = 2.0 * voxel_size if search_radius is None else float(search_radius)
        return cls(voxel_size, num_classes, uniq, counts, prior, radius)

    def predict(self, cloud: PointCloud) -> np.ndarray:
        """Return an (N, C) score map of normalized voxel label counts."""
        n = cloud.n
        scores = np.empty((n, self.num_classes), dtype=np.float64)
        if n == 0:
            return scores
        keys = _pack_keys(self._quantize(cloud.coords))
        if self.keys.size == 0:
            known = np.zeros(n, dtype=bool)
            pos_clipped = np.zeros(n, dtype=np.int64)
        else:
            pos = np.searchsorted(self.keys, keys)
            pos_clipped = np.minimum(pos, self.keys.size - 1)
            known = self.keys[pos_clipped] == keys
        row_counts = self.counts[pos_clipped[known]].astype(np.float64)
        scores[known] = row_counts / row_counts.sum(axis=1, keepdims=True)
        missing = ~known
        if missing.any():
            scores[missing] = self.prior
            if self._tree is not None and self.search_radius > 0:
                dist, idx = self._tree.query(
                    cloud.coords[missing], k=1, distance_upper_bound=self.search_radius
                )
                found = np.isfinite(dist)
                if found.any():
                    rows = self.counts[idx[found]].astype(np.float64)
                    sub = scores[missing]
                    sub[found] = rows / rows.sum(axis=1, keepdims=True)
                    scores[missing] = sub
        return scores

    def save(self, path: str | Path) -> None:
        # savez appends ".npz" to bare paths; writing to a handle keeps the
        # caller's exact file name.
        with open(path, "wb") as handle:
            np.savez(
                handle,
                voxel_size=np.float64(self.voxel_size),
                num_classes=np.int64(self.num_classes),
                keys=self.keys,
                counts=self.counts,
                prior=self.prior,
                search_radius=np.float64(self.search_radius),
            )

    @classmethod
    def load(cls, path: str | Path) -> "VoxelMajorityModel":
        with np.load(path) as data:
            return cls(
                voxel_size=float(data["voxel_size"]),
                num_classes=int(data["num_classes"]),
                keys=data["keys"].copy(),
                counts=data["counts"].copy(),
                prior=data["prior"].copy(),
                search_radius=float(data["search_radius"]),
            )
