"""Inclination-partition mixing of two scans.

The joint inclination range of both scans is divided into B uniform bins;
one output takes scan A's points from the even-parity bins and scan B's
points from the odd-parity bins, the other output takes the complement.
Both assemblies are returned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, PlanMismatchError, ValidationError
from .geometry import PointCloud, inclination

# Bins are half-open [lo, hi); the top edge is nudged up by this amount so
# the maximum-inclination point still falls inside the last bin.
EDGE_EPSILON = 1e-9

DEFAULT_BIN_CHOICES = (3, 4, 5, 6)


@dataclass(frozen=True)
class LaserMixPlan:
    """Resolved randomness of one mix: bin edges plus which scan feeds the
    even-indexed bins. Immutable, so a plan can be logged and replayed."""

    bin_edges: np.ndarray
    parity_offset: int

    def __post_init__(self) -> None:
        edges = np.asarray(self.bin_edges, dtype=np.float64)
        if edges.ndim != 1 or edges.size < 2:
            raise ValidationError("bin_edges must hold at least 2 values")
        if not np.isfinite(edges).all():
            raise ValidationError("bin_edges must be finite")
        if not (np.diff(edges) > 0).all():
            raise ValidationError("bin_edges must be strictly increasing")
        if self.parity_offset not in (0, 1):
            raise ValidationError("parity_offset must be 0 or 1")
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "parity_offset", int(self.parity_offset))

    @property
    def num_bins(self) -> int:
        return self.bin_edges.size - 1


def make_plan(
    cloud_a: PointCloud,
    cloud_b: PointCloud,
    bin_choices: tuple[int, ...] = DEFAULT_BIN_CHOICES,
    rng: np.random.Generator | None = None,
    angle_range: tuple[float, float] | None = None,
) -> LaserMixPlan:
    """Draw a mix plan for a pair of scans.

    The bin count is drawn uniformly from ``bin_choices`` and the parity
    offset uniformly from {0, 1}. Edges are uniformly spaced over the joint
    inclination range of both clouds (or over ``angle_range`` when given,
    e.g. a sensor's fixed vertical field of view).

    Args:
        cloud_a: first scan.
        cloud_b: second scan.
        bin_choices: candidate bin counts, all >= 1.
        rng: seeded random source; a fresh default generator when omitted.
        angle_range: optional (lo, hi) radians overriding the data range.

    Raises:
        DegenerateInputError: both clouds are empty and no range is given.
    """
    choices = sorted(set(int(b) for b in bin_choices))
    if not choices or choices[0] < 1:
        raise ValidationError("bin_choices must be a non-empty set of positive ints")
    if rng is None:
        rng = np.random.default_rng()

    if angle_range is not None:
        lo, hi = float(angle_range[0]), float(angle_range[1])
        if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
            raise ValidationError("angle_range must be finite with hi > lo")
    else:
        thetas = [inclination(c.coords) for c in (cloud_a, cloud_b) if c.n > 0]
        if not thetas:
            raise DegenerateInputError("cannot derive a mix range from two empty clouds")
        joint = np.concatenate(thetas)
        lo, hi = float(joint.min()), float(joint.max())

    num_bins = int(rng.choice(choices))
    parity_offset = int(rng.integers(0, 2))
    edges = np.linspace(lo, hi + EDGE_EPSILON, num_bins + 1)
    return LaserMixPlan(bin_edges=edges, parity_offset=parity_offset)


def _bin_indices(cloud: PointCloud, plan: LaserMixPlan, name: str) -> np.ndarray:
    theta = inclination(cloud.coords)
    idx = np.searchsorted(plan.bin_edges, theta, side="right") - 1
    bad = (idx < 0) | (idx >= plan.num_bins)
    if bad.any():
        worst = theta[bad][0]
        raise PlanMismatchError(
            f"plan [{plan.bin_edges[0]:.6f}, {plan.bin_edges[-1]:.6f}) does not cover "
            f"cloud {name}: inclination {worst:.6f} rad outside range"
        )
    return idx


def laser_mix(
    cloud_a: PointCloud, cloud_b: PointCloud, plan: LaserMixPlan
) -> tuple[PointCloud, PointCloud]:
    """Assemble two mixed scans from alternating inclination bins.

    The first output holds A's points from bins whose index parity equals
    ``plan.parity_offset`` plus B's points from the complementary bins; the
    second output is the mirror assembly. Within each output the relative
    order of points from one source is preserved, labels and intensities
    travel with their points, and every input point appears in exactly one
    output.

    Raises:
        PlanMismatchError: some point's inclination falls outside the plan.
        ValidationError: one cloud is labeled and the other is not.
    """
    if cloud_a.has_labels != cloud_b.has_labels:
        raise ValidationError("cannot mix a labeled cloud with an unlabeled one")
    idx_a = _bin_indices(cloud_a, plan, "A")
    idx_b = _bin_indices(cloud_b, plan, "B")
    take_a = (idx_a % 2) == plan.parity_offset
    take_b = (idx_b % 2) != plan.parity_offset
    first = PointCloud.concat([cloud_a.select(take_a), cloud_b.select(take_b)])
    second = PointCloud.concat([cloud_a.select(~take_a), cloud_b.select(~take_b)])
    return first, second
