"""End-to-end composition: triggered mixing with replayable plan records,
the mix benchmark, and the desk-scale ablation grid runner.

Randomness enters once per run through a seeded generator, and every draw
is resolved into a plan record (JSON-serializable dict) so a recorded run
can be replayed byte for byte without re-drawing anything.
"""

from __future__ import annotations

import dataclasses
import time
from typing import Sequence

import numpy as np

from . import lasermix, polarmix
from .errors import ValidationError
from .geometry import PointCloud, RigidAugmentation, apply_augmentation
from .io import RunConfig
from .metrics import ConfusionMatrix, iou_per_class, mean_iou
from .model import VoxelMajorityModel
from .scene import SceneSpec, generate_scene
from .tta import canonical_views, tta_predict

STRATEGIES = ("lasermix", "polarmix", "both")

PRETRANSFORM_SCALE_RANGE = (0.95, 1.05)
PRETRANSFORM_SHIFT_EXTENT = 0.2


def _draw_pretransform(rng: np.random.Generator) -> RigidAugmentation:
    return RigidAugmentation(
        yaw=float(rng.uniform(0.0, 2.0 * np.pi)),
        scale=float(rng.uniform(*PRETRANSFORM_SCALE_RANGE)),
        flip_x=bool(rng.random() < 0.5),
        flip_y=bool(rng.random() < 0.5),
        shift=tuple(
            float(v)
            for v in rng.uniform(-PRETRANSFORM_SHIFT_EXTENT, PRETRANSFORM_SHIFT_EXTENT, 3)
        ),
    )


def _aug_to_dict(aug: RigidAugmentation) -> dict:
    data = dataclasses.asdict(aug)
    data["shift"] = list(aug.shift)
    return data


def _aug_from_dict(data: dict) -> RigidAugmentation:
    return RigidAugmentation(
        yaw=data["yaw"],
        scale=data["scale"],
        flip_x=data["flip_x"],
        flip_y=data["flip_y"],
        shift=tuple(data["shift"]),
    )


def mix_pair(
    cloud_a: PointCloud,
    cloud_b: PointCloud,
    strategy: str,
    rng: np.random.Generator,
    config: RunConfig | None = None,
    pretransform: bool = False,
) -> tuple[PointCloud, PointCloud | None, dict]:
    """Run one (possibly triggered) mix of a scan pair.

    Each enabled stage fires independently: the inclination mix with
    probability ``p1``, the azimuth mix with probability ``p2``. Under
    ``both``, the inclination mix runs first and its first output feeds the
    azimuth mix as cloud A, with cloud B as the donor.

    Returns:
        (primary output, mirror output or None, plan record). The mirror
        output exists only for the pure inclination-mix strategy. The plan
        record fully resolves all randomness for replay_mix().
    """
    if strategy not in STRATEGIES:
        raise ValidationError(f"unknown strategy {strategy!r}, choose from {STRATEGIES}")
    config = config or RunConfig()
    record: dict = {"strategy": strategy}

    if pretransform:
        aug_a = _draw_pretransform(rng)
        aug_b = _draw_pretransform(rng)
        cloud_a = apply_augmentation(cloud_a, aug_a)
        cloud_b = apply_augmentation(cloud_b, aug_b)
        record["pretransform"] = {"a": _aug_to_dict(aug_a), "b": _aug_to_dict(aug_b)}
    else:
        record["pretransform"] = None

    primary = cloud_a
    mirror: PointCloud | None = None

    if strategy in ("lasermix", "both"):
        triggered = bool(rng.random() < config.p1)
        stage: dict = {"triggered": triggered, "probability": config.p1}
        if triggered:
            plan = lasermix.make_plan(
                primary,
                cloud_b,
                bin_choices=config.lasermix.bin_choices,
                rng=rng,
                angle_range=config.lasermix.angle_range,
            )
            primary, mirror = lasermix.laser_mix(primary, cloud_b, plan)
            stage["plan"] = {
                "bin_edges": [float(e) for e in plan.bin_edges],
                "parity_offset": plan.parity_offset,
            }
        else:
            mirror = cloud_b
        record["lasermix"] = stage
        if strategy == "both":
            mirror = None

    if strategy in ("polarmix", "both"):
        triggered = bool(rng.random() < config.p2)
        stage = {"triggered": triggered, "probability": config.p2}
        if triggered:
            plan = polarmix.sample_plan(
                rng,
                instance_classes=frozenset(config.polarmix.instance_classes),
                sector_width_range=config.polarmix.sector_width_range,
                paste_count=config.polarmix.paste_count,
            )
            primary = polarmix.polar_mix(primary, cloud_b, plan)
            stage["plan"] = {
                "sector_start": plan.sector_start,
                "sector_width": plan.sector_width,
                "instance_classes": sorted(plan.instance_classes),
                "paste_angles": list(plan.paste_angles),
            }
        record["polarmix"] = stage

    return primary, mirror, record


def replay_mix(
    cloud_a: PointCloud, cloud_b: PointCloud, record: dict
) -> tuple[PointCloud, PointCloud | None]:
    """Re-run a recorded mix exactly, without consuming any randomness."""
    strategy = record.get("strategy")
    if strategy not in STRATEGIES:
        raise ValidationError(f"plan record has unknown strategy {strategy!r}")
    pre = record.get("pretransform")
    if pre is not None:
        cloud_a = apply_augmentation(cloud_a, _aug_from_dict(pre["a"]))
        cloud_b = apply_augmentation(cloud_b, _aug_from_dict(pre["b"]))

    primary = cloud_a
    mirror: PointCloud | None = None

    if strategy in ("lasermix", "both"):
        stage = record["lasermix"]
        if stage["triggered"]:
            plan = lasermix.LaserMixPlan(
                bin_edges=np.asarray(stage["plan"]["bin_edges"], dtype=np.float64),
                parity_offset=int(stage["plan"]["parity_offset"]),
            )
            primary, mirror = lasermix.laser_mix(primary, cloud_b, plan)
        else:
            mirror = cloud_b
        if strategy == "both":
            mirror = None

    if strategy in ("polarmix", "both"):
        stage = record["polarmix"]
        if stage["triggered"]:
            plan = polarmix.PolarMixPlan(
                sector_start=stage["plan"]["sector_start"],
                sector_width=stage["plan"]["sector_width"],
                instance_classes=frozenset(stage["plan"]["instance_classes"]),
                paste_angles=tuple(stage["plan"]["paste_angles"]),
            )
            primary = polarmix.polar_mix(primary, cloud_b, plan)

    return primary, mirror


# ---------------------------------------------------------------------------
# Benchmark
# ---------------------------------------------------------------------------


def benchmark_mix(n_points: int, repeats: int, seed: int = 0) -> dict:
    """Time both mix operations on a synthetic pair of ``n_points`` scans.

    Each repeat draws a fresh plan and runs the full operation (plan plus
    mix), which is what one training-time augmentation call costs.

    Returns:
        {"n_points", "repeats", "ops": {name: {"median_ms", "p95_ms"}}}
    """
    if n_points <= 0:
        raise ValidationError("n_points must be > 0")
    if repeats < 1:
        raise ValidationError("repeats must be >= 1")
    cloud_a = generate_scene(SceneSpec(seed=seed, n_points=n_points))
    cloud_b = generate_scene(SceneSpec(seed=seed + 1, n_points=n_points))
    rng = np.random.default_rng(seed)
    results: dict = {"n_points": n_points, "repeats": repeats, "ops": {}}

    def timed(fn) -> dict:
        samples = []
        for _ in range(repeats):
            start = time.perf_counter()
            fn()
            samples.append((time.perf_counter() - start) * 1e3)
        return {
            "median_ms": float(np.median(samples)),
            "p95_ms": float(np.percentile(samples, 95)),
        }

    def one_laser_mix():
        plan = lasermix.make_plan(cloud_a, cloud_b, rng=rng)
        lasermix.laser_mix(cloud_a, cloud_b, plan)

    def one_polar_mix():
        plan = polarmix.sample_plan(rng)
        polarmix.polar_mix(cloud_a, cloud_b, plan)

    results["ops"]["laser_mix"] = timed(one_laser_mix)
    results["ops"]["polar_mix"] = timed(one_polar_mix)
    return results


def format_benchmark(results: dict) -> str:
    lines = [f"{'op':<12}{'n_points':>10}{'repeats':>9}{'median_ms':>11}{'p95_ms':>9}"]
    for name, stats in results["ops"].items():
        lines.append(
            f"{name:<12}{results['n_points']:>10}{results['repeats']:>9}"
            f"{stats['median_ms']:>11.2f}{stats['p95_ms']:>9.2f}"
        )
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Ablation grid
# ---------------------------------------------------------------------------


def ablation_grid(
    voxel_sizes: Sequence[float],
    strategies: Sequence[str | None],
    view_counts: Sequence[int],
    seed: int = 0,
    n_points: int = 12_000,
    num_classes: int = 22,
) -> list[dict]:
    """Desk-scale sweep over model capacity (voxel size), augmentation
    strategy, and TTA view count, mirroring the structure of a training-time
    ablation. Two synthetic scenes are mixed for fitting and a third held
    out for evaluation; each row reports the held-out mIoU.
    """
    train_a = generate_scene(SceneSpec(seed=seed, n_points=n_points))
    train_b = generate_scene(SceneSpec(seed=seed + 1, n_points=n_points))
    held_out = generate_scene(SceneSpec(seed=seed + 2, n_points=n_points))
    rows = []
    for aug in strategies:
        if aug is None:
            fit_clouds = [train_a, train_b]
        else:
            rng = np.random.default_rng(seed + 17)
            primary, mirror, _ = mix_pair(train_a, train_b, aug, rng)
            fit_clouds = [primary] + ([mirror] if mirror is not None else [train_b])
        for voxel_size in voxel_sizes:
            model = VoxelMajorityModel.fit(fit_clouds, voxel_size, num_classes)
            for views in view_counts:
                scores = tta_predict(model, held_out, canonical_views(views))
                pred = np.argmax(scores, axis=1).astype(np.uint32)
                matrix = ConfusionMatrix(num_classes).accumulate(held_out.labels, pred)
                rows.append(
                    {
                        "voxel_size": float(voxel_size),
                        "aug": aug or "none",
                        "tta_views": int(views),
                        "miou": mean_iou(iou_per_class(matrix)),
                    }
                )
    return rows


def format_ablation(rows: list[dict]) -> str:
    """Fixed-width ablation table with mIoU as a 2-decimal percentage."""
    lines = [f"{'voxel_size':>10}  {'aug':<10}{'tta_views':>9}  {'mIoU(%)':>8}"]
    for row in rows:
        lines.append(
            f"{row['voxel_size']:>10.2f}  {row['aug']:<10}{row['tta_views']:>9}"
            f"  {100.0 * row['miou']:>8.2f}"
        )
    return "\n".join(lines)
