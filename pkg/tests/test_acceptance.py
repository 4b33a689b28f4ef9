"""Acceptance gate: one test per criterion, at the stated tolerances.

Each test is independent and uses its own oracle: hand arithmetic, a
brute-force tally, an exact recomputation of the partition rule, or byte
comparison of artifacts. Numbered so `pytest -v` reads as the checklist.
"""

import heapq
import json
import time
from collections import Counter

import numpy as np

from scanmix import (
    ConfusionMatrix,
    CountingPredictor,
    IGNORE_LABEL,
    PointCloud,
    SceneSpec,
    VoxelMajorityModel,
    canonical_views,
    generate_scene,
    iou_per_class,
    laser_mix,
    make_plan,
    mean_iou,
    mix_pair,
    polar_mix,
    sample_plan,
    tta_predict,
    transform_coords,
    RigidAugmentation,
    invert_augmentation,
)
from scanmix.cli import main as cli_main
from scanmix.io import CHALLENGE_CLASS_NAMES, format_report_table
from scanmix.pipeline import ablation_grid, benchmark_mix, format_ablation
from scanmix.polarmix import scene_swap

# The published 22-class IoU vector (percent), index order matching
# CHALLENGE_CLASS_NAMES; its mean is the published leaderboard score.
PUBLISHED_CLASS_IOUS = (
    95.6, 70.7, 73.5, 29.6, 8.4, 88.5, 91.5, 73.1, 32.2, 80.2, 60.0,
    70.6, 80.3, 97.0, 86.8, 73.2, 75.1, 92.6, 48.5, 51.5, 70.6, 86.7,
)
PUBLISHED_MEAN_IOU = 69.83


def random_labeled_cloud(n, rng, extent=60.0):
    return PointCloud(
        coords=rng.uniform(-extent, extent, (n, 3)),
        intensity=rng.random(n, dtype=np.float32),
        labels=rng.integers(0, 22, n).astype(np.uint32),
    )


def packed_rows(cloud):
    """One float64 row per point: x, y, z, intensity, label (all exact)."""
    return np.concatenate(
        [cloud.coords, cloud.intensity[:, None].astype(np.float64),
         cloud.labels[:, None].astype(np.float64)],
        axis=1,
    )


def sorted_rows(cloud):
    return np.sort(packed_rows(cloud).view([("", np.float64)] * 5), axis=0)


def recomputed_inclination(coords):
    # the published formula, evaluated here rather than through the library
    return np.arctan2(coords[:, 2], np.hypot(coords[:, 0], coords[:, 1]))


def encode_confusion(vals_pct):
    """Integer confusion matrix whose per-class IoUs equal vals_pct / 100.

    Diagonal TP_c = 10 * v_c out of a 1000-count budget per class; the
    remaining 1000 - 10 * v_c error counts are placed off-diagonal, where
    each unit at (c, d) burns one unit of both c's and d's error budget
    (FN for c, FP for d). Greedy largest-two pairing realizes the budgets
    whenever the total is even and no budget exceeds the sum of the rest.
    """
    c_count = len(vals_pct)
    tp = [round(v * 10) for v in vals_pct]
    err = [1000 - t for t in tp]
    assert sum(err) % 2 == 0 and max(err) <= sum(err) - max(err)
    counts = np.zeros((c_count, c_count), dtype=np.int64)
    for c in range(c_count):
        counts[c, c] = tp[c]
    heap = [(-e, c) for c, e in enumerate(err) if e > 0]
    heapq.heapify(heap)
    while heap:
        e1, c1 = heapq.heappop(heap)
        e2, c2 = heapq.heappop(heap)
        take = max(min((-e1) - (-e2), -e2), 1)
        take = min(take, -e1, -e2)
        counts[c1, c2] += take
        if -e1 - take > 0:
            heapq.heappush(heap, (e1 + take, c1))
        if -e2 - take > 0:
            heapq.heappush(heap, (e2 + take, c2))
    return counts


def test_c01_published_class_iou_vector_mean():
    """Mean of the 22 published class IoUs equals 69.83 within 0.01, < 1 s."""
    start = time.perf_counter()
    matrix = ConfusionMatrix(22)
    matrix.counts[:] = encode_confusion(PUBLISHED_CLASS_IOUS)
    ious = iou_per_class(matrix)
    np.testing.assert_allclose(ious * 100.0, PUBLISHED_CLASS_IOUS, atol=1e-10)
    miou = mean_iou(ious)
    assert abs(miou * 100.0 - PUBLISHED_MEAN_IOU) <= 0.01
    table = format_report_table(ious, miou, CHALLENGE_CLASS_NAMES)
    assert "69.83" in table.splitlines()[-1]
    assert time.perf_counter() - start < 1.0


def test_c02_training_scale_results_substituted():
    """The published training ablation (68.02 -> 74.03 mIoU) needs full-scale
    network training and is NOT reproduced here. This suite substitutes the
    property tests in this module; what must work at desk scale is the
    ablation machinery itself: the config grid runs end to end and its
    report renders, including when fed the published endpoints as plain
    formatting fixtures."""
    rows = ablation_grid(
        voxel_sizes=[0.5, 1.0],
        strategies=[None, "lasermix", "both"],
        view_counts=[1, 8],
        seed=11,
        n_points=2_000,
    )
    assert len(rows) == 12
    assert all(0.0 <= r["miou"] <= 1.0 for r in rows)
    fixture = [
        {"voxel_size": 0.05, "aug": "none", "tta_views": 1, "miou": 0.6802},
        {"voxel_size": 0.05, "aug": "both", "tta_views": 8, "miou": 0.7403},
    ]
    rendered = format_ablation(fixture)
    assert "68.02" in rendered and "74.03" in rendered


def test_c03_lasermix_invariant_suite():
    """500 seeded pairs, 1e3-1e5 points: exact conservation, 100% bin-parity
    membership on recomputation, self-mix multiset identity. < 30 s."""
    start = time.perf_counter()
    rng = np.random.default_rng(20_240)
    for i in range(500):
        n_a = int(10 ** rng.uniform(3, 5))
        n_b = int(10 ** rng.uniform(3, 5))
        cloud_a = random_labeled_cloud(n_a, rng)
        cloud_b = random_labeled_cloud(n_b, rng)
        plan = make_plan(cloud_a, cloud_b, rng=rng)
        first, second = laser_mix(cloud_a, cloud_b, plan)

        # conservation, exact
        assert first.n + second.n == n_a + n_b

        # recompute the partition from scratch: inclination -> digitize -> parity
        inner = plan.bin_edges[1:-1]
        theta_a = recomputed_inclination(cloud_a.coords)
        idx_a = np.digitize(theta_a, inner)
        idx_b = np.digitize(recomputed_inclination(cloud_b.coords), inner)
        take_a = (idx_a % 2) == plan.parity_offset
        take_b = (idx_b % 2) != plan.parity_offset
        rows_a, rows_b = packed_rows(cloud_a), packed_rows(cloud_b)
        expected_first = np.concatenate([rows_a[take_a], rows_b[take_b]])
        expected_second = np.concatenate([rows_a[~take_a], rows_b[~take_b]])
        assert np.array_equal(packed_rows(first), expected_first)
        assert np.array_equal(packed_rows(second), expected_second)

        # bin parity recomputed on the outputs determines the source scan
        parity_first = np.digitize(recomputed_inclination(first.coords), inner) % 2
        split = int(take_a.sum())
        assert (parity_first[:split] == plan.parity_offset).all()
        assert (parity_first[split:] != plan.parity_offset).all()

        # self-mix identity: both assemblies are exact row permutations of
        # the input (complementary-mask reorderings recomputed from the plan),
        # which is multiset equality by construction
        self_plan = make_plan(cloud_a, cloud_a, rng=rng)
        self_first, self_second = laser_mix(cloud_a, cloud_a, self_plan)
        assert self_first.n == self_second.n == n_a
        keep = (np.digitize(theta_a, self_plan.bin_edges[1:-1]) % 2
                ) == self_plan.parity_offset
        assert np.array_equal(
            packed_rows(self_first),
            np.concatenate([rows_a[keep], rows_a[~keep]]),
        )
        assert np.array_equal(
            packed_rows(self_second),
            np.concatenate([rows_a[~keep], rows_a[keep]]),
        )
        if n_a <= 5_000:
            # order-free cross-check on the smaller clouds: sorted rows match
            reference = sorted_rows(cloud_a)
            assert np.array_equal(sorted_rows(self_first), reference)
            assert np.array_equal(sorted_rows(self_second), reference)
    assert time.perf_counter() - start < 30.0


def test_c04_polarmix_invariant_suite():
    """500 seeded runs: exact sector complementarity and paste-count formula;
    pasted copies preserve inclination within 1e-9 rad."""
    rng = np.random.default_rng(20_241)
    two_pi = 2.0 * np.pi
    for i in range(500):
        n_a = int(10 ** rng.uniform(3, 4.3))
        n_b = int(10 ** rng.uniform(3, 4.3))
        cloud_a = random_labeled_cloud(n_a, rng)
        cloud_b = random_labeled_cloud(n_b, rng)
        plan = sample_plan(rng)

        def inside(coords):
            alpha = np.mod(np.arctan2(coords[:, 1], coords[:, 0]), two_pi)
            return np.mod(alpha - plan.sector_start, two_pi) < plan.sector_width

        in_a, in_b = inside(cloud_a.coords), inside(cloud_b.coords)

        # complementarity: the swap is exactly A-outside followed by B-inside
        swapped = scene_swap(cloud_a, cloud_b, plan)
        expected = np.concatenate(
            [packed_rows(cloud_a)[~in_a], packed_rows(cloud_b)[in_b]]
        )
        assert np.array_equal(packed_rows(swapped), expected)

        # paste-count formula, exact
        out = polar_mix(cloud_a, cloud_b, plan)
        instance = np.isin(cloud_b.labels, sorted(plan.instance_classes))
        k = len(plan.paste_angles)
        assert out.n == n_a - in_a.sum() + in_b.sum() + k * instance.sum()

        # rotated copies keep their inclination
        theta_donor = recomputed_inclination(cloud_b.coords[instance])
        pasted = out.coords[swapped.n:]
        theta_pasted = recomputed_inclination(pasted)
        assert np.abs(theta_pasted - np.tile(theta_donor, k)).max() < 1e-9


def test_c05_transform_round_trip():
    """apply then invert: max coordinate error < 1e-6 m over 1e6 points
    and 100 random augmentations."""
    rng = np.random.default_rng(20_242)
    coords = rng.uniform(-100.0, 100.0, (1_000_000, 3))
    worst = 0.0
    for _ in range(100):
        aug = RigidAugmentation(
            yaw=float(rng.uniform(0.0, 2.0 * np.pi)),
            scale=float(rng.uniform(0.5, 2.0)),
            flip_x=bool(rng.integers(2)),
            flip_y=bool(rng.integers(2)),
            shift=tuple(rng.uniform(-10.0, 10.0, 3)),
        )
        back = transform_coords(transform_coords(coords, aug), invert_augmentation(aug))
        worst = max(worst, float(np.abs(back - coords).max()))
    assert worst < 1e-6


def test_c06_tta_contract():
    """views=1 is bit-exact plain inference; 8 identical views match 1 within
    1e-7; exactly 8 predictor calls at views=8; rows sum to 1 within 1e-5."""
    train = generate_scene(SceneSpec(seed=21, n_points=6_000))
    probe = generate_scene(SceneSpec(seed=22, n_points=3_000))
    model = VoxelMajorityModel.fit([train], voxel_size=0.5, num_classes=22)

    direct = model.predict(probe)
    single = tta_predict(model, probe, canonical_views(1))
    assert single.tobytes() == direct.tobytes()

    identity = canonical_views(1)[0]
    repeated = tta_predict(model, probe, [identity] * 8)
    assert np.abs(repeated - single).max() < 1e-7

    counter = CountingPredictor(model)
    aggregated = tta_predict(counter, probe, canonical_views(8))
    assert counter.calls == 8
    assert np.abs(aggregated.sum(axis=1) - 1.0).max() < 1e-5


def test_c07_metrics_brute_force_oracle():
    """Confusion/IoU/mIoU match an independent Counter tally over 100 random
    1e4-point label pairs: counts exact, ratios < 1e-12 relative; chunked
    accumulation in any order gives the identical matrix."""
    rng = np.random.default_rng(20_243)
    c_count = 22
    for _ in range(100):
        gt = rng.integers(0, c_count, 10_000).astype(np.uint32)
        gt[rng.random(10_000) < 0.02] = IGNORE_LABEL
        pred = rng.integers(0, c_count, 10_000).astype(np.uint32)

        matrix = ConfusionMatrix(c_count).accumulate(gt, pred)
        tally = Counter(
            (int(g), int(p)) for g, p in zip(gt, pred) if g != IGNORE_LABEL
        )
        brute = np.zeros((c_count, c_count), dtype=np.int64)
        for (g, p), n in tally.items():
            brute[g, p] = n
        assert np.array_equal(matrix.counts, brute)

        ious = iou_per_class(matrix)
        brute_ious = []
        for c in range(c_count):
            tp = int(brute[c, c])
            denom = int(brute[c, :].sum() + brute[:, c].sum() - brute[c, c])
            if denom == 0:
                assert np.isnan(ious[c])
            else:
                brute_ious.append(tp / denom)
                assert abs(ious[c] - tp / denom) <= 1e-12 * (tp / denom + 1.0)
        brute_miou = sum(brute_ious) / len(brute_ious)
        assert abs(mean_iou(ious) - brute_miou) <= 1e-12 * (brute_miou + 1.0)

        # chunk-order independence, exact
        bounds = np.sort(rng.integers(0, 10_000, 6))
        chunks = [
            (gt[lo:hi], pred[lo:hi])
            for lo, hi in zip(np.r_[0, bounds], np.r_[bounds, 10_000])
        ]
        order = rng.permutation(len(chunks))
        reordered = ConfusionMatrix(c_count)
        for j in order:
            reordered.merge(ConfusionMatrix(c_count).accumulate(*chunks[j]))
        assert np.array_equal(reordered.counts, matrix.counts)


def test_c08_end_to_end_determinism(tmp_path, capsys):
    """genscene -> mix -> fit -> tta -> eval twice with fixed seeds: every
    artifact byte-identical; evaluating the mixed scan's carried labels
    against themselves scores mIoU 100.00."""

    def run_once(root):
        root.mkdir()
        manifest = root / "train.txt"
        argv = lambda *a: [str(x) for x in a]
        assert cli_main(argv(
            "genscene", "--seed", 1, "--out-scan", root / "a.bin",
            "--out-label", root / "a.label", "--n-points", 2500,
            "--append-manifest", manifest)) == 0
        assert cli_main(argv(
            "genscene", "--seed", 2, "--out-scan", root / "b.bin",
            "--out-label", root / "b.label", "--n-points", 2500,
            "--append-manifest", manifest)) == 0
        assert cli_main(argv(
            "mix", root / "a.bin", root / "a.label", root / "b.bin",
            root / "b.label", "--seed", 3, "--strategy", "both",
            "--out", root / "m")) == 0
        with open(manifest, "a", encoding="utf-8") as fh:
            fh.write("m.bin\tm.label\n")
        assert cli_main(argv(
            "fit", "--manifest", manifest, "--voxel-size", 0.5,
            "--out", root / "model.npz")) == 0
        assert cli_main(argv(
            "tta", "--model", root / "model.npz", "--scan", root / "m.bin",
            "--views", 8, "--out", root / "t")) == 0
        gt, pred = root / "gt", root / "pred"
        gt.mkdir(), pred.mkdir()
        (gt / "m.label").write_bytes((root / "m.label").read_bytes())
        (pred / "m.label").write_bytes((root / "m.label").read_bytes())
        assert cli_main(argv(
            "eval", "--gt", gt, "--pred", pred, "--out", root / "report.json")) == 0

    run_once(tmp_path / "run1")
    capsys.readouterr()
    run_once(tmp_path / "run2")
    fidelity_stdout = capsys.readouterr().out

    artifacts = [
        "a.bin", "a.label", "b.bin", "b.label", "m.bin", "m.label",
        "m.plan.json", "model.npz", "t.label", "t.scores.npy", "report.json",
    ]
    for name in artifacts:
        first = (tmp_path / "run1" / name).read_bytes()
        second = (tmp_path / "run2" / name).read_bytes()
        assert first == second, f"{name} differs between runs"

    assert "100.00" in fidelity_stdout
    report = json.loads((tmp_path / "run1" / "report.json").read_text())
    assert report["miou"] == 1.0


def test_c09_trigger_rate():
    """Empirical LaserMix trigger rate over 10 000 seeded pairs with the
    default p1 = 0.8 lies in [0.78, 0.82]."""
    cloud_a = generate_scene(SceneSpec(seed=0, n_points=16))
    cloud_b = generate_scene(SceneSpec(seed=1, n_points=16))
    hits = 0
    for seed in range(10_000):
        record = mix_pair(cloud_a, cloud_b, "lasermix", np.random.default_rng(seed))[2]
        hits += record["lasermix"]["triggered"]
    assert 0.78 <= hits / 10_000 <= 0.82


def test_c10_mix_performance_budget():
    """A single mix of a 150k-point pair stays under 50 ms median per op."""
    results = benchmark_mix(150_000, repeats=9, seed=0)
    for op, stats in results["ops"].items():
        assert stats["median_ms"] < 50.0, f"{op}: {stats['median_ms']:.1f} ms"
