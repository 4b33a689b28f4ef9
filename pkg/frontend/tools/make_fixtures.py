"""Regenerates the binding parity fixtures in frontend/fixtures/.

Every case pins a seed (or an explicit plan) and stores both the binary
inputs and the expected outputs computed through the core library API.
The vitest suite replays each case through the bindings — which go over
the command-line/file-format boundary — and byte-compares the results,
so the fixtures are the library-side half of a cross-interface check.

Inputs are round-tripped through the scan file format before the
expected outputs are computed: the bindings hand the core float32 data,
so the oracle must mix exactly those values, not the float64 originals.

Run from the repository root:
    python3 frontend/tools/make_fixtures.py
"""

import heapq
import json
from pathlib import Path

import numpy as np

from scanmix import ConfusionMatrix, PointCloud, iou_per_class, mean_iou, mix_pair
from scanmix.io import (
    CHALLENGE_CLASS_NAMES,
    config_from_dict,
    read_labeled_scan,
    write_labeled_scan,
    write_labels,
    write_report,
)
from scanmix.polarmix import PolarMixPlan, polar_mix

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures"
NUM_CLASSES = 22
IGNORE = 255

# the published 22-class IoU vector whose mean is the leaderboard score
PUBLISHED_CLASS_IOUS = (
    95.6, 70.7, 73.5, 29.6, 8.4, 88.5, 91.5, 73.1, 32.2, 80.2, 60.0,
    70.6, 80.3, 97.0, 86.8, 73.2, 75.1, 92.6, 48.5, 51.5, 70.6, 86.7,
)


def random_cloud(n, rng, num_classes=NUM_CLASSES):
    return PointCloud(
        coords=rng.uniform(-50.0, 50.0, (n, 3)),
        intensity=rng.random(n, dtype=np.float32),
        labels=rng.integers(0, num_classes, n).astype(np.uint32),
    )


def store_pair(case_id, cloud_a, cloud_b):
    """Writes the input pair and reloads it so the oracle sees exactly the
    float32 values the bindings will feed the CLI."""
    names = {}
    reloaded = []
    for tag, cloud in (("a", cloud_a), ("b", cloud_b)):
        scan = f"{case_id}.{tag}.bin"
        label = f"{case_id}.{tag}.label"
        write_labeled_scan(cloud, FIXTURE_DIR / scan, FIXTURE_DIR / label)
        names[tag] = [scan, label]
        reloaded.append(
            read_labeled_scan(FIXTURE_DIR / scan, FIXTURE_DIR / label, NUM_CLASSES)
        )
    return names, reloaded[0], reloaded[1]


def store_cloud(case_id, tag, cloud):
    scan = f"{case_id}.{tag}.bin"
    label = f"{case_id}.{tag}.label"
    write_labeled_scan(cloud, FIXTURE_DIR / scan, FIXTURE_DIR / label)
    return [scan, label]


def encode_confusion(vals_pct):
    """Integer confusion counts whose per-class IoUs equal vals_pct / 100
    (TP = 10*v per class; error budgets paired greedily off-diagonal)."""
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


def labels_from_confusion(counts, rng):
    """Expands confusion counts into shuffled gt/pred label arrays."""
    gt, pred = [], []
    for g in range(counts.shape[0]):
        for p in range(counts.shape[1]):
            gt.extend([g] * counts[g, p])
            pred.extend([p] * counts[g, p])
    order = rng.permutation(len(gt))
    return (
        np.asarray(gt, dtype=np.uint32)[order],
        np.asarray(pred, dtype=np.uint32)[order],
    )


def lasermix_cases():
    cases = []
    choice_sets = [[3, 4, 5, 6], [2], [4], [3, 8], [5, 6], [2, 3, 4],
                   [6], [4, 5], [3], [2, 8]]
    for i in range(20):
        case_id = f"lm{i:02d}"
        seed = 1000 + i
        data_rng = np.random.default_rng(9000 + i)
        cloud_a = random_cloud(int(data_rng.integers(600, 1800)), data_rng)
        cloud_b = random_cloud(int(data_rng.integers(600, 1800)), data_rng)
        files, cloud_a, cloud_b = store_pair(case_id, cloud_a, cloud_b)
        bin_choices = choice_sets[i % len(choice_sets)]
        config = config_from_dict(
            {"p1": 1.0, "p2": 1.0, "lasermix": {"bin_choices": bin_choices}}
        )
        first, second, _ = mix_pair(
            cloud_a, cloud_b, "lasermix", np.random.default_rng(seed), config
        )
        cases.append({
            "id": case_id, "kind": "lasermix", "seed": seed,
            "binChoices": bin_choices, "a": files["a"], "b": files["b"],
            "expectFirst": store_cloud(case_id, "first", first),
            "expectSecond": store_cloud(case_id, "second", second),
        })
    return cases


def polarmix_seed_cases():
    cases = []
    for i in range(10):
        case_id = f"pm{i:02d}"
        seed = 2000 + i
        data_rng = np.random.default_rng(9100 + i)
        cloud_a = random_cloud(int(data_rng.integers(600, 1800)), data_rng)
        cloud_b = random_cloud(int(data_rng.integers(600, 1800)), data_rng)
        files, cloud_a, cloud_b = store_pair(case_id, cloud_a, cloud_b)
        primary, _, _ = mix_pair(
            cloud_a, cloud_b, "polarmix", np.random.default_rng(seed)
        )
        cases.append({
            "id": case_id, "kind": "polarmix-seed", "seed": seed,
            "a": files["a"], "b": files["b"],
            "expect": store_cloud(case_id, "out", primary),
        })
    return cases


def polarmix_plan_cases():
    cases = []
    plan_rng = np.random.default_rng(424242)
    instance_sets = [[0], [0, 6], [0, 1, 2, 6], [10, 11, 12], [0, 6, 10]]
    for i in range(10):
        case_id = f"pm{10 + i:02d}"
        data_rng = np.random.default_rng(9200 + i)
        cloud_a = random_cloud(int(data_rng.integers(600, 1800)), data_rng)
        cloud_b = random_cloud(int(data_rng.integers(600, 1800)), data_rng)
        files, cloud_a, cloud_b = store_pair(case_id, cloud_a, cloud_b)
        params = {
            "sectorStart": float(plan_rng.uniform(0.0, 2.0 * np.pi)),
            "sectorWidth": float(plan_rng.uniform(0.5, np.pi)),
            "instanceClasses": instance_sets[i % len(instance_sets)],
            "pasteAngles": [float(a) for a in
                            plan_rng.uniform(0.0, 2.0 * np.pi, i % 3)],
        }
        plan = PolarMixPlan(
            sector_start=params["sectorStart"],
            sector_width=params["sectorWidth"],
            instance_classes=frozenset(params["instanceClasses"]),
            paste_angles=tuple(params["pasteAngles"]),
        )
        out = polar_mix(cloud_a, cloud_b, plan)
        cases.append({
            "id": case_id, "kind": "polarmix-plan", "plan": params,
            "a": files["a"], "b": files["b"],
            "expect": store_cloud(case_id, "out", out),
        })
    return cases


def miou_cases():
    cases = []
    specs = [
        # (numClasses, ignore sentinel as the caller sees it)
        (22, 255), (22, 255), (22, 255), (22, 255),
        (9, 255), (9, 255), (9, 100), (5, 255), (13, 255),
    ]
    for i, (num_classes, ignore) in enumerate(specs):
        case_id = f"mi{i:02d}"
        rng = np.random.default_rng(9300 + i)
        n = int(rng.integers(4_000, 9_000))
        gt = rng.integers(0, num_classes, n).astype(np.uint32)
        pred = gt.copy()
        wrong = rng.random(n) < 0.25
        pred[wrong] = rng.integers(0, num_classes, int(wrong.sum())).astype(np.uint32)
        gt[rng.random(n) < 0.03] = ignore
        cases.append(_store_miou(case_id, gt, pred, num_classes, ignore))

    # the leaderboard-score fixture: a synthetic confusion outcome whose
    # 22 class IoUs are the published values, mean 69.83
    counts = encode_confusion(PUBLISHED_CLASS_IOUS)
    gt, pred = labels_from_confusion(counts, np.random.default_rng(777))
    case = _store_miou("mi09", gt, pred, 22, 255)
    case["expectMiouPct"] = 69.83
    cases.append(case)
    return cases


def _store_miou(case_id, gt, pred, num_classes, ignore):
    gt_name, pred_name = f"{case_id}.gt.label", f"{case_id}.pred.label"
    write_labels(gt, FIXTURE_DIR / gt_name)
    write_labels(pred, FIXTURE_DIR / pred_name)
    # the core only knows 255; a custom sentinel is remapped by the binding
    gt_core = gt.copy()
    gt_core[gt == ignore] = IGNORE
    matrix = ConfusionMatrix(num_classes).accumulate(gt_core, pred)
    ious = iou_per_class(matrix)
    if num_classes == len(CHALLENGE_CLASS_NAMES):
        names = list(CHALLENGE_CLASS_NAMES)
    else:
        names = [f"class_{c:02d}" for c in range(num_classes)]
    report_name = f"{case_id}.report.json"
    write_report(ious, mean_iou(ious), names, FIXTURE_DIR / report_name)
    return {
        "id": case_id, "kind": "miou", "numClasses": num_classes,
        "ignore": ignore, "gt": gt_name, "pred": pred_name,
        "expectReport": report_name,
    }


def main():
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    for stale in FIXTURE_DIR.iterdir():
        stale.unlink()
    cases = (lasermix_cases() + polarmix_seed_cases()
             + polarmix_plan_cases() + miou_cases())
    manifest = {"coreVersion": "0.1.0", "cases": cases}
    (FIXTURE_DIR / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    total_bytes = sum(p.stat().st_size for p in FIXTURE_DIR.iterdir())
    print(f"{len(cases)} cases, {total_bytes / 1e6:.1f} MB in {FIXTURE_DIR}")


if __name__ == "__main__":
    main()
