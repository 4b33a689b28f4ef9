"""Command-line surface for reproducible runs.

Subcommands: genscene, mix, fit, predict, tta, eval, bench, replay. Every
subcommand accepts --seed/--config/--classmap/--jobs; all randomness flows
from --seed, so repeating a command reproduces its artifacts byte for byte.

Exit codes: 0 success, 2 validation error, 3 I/O or format error,
4 degenerate input.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, pipeline
from .errors import DegenerateInputError, PairingError, ScanMixError, ValidationError
from .io import (
    ClassMap,
    RunConfig,
    challenge_class_map,
    format_report_table,
    load_config,
    load_manifest,
    read_class_map,
    read_labeled_scan,
    read_labels,
    read_scan,
    write_labeled_scan,
    write_labels,
    write_report,
)
from .metrics import ConfusionMatrix, iou_per_class, mean_iou
from .model import VoxelMajorityModel
from .scene import SceneSpec, generate_scene
from .tta import (
    SUPPORTED_VIEW_COUNTS,
    CountingPredictor,
    argmax_labels,
    canonical_views,
    random_views,
    tta_predict,
)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    parser.add_argument("--config", type=Path, default=None, help="JSON run config")
    parser.add_argument("--classmap", type=Path, default=None, help="class-map file")
    parser.add_argument("--jobs", type=int, default=1, help="parallel workers (default 1)")


def _run_config(args: argparse.Namespace) -> RunConfig:
    return load_config(args.config) if args.config else RunConfig()


def _class_map(args: argparse.Namespace) -> ClassMap:
    return read_class_map(args.classmap) if args.classmap else challenge_class_map()


def _check_jobs(args: argparse.Namespace) -> int:
    if args.jobs < 1:
        raise ValidationError("--jobs must be >= 1")
    return args.jobs


def _save_scores(scores: np.ndarray, path: Path) -> None:
    np.save(path, scores.astype(np.float32))


def _map_jobs(fn, items, jobs: int) -> list:
    """Order-preserving map, threaded when jobs > 1 (numpy releases the GIL)."""
    if jobs == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_genscene(args: argparse.Namespace) -> int:
    _check_jobs(args)
    spec = SceneSpec(
        seed=args.seed,
        n_points=args.n_points,
        extent=args.extent,
        n_cars=args.cars,
        n_pedestrians=args.pedestrians,
        n_vegetation=args.vegetation,
    )
    cloud = generate_scene(spec)
    write_labeled_scan(cloud, args.out_scan, args.out_label)
    if args.append_manifest is not None:
        manifest = Path(args.append_manifest)
        base = manifest.parent.resolve()

        def entry(path: Path) -> str:
            resolved = path.resolve()
            try:
                return str(resolved.relative_to(base))
            except ValueError:
                return str(resolved)

        line = f"{entry(args.out_scan)}\t{entry(args.out_label)}\n"
        with open(manifest, "a", encoding="utf-8") as handle:
            handle.write(line)
    print(f"wrote {cloud.n} points to {args.out_scan} / {args.out_label}")
    return 0


def _write_mix_outputs(args, primary, mirror) -> None:
    prefix = str(args.out)
    write_labeled_scan(primary, f"{prefix}.bin", f"{prefix}.label")
    print(f"wrote {primary.n} points to {prefix}.bin / {prefix}.label")
    if mirror is not None:
        write_labeled_scan(mirror, f"{prefix}_alt.bin", f"{prefix}_alt.label")
        print(f"wrote {mirror.n} points to {prefix}_alt.bin / {prefix}_alt.label")


def cmd_mix(args: argparse.Namespace) -> int:
    _check_jobs(args)
    config = _run_config(args)
    num_classes = _class_map(args).num_classes
    cloud_a = read_labeled_scan(args.scan_a, args.label_a, num_classes)
    cloud_b = read_labeled_scan(args.scan_b, args.label_b, num_classes)
    rng = np.random.default_rng(args.seed)
    primary, mirror, record = pipeline.mix_pair(
        cloud_a, cloud_b, args.strategy, rng, config, pretransform=args.pretransform
    )
    record["seed"] = args.seed
    # basenames only: the record must not depend on where the run happened
    record["inputs"] = [Path(args.scan_a).name, Path(args.scan_b).name]
    plan_path = f"{args.out}.plan.json"
    Path(plan_path).write_text(json.dumps(record, indent=2) + "\n", encoding="utf-8")
    _write_mix_outputs(args, primary, mirror)
    for stage in ("lasermix", "polarmix"):
        if stage in record:
            state = "triggered" if record[stage]["triggered"] else "skipped"
            print(f"{stage}: {state} (p={record[stage]['probability']})")
    print(f"plan: {plan_path}")
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    _check_jobs(args)
    num_classes = _class_map(args).num_classes
    try:
        record = json.loads(Path(args.plan).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{args.plan}: not valid JSON ({exc.msg} at line {exc.lineno})")
    cloud_a = read_labeled_scan(args.scan_a, args.label_a, num_classes)
    cloud_b = read_labeled_scan(args.scan_b, args.label_b, num_classes)
    try:
        primary, mirror = pipeline.replay_mix(cloud_a, cloud_b, record)
    except KeyError as exc:
        raise ValidationError(f"{args.plan}: plan record is missing key {exc}")
    _write_mix_outputs(args, primary, mirror)
    return 0


def cmd_fit(args: argparse.Namespace) -> int:
    jobs = _check_jobs(args)
    num_classes = _class_map(args).num_classes
    pairs = load_manifest(args.manifest)
    if not pairs:
        raise DegenerateInputError(f"{args.manifest}: manifest lists no scans")
    clouds = _map_jobs(lambda p: read_labeled_scan(p[0], p[1], num_classes), pairs, jobs)
    model = VoxelMajorityModel.fit(
        clouds, args.voxel_size, num_classes, search_radius=args.search_radius
    )
    model.save(args.out)
    print(
        f"fitted {model.keys.size} voxels (size {model.voxel_size}) "
        f"from {len(clouds)} scans -> {args.out}"
    )
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    _check_jobs(args)
    model = VoxelMajorityModel.load(args.model)
    cloud = read_scan(args.scan)
    scores = model.predict(cloud)
    write_labels(argmax_labels(scores), f"{args.out}.label")
    _save_scores(scores, Path(f"{args.out}.scores.npy"))
    print(f"predicted {cloud.n} points -> {args.out}.label / {args.out}.scores.npy")
    return 0


def cmd_tta(args: argparse.Namespace) -> int:
    _check_jobs(args)
    config = _run_config(args)
    views_k = args.views if args.views is not None else config.tta.views
    if views_k not in SUPPORTED_VIEW_COUNTS:
        raise ValidationError(
            f"--views must be one of {SUPPORTED_VIEW_COUNTS}, got {views_k}"
        )
    model = CountingPredictor(VoxelMajorityModel.load(args.model))
    cloud = read_scan(args.scan)
    if args.random_views:
        views = random_views(views_k, np.random.default_rng(args.seed))
    else:
        views = canonical_views(views_k)
    scores = tta_predict(model, cloud, views)
    write_labels(argmax_labels(scores), f"{args.out}.label")
    _save_scores(scores, Path(f"{args.out}.scores.npy"))
    print(f"aggregated {views_k} views -> {args.out}.label / {args.out}.scores.npy")
    print(f"inference_calls: {model.calls}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    jobs = _check_jobs(args)
    class_map = _class_map(args)
    gt_dir, pred_dir = Path(args.gt), Path(args.pred)
    gt_files = sorted(gt_dir.glob("*.label"))
    pred_names = {p.name for p in pred_dir.glob("*.label")}
    missing = [f.name for f in gt_files if f.name not in pred_names]
    extra = sorted(pred_names - {f.name for f in gt_files})
    if missing or extra:
        raise PairingError(
            "gt/pred directories do not pair up"
            + (f"; missing predictions: {', '.join(missing)}" if missing else "")
            + (f"; predictions without ground truth: {', '.join(extra)}" if extra else "")
        )
    if not gt_files:
        raise DegenerateInputError(f"{gt_dir}: no .label files to evaluate")

    def pair_matrix(gt_path: Path) -> ConfusionMatrix:
        gt = read_labels(gt_path, num_classes=class_map.num_classes)
        pred = read_labels(
            pred_dir / gt_path.name, expected_n=gt.size, num_classes=class_map.num_classes
        )
        return ConfusionMatrix(class_map.num_classes).accumulate(gt, pred)

    matrix = ConfusionMatrix(class_map.num_classes)
    for part in _map_jobs(pair_matrix, gt_files, jobs):
        matrix.merge(part)
    ious = iou_per_class(matrix)
    miou = mean_iou(ious)
    print(format_report_table(ious, miou, class_map.names))
    if args.out is not None:
        write_report(ious, miou, class_map.names, args.out)
        print(f"report: {args.out}")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    _check_jobs(args)
    results = pipeline.benchmark_mix(args.n_points, args.repeats, seed=args.seed)
    print(pipeline.format_benchmark(results))
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scanmix",
        description="Scan mixing, test-time aggregation, and IoU evaluation "
        "for LiDAR segmentation experiments.",
    )
    parser.add_argument("--version", action="version", version=f"scanmix {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("genscene", help="generate a labeled synthetic street scene")
    _add_common(p)
    p.add_argument("--out-scan", type=Path, required=True)
    p.add_argument("--out-label", type=Path, required=True)
    p.add_argument("--n-points", type=int, default=20_000)
    p.add_argument("--extent", type=float, default=40.0)
    p.add_argument("--cars", type=int, default=6)
    p.add_argument("--pedestrians", type=int, default=8)
    p.add_argument("--vegetation", type=int, default=10)
    p.add_argument(
        "--append-manifest",
        type=Path,
        default=None,
        help="append a scan<TAB>label line to this manifest",
    )
    p.set_defaults(func=cmd_genscene)

    p = sub.add_parser("mix", help="mix a pair of labeled scans")
    _add_common(p)
    p.add_argument("scan_a", type=Path)
    p.add_argument("label_a", type=Path)
    p.add_argument("scan_b", type=Path)
    p.add_argument("label_b", type=Path)
    p.add_argument("--strategy", choices=pipeline.STRATEGIES, default="both")
    p.add_argument("--out", type=Path, required=True, help="output prefix")
    p.add_argument(
        "--pretransform",
        action="store_true",
        help="apply a random per-scan rigid transform before mixing",
    )
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("replay", help="re-run a recorded mix plan exactly")
    _add_common(p)
    p.add_argument("scan_a", type=Path)
    p.add_argument("label_a", type=Path)
    p.add_argument("scan_b", type=Path)
    p.add_argument("label_b", type=Path)
    p.add_argument("--plan", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="output prefix")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("fit", help="fit the voxel-majority predictor")
    _add_common(p)
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--voxel-size", type=float, required=True)
    p.add_argument("--search-radius", type=float, default=None)
    p.add_argument("--out", type=Path, required=True, help="model file")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="plain single-view inference")
    _add_common(p)
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--scan", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="output prefix")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("tta", help="test-time-augmented inference")
    _add_common(p)
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--scan", type=Path, required=True)
    p.add_argument("--views", type=int, default=None, help="view count (default from config)")
    p.add_argument(
        "--random-views",
        action="store_true",
        help="draw randomized views from --seed instead of the canonical grid",
    )
    p.add_argument("--out", type=Path, required=True, help="output prefix")
    p.set_defaults(func=cmd_tta)

    p = sub.add_parser("eval", help="class-wise IoU / mIoU of predictions")
    _add_common(p)
    p.add_argument("--gt", type=Path, required=True, help="ground-truth label directory")
    p.add_argument("--pred", type=Path, required=True, help="prediction label directory")
    p.add_argument("--out", type=Path, default=None, help="JSON report path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="time the mix operations")
    _add_common(p)
    p.add_argument("--n-points", type=int, default=150_000)
    p.add_argument("--repeats", type=int, default=20)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScanMixError as exc:
        print(f"scanmix: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"scanmix: error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
