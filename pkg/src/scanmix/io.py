"""Bit-exact file formats: scans, labels, class maps, run configs, manifests.

Scan files are little-endian streams of 4 x float32 records (x, y, z,
intensity); label files are little-endian uint32 streams with 255 as the
IGNORE sentinel. Both are explicit about byte order, so files are identical
on any host.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, FormatError, PairingError, ValidationError
from .geometry import IGNORE_LABEL, PointCloud
from .polarmix import DEFAULT_INSTANCE_CLASSES, DEFAULT_PASTE_COUNT, DEFAULT_SECTOR_WIDTH_RANGE

SCAN_DTYPE = np.dtype("<f4")
LABEL_DTYPE = np.dtype("<u4")
SCAN_RECORD_BYTES = 16
LABEL_RECORD_BYTES = 4

# The 22-class challenge taxonomy in canonical index order.
CHALLENGE_CLASS_NAMES = (
    "Car",
    "Truck",
    "Bus",
    "Other Vehicle",
    "Motorcyclist",
    "Bicyclist",
    "Pedestrian",
    "Sign",
    "Traffic Light",
    "Pole",
    "Construction Cone",
    "Bicycle",
    "Motorcycle",
    "Building",
    "Vegetation",
    "Tree Trunk",
    "Curb",
    "Road",
    "Lane Marker",
    "Other Ground",
    "Walkable",
    "Sidewalk",
)


# ---------------------------------------------------------------------------
# Scans and labels
# ---------------------------------------------------------------------------


def write_scan(cloud: PointCloud, path: str | Path) -> None:
    """Write coords + intensity as little-endian float32 records."""
    rec = np.empty((cloud.n, 4), dtype=SCAN_DTYPE)
    rec[:, :3] = cloud.coords
    rec[:, 3] = cloud.intensity
    Path(path).write_bytes(rec.tobytes())


def read_scan(path: str | Path) -> PointCloud:
    """Read a scan file into an unlabeled cloud.

    Raises:
        FormatError: the byte count is not a multiple of the record size.
        DataError: the file holds non-finite values.
    """
    raw = Path(path).read_bytes()
    if len(raw) % SCAN_RECORD_BYTES != 0:
        offset = len(raw) - (len(raw) % SCAN_RECORD_BYTES)
        raise FormatError(
            f"{path}: truncated scan, {len(raw)} bytes is not a multiple of "
            f"{SCAN_RECORD_BYTES} (trailing partial record at byte {offset})"
        )
    rec = np.frombuffer(raw, dtype=SCAN_DTYPE).reshape(-1, 4)
    if rec.size and not np.isfinite(rec).all():
        raise DataError(f"{path}: scan holds non-finite values")
    if rec.size and rec[:, 3].min() < 0:
        raise DataError(f"{path}: scan holds negative intensity values")
    return PointCloud(coords=rec[:, :3].astype(np.float64), intensity=rec[:, 3].copy())


def write_labels(labels: np.ndarray, path: str | Path) -> None:
    """Write class ids as a little-endian uint32 stream."""
    Path(path).write_bytes(np.ascontiguousarray(labels, dtype=LABEL_DTYPE).tobytes())


def read_labels(
    path: str | Path,
    expected_n: int | None = None,
    num_classes: int | None = None,
) -> np.ndarray:
    """Read a label file.

    Args:
        path: label file.
        expected_n: when given, the record count must match.
        num_classes: when given, every value must be < num_classes or the
            IGNORE sentinel.

    Raises:
        FormatError: byte count is not a multiple of the record size.
        PairingError: record count differs from ``expected_n``.
        DataError: a value is outside the class map.
    """
    raw = Path(path).read_bytes()
    if len(raw) % LABEL_RECORD_BYTES != 0:
        offset = len(raw) - (len(raw) % LABEL_RECORD_BYTES)
        raise FormatError(
            f"{path}: truncated labels, {len(raw)} bytes is not a multiple of "
            f"{LABEL_RECORD_BYTES} (trailing partial record at byte {offset})"
        )
    labels = np.frombuffer(raw, dtype=LABEL_DTYPE).astype(np.uint32)
    if expected_n is not None and labels.size != expected_n:
        raise PairingError(
            f"{path}: {labels.size} labels do not pair with {expected_n} points"
        )
    if num_classes is not None and labels.size:
        bad = (labels >= num_classes) & (labels != IGNORE_LABEL)
        if bad.any():
            raise DataError(
                f"{path}: unknown class id {int(labels[bad][0])} "
                f"(class map holds {num_classes} classes)"
            )
    return labels


def read_labeled_scan(
    scan_path: str | Path, label_path: str | Path, num_classes: int | None = None
) -> PointCloud:
    """Read a scan and its paired label file into one labeled cloud."""
    cloud = read_scan(scan_path)
    labels = read_labels(label_path, expected_n=cloud.n, num_classes=num_classes)
    return PointCloud(coords=cloud.coords, intensity=cloud.intensity, labels=labels)


def write_labeled_scan(cloud: PointCloud, scan_path: str | Path, label_path: str | Path) -> None:
    if not cloud.has_labels:
        raise ValidationError("cloud has no labels to write")
    write_scan(cloud, scan_path)
    write_labels(cloud.labels, label_path)


# ---------------------------------------------------------------------------
# Class map
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassMap:
    """Ordered class names; index order is the canonical class id order."""

    names: tuple[str, ...]

    @property
    def num_classes(self) -> int:
        return len(self.names)


def challenge_class_map() -> ClassMap:
    return ClassMap(names=CHALLENGE_CLASS_NAMES)


def write_class_map(class_map: ClassMap, path: str | Path) -> None:
    """One ``index<TAB>name`` line per class plus the IGNORE sentinel line."""
    lines = [f"{i}\t{name}" for i, name in enumerate(class_map.names)]
    lines.append(f"{IGNORE_LABEL}\tIGNORE")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_class_map(path: str | Path) -> ClassMap:
    """Parse a class-map file; ids must be dense from 0 and in order."""
    names: list[str] = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise FormatError(f"{path}:{lineno}: expected 'index<TAB>name'")
        try:
            idx = int(parts[0])
        except ValueError:
            raise FormatError(f"{path}:{lineno}: class index {parts[0]!r} is not an integer")
        if idx == IGNORE_LABEL:
            continue
        if idx != len(names):
            raise FormatError(
                f"{path}:{lineno}: class ids must be dense and ordered, got {idx}"
            )
        names.append(parts[1])
    if not names:
        raise FormatError(f"{path}: class map holds no classes")
    if len(names) > IGNORE_LABEL:
        raise FormatError(f"{path}: class map collides with the IGNORE sentinel")
    return ClassMap(names=tuple(names))


# ---------------------------------------------------------------------------
# Run configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LaserMixConfig:
    bin_choices: tuple[int, ...] = (3, 4, 5, 6)
    angle_range: tuple[float, float] | None = None


@dataclass(frozen=True)
class PolarMixConfig:
    sector_width_range: tuple[float, float] = DEFAULT_SECTOR_WIDTH_RANGE
    instance_classes: tuple[int, ...] = tuple(sorted(DEFAULT_INSTANCE_CLASSES))
    paste_count: int = DEFAULT_PASTE_COUNT


@dataclass(frozen=True)
class TTAConfig:
    views: int = 8
    seed: int = 0


@dataclass(frozen=True)
class RunConfig:
    """Pipeline hyperparameters; the defaults are the challenge settings
    (LaserMix probability 0.8, PolarMix probability 1.0, 8 TTA views)."""

    p1: float = 0.8
    p2: float = 1.0
    lasermix: LaserMixConfig = field(default_factory=LaserMixConfig)
    polarmix: PolarMixConfig = field(default_factory=PolarMixConfig)
    tta: TTAConfig = field(default_factory=TTAConfig)
    classmap: str | None = None

    def __post_init__(self) -> None:
        for name, p in (("p1", self.p1), ("p2", self.p2)):
            if not (isinstance(p, (int, float)) and 0.0 <= float(p) <= 1.0):
                raise ValidationError(f"{name} must be a probability in [0, 1], got {p!r}")
        if self.tta.views < 1:
            raise ValidationError("tta.views must be >= 1")


def _require_keys(section: dict, allowed: set[str], where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ValidationError(f"unknown config key(s) in {where}: {sorted(unknown)}")


def config_from_dict(data: dict) -> RunConfig:
    _require_keys(data, {"p1", "p2", "lasermix", "polarmix", "tta", "classmap"}, "config")
    lm = dict(data.get("lasermix", {}))
    _require_keys(lm, {"bin_choices", "angle_range"}, "lasermix")
    pm = dict(data.get("polarmix", {}))
    _require_keys(pm, {"sector_width_range", "instance_classes", "paste_count"}, "polarmix")
    tta = dict(data.get("tta", {}))
    _require_keys(tta, {"views", "seed"}, "tta")
    lm_defaults = LaserMixConfig()
    pm_defaults = PolarMixConfig()
    tta_defaults = TTAConfig()
    angle_range = lm.get("angle_range", lm_defaults.angle_range)
    return RunConfig(
        p1=float(data.get("p1", 0.8)),
        p2=float(data.get("p2", 1.0)),
        lasermix=LaserMixConfig(
            bin_choices=tuple(int(b) for b in lm.get("bin_choices", lm_defaults.bin_choices)),
            angle_range=tuple(float(v) for v in angle_range) if angle_range is not None else None,
        ),
        polarmix=PolarMixConfig(
            sector_width_range=tuple(
                float(v) for v in pm.get("sector_width_range", pm_defaults.sector_width_range)
            ),
            instance_classes=tuple(
                int(c) for c in pm.get("instance_classes", pm_defaults.instance_classes)
            ),
            paste_count=int(pm.get("paste_count", pm_defaults.paste_count)),
        ),
        tta=TTAConfig(
            views=int(tta.get("views", tta_defaults.views)),
            seed=int(tta.get("seed", tta_defaults.seed)),
        ),
        classmap=data.get("classmap", None),
    )


def config_to_dict(config: RunConfig) -> dict:
    data = dataclasses.asdict(config)
    data["lasermix"]["bin_choices"] = list(config.lasermix.bin_choices)
    if config.lasermix.angle_range is not None:
        data["lasermix"]["angle_range"] = list(config.lasermix.angle_range)
    data["polarmix"]["sector_width_range"] = list(config.polarmix.sector_width_range)
    data["polarmix"]["instance_classes"] = list(config.polarmix.instance_classes)
    return data


def load_config(path: str | Path) -> RunConfig:
    """Load a JSON run config; missing fields take the challenge defaults.

    Raises:
        ValidationError: malformed JSON (with line number) or out-of-range
            values.
    """
    text = Path(path).read_text(encoding="utf-8")
    if not text.strip():
        return RunConfig()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: parse error at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: config root must be an object")
    return config_from_dict(data)


def save_config(config: RunConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(config), indent=2) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Manifests
# ---------------------------------------------------------------------------


def load_manifest(path: str | Path) -> list[tuple[Path, Path]]:
    """Read ``scan<TAB>label`` lines and validate every pair eagerly.

    Relative entries resolve against the manifest's directory. Validation
    checks existence and, via file sizes, that the record counts pair up,
    before any scan is actually parsed.
    """
    path = Path(path)
    base = path.parent
    pairs: list[tuple[Path, Path]] = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise FormatError(f"{path}:{lineno}: expected 'scan<TAB>label'")
        scan = (base / parts[0]).resolve() if not Path(parts[0]).is_absolute() else Path(parts[0])
        label = (base / parts[1]).resolve() if not Path(parts[1]).is_absolute() else Path(parts[1])
        pairs.append((scan, label))
    for scan, label in pairs:
        if not scan.is_file():
            raise PairingError(f"{path}: missing scan file {scan}")
        if not label.is_file():
            raise PairingError(f"{path}: missing label file {label}")
        n_scan, rem_scan = divmod(scan.stat().st_size, SCAN_RECORD_BYTES)
        n_label, rem_label = divmod(label.stat().st_size, LABEL_RECORD_BYTES)
        if rem_scan or rem_label:
            raise FormatError(f"{path}: {scan if rem_scan else label} has a partial record")
        if n_scan != n_label:
            raise PairingError(
                f"{path}: {scan} holds {n_scan} points but {label} holds {n_label} labels"
            )
    return pairs


# ---------------------------------------------------------------------------
# Evaluation report
# ---------------------------------------------------------------------------


def write_report(
    per_class_iou: np.ndarray, miou: float, class_names: tuple[str, ...], path: str | Path
) -> None:
    """Emit the evaluation report with fixed keys so CI can diff it.

    Ratios are stored at full precision; absent classes are null.
    """
    payload = {
        "class_names": list(class_names),
        "per_class_iou": [None if np.isnan(v) else float(v) for v in per_class_iou],
        "miou": float(miou),
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def format_report_table(
    per_class_iou: np.ndarray, miou: float, class_names: tuple[str, ...]
) -> str:
    """Human-readable table with percentages at 2 decimals."""
    width = max(len(n) for n in class_names) if class_names else 4
    lines = [f"{'class':<{width}}  IoU(%)"]
    for name, value in zip(class_names, per_class_iou):
        cell = "  --  " if np.isnan(value) else f"{100.0 * value:6.2f}"
        lines.append(f"{name:<{width}}  {cell}")
    lines.append(f"{'mIoU':<{width}}  {100.0 * miou:6.2f}")
    return "\n".join(lines)
