/**
 * Node bindings for the scanmix point-cloud toolkit.
 *
 * The core library lives in another runtime, so these bindings drive it
 * strictly through its public surface: the `scanmix` command-line tool
 * and its binary scan/label and JSON plan/report formats. Inputs are
 * plain contiguous typed arrays, never mutated; every result is a newly
 * allocated buffer decoded from the tool's output. All randomness is
 * either a seed forwarded to the core or an explicit plan record, so
 * results are reproducible bit for bit.
 */

import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import {
  classMapText,
  decodeLabels,
  decodeScan,
  encodeLabels,
  encodeScan,
  IGNORE_LABEL,
} from "./format.js";
import { CoreError, runCore, withScratchDir } from "./runner.js";

export {
  classMapText,
  decodeLabels,
  decodeScan,
  encodeLabels,
  encodeScan,
  IGNORE_LABEL,
  SCAN_RECORD_BYTES,
} from "./format.js";
export { CoreError, runCore } from "./runner.js";

/** Keep in sync with package.json and the core library. */
export const PACKAGE_VERSION = "0.1.0";

/**
 * One labeled point cloud as three parallel contiguous buffers.
 * Lengths must agree: coords holds N xyz triplets, intensity and labels
 * hold N entries. The bindings treat all three as read-only.
 */
export interface ArrayView {
  coords: Float32Array;
  intensity: Float32Array;
  labels: Uint32Array;
}

/**
 * A fully resolved azimuth-mix plan: the sector to swap (half-open,
 * radians, wrapping at 2π) and the yaw angles at which copies of the
 * donor's instance-class points are pasted.
 */
export interface PolarPlanParams {
  sectorStart: number;
  sectorWidth: number;
  instanceClasses: readonly number[];
  pasteAngles: readonly number[];
}

/** Per-class scoring result; null marks classes absent from gt and pred. */
export interface MiouReport {
  classNames: string[];
  perClassIou: (number | null)[];
  /** Mean IoU over present classes, in [0, 1]. */
  miou: number;
  /** The exact report document the core tool produced. */
  raw: string;
}

function pointCount(view: ArrayView, name: string): number {
  if (view.coords.length % 3 !== 0) {
    throw new RangeError(
      `${name}: coords length ${view.coords.length} is not a multiple of 3`,
    );
  }
  const n = view.coords.length / 3;
  if (view.intensity.length !== n) {
    throw new RangeError(
      `${name}: intensity length ${view.intensity.length} does not match point count ${n}`,
    );
  }
  // a label-count mismatch is left to the core, whose pairing error
  // message the thrown CoreError carries verbatim
  return n;
}

function writeView(dir: string, stem: string, view: ArrayView): void {
  writeFileSync(join(dir, `${stem}.bin`), encodeScan(view.coords, view.intensity));
  writeFileSync(join(dir, `${stem}.label`), encodeLabels(view.labels));
}

function readView(dir: string, stem: string): ArrayView {
  const scan = decodeScan(readFileSync(join(dir, `${stem}.bin`)));
  const labels = decodeLabels(readFileSync(join(dir, `${stem}.label`)));
  return { coords: scan.coords, intensity: scan.intensity, labels };
}

function requireInteger(value: number, name: string): void {
  if (!Number.isInteger(value)) {
    throw new TypeError(`${name} must be an integer, got ${value}`);
  }
}

/**
 * Mixes two scans along the inclination axis: the joint vertical-angle
 * range is split into uniform bins and the two assemblies take
 * alternating bins from each scan, conserving every point.
 *
 * The bin count is drawn from `binChoices` by the seeded generator, so
 * a (binChoices, seed) pair pins the result exactly.
 *
 * @param a First scan; leads the first assembly.
 * @param b Second scan.
 * @param binChoices Candidate bin counts (positive integers).
 * @param seed Seed for the core's generator.
 * @returns Both assemblies, newly allocated.
 */
export function bindLaserMix(
  a: ArrayView,
  b: ArrayView,
  binChoices: readonly number[],
  seed: number,
): [ArrayView, ArrayView] {
  pointCount(a, "arrays_a");
  pointCount(b, "arrays_b");
  requireInteger(seed, "seed");
  if (binChoices.length === 0) {
    throw new RangeError("binChoices must not be empty");
  }
  binChoices.forEach((c, i) => requireInteger(c, `binChoices[${i}]`));

  return withScratchDir((dir) => {
    writeView(dir, "a", a);
    writeView(dir, "b", b);
    // pin the mix probability to 1 so the seed fully determines the plan
    writeFileSync(
      join(dir, "config.json"),
      JSON.stringify({ p1: 1.0, p2: 1.0, lasermix: { bin_choices: binChoices } }),
    );
    runCore(
      ["mix", "a.bin", "a.label", "b.bin", "b.label", "--strategy", "lasermix",
       "--seed", String(seed), "--config", "config.json", "--out", "out"],
      dir,
    );
    return [readView(dir, "out"), readView(dir, "out_alt")];
  });
}

/**
 * Mixes two scans along the azimuth axis: a sector of `a` is replaced by
 * the same sector of `b`, then yaw-rotated copies of `b`'s
 * instance-class points are pasted on top.
 *
 * With `plan` given, the exact plan is replayed (no randomness at all);
 * with `plan` null, the core draws one from `seed`.
 *
 * @param a Receiving scan.
 * @param b Donor scan.
 * @param plan Explicit plan parameters, or null to sample from the seed.
 * @param seed Seed for the core's generator (ignored when plan is given).
 * @returns The mixed scan, newly allocated.
 */
export function bindPolarMix(
  a: ArrayView,
  b: ArrayView,
  plan: PolarPlanParams | null,
  seed: number,
): ArrayView {
  pointCount(a, "arrays_a");
  pointCount(b, "arrays_b");
  requireInteger(seed, "seed");

  return withScratchDir((dir) => {
    writeView(dir, "a", a);
    writeView(dir, "b", b);
    if (plan === null) {
      runCore(
        ["mix", "a.bin", "a.label", "b.bin", "b.label", "--strategy", "polarmix",
         "--seed", String(seed), "--out", "out"],
        dir,
      );
    } else {
      const record = {
        strategy: "polarmix",
        pretransform: null,
        polarmix: {
          triggered: true,
          probability: 1.0,
          plan: {
            sector_start: plan.sectorStart,
            sector_width: plan.sectorWidth,
            instance_classes: [...plan.instanceClasses],
            paste_angles: [...plan.pasteAngles],
          },
        },
      };
      writeFileSync(join(dir, "plan.json"), JSON.stringify(record));
      runCore(
        ["replay", "a.bin", "a.label", "b.bin", "b.label",
         "--plan", "plan.json", "--out", "out"],
        dir,
      );
    }
    return readView(dir, "out");
  });
}

/**
 * Scores predicted labels against ground truth: per-class IoU
 * (TP / (TP + FP + FN)) plus the mean over classes present.
 *
 * @param gt Ground-truth labels; entries equal to `ignore` are skipped.
 * @param pred Predicted labels, all in [0, numClasses).
 * @param numClasses Size of the dense class taxonomy (1–254).
 * @param ignore Ground-truth sentinel; if not 255 it must lie outside
 *   the class range and is remapped before scoring.
 */
export function bindMiou(
  gt: Uint32Array,
  pred: Uint32Array,
  numClasses: number,
  ignore: number = IGNORE_LABEL,
): MiouReport {
  requireInteger(numClasses, "numClasses");
  requireInteger(ignore, "ignore");
  if (numClasses < 1 || numClasses > 254) {
    throw new RangeError(`numClasses must be in [1, 254], got ${numClasses}`);
  }
  if (ignore !== IGNORE_LABEL && ignore < numClasses) {
    throw new RangeError(
      `ignore sentinel ${ignore} must lie outside the class range [0, ${numClasses})`,
    );
  }
  let gtOut = gt;
  if (ignore !== IGNORE_LABEL) {
    gtOut = gt.slice();
    for (let i = 0; i < gtOut.length; i++) {
      if (gtOut[i] === ignore) gtOut[i] = IGNORE_LABEL;
    }
  }

  return withScratchDir((dir) => {
    mkdirSync(join(dir, "gt"));
    mkdirSync(join(dir, "pred"));
    writeFileSync(join(dir, "gt", "scores.label"), encodeLabels(gtOut));
    writeFileSync(join(dir, "pred", "scores.label"), encodeLabels(pred));
    const args = ["eval", "--gt", "gt", "--pred", "pred", "--out", "report.json"];
    if (numClasses !== 22) {
      writeFileSync(join(dir, "classes.txt"), classMapText(numClasses));
      args.push("--classmap", "classes.txt");
    }
    runCore(args, dir);
    const raw = readFileSync(join(dir, "report.json"), "utf-8");
    const report = JSON.parse(raw) as {
      class_names: string[];
      per_class_iou: (number | null)[];
      miou: number;
    };
    return {
      classNames: report.class_names,
      perClassIou: report.per_class_iou,
      miou: report.miou,
      raw,
    };
  });
}

/** Version of this binding package. */
export function version(): string {
  return PACKAGE_VERSION;
}

/** Version reported by the core tool (must match {@link version}). */
export function coreVersion(): string {
  const banner = runCore(["--version"]).trim();
  const parts = banner.split(/\s+/);
  const reported = parts[parts.length - 1];
  if (!/^\d+\.\d+\.\d+$/.test(reported)) {
    throw new CoreError(`unexpected version banner: ${banner}`, -1);
  }
  return reported;
}
