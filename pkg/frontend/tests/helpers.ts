/** Shared plumbing for the binding test suites. */

import { createHash } from "node:crypto";
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import {
  decodeLabels,
  decodeScan,
  encodeLabels,
  encodeScan,
  type ArrayView,
} from "../src/index.js";

export const FIXTURE_DIR = join(
  dirname(fileURLToPath(import.meta.url)),
  "..",
  "fixtures",
);

export function fixtureBytes(name: string): Buffer {
  return readFileSync(join(FIXTURE_DIR, name));
}

/** Loads a [scan, label] fixture pair into an ArrayView. */
export function loadView(names: readonly string[]): ArrayView {
  const scan = decodeScan(fixtureBytes(names[0]));
  const labels = decodeLabels(fixtureBytes(names[1]));
  return { coords: scan.coords, intensity: scan.intensity, labels };
}

/** SHA-256 over all three buffers of a view, for mutation checks. */
export function viewDigest(view: ArrayView): string {
  const hash = createHash("sha256");
  hash.update(Buffer.from(view.coords.buffer, view.coords.byteOffset, view.coords.byteLength));
  hash.update(Buffer.from(view.intensity.buffer, view.intensity.byteOffset, view.intensity.byteLength));
  hash.update(Buffer.from(view.labels.buffer, view.labels.byteOffset, view.labels.byteLength));
  return hash.digest("hex");
}

export function arrayDigest(arr: Uint32Array): string {
  return createHash("sha256")
    .update(Buffer.from(arr.buffer, arr.byteOffset, arr.byteLength))
    .digest("hex");
}

/** Re-encodes a view and byte-compares it against fixture files. */
export function cloudMatchesFixture(view: ArrayView, names: readonly string[]): boolean {
  const scanEqual = encodeScan(view.coords, view.intensity).equals(fixtureBytes(names[0]));
  const labelEqual = encodeLabels(view.labels).equals(fixtureBytes(names[1]));
  return scanEqual && labelEqual;
}

/** Exact multiset of point rows, keyed by the raw float bits. */
export function rowMultiset(view: ArrayView): Map<string, number> {
  const coordBits = new Uint32Array(
    view.coords.buffer, view.coords.byteOffset, view.coords.length,
  );
  const intensityBits = new Uint32Array(
    view.intensity.buffer, view.intensity.byteOffset, view.intensity.length,
  );
  const rows = new Map<string, number>();
  for (let i = 0; i < view.labels.length; i++) {
    const key =
      `${coordBits[3 * i]},${coordBits[3 * i + 1]},${coordBits[3 * i + 2]},` +
      `${intensityBits[i]},${view.labels[i]}`;
    rows.set(key, (rows.get(key) ?? 0) + 1);
  }
  return rows;
}

export function multisetsEqual(
  left: Map<string, number>,
  right: Map<string, number>,
): boolean {
  if (left.size !== right.size) return false;
  for (const [key, count] of left) {
    if (right.get(key) !== count) return false;
  }
  return true;
}
