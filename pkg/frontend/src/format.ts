/**
 * Binary codecs for the core toolkit's on-disk formats.
 *
 * Scan files are little-endian float32 records of x, y, z, intensity;
 * label files are little-endian uint32, one per point, with 255 as the
 * IGNORE sentinel. Both codecs are bit-lossless round trips, which is
 * what lets the parity suite compare results at the byte level.
 */

/** Bytes per point record in a scan file (4 × float32). */
export const SCAN_RECORD_BYTES = 16;

/** Ground-truth sentinel excluded from metric accumulation. */
export const IGNORE_LABEL = 255;

export interface DecodedScan {
  /** Flat xyz triplets, length 3N. */
  coords: Float32Array;
  /** Per-point intensity, length N. */
  intensity: Float32Array;
}

/** Serializes coordinates and intensities into scan-file bytes. */
export function encodeScan(coords: Float32Array, intensity: Float32Array): Buffer {
  if (coords.length % 3 !== 0) {
    throw new RangeError(`coords length ${coords.length} is not a multiple of 3`);
  }
  const n = coords.length / 3;
  if (intensity.length !== n) {
    throw new RangeError(
      `intensity length ${intensity.length} does not match point count ${n}`,
    );
  }
  const out = Buffer.alloc(n * SCAN_RECORD_BYTES);
  const view = new DataView(out.buffer, out.byteOffset, out.byteLength);
  for (let i = 0; i < n; i++) {
    view.setFloat32(i * 16, coords[3 * i], true);
    view.setFloat32(i * 16 + 4, coords[3 * i + 1], true);
    view.setFloat32(i * 16 + 8, coords[3 * i + 2], true);
    view.setFloat32(i * 16 + 12, intensity[i], true);
  }
  return out;
}

/** Parses scan-file bytes back into coordinate and intensity arrays. */
export function decodeScan(data: Buffer): DecodedScan {
  if (data.length % SCAN_RECORD_BYTES !== 0) {
    throw new RangeError(
      `scan data of ${data.length} bytes is not a whole number of records`,
    );
  }
  const n = data.length / SCAN_RECORD_BYTES;
  const coords = new Float32Array(3 * n);
  const intensity = new Float32Array(n);
  const view = new DataView(data.buffer, data.byteOffset, data.byteLength);
  for (let i = 0; i < n; i++) {
    coords[3 * i] = view.getFloat32(i * 16, true);
    coords[3 * i + 1] = view.getFloat32(i * 16 + 4, true);
    coords[3 * i + 2] = view.getFloat32(i * 16 + 8, true);
    intensity[i] = view.getFloat32(i * 16 + 12, true);
  }
  return { coords, intensity };
}

/** Serializes per-point labels into label-file bytes. */
export function encodeLabels(labels: Uint32Array): Buffer {
  const out = Buffer.alloc(labels.length * 4);
  const view = new DataView(out.buffer, out.byteOffset, out.byteLength);
  for (let i = 0; i < labels.length; i++) {
    view.setUint32(i * 4, labels[i], true);
  }
  return out;
}

/** Parses label-file bytes back into a label array. */
export function decodeLabels(data: Buffer): Uint32Array {
  if (data.length % 4 !== 0) {
    throw new RangeError(
      `label data of ${data.length} bytes is not a whole number of uint32s`,
    );
  }
  const labels = new Uint32Array(data.length / 4);
  const view = new DataView(data.buffer, data.byteOffset, data.byteLength);
  for (let i = 0; i < labels.length; i++) {
    labels[i] = view.getUint32(i * 4, true);
  }
  return labels;
}

/**
 * Renders a class-map file for a generic dense taxonomy:
 * `index<TAB>name` per class, then the IGNORE row.
 */
export function classMapText(numClasses: number): string {
  const lines: string[] = [];
  for (let c = 0; c < numClasses; c++) {
    lines.push(`${c}\tclass_${String(c).padStart(2, "0")}`);
  }
  lines.push(`${IGNORE_LABEL}\tIGNORE`);
  return lines.join("\n") + "\n";
}
