/**
 * Reader for the spintrack binary dataset format: a JSON metadata document
 * next to a raw little-endian float64 payload with an array index
 * (name, shape, byte offset, byte length, sha256).
 */
import { createHash } from "crypto";
import * as fs from "fs";
import * as path from "path";

export interface ArrayIndexEntry {
  name: string;
  dtype: string;
  shape: number[];
  offset: number;
  nbytes: number;
  sha256: string;
}

export interface DatasetMetadata {
  name: string;
  version: string;
  config_sha256: string;
  seed: number;
  tau: number;
  n_traces: number;
  signal_samples: number;
  tail_samples: number;
  tail_value: number;
  system: Record<string, number>;
  signal: Record<string, unknown>;
  split: { train: number; test: number; fraction: number };
  units: Record<string, string>;
}

export class Matrix {
  constructor(
    readonly data: Float64Array,
    readonly rows: number,
    readonly cols: number
  ) {
    if (data.length !== rows * cols) {
      throw new Error(`matrix size mismatch: ${data.length} != ${rows}x${cols}`);
    }
  }

  row(i: number): Float64Array {
    return this.data.subarray(i * this.cols, (i + 1) * this.cols);
  }

  pick(indices: number[]): Matrix {
    const out = new Float64Array(indices.length * this.cols);
    indices.forEach((idx, k) => out.set(this.row(idx), k * this.cols));
    return new Matrix(out, indices.length, this.cols);
  }
}

export interface Dataset {
  metadata: DatasetMetadata;
  fields: Matrix;
  records: Matrix;
  trainIndices: number[];
  testIndices: number[];
}

function readArray(blob: Buffer, entry: ArrayIndexEntry): Float64Array {
  if (entry.dtype !== "<f8") {
    throw new Error(`unsupported dtype ${entry.dtype} for array ${entry.name}`);
  }
  const end = entry.offset + entry.nbytes;
  if (end > blob.length) {
    throw new Error(
      `dataset payload truncated: array ${entry.name} needs bytes up to ${end}, file has ${blob.length}`
    );
  }
  const chunk = blob.subarray(entry.offset, end);
  const digest = createHash("sha256").update(chunk).digest("hex");
  if (digest !== entry.sha256) {
    throw new Error(`checksum mismatch for array ${entry.name}`);
  }
  // node Buffers are little-endian views over ArrayBuffer on every supported
  // platform; copy to detach from the file buffer
  const copy = Buffer.from(chunk);
  return new Float64Array(copy.buffer, copy.byteOffset, entry.nbytes / 8);
}

export function readDataset(jsonPath: string): Dataset {
  const resolved = jsonPath.endsWith(".bin")
    ? jsonPath.replace(/\.bin$/, ".json")
    : jsonPath;
  const doc = JSON.parse(fs.readFileSync(resolved, "utf-8"));
  if (doc.format_version !== 1) {
    throw new Error(`unsupported dataset format version ${doc.format_version}`);
  }
  const binPath = path.join(
    path.dirname(resolved),
    path.basename(resolved).replace(/\.json$/, ".bin")
  );
  const blob = fs.readFileSync(binPath);
  const arrays = new Map<string, { entry: ArrayIndexEntry; data: Float64Array }>();
  for (const entry of doc.arrays as ArrayIndexEntry[]) {
    arrays.set(entry.name, { entry, data: readArray(blob, entry) });
  }
  const need = (name: string) => {
    const got = arrays.get(name);
    if (!got) throw new Error(`dataset misses array ${name}`);
    return got;
  };
  const fieldsRaw = need("fields");
  const recordsRaw = need("records");
  const [n, d] = fieldsRaw.entry.shape;
  const metadata = doc.metadata as DatasetMetadata;
  if (d !== metadata.signal_samples + metadata.tail_samples) {
    throw new Error(
      `trace length ${d} != signal ${metadata.signal_samples} + tail ${metadata.tail_samples}`
    );
  }
  const toIndices = (arr: Float64Array) => Array.from(arr, (v) => {
    if (!Number.isInteger(v) || v < 0 || v >= n) {
      throw new Error(`invalid split index ${v}`);
    }
    return v;
  });
  const train = toIndices(need("train_indices").data);
  const test = toIndices(need("test_indices").data);
  const overlap = new Set(train);
  if (test.some((i) => overlap.has(i))) {
    throw new Error("train/test splits overlap");
  }
  return {
    metadata,
    fields: new Matrix(fieldsRaw.data, n, d),
    records: new Matrix(recordsRaw.data, n, d),
    trainIndices: train,
    testIndices: test,
  };
}

export interface Standardizer {
  mean: number;
  std: number;
}

/** Record standardization statistics from the training rows only. */
export function trainStandardizer(ds: Dataset): Standardizer {
  let sum = 0;
  let count = 0;
  for (const i of ds.trainIndices) {
    const row = ds.records.row(i);
    for (const v of row) sum += v;
    count += row.length;
  }
  const mean = sum / count;
  let ss = 0;
  for (const i of ds.trainIndices) {
    for (const v of ds.records.row(i)) ss += (v - mean) * (v - mean);
  }
  const std = Math.sqrt(ss / (count - 1));
  return { mean, std: std > 0 ? std : 1.0 };
}
