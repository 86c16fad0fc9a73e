import * as fs from "fs";
import * as path from "path";

import { describe, expect, it } from "vitest";

import { readDataset, trainStandardizer } from "../src/dataset";
import { exportDataset, FIXTURE_DIR } from "./helpers";

const FIXTURE = () =>
  exportDataset({
    name: "reader-fixture",
    signal: { kind: "ou", beta: 0.268, v_ss: 6.12 },
    nTraces: 20,
    signalSamples: 48,
    tailSamples: 16,
    seed: 99,
  });

describe("dataset reader", () => {
  it("round-trips the exported arrays and metadata", () => {
    const ds = readDataset(FIXTURE());
    expect(ds.fields.rows).toBe(20);
    expect(ds.fields.cols).toBe(64);
    expect(ds.records.rows).toBe(20);
    expect(ds.metadata.signal_samples).toBe(48);
    expect(ds.metadata.tail_samples).toBe(16);
    // calibration tail: constant and equal across traces
    for (let i = 0; i < ds.fields.rows; i++) {
      const row = ds.fields.row(i);
      for (let j = 48; j < 64; j++) {
        expect(row[j]).toBe(ds.metadata.tail_value);
      }
    }
  });

  it("exposes a disjoint 8:2 split", () => {
    const ds = readDataset(FIXTURE());
    expect(ds.trainIndices.length).toBe(16);
    expect(ds.testIndices.length).toBe(4);
    const all = new Set([...ds.trainIndices, ...ds.testIndices]);
    expect(all.size).toBe(20);
  });

  it("detects payload corruption", () => {
    const src = FIXTURE();
    const dir = path.join(FIXTURE_DIR, "corrupted");
    fs.mkdirSync(dir, { recursive: true });
    const json = path.join(dir, "dataset.json");
    fs.copyFileSync(src, json);
    const payload = Buffer.from(fs.readFileSync(src.replace(/\.json$/, ".bin")));
    payload[64] ^= 0xff;
    fs.writeFileSync(json.replace(/\.json$/, ".bin"), payload);
    expect(() => readDataset(json)).toThrow(/checksum/);
  });

  it("detects truncation", () => {
    const src = FIXTURE();
    const dir = path.join(FIXTURE_DIR, "truncated");
    fs.mkdirSync(dir, { recursive: true });
    const json = path.join(dir, "dataset.json");
    fs.copyFileSync(src, json);
    const payload = fs.readFileSync(src.replace(/\.json$/, ".bin"));
    fs.writeFileSync(json.replace(/\.json$/, ".bin"), payload.subarray(0, 100));
    expect(() => readDataset(json)).toThrow(/truncated/);
  });

  it("standardizer uses training rows only", () => {
    const ds = readDataset(FIXTURE());
    const std = trainStandardizer(ds);
    expect(std.std).toBeGreaterThan(0);
    let sum = 0;
    let count = 0;
    for (const i of ds.trainIndices) {
      for (const v of ds.records.row(i)) {
        sum += v;
        count++;
      }
    }
    expect(std.mean).toBeCloseTo(sum / count, 12);
  });
});
