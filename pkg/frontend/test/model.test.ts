import * as os from "os";
import * as path from "path";

import * as tf from "@tensorflow/tfjs";
import { beforeAll, describe, expect, it } from "vitest";

import { buildDecoder, cosineLr, DEFAULT_CONFIG } from "../src/model";
import { loadModel, saveModel } from "../src/io";
import { useWasmBackend } from "./helpers";

const SMALL = { ...DEFAULT_CONFIG, hiddenDim: 8, epochs: 10, seed: 3 };

beforeAll(async () => {
  await useWasmBackend();
});

describe("decoder model", () => {
  it("maps a record batch to per-bin estimates", () => {
    const model = buildDecoder(24, SMALL);
    const out = model.predict(tf.zeros([5, 24, 1])) as tf.Tensor3D;
    expect(out.shape).toEqual([5, 24, 1]);
    out.dispose();
  });

  it("defaults match the published architecture", () => {
    expect(DEFAULT_CONFIG.hiddenDim).toBe(128);
    expect(DEFAULT_CONFIG.batchSize).toBe(40);
    expect(DEFAULT_CONFIG.epochs).toBe(800);
    const model = buildDecoder(12, { ...DEFAULT_CONFIG, hiddenDim: 16 });
    const kinds = model.layers.map((l) => l.getClassName());
    expect(kinds.filter((k) => k === "LSTM")).toHaveLength(2);
    expect(kinds.filter((k) => k === "TimeDistributed")).toHaveLength(1);
  });

  it("causal variant sees no future", async () => {
    const model = buildDecoder(16, { ...SMALL, reversedSecondPass: false });
    const base = tf.zeros([1, 16, 1]);
    const bumped = tf.tensor3d(
      Float32Array.from({ length: 16 }, (_, i) => (i === 15 ? 5.0 : 0.0)),
      [1, 16, 1]
    );
    const a = (model.predict(base) as tf.Tensor3D).arraySync() as number[][][];
    const b = (model.predict(bumped) as tf.Tensor3D).arraySync() as number[][][];
    for (let i = 0; i < 15; i++) {
      expect(b[0][i][0]).toBeCloseTo(a[0][i][0], 10);
    }
  });

  it("smoother wiring reacts to future samples", () => {
    const model = buildDecoder(16, SMALL);
    const base = tf.zeros([1, 16, 1]);
    const bumped = tf.tensor3d(
      Float32Array.from({ length: 16 }, (_, i) => (i === 15 ? 5.0 : 0.0)),
      [1, 16, 1]
    );
    const a = (model.predict(base) as tf.Tensor3D).arraySync() as number[][][];
    const b = (model.predict(bumped) as tf.Tensor3D).arraySync() as number[][][];
    expect(Math.abs(b[0][0][0] - a[0][0][0])).toBeGreaterThan(1e-8);
  });

  it("cosine schedule anneals from peak to floor", () => {
    const cfg = { ...SMALL, learningRate: 1e-2, lrFloor: 0.1, epochs: 101 };
    expect(cosineLr(cfg, 0)).toBeCloseTo(1e-2, 12);
    expect(cosineLr(cfg, 100)).toBeCloseTo(1e-3, 12);
    expect(cosineLr(cfg, 50)).toBeCloseTo(0.5 * (1e-2 + 1e-3), 12);
  });

  it("checkpoints round-trip through save and load", async () => {
    const model = buildDecoder(10, SMALL);
    const x = tf.randomNormal([3, 10, 1], 0, 1, "float32", 5);
    const before = (model.predict(x) as tf.Tensor3D).arraySync();
    const dir = path.join(os.tmpdir(), `decoder-ckpt-${Date.now()}`);
    await saveModel(model, dir);
    const restored = await loadModel(dir);
    const after = ((restored.predict(x) as tf.Tensor3D).arraySync()) as number[][][];
    expect(after).toEqual(before);
  });
});
