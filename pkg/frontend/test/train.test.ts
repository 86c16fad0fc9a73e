import { beforeAll, describe, expect, it } from "vitest";

import { readDataset } from "../src/dataset";
import { DEFAULT_CONFIG } from "../src/model";
import { train } from "../src/train";
import { exportDataset, useWasmBackend } from "./helpers";

beforeAll(async () => {
  await useWasmBackend();
});

const DESK = { ...DEFAULT_CONFIG, hiddenDim: 12, epochs: 10, seed: 11 };

describe("training", () => {
  it("learns the zero map on field-free traces", async () => {
    // zero-amplitude signal: the decoder output must collapse to ~0, with a
    // residual far below 1% of the default field-variance scale (6.12 pT^2)
    const dsPath = exportDataset({
      name: "zero-field",
      signal: { kind: "ou", beta: 0.268, v_ss: 0.0 },
      nTraces: 320,
      signalSamples: 48,
      tailSamples: 16,
      seed: 101,
    });
    const ds = readDataset(dsPath);
    const trained = await train(ds, { ...DESK, hiddenDim: 8, epochs: 25 });
    expect(trained.report.testMse).toBeLessThan(0.06);
    expect(trained.report.lossCurve.at(-1)!).toBeLessThan(trained.report.lossCurve[0]);
  }, 300_000);

  it("loss decreases on a tracking dataset", async () => {
    const dsPath = exportDataset({
      name: "short-ou",
      signal: { kind: "ou", beta: 0.268, v_ss: 6.12 },
      nTraces: 120,
      signalSamples: 48,
      tailSamples: 16,
      seed: 102,
    });
    const ds = readDataset(dsPath);
    const trained = await train(ds, DESK);
    const curve = trained.report.lossCurve;
    expect(curve.at(-1)!).toBeLessThan(0.95 * curve[0]);
    expect(trained.report.trainTraces).toBe(96);
    expect(trained.report.testTraces).toBe(24);
  }, 300_000);

  it("same seed reproduces the test error within 2%", async () => {
    const dsPath = exportDataset({
      name: "short-ou",
      signal: { kind: "ou", beta: 0.268, v_ss: 6.12 },
      nTraces: 120,
      signalSamples: 48,
      tailSamples: 16,
      seed: 102,
    });
    const ds = readDataset(dsPath);
    const a = await train(ds, { ...DESK, epochs: 5 });
    const b = await train(ds, { ...DESK, epochs: 5 });
    const rel = Math.abs(a.report.testMse - b.report.testMse) / a.report.testMse;
    expect(rel).toBeLessThan(0.02);
  }, 300_000);
});
