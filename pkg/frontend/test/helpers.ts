/** Test fixtures: datasets come from the simulator CLI and the oracle numbers
 * from its Gaussian smoother, both consumed through files only. */
import { execFileSync } from "child_process";
import * as fs from "fs";
import * as path from "path";

import * as tf from "@tensorflow/tfjs";
import { setThreadsCount } from "@tensorflow/tfjs-backend-wasm";

const PYTHON = process.env.SPINTRACK_PYTHON ?? "python3";

export const FIXTURE_DIR = path.join(__dirname, "..", ".fixtures");

export interface DatasetRequest {
  name: string;
  signal: Record<string, unknown>;
  system?: Record<string, number>;
  nTraces?: number;
  signalSamples?: number;
  tailSamples?: number;
  seed?: number;
}

export function exportDataset(req: DatasetRequest): string {
  const dir = path.join(FIXTURE_DIR, req.name);
  const jsonPath = path.join(dir, "dataset.json");
  if (fs.existsSync(jsonPath)) {
    return jsonPath;  // specs are deterministic, so fixtures can be reused
  }
  fs.mkdirSync(dir, { recursive: true });
  const spec = {
    name: req.name,
    system: { tau: 0.05, g_b: 1.0, ...(req.system ?? {}) },
    signal: req.signal,
    analysis: {
      n_traces: req.nTraces ?? 240,
      signal_samples: req.signalSamples ?? 96,
      tail_samples: req.tailSamples ?? 32,
    },
    seed: req.seed ?? 424242,
  };
  const specPath = path.join(dir, "spec.json");
  fs.writeFileSync(specPath, JSON.stringify(spec));
  execFileSync(
    PYTHON,
    ["-m", "spintrack.cli", "export", "--config", specPath, "--out", dir],
    { stdio: "pipe" }
  );
  return jsonPath;
}

/** Smoother-oracle MSE over the test rows of an exported OU dataset,
 * written as a CSV with the simulator's table conventions. */
export function oracleCsv(datasetJson: string, outName = "oracle.csv"): string {
  const outPath = path.join(path.dirname(datasetJson), outName);
  if (fs.existsSync(outPath)) {
    return outPath;
  }
  const script = `
import sys
import numpy as np
from spintrack import estimation as est
from spintrack.experiments import import_dataset
from spintrack.signals import OUParams
from spintrack.trajectory import TrajectoryConfig

ds = import_dataset(sys.argv[1])
meta = ds.metadata
cfg = TrajectoryConfig(**meta["system"])
sig = meta["signal"]
model = OUParams.from_stationary(sig["beta"], sig["v_ss"])
test = ds.test_indices
y = ds.y[test]
b = ds.b[test]
n_sig = meta["signal_samples"]
b_est, b_var, _ = est.augmented_smoother_batch(y, cfg, model)
mse = float(np.mean((b_est[:, :n_sig] - b[:, :n_sig]) ** 2))
with open(sys.argv[2], "w") as fh:
    fh.write("# source=augmented_smoother\\n")
    fh.write("mse,mean_bvar\\n")
    fh.write(f"{mse!r},{float(np.mean(b_var[:n_sig]))!r}\\n")
`;
  execFileSync(PYTHON, ["-c", script, datasetJson, outPath], { stdio: "pipe" });
  return outPath;
}

export async function useWasmBackend(): Promise<void> {
  try {
    // a single wasm thread keeps training bit-reproducible for a fixed seed
    setThreadsCount(Number(process.env.DECODER_WASM_THREADS ?? "1"));
    await tf.setBackend("wasm");
  } catch {
    await tf.setBackend("cpu");
  }
  await tf.ready();
}
