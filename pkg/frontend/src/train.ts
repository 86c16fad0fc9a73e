/**
 * Training loop: Adam with a cosine-annealed learning rate, mean-squared-error
 * loss on the field trace, records standardized with training-set statistics
 * only. Divergence (non-finite loss) aborts with diagnostics.
 */
import * as tf from "@tensorflow/tfjs";

import { Dataset, Matrix, Standardizer, trainStandardizer } from "./dataset";
import { buildDecoder, cosineLr, DecoderConfig } from "./model";

export interface TrainReport {
  lossCurve: number[];
  testMse: number;
  testMseTail: number;
  zeroPredictorMse: number;
  trainTraces: number;
  testTraces: number;
  seed: number;
  epochs: number;
}

export interface TrainedDecoder {
  model: tf.LayersModel;
  standardizer: Standardizer;
  report: TrainReport;
}

/** Deterministic 32-bit PRNG for the epoch-order shuffle. */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function shuffled(indices: number[], seed: number): number[] {
  const rand = mulberry32(seed);
  const out = indices.slice();
  for (let i = out.length - 1; i > 0; i--) {
    const j = Math.floor(rand() * (i + 1));
    [out[i], out[j]] = [out[j], out[i]];
  }
  return out;
}

export function toTensor3d(m: Matrix, std?: Standardizer): tf.Tensor3D {
  const data = new Float32Array(m.rows * m.cols);
  for (let i = 0; i < m.data.length; i++) {
    data[i] = std ? (m.data[i] - std.mean) / std.std : m.data[i];
  }
  return tf.tensor3d(data, [m.rows, m.cols, 1]);
}

/** Mean squared error over a column range of per-trace estimates. */
export function regionMse(
  estimates: Matrix,
  truth: Matrix,
  start: number,
  end: number
): number {
  let ss = 0;
  let count = 0;
  for (let i = 0; i < estimates.rows; i++) {
    const e = estimates.row(i);
    const t = truth.row(i);
    for (let j = start; j < end; j++) {
      const d = e[j] - t[j];
      ss += d * d;
      count += 1;
    }
  }
  return ss / count;
}

export async function predictMatrix(
  model: tf.LayersModel,
  records: Matrix,
  std: Standardizer,
  batchSize = 64
): Promise<Matrix> {
  const x = toTensor3d(records, std);
  const y = model.predict(x, { batchSize }) as tf.Tensor3D;
  const flat = await y.data();
  x.dispose();
  y.dispose();
  return new Matrix(Float64Array.from(flat), records.rows, records.cols);
}

export async function train(
  ds: Dataset,
  config: DecoderConfig,
  onEpoch?: (epoch: number, loss: number) => void
): Promise<TrainedDecoder> {
  if (ds.trainIndices.length < 1 || ds.testIndices.length < 1) {
    throw new Error("dataset must carry non-empty train and test splits");
  }
  const std = trainStandardizer(ds);
  const order = shuffled(ds.trainIndices, config.seed);
  const xTrain = toTensor3d(ds.records.pick(order), std);
  const yTrain = toTensor3d(ds.fields.pick(order));
  const model = buildDecoder(ds.records.cols, config);
  const lossCurve: number[] = [];
  try {
    await model.fit(xTrain, yTrain, {
      epochs: config.epochs,
      batchSize: config.batchSize,
      shuffle: false,
      verbose: 0,
      callbacks: {
        onEpochBegin: async (epoch) => {
          const opt = model.optimizer as unknown as { learningRate: number };
          opt.learningRate = cosineLr(config, epoch);
        },
        onEpochEnd: async (epoch, logs) => {
          const loss = logs?.loss as number;
          if (!Number.isFinite(loss)) {
            throw new Error(
              `training diverged at epoch ${epoch}: loss=${loss}, lr=${cosineLr(config, epoch)}`
            );
          }
          lossCurve.push(loss);
          if (onEpoch) onEpoch(epoch, loss);
        },
      },
    });
  } finally {
    xTrain.dispose();
    yTrain.dispose();
  }
  const testRecords = ds.records.pick(ds.testIndices);
  const testFields = ds.fields.pick(ds.testIndices);
  const estimates = await predictMatrix(model, testRecords, std);
  const nSig = ds.metadata.signal_samples;
  const total = ds.records.cols;
  const testMse = regionMse(estimates, testFields, 0, nSig);
  const testMseTail = regionMse(estimates, testFields, nSig, total);
  // zero predictor: estimate the field as identically zero over the signal region
  const zeros = new Matrix(
    new Float64Array(testFields.rows * testFields.cols),
    testFields.rows,
    testFields.cols
  );
  const zeroMse = regionMse(zeros, testFields, 0, nSig);
  return {
    model,
    standardizer: std,
    report: {
      lossCurve,
      testMse,
      testMseTail,
      zeroPredictorMse: zeroMse,
      trainTraces: ds.trainIndices.length,
      testTraces: ds.testIndices.length,
      seed: config.seed,
      epochs: config.epochs,
    },
  };
}

/** Least-squares slope of the loss over the trailing window (plateau check). */
export function trailingSlope(lossCurve: number[], window: number): number {
  const tail = lossCurve.slice(-window);
  const n = tail.length;
  const xm = (n - 1) / 2;
  const ym = tail.reduce((a, b) => a + b, 0) / n;
  let num = 0;
  let den = 0;
  tail.forEach((y, x) => {
    num += (x - xm) * (y - ym);
    den += (x - xm) * (x - xm);
  });
  return num / den;
}
