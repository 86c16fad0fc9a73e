/**
 * Sequence decoder for magnetometer records: two unidirectional LSTM layers
 * and a per-step dense readout.
 *
 * The first layer summarizes the record causally; by default the second layer
 * consumes those summaries in reversed time, so every output bin conditions
 * on the whole record (the neural analogue of a forward/backward two-filter
 * smoother). A strictly causal cascade (`reversedSecondPass: false`) can only
 * reach filtering accuracy mid-trace and is kept for comparison runs.
 */
import * as tf from "@tensorflow/tfjs";

export interface DecoderConfig {
  hiddenDim: number;
  batchSize: number;
  epochs: number;
  learningRate: number;
  /** floor of the cosine learning-rate schedule, as a fraction of learningRate */
  lrFloor: number;
  /** run the second recurrent pass in reversed time (smoother wiring) */
  reversedSecondPass: boolean;
  seed: number;
}

export const DEFAULT_CONFIG: DecoderConfig = {
  hiddenDim: 128,
  batchSize: 40,
  epochs: 800,
  learningRate: 3e-3,
  lrFloor: 0.02,
  reversedSecondPass: true,
  seed: 1,
};

/** Flips a [batch, time, features] tensor along the time axis. */
export class TimeReverse extends tf.layers.Layer {
  static className = "TimeReverse";

  call(inputs: tf.Tensor | tf.Tensor[]): tf.Tensor {
    const x = Array.isArray(inputs) ? inputs[0] : inputs;
    return tf.reverse(x, 1);
  }

  computeOutputShape(inputShape: tf.Shape): tf.Shape {
    return inputShape;
  }
}
tf.serialization.registerClass(TimeReverse);

export function buildDecoder(seqLen: number, config: DecoderConfig): tf.LayersModel {
  const { hiddenDim, seed } = config;
  const lstmArgs = (seedOffset: number) => ({
    units: hiddenDim,
    returnSequences: true,
    kernelInitializer: tf.initializers.glorotUniform({ seed: seed + seedOffset }),
    recurrentInitializer: tf.initializers.orthogonal({ seed: seed + seedOffset + 1 }),
  });
  const input = tf.input({ shape: [seqLen, 1] });
  const first = tf.layers.lstm(lstmArgs(0)).apply(input) as tf.SymbolicTensor;
  let x = first;
  if (config.reversedSecondPass) {
    x = new TimeReverse({}).apply(x) as tf.SymbolicTensor;
  }
  x = tf.layers.lstm(lstmArgs(2)).apply(x) as tf.SymbolicTensor;
  if (config.reversedSecondPass) {
    x = new TimeReverse({}).apply(x) as tf.SymbolicTensor;
  }
  const out = tf.layers
    .timeDistributed({
      layer: tf.layers.dense({
        units: 1,
        kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 4 }),
      }),
    })
    .apply(x) as tf.SymbolicTensor;
  const model = tf.model({ inputs: input, outputs: out });
  model.compile({
    optimizer: tf.train.adam(config.learningRate),
    loss: "meanSquaredError",
  });
  return model;
}

/** Cosine-annealed learning rate for the given epoch. */
export function cosineLr(config: DecoderConfig, epoch: number): number {
  const floor = config.learningRate * config.lrFloor;
  const phase = Math.PI * Math.min(epoch / Math.max(config.epochs - 1, 1), 1.0);
  return floor + 0.5 * (config.learningRate - floor) * (1 + Math.cos(phase));
}
