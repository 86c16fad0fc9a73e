/**
 * Full-scale decoder acceptance: >= 2000 traces per dataset, the published
 * layer width, and enough epochs to converge. Expect several hours on CPU
 * (the wasm backend); trim with the environment overrides below for partial
 * runs.
 *
 *   DECODER_TRACES=2000 DECODER_HIDDEN=64 DECODER_EPOCHS=120 \
 *     npm run acceptance:full
 */
import { readDataset } from "../src/dataset";
import { readOracleCsv } from "../src/evaluate";
import { DEFAULT_CONFIG } from "../src/model";
import { trailingSlope, train } from "../src/train";
import { exportDataset, oracleCsv, useWasmBackend } from "../test/helpers";

const N_TRACES = Number(process.env.DECODER_TRACES ?? "2000");
const HIDDEN = Number(process.env.DECODER_HIDDEN ?? "64");
const EPOCHS = Number(process.env.DECODER_EPOCHS ?? "120");
const SIGNAL_SAMPLES = Number(process.env.DECODER_SIGNAL_SAMPLES ?? "96");
const TAIL_SAMPLES = Number(process.env.DECODER_TAIL_SAMPLES ?? "32");

const CONFIG = { ...DEFAULT_CONFIG, hiddenDim: HIDDEN, epochs: EPOCHS, seed: 7 };

function verdict(name: string, ok: boolean, detail: string): boolean {
  console.log(`${ok ? "PASS" : "FAIL"} ${name}: ${detail}`);
  return ok;
}

async function run(): Promise<number> {
  await useWasmBackend();
  const common = {
    system: { tau: 0.05, g_b: 1.0 },
    nTraces: N_TRACES,
    signalSamples: SIGNAL_SAMPLES,
    tailSamples: TAIL_SAMPLES,
  };
  let ok = true;

  console.log(`config: ${N_TRACES} traces, hidden ${HIDDEN}, ${EPOCHS} epochs`);

  const ouPath = exportDataset({
    name: `full-ou-${N_TRACES}`,
    signal: { kind: "ou", beta: 0.268, v_ss: 6.12 },
    seed: 52001,
    ...common,
  });
  const oracle = readOracleCsv(oracleCsv(ouPath));
  const ouDs = readDataset(ouPath);
  const ouRun = await train(ouDs, CONFIG, (e, l) => {
    if (e % 10 === 0) console.log(`  ou epoch ${e}: ${l.toFixed(5)}`);
  });
  const ratio = ouRun.report.testMse / oracle.mse;
  const sigma = oracle.mse * Math.sqrt(2 / ouDs.testIndices.length);
  ok = verdict(
    "ou-vs-oracle",
    ratio <= 1.3 && ouRun.report.testMse >= oracle.mse - 2 * sigma,
    `MSE ${ouRun.report.testMse.toFixed(4)} / oracle ${oracle.mse.toFixed(4)} = ${ratio.toFixed(3)}`
  ) && ok;
  const slope = trailingSlope(ouRun.report.lossCurve, Math.max(10, EPOCHS >> 2));
  ok = verdict("loss-plateau", slope <= 1e-3, `trailing slope ${slope.toExponential(2)}`) && ok;

  for (const [name, signal] of [
    ["white", { kind: "white", hold: 0.75, level_std: 2.474 }],
    [
      "dou",
      { kind: "dou", beta1: 0.402, v_ss1: 5.82, beta2: 0.16, v_ss2: 5.82, omega_d: 0.8419 },
    ],
  ] as const) {
    const p = exportDataset({
      name: `full-${name}-${N_TRACES}`,
      signal: signal as Record<string, unknown>,
      seed: name === "white" ? 52002 : 52003,
      ...common,
    });
    const ds = readDataset(p);
    const runReport = await train(ds, CONFIG, (e, l) => {
      if (e % 10 === 0) console.log(`  ${name} epoch ${e}: ${l.toFixed(5)}`);
    });
    const { testMse, zeroPredictorMse } = runReport.report;
    ok = verdict(
      `${name}-vs-zero-predictor`,
      testMse <= 0.8 * zeroPredictorMse,
      `MSE ${testMse.toFixed(4)} vs zero ${zeroPredictorMse.toFixed(4)}`
    ) && ok;
  }
  return ok ? 0 : 1;
}

run().then((code) => process.exit(code));
