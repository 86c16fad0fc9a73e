/** Evaluation against baselines and the Gaussian-smoother oracle, with CSV
 * output mirroring the simulator's table conventions. */
import * as fs from "fs";
import * as path from "path";

import * as tf from "@tensorflow/tfjs";

import { Dataset, Matrix, Standardizer } from "./dataset";
import { predictMatrix, regionMse } from "./train";

export interface EvaluationRow {
  signal_kind: string;
  test_mse: number;
  tail_mse: number;
  zero_predictor_mse: number;
  oracle_mse: number | null;
  ratio_to_oracle: number | null;
}

export interface OracleResult {
  mse: number;
  meanPosteriorVariance: number;
}

/** Parse an oracle CSV produced by the simulator's smoother
 * (columns mse, mean_bvar; '#'-prefixed metadata lines). */
export function readOracleCsv(file: string): OracleResult {
  const lines = fs
    .readFileSync(file, "utf-8")
    .split("\n")
    .filter((l) => l.length > 0 && !l.startsWith("#"));
  const header = lines[0].split(",");
  const iMse = header.indexOf("mse");
  const iBvar = header.indexOf("mean_bvar");
  if (iMse < 0 || lines.length < 2) {
    throw new Error(`oracle CSV ${file} misses an 'mse' column or data rows`);
  }
  const row = lines[1].split(",");
  return {
    mse: Number(row[iMse]),
    meanPosteriorVariance: iBvar >= 0 ? Number(row[iBvar]) : NaN,
  };
}

export async function evaluate(
  model: tf.LayersModel,
  ds: Dataset,
  std: Standardizer,
  oracle: OracleResult | null
): Promise<EvaluationRow> {
  const records = ds.records.pick(ds.testIndices);
  const fields = ds.fields.pick(ds.testIndices);
  const estimates = await predictMatrix(model, records, std);
  const nSig = ds.metadata.signal_samples;
  const testMse = regionMse(estimates, fields, 0, nSig);
  const tailMse = regionMse(estimates, fields, nSig, ds.records.cols);
  const zeros = new Matrix(
    new Float64Array(fields.rows * fields.cols),
    fields.rows,
    fields.cols
  );
  const zeroMse = regionMse(zeros, fields, 0, nSig);
  const kind = (ds.metadata.signal as { kind?: string }).kind ?? "unknown";
  return {
    signal_kind: kind,
    test_mse: testMse,
    tail_mse: tailMse,
    zero_predictor_mse: zeroMse,
    oracle_mse: oracle ? oracle.mse : null,
    ratio_to_oracle: oracle ? testMse / oracle.mse : null,
  };
}

/** CSV writer matching the simulator's conventions: sorted '# key=value'
 * metadata lines, then header and rows. */
export function writeCsv(
  file: string,
  columns: string[],
  rows: (string | number | null)[][],
  meta: Record<string, string | number>
): void {
  fs.mkdirSync(path.dirname(file), { recursive: true });
  const lines = Object.keys(meta)
    .sort()
    .map((k) => `# ${k}=${meta[k]}`);
  lines.push(columns.join(","));
  for (const row of rows) {
    lines.push(row.map((v) => (v === null ? "nan" : String(v))).join(","));
  }
  fs.writeFileSync(file, lines.join("\n") + "\n");
}
