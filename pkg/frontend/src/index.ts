export { readDataset, trainStandardizer, Matrix } from "./dataset";
export type { Dataset, DatasetMetadata, Standardizer } from "./dataset";
export { buildDecoder, cosineLr, DEFAULT_CONFIG } from "./model";
export type { DecoderConfig } from "./model";
export { train, predictMatrix, regionMse, trailingSlope } from "./train";
export type { TrainReport, TrainedDecoder } from "./train";
export { evaluate, readOracleCsv, writeCsv } from "./evaluate";
export { saveModel, loadModel } from "./io";
