/** Model checkpoint persistence that works without native filesystem handlers:
 * topology and weight manifest as JSON, weight payload as a raw binary file. */
import * as fs from "fs";
import * as path from "path";

import * as tf from "@tensorflow/tfjs";

import "./model"; // registers the custom TimeReverse layer before deserialization

export async function saveModel(model: tf.LayersModel, dir: string): Promise<void> {
  fs.mkdirSync(dir, { recursive: true });
  await model.save(
    tf.io.withSaveHandler(async (artifacts) => {
      const weightData = artifacts.weightData as ArrayBuffer;
      fs.writeFileSync(
        path.join(dir, "model.json"),
        JSON.stringify(
          {
            modelTopology: artifacts.modelTopology,
            weightSpecs: artifacts.weightSpecs,
            format: artifacts.format,
            generatedBy: artifacts.generatedBy,
          },
          null,
          1
        )
      );
      fs.writeFileSync(path.join(dir, "weights.bin"), Buffer.from(weightData));
      return { modelArtifactsInfo: { dateSaved: new Date(), modelTopologyType: "JSON" } };
    })
  );
}

export async function loadModel(dir: string): Promise<tf.LayersModel> {
  const doc = JSON.parse(fs.readFileSync(path.join(dir, "model.json"), "utf-8"));
  const weights = fs.readFileSync(path.join(dir, "weights.bin"));
  const buffer = weights.buffer.slice(
    weights.byteOffset,
    weights.byteOffset + weights.byteLength
  );
  return tf.loadLayersModel(
    tf.io.fromMemory({
      modelTopology: doc.modelTopology,
      weightSpecs: doc.weightSpecs,
      weightData: buffer,
    })
  );
}
