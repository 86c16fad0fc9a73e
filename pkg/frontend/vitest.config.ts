import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    testTimeout: 900_000,
    hookTimeout: 300_000,
    // each file gets a fresh fork: tfjs training results depend bit-wise on
    // prior allocations in the process, so files must not share state; run
    // them sequentially to keep the two cores free for the kernels
    pool: "forks",
    fileParallelism: false,
  },
});
