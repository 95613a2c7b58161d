import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    // the integration suite shells out to the simulator for real runs
    testTimeout: 60_000,
    hookTimeout: 120_000,
  },
});
