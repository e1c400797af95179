import { defineConfig } from "vitest/config";

export default defineConfig({
  // Relative asset URLs so the bundle works under any mount path (the
  // service serves dist/ at /ui).
  base: "./",
  build: {
    outDir: "dist",
  },
  test: {
    environment: "happy-dom",
    globals: true,
    testTimeout: 30000,
    hookTimeout: 60000,
    fileParallelism: false,
  },
});
