import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    // Every test shells out to the CLI (python startup included), so give
    // fixtures and individual tests generous budgets.
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
