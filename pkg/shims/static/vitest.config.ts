import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    // every load compiles a TypeScript program; give workers breathing room
    testTimeout: 30_000,
    hookTimeout: 30_000,
  },
});
