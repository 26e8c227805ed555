import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    include: ['tests/**/*.test.ts'],
    // The training sanity check runs a real (small) model for up to 500
    // mini-batches on the CPU backend; keep files sequential so it is
    // not starved by the other tfjs-heavy suites.
    fileParallelism: false,
    testTimeout: 180_000,
    hookTimeout: 60_000,
  },
});
