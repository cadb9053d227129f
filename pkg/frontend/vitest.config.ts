import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    environment: 'happy-dom',
    environmentOptions: {
      happyDOM: {
        // The integration suite fetches a live local server from a test page.
        settings: { fetch: { disableSameOriginPolicy: true } },
      },
    },
    testTimeout: 30_000,
  },
});
