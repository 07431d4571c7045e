import { defineConfig } from 'vitest/config';

export default defineConfig({
  server: {
    proxy: {
      // the console talks to a locally running gridshed service
      '/api': {
        target: process.env.GRIDSHED_URL ?? 'http://127.0.0.1:8000',
        changeOrigin: true,
        rewrite: path => path.replace(/^\/api/, ''),
      },
    },
  },
  test: {
    environment: 'node',
  },
});
