import { defineConfig } from "vite";

export default defineConfig({
  // the simulator serves the bundle under /ui
  base: "/ui/",
  build: {
    outDir: "dist",
    target: "es2020",
  },
  server: {
    proxy: {
      "/ws": { target: "ws://127.0.0.1:8000", ws: true },
      "/api": { target: "http://127.0.0.1:8000" },
    },
  },
});
