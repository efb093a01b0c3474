import { defineConfig } from "vitest/config";

// The session API lives on another port; proxying it keeps the browser
// same-origin. Point VITE_API_TARGET elsewhere when the service is remote.
const apiTarget = process.env.VITE_API_TARGET ?? "http://127.0.0.1:8000";

const proxy = {
  "/sessions": apiTarget,
  "/experiment": apiTarget,
};

export default defineConfig({
  server: { proxy },
  preview: { proxy },
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
  },
});
