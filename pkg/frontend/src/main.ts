import { App } from "./app.js";
import type { AppConfig } from "./types.js";

async function boot(): Promise<void> {
  let config: AppConfig = { apiBaseUrl: "http://127.0.0.1:8000" };
  try {
    const resp = await fetch("./config.json");
    if (resp.ok) config = { ...config, ...(await resp.json()) };
  } catch {
    // no config file: defaults stand
  }
  const root = document.getElementById("app");
  if (root === null) throw new Error("missing #app container");
  new App(root, config);
}

void boot();
