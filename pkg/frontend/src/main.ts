// Entry point: run picker plus the phase-driven console.

import { ApiClient } from "./api.js";
import { ConsoleSession } from "./controller.js";
import { render } from "./render.js";

const api = new ApiClient("");
const session = new ConsoleSession(api, () => render(session));

async function boot(): Promise<void> {
  const runs = await api.listRuns();
  const picker = document.getElementById("run-picker");
  if (!picker) return;
  picker.replaceChildren();
  if (runs.length === 0) {
    picker.append("No runs yet. Create one with the CLI (`pp ingest ...`), then reload.");
    return;
  }
  for (const run of runs) {
    const btn = document.createElement("button");
    btn.textContent = `${run.run_id} (${run.phase})`;
    btn.addEventListener("click", () => {
      void session.openRun(run.run_id).catch(() => {});
    });
    picker.append(btn);
  }
}

void boot();
