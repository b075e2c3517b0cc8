// Browser bootstrap: binds the console session to the page. All logic
// lives in session.ts / render.ts; this file only wires DOM events.

import { ServiceClient } from "./api.js";
import { ConsoleSession } from "./session.js";
import {
  renderContractPanel,
  renderDiffPanel,
  renderErrorBanner,
  renderOutcomePanel,
  renderReportPanel,
  renderTimeline,
  renderYamlPanel,
} from "./render.js";

const baseUrl =
  new URLSearchParams(window.location.search).get("service") ?? "http://127.0.0.1:8080";

const session = new ConsoleSession(new ServiceClient(baseUrl));

function element(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node;
}

function paint(): void {
  element("error").innerHTML = renderErrorBanner(session.view);
  element("yaml").innerHTML = renderYamlPanel(session.view);
  element("diff").innerHTML = renderDiffPanel(session.view.lastDiff);
  element("timeline").innerHTML = renderTimeline(session.view);
  element("contract").innerHTML = renderContractPanel(session.view);
  element("outcome").innerHTML = renderOutcomePanel(session.view);
  element("report").innerHTML = renderReportPanel(session.view.report);
  for (const button of document.querySelectorAll("button")) {
    button.disabled = session.busy;
  }
}

async function guarded(work: () => Promise<void>): Promise<void> {
  try {
    await work();
  } catch {
    // the view already carries the error banner
  } finally {
    paint();
  }
}

window.addEventListener("DOMContentLoaded", () => {
  void guarded(() => session.start());

  element("create-btn").addEventListener("click", () =>
    guarded(() => session.createFlow((element("query") as HTMLTextAreaElement).value)),
  );
  element("edit-btn").addEventListener("click", () =>
    guarded(() => session.editFlow((element("query") as HTMLTextAreaElement).value)),
  );
  element("solve-btn").addEventListener("click", () =>
    guarded(async () => {
      const raw = (element("data") as HTMLTextAreaElement).value.trim();
      await session.solveFlow(raw ? JSON.parse(raw) : null);
    }),
  );
});
