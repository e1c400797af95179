/** App shell: session picker plus the three workbench tabs. The API base
 * comes from ?api=... or defaults to the page origin, which matches serving
 * the built bundle from the service's static mount. */

import { WorkbenchApi } from "./api";
import { createReviewView, ReviewController } from "./review";
import { createPolysemyView } from "./polysemy";
import { createScatterView, ScatterDoc } from "./scatter";

function apiBase(): string {
  const fromQuery = new URLSearchParams(location.search).get("api");
  return (fromQuery ?? location.origin).replace(/\/$/, "");
}

function parseDocs(text: string): ScatterDoc[] {
  return text
    .split("\n")
    .map((line) => line.trim())
    .filter((line) => line.length > 0)
    .map((line, i) => {
      const tab = line.indexOf("\t");
      if (tab < 0) return { id: String(i + 1), text: line };
      return { id: line.slice(0, tab), text: line.slice(tab + 1) };
    });
}

async function init(): Promise<void> {
  const api = new WorkbenchApi(apiBase());
  const health = await api.health();

  const picker = document.getElementById("session-picker") as HTMLSelectElement;
  const nameInput = document.getElementById("new-name") as HTMLInputElement;
  const seedsInput = document.getElementById("new-seeds") as HTMLInputElement;
  const createButton = document.getElementById("create-session") as HTMLButtonElement;
  const view = document.getElementById("view") as HTMLElement;
  const headerStatus = document.getElementById("header-status") as HTMLElement;

  headerStatus.textContent = `${health.primary_language}: ${
    health.vocab_sizes[health.primary_language] ?? 0
  } words`;

  let review: ReviewController | null = null;
  let tab = "review";

  async function refreshSessions(selected?: string): Promise<void> {
    const listing = await api.listSessions();
    picker.innerHTML = "";
    for (const s of listing.sessions) {
      const option = document.createElement("option");
      option.value = s.session_id;
      option.textContent = `${s.dimension_name} (round ${s.round})`;
      picker.append(option);
    }
    if (selected) picker.value = selected;
  }

  async function showTab(): Promise<void> {
    review?.dispose();
    review = null;
    view.innerHTML = "";
    const sessionId = picker.value;
    if (tab === "review") {
      if (!sessionId) {
        view.textContent = "Create or pick a session to start reviewing.";
        return;
      }
      review = createReviewView(view, api, sessionId);
      await review.start();
    } else if (tab === "polysemy") {
      const controller = createPolysemyView(view, api, health.primary_language);
      const ids = [...picker.options].map((o) => o.value);
      await controller.showDimensions(ids);
    } else {
      const controller = createScatterView(view, api);
      const form = document.createElement("div");
      form.className = "scatter-form";
      const xSel = document.createElement("select");
      const ySel = document.createElement("select");
      for (const sel of [xSel, ySel]) {
        for (const o of [...picker.options]) {
          const copy = document.createElement("option");
          copy.value = o.value;
          copy.textContent = o.textContent;
          sel.append(copy);
        }
      }
      const docsBox = document.createElement("textarea");
      docsBox.placeholder = "doc_id<TAB>text, one per line";
      const plotButton = document.createElement("button");
      plotButton.textContent = "Plot";
      plotButton.addEventListener("click", () => {
        void controller.plot(xSel.value, ySel.value, parseDocs(docsBox.value));
      });
      form.append(xSel, ySel, docsBox, plotButton);
      view.prepend(form);
    }
  }

  createButton.addEventListener("click", async () => {
    const seeds = seedsInput.value
      .split(/[,\s]+/)
      .map((s) => s.trim())
      .filter(Boolean);
    if (!nameInput.value || seeds.length === 0) return;
    const created = await api.createSession(nameInput.value, seeds);
    await refreshSessions(created.session_id);
    await showTab();
  });

  picker.addEventListener("change", () => void showTab());
  for (const button of document.querySelectorAll("nav [data-tab]")) {
    button.addEventListener("click", () => {
      tab = (button as HTMLElement).dataset.tab ?? "review";
      void showTab();
    });
  }

  await refreshSessions();
  await showTab();
}

window.addEventListener("load", () => void init());
