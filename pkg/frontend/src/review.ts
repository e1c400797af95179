/** Candidate review: ranked words with accept/reject/skip controls, retrain,
 * and a live dictionary panel.
 *
 * Keyboard: j/k or arrows move the cursor, a accepts, r rejects, s skips,
 * Enter retrains. At most one mutation is in flight; controls are disabled
 * while it runs.
 */

import type { WorkbenchApi, Candidate } from "./api";
import { ApiError } from "./api";
import { ReviewState, KeyValueStore } from "./state";

export type ReviewApi = Pick<
  WorkbenchApi,
  "getSession" | "requestRound" | "submitLabels" | "dictionary"
>;

export interface ReviewOptions {
  k?: number;
  threshold?: number;
  store?: KeyValueStore;
}

export interface ReviewController {
  start(): Promise<void>;
  retrain(): Promise<void>;
  refreshDictionary(): Promise<void>;
  readonly state: ReviewState;
  dispose(): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function createReviewView(
  root: HTMLElement,
  api: ReviewApi,
  sessionId: string,
  opts: ReviewOptions = {},
): ReviewController {
  const doc = root.ownerDocument;
  const k = opts.k ?? 25;
  const store = opts.store ?? doc.defaultView!.localStorage;
  const state = new ReviewState(sessionId, store);

  const labeled = new Set<string>();
  let cursor = 0;
  let busy = false;
  let round = 0;

  root.innerHTML = "";
  root.classList.add("review");
  const status = el(doc, "div", "status");
  const list = el(doc, "ul", "candidates");
  const retrainButton = el(doc, "button", "retrain", "Retrain");
  const emptyState = el(doc, "div", "empty-state");
  emptyState.hidden = true;

  const dictPanel = el(doc, "div", "dictionary");
  const dictHeading = el(doc, "h3", undefined, "Dictionary");
  const thresholdInput = el(doc, "input", "threshold");
  thresholdInput.type = "number";
  thresholdInput.step = "0.05";
  thresholdInput.value = String(opts.threshold ?? 0.5);
  const dictRefresh = el(doc, "button", "dict-refresh", "Refresh");
  const dictList = el(doc, "ol", "dict-entries");
  dictPanel.append(dictHeading, thresholdInput, dictRefresh, dictList);

  root.append(status, list, retrainButton, emptyState, dictPanel);

  function setBusy(value: boolean): void {
    busy = value;
    retrainButton.disabled = value;
    dictRefresh.disabled = value;
    for (const b of list.querySelectorAll("button")) (b as HTMLButtonElement).disabled = value;
  }

  function render(): void {
    list.innerHTML = "";
    if (cursor >= state.candidates.length) cursor = Math.max(0, state.candidates.length - 1);
    state.candidates.forEach((c: Candidate, i: number) => {
      const row = el(doc, "li", "candidate");
      row.dataset.word = c.word;
      row.dataset.score = String(c.score);
      if (i === cursor) row.classList.add("cursor");
      const decision = state.decisionFor(c.word);
      if (decision) row.classList.add(decision);

      row.append(
        el(doc, "span", "word", c.word),
        el(doc, "span", "score", c.score.toFixed(4)),
      );
      for (const [label, act] of [
        ["accept", () => decide(c.word, "accept")],
        ["reject", () => decide(c.word, "reject")],
        ["skip", () => skip(c.word)],
      ] as const) {
        const button = el(doc, "button", label, label);
        button.disabled = busy;
        button.addEventListener("click", () => {
          cursor = state.candidates.findIndex((x) => x.word === c.word);
          if (cursor < 0) cursor = 0;
          act();
        });
        row.append(button);
      }
      list.append(row);
    });
    emptyState.hidden = state.candidates.length > 0;
    emptyState.textContent = state.candidates.length
      ? ""
      : "No unlabeled candidates to review. Retrain to request the next round.";
    status.textContent = `round ${round}, ${state.pendingCount} pending label(s)`;
  }

  function decide(word: string, decision: "accept" | "reject"): void {
    if (busy) return;
    state.decide(word, decision);
    if (cursor < state.candidates.length - 1) cursor += 1;
    render();
  }

  function skip(word: string): void {
    if (busy) return;
    state.skip(word);
    render();
  }

  function moveCursor(delta: number): void {
    const n = state.candidates.length;
    if (n === 0) return;
    cursor = Math.min(n - 1, Math.max(0, cursor + delta));
    render();
  }

  async function start(): Promise<void> {
    const session = await api.getSession(sessionId);
    round = session.round;
    for (const w of session.positive_words) labeled.add(w);
    for (const w of session.negative_words) labeled.add(w);
    const last = session.history[session.history.length - 1];
    if (last) {
      state.setCandidates(
        last.top_k.map(([word, score]) => ({ word, score })),
        labeled,
      );
    }
    render();
  }

  async function retrain(): Promise<void> {
    if (busy) return;
    setBusy(true);
    status.textContent = "retraining...";
    try {
      const pending = state.takePending();
      if (pending.accept.length || pending.reject.length) {
        await api.submitLabels(sessionId, pending.accept, pending.reject);
        for (const w of [...pending.accept, ...pending.reject]) labeled.add(w);
      }
      const result = await api.requestRound(sessionId, k);
      round = result.round;
      cursor = 0;
      state.setCandidates(result.candidates, labeled);
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        status.textContent = "a round is already running for this session; try again shortly";
        return;
      }
      status.textContent = err instanceof Error ? err.message : String(err);
      return;
    } finally {
      setBusy(false);
    }
    render();
  }

  async function refreshDictionary(): Promise<void> {
    const threshold = Number(thresholdInput.value);
    const dict = await api.dictionary(sessionId, threshold);
    dictList.innerHTML = "";
    for (const entry of dict.entries) {
      const row = el(doc, "li", "dict-entry");
      row.dataset.word = entry.word;
      row.dataset.score = String(entry.score);
      row.append(
        el(doc, "span", "word", entry.word),
        el(doc, "span", "score", entry.score.toFixed(4)),
      );
      dictList.append(row);
    }
    dictPanel.dataset.dimension = dict.dimension_name;
  }

  function onKey(event: KeyboardEvent): void {
    const target = event.target as HTMLElement | null;
    if (
      target instanceof HTMLInputElement ||
      target instanceof HTMLTextAreaElement ||
      target instanceof HTMLSelectElement
    ) {
      return;
    }
    if (event.ctrlKey || event.metaKey || event.altKey) return;
    const current = state.candidates[cursor];
    switch (event.key.toLowerCase()) {
      case "a":
        if (current) decide(current.word, "accept");
        break;
      case "r":
        if (current) decide(current.word, "reject");
        break;
      case "s":
        if (current) skip(current.word);
        break;
      case "j":
      case "arrowdown":
        moveCursor(1);
        break;
      case "k":
      case "arrowup":
        moveCursor(-1);
        break;
      case "enter":
        void retrain();
        break;
      default:
        return;
    }
    event.preventDefault();
  }

  retrainButton.addEventListener("click", () => void retrain());
  dictRefresh.addEventListener("click", () => void refreshDictionary());
  const win = doc.defaultView!;
  win.addEventListener("keydown", onKey);

  return {
    start,
    retrain,
    refreshDictionary,
    state,
    dispose: () => win.removeEventListener("keydown", onKey),
  };
}
