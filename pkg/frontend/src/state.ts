/** Client-side review state: pending labels for the next retrain and the
 * shown-word skip history.
 *
 * The skip history lives only in the browser (persisted per session id); the
 * server may legitimately re-rank a previously shown word, so the client
 * filters it out. A word the expert labeled is excluded by the server and
 * must never be displayed again regardless of history.
 */

import type { Candidate } from "./api";

const STORAGE_PREFIX = "lexdim.shown.";

/** Minimal slice of the Storage interface, so tests can pass a fake. */
export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

export class ReviewState {
  private shown: Set<string>;
  private accept = new Set<string>();
  private reject = new Set<string>();
  candidates: Candidate[] = [];

  constructor(
    readonly sessionId: string,
    private store: KeyValueStore,
  ) {
    this.shown = new Set(JSON.parse(store.getItem(STORAGE_PREFIX + sessionId) ?? "[]"));
  }

  private persistShown(): void {
    this.store.setItem(STORAGE_PREFIX + this.sessionId, JSON.stringify([...this.shown].sort()));
  }

  /** Replace the candidate list, filtering labeled words and skip history.
   * Words that survive the filter are recorded as shown, so leaving them
   * unlabeled skips them on the next round. */
  setCandidates(candidates: Candidate[], labeledWords: Iterable<string>): void {
    const labeled = new Set(labeledWords);
    this.candidates = candidates.filter(
      (c) => !labeled.has(c.word) && !this.shown.has(c.word),
    );
    for (const c of this.candidates) this.shown.add(c.word);
    this.persistShown();
  }

  /** Record a decision; deciding the other way later overrides it, so one
   * submission can never contain the same word on both sides. */
  decide(word: string, decision: "accept" | "reject"): void {
    this.accept.delete(word);
    this.reject.delete(word);
    (decision === "accept" ? this.accept : this.reject).add(word);
  }

  clearDecision(word: string): void {
    this.accept.delete(word);
    this.reject.delete(word);
  }

  decisionFor(word: string): "accept" | "reject" | null {
    if (this.accept.has(word)) return "accept";
    if (this.reject.has(word)) return "reject";
    return null;
  }

  /** Drop a row immediately; it stays in the shown history. */
  skip(word: string): void {
    this.clearDecision(word);
    this.candidates = this.candidates.filter((c) => c.word !== word);
  }

  get pendingCount(): number {
    return this.accept.size + this.reject.size;
  }

  /** Hand the accumulated labels to the caller and reset for the next round. */
  takePending(): { accept: string[]; reject: string[] } {
    const out = { accept: [...this.accept].sort(), reject: [...this.reject].sort() };
    this.accept.clear();
    this.reject.clear();
    return out;
  }
}
