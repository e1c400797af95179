import { afterEach, beforeEach, describe, expect, it } from "vitest";

import { ApiError, Candidate, LabelCounts, RoundResult } from "../src/api";
import { createReviewView, ReviewApi, ReviewController } from "../src/review";
import { FakeStore, deferred, tick } from "./helpers";

const ROUND1: Candidate[] = [
  { word: "team", score: 0.91 },
  { word: "ball", score: 0.84 },
  { word: "goal", score: 0.77 },
  { word: "coach", score: 0.71 },
];

function counts(): LabelCounts {
  return { round: 1, positives: 0, negatives: 0, auto_negatives: 100 };
}

class StubApi implements ReviewApi {
  labelsCalls: { accept: string[]; reject: string[] }[] = [];
  roundResults: RoundResult[] = [];
  roundError: unknown = null;
  history: { round_index: number; top_k: [string, number][] }[] = [];
  labeledWords: string[] = [];
  pendingRound = deferred<RoundResult>();
  autoResolveRounds = true;

  async getSession() {
    return {
      id: "s1",
      dimension_name: "sports",
      round: this.history.length,
      positive_words: this.labeledWords,
      negative_words: [],
      history: this.history,
      current_dimension: null,
    };
  }

  async requestRound(): Promise<RoundResult> {
    if (this.roundError) throw this.roundError;
    if (!this.autoResolveRounds) return this.pendingRound.promise;
    const next = this.roundResults.shift();
    if (!next) throw new Error("stub exhausted");
    return next;
  }

  async submitLabels(_sid: string, accept: string[], reject: string[]) {
    this.labelsCalls.push({ accept, reject });
    return counts();
  }

  async dictionary() {
    return { dimension_name: "sports", threshold: 0.5, entries: [] };
  }
}

let root: HTMLElement;
let api: StubApi;
let view: ReviewController;

function mount(opts: { k?: number } = {}): ReviewController {
  view = createReviewView(root, api, "s1", { ...opts, store: new FakeStore() });
  return view;
}

function rows(): HTMLElement[] {
  return [...root.querySelectorAll("li.candidate")] as HTMLElement[];
}

function words(): string[] {
  return rows().map((r) => r.dataset.word ?? "");
}

function press(key: string): void {
  window.dispatchEvent(new KeyboardEvent("keydown", { key, bubbles: true }));
}

beforeEach(() => {
  document.body.innerHTML = "<div id='root'></div>";
  root = document.getElementById("root") as HTMLElement;
  api = new StubApi();
});

afterEach(() => {
  view?.dispose();
});

describe("rendering", () => {
  it("shows the last round from history with exact server scores", async () => {
    api.history = [{ round_index: 1, top_k: ROUND1.map((c) => [c.word, c.score]) }];
    await mount().start();
    expect(words()).toEqual(["team", "ball", "goal", "coach"]);
    const first = rows()[0]!;
    expect(first.dataset.score).toBe(String(0.91));
    expect(first.querySelector(".score")?.textContent).toBe("0.9100");
  });

  it("never displays a word that is already labeled", async () => {
    api.history = [{ round_index: 1, top_k: ROUND1.map((c) => [c.word, c.score]) }];
    api.labeledWords = ["ball"];
    await mount().start();
    expect(words()).toEqual(["team", "goal", "coach"]);
  });

  it("shows the empty state when nothing is reviewable", async () => {
    api.roundResults = [{ round: 1, candidates: [] }];
    mount();
    await view.retrain();
    const empty = root.querySelector(".empty-state") as HTMLElement;
    expect(empty.hidden).toBe(false);
    expect(empty.textContent).toContain("No unlabeled candidates");
  });
});

describe("labeling controls", () => {
  beforeEach(async () => {
    api.history = [{ round_index: 1, top_k: ROUND1.map((c) => [c.word, c.score]) }];
    await mount().start();
  });

  it("click accept/reject marks the row and submits on retrain", async () => {
    (rows()[0]!.querySelector("button.accept") as HTMLButtonElement).click();
    (rows()[2]!.querySelector("button.reject") as HTMLButtonElement).click();
    expect(rows()[0]!.classList.contains("accept")).toBe(true);
    expect(rows()[2]!.classList.contains("reject")).toBe(true);

    api.roundResults = [{ round: 2, candidates: [{ word: "match", score: 0.6 }] }];
    await view.retrain();
    expect(api.labelsCalls).toEqual([{ accept: ["team"], reject: ["goal"] }]);
    expect(words()).toEqual(["match"]);
  });

  it("keyboard a/r/s act on the cursor row", async () => {
    press("a");
    press("r");
    press("s");
    expect(words()).toEqual(["team", "ball", "coach"]);

    api.roundResults = [{ round: 2, candidates: [] }];
    await view.retrain();
    expect(api.labelsCalls).toEqual([{ accept: ["team"], reject: ["ball"] }]);
  });

  it("arrow keys move the cursor", () => {
    press("ArrowDown");
    press("ArrowDown");
    press("a");
    expect(rows()[2]!.classList.contains("accept")).toBe(true);
  });

  it("ignores shortcuts while typing in an input", () => {
    const input = root.querySelector("input.threshold") as HTMLInputElement;
    input.dispatchEvent(new KeyboardEvent("keydown", { key: "a", bubbles: true }));
    expect(rows()[0]!.classList.contains("accept")).toBe(false);
  });

  it("deciding both ways keeps only the last decision", async () => {
    press("a");
    press("ArrowUp");
    press("r");
    api.roundResults = [{ round: 2, candidates: [] }];
    await view.retrain();
    expect(api.labelsCalls).toEqual([{ accept: [], reject: ["team"] }]);
  });
});

describe("retrain flow", () => {
  it("disables controls while the round is in flight", async () => {
    api.autoResolveRounds = false;
    mount();
    const button = root.querySelector("button.retrain") as HTMLButtonElement;
    const inflight = view.retrain();
    await tick();
    expect(button.disabled).toBe(true);

    api.pendingRound.resolve({ round: 1, candidates: ROUND1 });
    await inflight;
    expect(button.disabled).toBe(false);
    expect(words()).toEqual(["team", "ball", "goal", "coach"]);
  });

  it("surfaces 409 as a status message", async () => {
    api.roundError = new ApiError(409, "RoundInFlight", "a round is already running");
    mount();
    await view.retrain();
    const status = root.querySelector(".status") as HTMLElement;
    expect(status.textContent).toContain("already running");
    expect((root.querySelector("button.retrain") as HTMLButtonElement).disabled).toBe(false);
  });

  it("filters words labeled earlier even if the server re-ranks them", async () => {
    api.history = [{ round_index: 1, top_k: [["team", 0.91]] }];
    await mount().start();
    press("a");
    api.roundResults = [
      { round: 2, candidates: [{ word: "team", score: 0.95 }, { word: "pitch", score: 0.5 }] },
    ];
    await view.retrain();
    expect(words()).toEqual(["pitch"]);
  });
});
