/** Side-by-side top-k lists for several dimensions, plus per-word score bars
 * across all of them. Makes split senses visible: two dimensions sharing a
 * seed rank very different neighborhoods, and an ambiguous query word lights
 * up on more than one bar. */

import type { WorkbenchApi } from "./api";
import { ApiError } from "./api";

export type PolysemyApi = Pick<WorkbenchApi, "apply">;

export interface PolysemyController {
  /** Render one panel per unique dimension id, keeping first-seen order. */
  showDimensions(dimensionIds: string[]): Promise<void>;
  /** Score one word on every shown dimension and render bars. */
  queryWord(word: string): Promise<void>;
  readonly shownIds: string[];
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

export function createPolysemyView(
  root: HTMLElement,
  api: PolysemyApi,
  languageTag: string,
  k = 8,
): PolysemyController {
  const doc = root.ownerDocument;
  root.innerHTML = "";
  root.classList.add("polysemy");
  const panels = el(doc, "div", "panels");
  const queryInput = el(doc, "input", "query-word");
  queryInput.placeholder = "word to compare";
  const queryButton = el(doc, "button", "query", "Compare word");
  const notice = el(doc, "div", "notice");
  const bars = el(doc, "div", "bars");
  root.append(panels, queryInput, queryButton, notice, bars);

  let shownIds: string[] = [];

  async function showDimensions(dimensionIds: string[]): Promise<void> {
    shownIds = [...new Set(dimensionIds)];
    panels.innerHTML = "";
    notice.textContent = "";
    for (const id of shownIds) {
      const result = await api.apply(id, languageTag, { k });
      const panel = el(doc, "div", "panel");
      panel.dataset.dimensionId = id;
      panel.append(el(doc, "h3", undefined, result.dimension_name));
      const words = el(doc, "ol", "top-words");
      for (const c of result.candidates) {
        const row = el(doc, "li");
        row.dataset.word = c.word;
        row.dataset.score = String(c.score);
        row.append(el(doc, "span", "word", c.word), el(doc, "span", "score", c.score.toFixed(4)));
        words.append(row);
      }
      panel.append(words);
      panels.append(panel);
    }
  }

  async function queryWord(word: string): Promise<void> {
    notice.textContent = "";
    bars.innerHTML = "";
    for (const id of shownIds) {
      let result;
      try {
        result = await api.apply(id, languageTag, { words: [word] });
      } catch (err) {
        if (err instanceof ApiError && err.code === "UnknownWord") {
          notice.textContent = `"${word}" is not in the vocabulary`;
          bars.innerHTML = "";
          return;
        }
        throw err;
      }
      const candidate = result.candidates[0];
      if (!candidate) continue;
      const bar = el(doc, "div", "bar");
      bar.dataset.dimensionId = id;
      bar.dataset.score = String(candidate.score);
      const fill = el(doc, "div", "fill");
      fill.style.width = `${(candidate.score * 100).toFixed(1)}%`;
      bar.append(
        el(doc, "span", "label", result.dimension_name),
        fill,
        el(doc, "span", "value", candidate.score.toFixed(4)),
      );
      bars.append(bar);
    }
  }

  queryButton.addEventListener("click", () => {
    const word = queryInput.value.trim();
    if (word) void queryWord(word);
  });

  return {
    showDimensions,
    queryWord,
    get shownIds() {
      return shownIds;
    },
  };
}
