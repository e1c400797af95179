/** Document scatter: each doc becomes a point whose x/y are its mean
 * activations on two chosen dimensions (scores live in (0,1), so the plot
 * area maps that range directly). Docs with no usable tokens are listed
 * beside the plot instead of being drawn. */

import type { WorkbenchApi, DocFeaturesResult } from "./api";

export type ScatterApi = Pick<WorkbenchApi, "docFeatures">;

export interface ScatterDoc {
  id: string;
  text: string;
}

export interface ScatterController {
  plot(xDimId: string, yDimId: string, docs: ScatterDoc[]): Promise<void>;
  /** Transpose the plot: swap which dimension feeds which axis. */
  swapAxes(): void;
}

const SVG_NS = "http://www.w3.org/2000/svg";
const SIZE = 400;
const MARGIN = 40;

export function createScatterView(root: HTMLElement, api: ScatterApi): ScatterController {
  const doc = root.ownerDocument;
  root.innerHTML = "";
  root.classList.add("scatter");
  const svg = doc.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${SIZE} ${SIZE}`);
  const emptyList = doc.createElement("ul");
  emptyList.className = "empty-docs";
  const swapButton = doc.createElement("button");
  swapButton.className = "swap-axes";
  swapButton.textContent = "Swap axes";
  root.append(svg, swapButton, emptyList);

  let result: DocFeaturesResult | null = null;
  let swapped = false;

  function toPixel(score: number, axis: "x" | "y"): number {
    const span = SIZE - 2 * MARGIN;
    const frac = Math.min(1, Math.max(0, score));
    return axis === "x" ? MARGIN + frac * span : SIZE - MARGIN - frac * span;
  }

  function render(): void {
    svg.innerHTML = "";
    emptyList.innerHTML = "";
    if (!result) return;
    const [xi, yi] = swapped ? [1, 0] : [0, 1];
    const names = result.dimension_names;

    const xLabel = doc.createElementNS(SVG_NS, "text");
    xLabel.setAttribute("class", "axis-x");
    xLabel.setAttribute("x", String(SIZE / 2));
    xLabel.setAttribute("y", String(SIZE - 8));
    xLabel.textContent = names[xi] ?? "";
    const yLabel = doc.createElementNS(SVG_NS, "text");
    yLabel.setAttribute("class", "axis-y");
    yLabel.setAttribute("x", "12");
    yLabel.setAttribute("y", String(SIZE / 2));
    yLabel.setAttribute("transform", `rotate(-90 12 ${SIZE / 2})`);
    yLabel.textContent = names[yi] ?? "";
    svg.append(xLabel, yLabel);

    for (const row of result.rows) {
      if (row.values === null) {
        const item = doc.createElement("li");
        item.textContent = row.doc_id;
        emptyList.append(item);
        continue;
      }
      const point = doc.createElementNS(SVG_NS, "circle");
      point.setAttribute("class", "doc-point");
      point.setAttribute("r", "4");
      point.setAttribute("cx", String(toPixel(row.values[xi] ?? 0, "x")));
      point.setAttribute("cy", String(toPixel(row.values[yi] ?? 0, "y")));
      point.dataset.docId = row.doc_id;
      const title = doc.createElementNS(SVG_NS, "title");
      title.textContent = row.doc_id;
      point.append(title);
      svg.append(point);
    }
  }

  async function plot(xDimId: string, yDimId: string, docs: ScatterDoc[]): Promise<void> {
    if (xDimId === yDimId) throw new Error("x and y must be different dimensions");
    swapped = false;
    result = await api.docFeatures([xDimId, yDimId], docs);
    render();
  }

  function swapAxes(): void {
    swapped = !swapped;
    render();
  }

  swapButton.addEventListener("click", swapAxes);

  return { plot, swapAxes };
}
