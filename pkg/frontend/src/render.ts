/** SVG rendering of the icicle tree, minimap, and plots. Thin layer over the
 * pure models; all interaction callbacks bubble up to the app shell. */

import { blockColor, GRAY, valueColor } from "./color.js";
import { aggregateNarrow, IcicleRect, MinimapModel } from "./icicle.js";
import { BarModel, BoxStats, HistogramModel, ScatterModel } from "./plots.js";
import { NameStats, TreeNode } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const ROW_H = 22;

function svgElement<K extends keyof SVGElementTagNameMap>(tag: K): SVGElementTagNameMap[K] {
  return document.createElementNS(SVG_NS, tag);
}

export interface TreeRenderOptions {
  widthPx: number;
  selectedVariable: string | null;
  stats: NameStats | null;
  highlighted: Set<number>; // linked/brushed blocks, drawn red
  deps: Set<number>; // dependency blocks, drawn red
  filteredOut: Set<number>; // grayed rows
  onClick?: (node: TreeNode) => void;
  onContext?: (node: TreeNode) => void;
}

export function renderTree(svg: SVGSVGElement, rects: IcicleRect[], opts: TreeRenderOptions): void {
  svg.replaceChildren();
  const { drawn, summaries } = aggregateNarrow(rects, opts.widthPx);
  const maxDepth = Math.max(...rects.map((r) => r.depth), 0);
  svg.setAttribute("height", String((maxDepth + 1) * ROW_H + 2));

  for (const rect of drawn) {
    const node = rect.node;
    const el = svgElement("rect");
    el.setAttribute("x", String(rect.x0 * opts.widthPx));
    el.setAttribute("width", String(Math.max((rect.x1 - rect.x0) * opts.widthPx - 0.5, 0.5)));
    el.setAttribute("y", String(rect.depth * ROW_H));
    el.setAttribute("height", String(ROW_H - 1));
    el.setAttribute("data-id", String(node.id));

    let fill = blockColor(node.type);
    if ((node.type === "tracked" || node.type === "custom") && node.name) {
      fill =
        opts.selectedVariable !== null && node.name === opts.selectedVariable && opts.stats
          ? valueColor(node.value ?? null, opts.stats)
          : GRAY;
    }
    if (opts.filteredOut.has(node.id)) fill = GRAY;
    el.setAttribute("fill", fill);
    if (opts.highlighted.has(node.id) || opts.deps.has(node.id)) {
      el.setAttribute("stroke", "rgb(214,39,40)");
      el.setAttribute("stroke-width", "2");
    } else {
      el.setAttribute("stroke", "white");
      el.setAttribute("stroke-width", "0.5");
    }
    if (node.aborted) el.setAttribute("opacity", "0.6");
    el.addEventListener("click", () => opts.onClick?.(node));
    el.addEventListener("contextmenu", (ev) => {
      ev.preventDefault();
      opts.onContext?.(node);
    });
    const title = svgElement("title");
    title.textContent = node.label;
    el.appendChild(title);
    svg.appendChild(el);

    const width = (rect.x1 - rect.x0) * opts.widthPx;
    if (width > 60) {
      const text = svgElement("text");
      text.setAttribute("x", String(rect.x0 * opts.widthPx + 3));
      text.setAttribute("y", String(rect.depth * ROW_H + ROW_H - 7));
      text.setAttribute("font-size", "10");
      text.setAttribute("pointer-events", "none");
      text.textContent = node.label.slice(0, Math.floor(width / 6));
      svg.appendChild(text);
    }
  }

  for (const summary of summaries) {
    const el = svgElement("rect");
    el.setAttribute("x", String(summary.x0 * opts.widthPx));
    el.setAttribute("width", String(Math.max((summary.x1 - summary.x0) * opts.widthPx, 1)));
    el.setAttribute("y", String(summary.depth * ROW_H));
    el.setAttribute("height", String(ROW_H - 1));
    el.setAttribute("fill", "url(#hatch)");
    const title = svgElement("title");
    title.textContent = `${summary.count} blocks (too narrow to draw)`;
    el.appendChild(title);
    svg.appendChild(el);
  }
}

export function ensureHatchPattern(svg: SVGSVGElement): void {
  if (svg.querySelector("#hatch")) return;
  const defs = svgElement("defs");
  const pattern = svgElement("pattern");
  pattern.setAttribute("id", "hatch");
  pattern.setAttribute("width", "4");
  pattern.setAttribute("height", "4");
  pattern.setAttribute("patternUnits", "userSpaceOnUse");
  const path = svgElement("path");
  path.setAttribute("d", "M0,4 L4,0");
  path.setAttribute("stroke", "rgb(150,150,150)");
  defs.appendChild(pattern);
  pattern.appendChild(path);
  svg.appendChild(defs);
}

export function renderMinimap(svg: SVGSVGElement, model: MinimapModel, widthPx: number): void {
  svg.replaceChildren();
  const height = 34;
  svg.setAttribute("height", String(height));
  const maxCount = Math.max(...model.slices.map((s) => s.count), 1);
  const sliceW = widthPx / Math.max(model.slices.length, 1);
  model.slices.forEach((slice, i) => {
    const bar = svgElement("rect");
    const h = (slice.count / maxCount) * (height - 10);
    bar.setAttribute("x", String(i * sliceW));
    bar.setAttribute("width", String(Math.max(sliceW - 1, 1)));
    bar.setAttribute("y", String(height - h));
    bar.setAttribute("height", String(h));
    bar.setAttribute("fill", "rgb(120,120,120)");
    svg.appendChild(bar);
  });
  const highlighter = svgElement("rect");
  highlighter.setAttribute("x", String(model.highlight.t0 * widthPx));
  highlighter.setAttribute("width", String(Math.max((model.highlight.t1 - model.highlight.t0) * widthPx, 2)));
  highlighter.setAttribute("y", "0");
  highlighter.setAttribute("height", String(height));
  highlighter.setAttribute("fill", "rgb(255,235,59)"); // zoom target in yellow
  highlighter.setAttribute("opacity", "0.45");
  svg.appendChild(highlighter);
  for (const mark of model.marks) {
    const line = svgElement("rect");
    line.setAttribute("x", String(mark.t * widthPx));
    line.setAttribute("width", "2");
    line.setAttribute("y", "0");
    line.setAttribute("height", String(height));
    line.setAttribute("fill", mark.color);
    svg.appendChild(line);
  }
}

export interface PlotRenderOptions {
  widthPx: number;
  heightPx: number;
  selected: Set<number>; // black
  context: Set<number>; // gray
  onBrush?: (ids: number[]) => void;
  onBarClick?: (ids: number[]) => void;
}

export function renderScatter(svg: SVGSVGElement, model: ScatterModel, opts: PlotRenderOptions, scaleY?: (v: number) => number): void {
  svg.replaceChildren();
  svg.setAttribute("height", String(opts.heightPx));
  if (!model.points.length) return;
  const xs = model.points.map((p) => p.x);
  const ys = model.points.map((p) => (scaleY ? scaleY(p.y) : p.y));
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  const sx = (v: number) => ((v - x0) / (x1 - x0 || 1)) * (opts.widthPx - 20) + 10;
  const sy = (v: number) => opts.heightPx - 12 - ((v - y0) / (y1 - y0 || 1)) * (opts.heightPx - 24);
  for (const point of model.points) {
    const c = svgElement("circle");
    c.setAttribute("cx", String(sx(point.x)));
    c.setAttribute("cy", String(sy(scaleY ? scaleY(point.y) : point.y)));
    c.setAttribute("r", "3");
    const id = point.ids[0];
    const fill = opts.selected.has(id) ? "black" : opts.context.has(id) ? GRAY : "rgb(31,119,180)";
    c.setAttribute("fill", fill);
    c.setAttribute("data-ids", point.ids.join(","));
    svg.appendChild(c);
  }
}

export function renderHistogram(svg: SVGSVGElement, model: HistogramModel, opts: PlotRenderOptions): void {
  svg.replaceChildren();
  svg.setAttribute("height", String(opts.heightPx));
  const all = [...model.bins.map((b) => b.count), ...model.specials.map((s) => s.count), 1];
  const max = Math.max(...all);
  const n = model.bins.length + model.specials.length;
  const barW = (opts.widthPx - 10) / Math.max(n, 1);
  let i = 0;
  const bar = (count: number, ids: number[], fill: string, label?: string) => {
    const el = svgElement("rect");
    const h = (count / max) * (opts.heightPx - 16);
    el.setAttribute("x", String(5 + i * barW));
    el.setAttribute("width", String(Math.max(barW - 1, 1)));
    el.setAttribute("y", String(opts.heightPx - h - 2));
    el.setAttribute("height", String(h));
    const anySelected = ids.some((id) => opts.selected.has(id));
    el.setAttribute("fill", anySelected ? "black" : fill);
    el.addEventListener("click", () => opts.onBarClick?.(ids));
    if (label) {
      const t = svgElement("title");
      t.textContent = `${label}: ${count}`;
      el.appendChild(t);
    }
    svg.appendChild(el);
    i += 1;
  };
  for (const b of model.bins) bar(b.count, b.ids, "rgb(31,119,180)", `${b.x0.toPrecision(3)}..${b.x1.toPrecision(3)}`);
  for (const s of model.specials) bar(s.count, s.ids, "rgb(227,74,51)", s.label); // annotated non-finite bins
}

export function renderBar(svg: SVGSVGElement, model: BarModel, opts: PlotRenderOptions): void {
  svg.replaceChildren();
  svg.setAttribute("height", String(opts.heightPx));
  const max = Math.max(...model.bars.map((b) => b.count), 1);
  const barW = (opts.widthPx - 10) / Math.max(model.bars.length, 1);
  model.bars.forEach((b, i) => {
    const el = svgElement("rect");
    const h = (b.count / max) * (opts.heightPx - 18);
    el.setAttribute("x", String(5 + i * barW));
    el.setAttribute("width", String(Math.max(barW - 2, 1)));
    el.setAttribute("y", String(opts.heightPx - h - 14));
    el.setAttribute("height", String(h));
    const anySelected = b.ids.some((id) => opts.selected.has(id));
    el.setAttribute("fill", anySelected ? "black" : "rgb(31,119,180)");
    el.setAttribute("data-key", b.key);
    el.addEventListener("click", () => opts.onBarClick?.(b.ids));
    const t = svgElement("title");
    t.textContent = `${b.key}: ${b.count}`;
    el.appendChild(t);
    svg.appendChild(el);
    const text = svgElement("text");
    text.setAttribute("x", String(5 + i * barW + barW / 2));
    text.setAttribute("y", String(opts.heightPx - 3));
    text.setAttribute("text-anchor", "middle");
    text.setAttribute("font-size", "9");
    text.textContent = b.key.slice(0, Math.max(Math.floor(barW / 6), 2));
    svg.appendChild(text);
  });
}

export function renderBoxes(svg: SVGSVGElement, stats: BoxStats[], opts: PlotRenderOptions): void {
  svg.replaceChildren();
  svg.setAttribute("height", String(opts.heightPx));
  if (!stats.length) return;
  const lo = Math.min(...stats.map((s) => s.lo));
  const hi = Math.max(...stats.map((s) => s.hi));
  const sy = (v: number) => opts.heightPx - 14 - ((v - lo) / (hi - lo || 1)) * (opts.heightPx - 26);
  const w = (opts.widthPx - 10) / stats.length;
  stats.forEach((s, i) => {
    const cx = 5 + i * w + w / 2;
    const whisker = svgElement("line");
    whisker.setAttribute("x1", String(cx));
    whisker.setAttribute("x2", String(cx));
    whisker.setAttribute("y1", String(sy(s.lo)));
    whisker.setAttribute("y2", String(sy(s.hi)));
    whisker.setAttribute("stroke", "black");
    svg.appendChild(whisker);
    const box = svgElement("rect");
    box.setAttribute("x", String(cx - w * 0.3));
    box.setAttribute("width", String(w * 0.6));
    box.setAttribute("y", String(sy(s.q3)));
    box.setAttribute("height", String(Math.max(sy(s.q1) - sy(s.q3), 1)));
    box.setAttribute("fill", "rgb(31,119,180)");
    box.setAttribute("opacity", "0.75");
    svg.appendChild(box);
    const med = svgElement("line");
    med.setAttribute("x1", String(cx - w * 0.3));
    med.setAttribute("x2", String(cx + w * 0.3));
    med.setAttribute("y1", String(sy(s.median)));
    med.setAttribute("y2", String(sy(s.median)));
    med.setAttribute("stroke", "white");
    svg.appendChild(med);
    const label = svgElement("text");
    label.setAttribute("x", String(cx));
    label.setAttribute("y", String(opts.heightPx - 2));
    label.setAttribute("text-anchor", "middle");
    label.setAttribute("font-size", "9");
    label.textContent = s.key.slice(0, 10);
    svg.appendChild(label);
  });
}
