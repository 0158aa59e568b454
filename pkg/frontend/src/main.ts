/** App shell: wires the API client, view state, and renderers together.
 *
 * Panels: source view (left), generalized context tree + context bar
 * (right/top), value plot with type switcher (right/bottom).
 */

import { ApiClient, LatestOnly } from "./api.js";
import { layout, minimapModel } from "./icicle.js";
import { brushToBlocks, subtreeSelection } from "./linking.js";
import * as plots from "./plots.js";
import {
  ensureHatchPattern,
  renderBar,
  renderBoxes,
  renderHistogram,
  renderMinimap,
  renderScatter,
  renderTree,
} from "./render.js";
import { highlightsForSpan } from "./source.js";
import * as state from "./state.js";
import { NameStats, PlotPayload, TreeNode, TreePayload } from "./types.js";

const api = new ApiClient();
const latest = new LatestOnly();

interface App {
  sid: string;
  view: state.ViewState;
  tree: TreePayload | null;
  plot: PlotPayload | null;
  stats: Map<string, NameStats>;
  source: string;
}

const app: App = {
  sid: new URLSearchParams(location.search).get("session") ?? "",
  view: state.initialState(),
  tree: null,
  plot: null,
  stats: new Map(),
  source: "",
};

function el<T extends HTMLElement | SVGSVGElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as unknown as T;
}

async function boot(): Promise<void> {
  if (!app.sid) {
    el<HTMLElement>("status").textContent = "open with ?session=<id> (create one via the API or CLI)";
    return;
  }
  const source = await api.getSource(app.sid);
  app.source = source.files[source.entry] ?? "";
  renderSource();
  const names = await api.getNames(app.sid);
  for (const stat of names) app.stats.set(stat.name, stat);
  fillVariablePicker(names);
  if (names.length) {
    app.view = state.selectVariable(app.view, names[0].name);
  }
  await reloadTree();
  if (names.length) await showPlot(names[0]);
  el<HTMLElement>("status").textContent = "ready";
}

function fillVariablePicker(names: NameStats[]): void {
  const picker = el<HTMLElement>("variable-picker") as HTMLSelectElement;
  picker.replaceChildren();
  for (const stat of names) {
    const option = document.createElement("option");
    option.value = stat.name;
    option.textContent = `${stat.name} (${stat.type})`;
    picker.appendChild(option);
  }
  picker.disabled = names.length === 0; // no tracked variables: coloring off
  picker.onchange = () => {
    app.view = state.selectVariable(app.view, picker.value);
    redrawTree();
  };
}

async function reloadTree(): Promise<void> {
  const payload = await latest.run("tree", () => api.getTree(app.sid, app.view.zoomRoot, 8));
  if (!payload) return;
  app.tree = payload;
  redrawTree();
}

function redrawTree(): void {
  if (!app.tree) return;
  const svg = el<SVGSVGElement>("tree");
  ensureHatchPattern(svg);
  const width = svg.clientWidth || 900;
  const rects = layout(app.tree.root);
  renderTree(svg, rects, {
    widthPx: width,
    selectedVariable: app.view.selectedVariable,
    stats: app.view.selectedVariable ? app.stats.get(app.view.selectedVariable) ?? null : null,
    highlighted: new Set(app.view.highlightedBlocks),
    deps: new Set(app.view.depBlocks),
    filteredOut: new Set(app.view.filteredOutIds),
    onClick: (node) => void onBlockClick(node),
    onContext: (node) => void onBlockZoom(node),
  });
  const minimap = minimapModel(
    app.tree,
    app.view.zoomRoot || app.tree.root.id,
    [...app.view.highlightedBlocks, ...app.view.depBlocks].map((id) => ({ id, color: "rgb(214,39,40)" }))
  );
  renderMinimap(el<SVGSVGElement>("minimap"), minimap, width);
}

async function onBlockClick(node: TreeNode): Promise<void> {
  app.view = state.selectBlock(app.view, node.id);
  const span = await api.getSpan(app.sid, node.id);
  paintSourceHighlights(span);
  if (node.type === "tracked") {
    const deps = await api.getDeps(app.sid, node.id);
    app.view = state.showDependencies(app.view, deps.deps);
  } else {
    app.view = state.showDependencies(app.view, []);
  }
  // filter the plot to the subtree rooted at the selected block
  if (app.view.names.length === 1 && app.plot?.rows) {
    const name = app.view.names[0];
    const sub = await api.getPlot(app.sid, {
      names: [name],
      plot_kind: app.view.plotKind ?? "histogram",
      with_time: app.view.withTime,
      filters: { subtree_root: node.id },
    });
    const parent = await api.getPlot(app.sid, {
      names: [name],
      plot_kind: app.view.plotKind ?? "histogram",
      with_time: app.view.withTime,
    });
    const selection = subtreeSelection(sub.rows ?? [], parent.rows ?? []);
    drawPlot(app.plot, new Set(selection.selected), new Set(selection.context));
  }
  redrawTree();
}

async function onBlockZoom(node: TreeNode): Promise<void> {
  app.view = state.zoom(app.view, node.id);
  await reloadTree();
}

async function showPlot(stat: NameStats): Promise<void> {
  const kind = stat.type === "N" ? "bar" : "scatter";
  const withTime = stat.type === "Q";
  app.view = state.configurePlot(app.view, [stat.name], [stat.type], kind as never, { withTime });
  const payload = await latest.run("plot", () =>
    api.getPlot(app.sid, { names: [stat.name], plot_kind: kind, with_time: withTime })
  );
  if (!payload) return;
  app.plot = payload;
  fillSwitcher(payload);
  drawPlot(payload, new Set(), new Set());
}

function fillSwitcher(payload: PlotPayload): void {
  const bar = el<HTMLElement>("plot-switcher");
  bar.replaceChildren();
  for (const kind of payload.allowed) {
    const button = document.createElement("button");
    button.textContent = kind;
    button.disabled = kind === payload.kind;
    button.onclick = async () => {
      const next = await api.getPlot(app.sid, {
        names: payload.names,
        plot_kind: kind,
        with_time: app.view.withTime,
        group_by: app.view.groupBy,
      });
      app.plot = next;
      fillSwitcher(next);
      drawPlot(next, new Set(), new Set());
    };
    bar.appendChild(button);
  }
  const symlogButton = document.createElement("button");
  symlogButton.textContent = app.view.symlog ? "linear scale" : "symmetric log";
  symlogButton.onclick = () => {
    app.view = state.toggleSymlog(app.view);
    if (app.plot) drawPlot(app.plot, new Set(app.view.brushedIds), new Set());
    fillSwitcher(payload);
  };
  bar.appendChild(symlogButton);
}

function drawPlot(payload: PlotPayload, selected: Set<number>, context: Set<number>): void {
  const svg = el<SVGSVGElement>("plot");
  const opts = {
    widthPx: svg.clientWidth || 640,
    heightPx: 260,
    selected,
    context,
    onBarClick: (ids: number[]) => {
      if (!app.tree) return;
      const blocks = brushToBlocks(app.tree.root, ids);
      app.view = state.brush(app.view, ids, blocks);
      redrawTree();
      drawPlot(payload, new Set(ids), context);
    },
  };
  const rows = payload.rows ?? [];
  switch (payload.kind) {
    case "histogram":
      renderHistogram(svg, plots.histogram(rows), opts);
      break;
    case "bar":
      renderBar(svg, plots.bar(rows), opts);
      break;
    case "scatter": {
      const model = payload.tuples ? plots.scatterJoin(payload.tuples) : plots.scatterOverTime(rows);
      renderScatter(svg, model, opts, app.view.symlog ? (v) => plots.symlog(v) : undefined);
      break;
    }
    case "box":
      renderBoxes(svg, plots.boxes(payload.groups ?? []), opts);
      break;
    default: {
      // small multiples / parallel coordinates fall back to per-group scatter
      const model = plots.scatterOverTime(rows);
      renderScatter(svg, model, opts);
    }
  }
}

function renderSource(): void {
  const pre = el<HTMLElement>("source");
  pre.replaceChildren();
  app.source.split("\n").forEach((line, i) => {
    const div = document.createElement("div");
    div.id = `line-${i + 1}`;
    div.className = "srcline";
    div.textContent = `${String(i + 1).padStart(3)} ${line}`;
    pre.appendChild(div);
  });
}

function paintSourceHighlights(span: Parameters<typeof highlightsForSpan>[0]): void {
  document.querySelectorAll(".srcline").forEach((n) => n.classList.remove("hl-site", "hl-callee"));
  let first: HTMLElement | null = null;
  for (const range of highlightsForSpan(span)) {
    for (let line = range.startLine; line <= range.endLine; line++) {
      const node = document.getElementById(`line-${line}`);
      if (node) {
        node.classList.add(range.kind === "site" ? "hl-site" : "hl-callee");
        first = first ?? node;
      }
    }
  }
  first?.scrollIntoView({ block: "center" });
}

document.addEventListener("DOMContentLoaded", () => {
  el<HTMLElement>("reset-zoom").onclick = async () => {
    app.view = state.resetZoom(app.view);
    await reloadTree();
  };
  void boot();
});
