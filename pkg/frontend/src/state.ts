/** ViewState and its transitions. Pure: every action returns a new state, so
 * filter-then-clear can restore the prior view exactly from a snapshot. */

import { allowedPlots, PlotKind } from "./admissible.js";
import { GroupBySpec } from "./types.js";

export interface ViewState {
  selectedVariable: string | null; // colors the context tree
  zoomRoot: number; // block id; 0 = whole trace
  selectedBlock: number | null; // subtree filter source
  brushedIds: number[]; // plot-side selection (row ids)
  highlightedBlocks: number[]; // linked tree blocks (red)
  depBlocks: number[]; // dependency highlights (red)
  filteredOutIds: number[]; // rows removed by brush-filter (grayed in tree)
  names: string[]; // variables on the plot
  plotKind: PlotKind | null;
  withTime: boolean;
  groupBy: GroupBySpec | null;
  symlog: boolean;
  snapshot?: ViewState; // pre-filter view, for exact restore
}

export function initialState(): ViewState {
  return {
    selectedVariable: null,
    zoomRoot: 0,
    selectedBlock: null,
    brushedIds: [],
    highlightedBlocks: [],
    depBlocks: [],
    filteredOutIds: [],
    names: [],
    plotKind: null,
    withTime: false,
    groupBy: null,
    symlog: false,
  };
}

export function selectVariable(state: ViewState, name: string | null): ViewState {
  return { ...state, selectedVariable: name };
}

/** Plot configuration honors admissibility: an inadmissible kind is refused. */
export function configurePlot(
  state: ViewState,
  names: string[],
  signature: string[],
  kind: PlotKind,
  options: { withTime?: boolean; groupBy?: GroupBySpec | null } = {}
): ViewState {
  const grouped = (options.groupBy ?? null) !== null;
  const sig = options.withTime ? [...signature, "Q"] : signature;
  const offered = allowedPlots(sig, grouped);
  if (!offered.includes(kind)) {
    throw new Error(`plot kind ${kind} not admissible for ${sig.join("x")}${grouped ? " grouped" : ""}`);
  }
  return {
    ...state,
    names,
    plotKind: kind,
    withTime: options.withTime ?? false,
    groupBy: options.groupBy ?? null,
  };
}

/** The switcher lists exactly the admissible kinds for the current query. */
export function switcherOptions(signature: string[], grouped: boolean, withTime: boolean): PlotKind[] {
  return allowedPlots(withTime ? [...signature, "Q"] : signature, grouped);
}

export function brush(state: ViewState, rowIds: number[], linkedBlocks: number[]): ViewState {
  return { ...state, brushedIds: [...rowIds], highlightedBlocks: [...linkedBlocks] };
}

export function clearBrush(state: ViewState): ViewState {
  return { ...state, brushedIds: [], highlightedBlocks: [] };
}

export function selectBlock(state: ViewState, blockId: number | null): ViewState {
  return { ...state, selectedBlock: blockId };
}

export function showDependencies(state: ViewState, depBlocks: number[]): ViewState {
  return { ...state, depBlocks: [...depBlocks] };
}

/** Filter the plot down to the brushed points; everything else grays out in
 * the tree. Snapshots the current view for an exact restore. */
export function filterToBrush(state: ViewState, allRowIds: number[]): ViewState {
  if (!state.brushedIds.length) return state;
  const kept = new Set(state.brushedIds);
  const removed = allRowIds.filter((id) => !kept.has(id));
  const { snapshot: _drop, ...bare } = state;
  return {
    ...state,
    filteredOutIds: removed,
    brushedIds: [],
    highlightedBlocks: [],
    snapshot: bare as ViewState,
  };
}

/** Restores the exact pre-filter state. */
export function clearFilter(state: ViewState): ViewState {
  return state.snapshot ? { ...state.snapshot } : { ...state, filteredOutIds: [] };
}

export function zoom(state: ViewState, blockId: number): ViewState {
  return { ...state, zoomRoot: blockId };
}

export function resetZoom(state: ViewState): ViewState {
  return { ...state, zoomRoot: 0 };
}

export function toggleSymlog(state: ViewState): ViewState {
  return { ...state, symlog: !state.symlog };
}
