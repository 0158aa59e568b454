/** Wire types for the /api/v1 backend. These mirror the JSON payloads exactly. */

export type BlockType = "root" | "call" | "loop" | "iteration" | "tracked" | "custom";

export type WireValue = number | string | boolean | null;

/** One node of the depth-windowed tree payload. */
export interface TreeNode {
  id: number;
  type: BlockType;
  line: number;
  ts: number;
  end_ts: number;
  label: string;
  name: string | null;
  iteration: number | null;
  aborted: boolean;
  n_children: number;
  n_leaves: number;
  value?: WireValue;
  is_variable?: boolean;
  children: TreeNode[];
  truncated?: boolean;
}

export interface MinimapSlice {
  depth: number;
  count: number;
}

export interface TreePayload {
  root: TreeNode;
  minimap: MinimapSlice[];
  total_ts: number;
  total_blocks: number;
  aborted: boolean;
  truncated: boolean;
}

export interface ValueRow {
  id: number;
  name: string;
  line: number;
  ts: number;
  value: WireValue;
  parent_id: number;
  iteration: number | null;
}

export interface NameStats {
  name: string;
  count: number;
  n_nonfinite: number;
  min: number | null;
  max: number | null;
  type: "Q" | "N" | "O";
}

export interface JoinTuple {
  instance: number;
  ts: number;
  values: ValueRow[];
}

export interface PlotGroup {
  key: string;
  block: number | null;
  rows: ValueRow[];
}

export interface PlotPayload {
  kind: string;
  names: string[];
  signature: string[];
  allowed: string[];
  grouped: boolean;
  rows?: ValueRow[];
  stats?: NameStats;
  tuples?: JoinTuple[];
  groups?: PlotGroup[];
}

export interface DepsPayload {
  block: number;
  closure: string[];
  deps: number[];
}

export interface SpanRange {
  file: string;
  start_line: number;
  end_line: number;
  start_col: number;
  end_col: number;
}

export interface SpanPayload {
  block: number;
  type: BlockType;
  primary: SpanRange | null;
  callee: SpanRange | null;
}

export interface SessionBrief {
  id: string;
  entry: string;
  files: string[];
  status: "editing" | "tracing" | "ready" | "failed";
  version: number;
}

export interface Trackable {
  name: string;
  scope: string;
  line: number;
  kind: string;
}

export interface GroupBySpec {
  kind: "loop" | "name";
  key: number | string;
}

export interface PlotRequest {
  names: string[];
  plot_kind: string;
  with_time?: boolean;
  filters?: {
    value_min?: number;
    value_max?: number;
    ids?: number[];
    subtree_root?: number;
  };
  group_by?: GroupBySpec | null;
}

export const NONFINITE = ["__NaN__", "__Inf__", "__-Inf__"] as const;

export function isNonFinite(v: WireValue): v is string {
  return typeof v === "string" && (NONFINITE as readonly string[]).includes(v);
}

export function isOpaque(v: WireValue): v is string {
  return typeof v === "string" && v.startsWith("__obj__");
}

export function isNumeric(v: WireValue): v is number {
  return typeof v === "number";
}
