/** Generalized context tree layout (icicle): x is execution order, y is depth.
 *
 * Every block's rectangle is contained in its parent's; siblings split the
 * parent's extent by subtree leaf count, in timestamp order, so everything
 * left of a block executed before it. Zooming re-roots the layout: the zoom
 * target expands to the full width. Blocks narrower than a pixel threshold
 * aggregate into hatched summary runs instead of rendering unreadably.
 */

import { TreeNode } from "./types.js";

export interface IcicleRect {
  node: TreeNode;
  parent: number; // parent block id, -1 for the layout origin
  x0: number; // fractions of full width, x0 <= x1
  x1: number;
  depth: number;
}

export interface SummaryRect {
  x0: number;
  x1: number;
  depth: number;
  count: number; // aggregated sibling blocks
  parent: number;
}

export function indexTree(root: TreeNode): Map<number, TreeNode> {
  const map = new Map<number, TreeNode>();
  const stack = [root];
  while (stack.length) {
    const node = stack.pop()!;
    map.set(node.id, node);
    for (const child of node.children) stack.push(child);
  }
  return map;
}

export function findNode(root: TreeNode, id: number): TreeNode | null {
  return indexTree(root).get(id) ?? null;
}

/** Lay out the subtree under ``zoomRoot`` (or the payload root) over [0, 1]. */
export function layout(root: TreeNode, zoomRoot?: number): IcicleRect[] {
  const origin = zoomRoot === undefined ? root : findNode(root, zoomRoot);
  if (!origin) throw new Error(`zoom root ${zoomRoot} is not in the loaded tree`);
  const rects: IcicleRect[] = [];
  const place = (node: TreeNode, parent: number, x0: number, x1: number, depth: number) => {
    rects.push({ node, parent, x0, x1, depth });
    const total = node.children.reduce((acc, c) => acc + c.n_leaves, 0);
    if (total === 0) return;
    let cursor = x0;
    const width = x1 - x0;
    for (const child of node.children) {
      const share = (child.n_leaves / total) * width;
      place(child, node.id, cursor, cursor + share, depth + 1);
      cursor += share;
    }
  };
  place(origin, -1, 0, 1, 0);
  return rects;
}

/** Merge sub-pixel sibling rectangles into hatched summary runs. */
export function aggregateNarrow(
  rects: IcicleRect[],
  plotWidthPx: number,
  minPx = 1
): { drawn: IcicleRect[]; summaries: SummaryRect[] } {
  const minFrac = minPx / plotWidthPx;
  const drawn: IcicleRect[] = [];
  const narrowByGroup = new Map<string, IcicleRect[]>();
  for (const rect of rects) {
    if (rect.x1 - rect.x0 >= minFrac) {
      drawn.push(rect);
      continue;
    }
    const key = `${rect.parent}:${rect.depth}`;
    const bucket = narrowByGroup.get(key) ?? [];
    bucket.push(rect);
    narrowByGroup.set(key, bucket);
  }
  const summaries: SummaryRect[] = [];
  for (const bucket of narrowByGroup.values()) {
    bucket.sort((a, b) => a.x0 - b.x0);
    let run: IcicleRect[] = [];
    const flush = () => {
      if (!run.length) return;
      summaries.push({
        x0: run[0].x0,
        x1: run[run.length - 1].x1,
        depth: run[0].depth,
        count: run.length,
        parent: run[0].parent,
      });
      run = [];
    };
    for (const rect of bucket) {
      if (run.length && rect.x0 - run[run.length - 1].x1 > minFrac / 4) flush();
      run.push(rect);
    }
    flush();
  }
  return { drawn, summaries };
}

/** Context-bar highlighter bounds for a zoomed block: its timestamp extent
 * as a fraction of the whole trace's. */
export function minimapHighlight(
  root: TreeNode,
  zoomId: number,
  totalTs: number
): { t0: number; t1: number } {
  const node = findNode(root, zoomId);
  if (!node || totalTs <= 0) return { t0: 0, t1: 1 };
  return { t0: node.ts / totalTs, t1: node.end_ts / totalTs };
}

/** Grayscale context-bar model: per-depth block counts plus the highlighter
 * and colored marks for off-screen highlights (zoom target in yellow). */
export interface MinimapModel {
  slices: { depth: number; count: number }[];
  highlight: { t0: number; t1: number };
  marks: { id: number; t: number; color: string }[];
}

export function minimapModel(
  payload: { root: TreeNode; minimap: { depth: number; count: number }[]; total_ts: number },
  zoomId: number,
  highlighted: { id: number; color: string }[]
): MinimapModel {
  const index = indexTree(payload.root);
  const marks = highlighted
    .filter((h) => index.has(h.id))
    .map((h) => ({ id: h.id, t: index.get(h.id)!.ts / Math.max(payload.total_ts, 1), color: h.color }));
  return {
    slices: payload.minimap,
    highlight: minimapHighlight(payload.root, zoomId, payload.total_ts),
    marks,
  };
}
