/** Linked selection between value plots and the generalized context tree.
 *
 * Value records are leaf blocks, so plot-side row ids map to tree blocks by
 * identity; these helpers validate that mapping against the loaded tree and
 * compute the reverse direction (blocks -> contained rows).
 */

import { indexTree } from "./icicle.js";
import { TreeNode, ValueRow } from "./types.js";

/** Blocks to highlight for a brushed set of plot rows: exactly the tracked
 * (or custom) leaves with those ids that exist in the loaded tree. */
export function brushToBlocks(root: TreeNode, rowIds: number[]): number[] {
  const index = indexTree(root);
  return rowIds.filter((id) => {
    const node = index.get(id);
    return node !== undefined && (node.type === "tracked" || node.type === "custom");
  });
}

/** Bar selection highlights the member blocks of that bar. */
export function barToBlocks(root: TreeNode, memberIds: number[]): number[] {
  return brushToBlocks(root, memberIds);
}

/** Rows of ``name`` whose records sit inside any of the given blocks'
 * subtrees (client-side mirror of the store's values_for_blocks). */
export function valuesUnderBlocks(root: TreeNode, blockIds: number[], name: string): number[] {
  const wanted = new Set(blockIds);
  const out: number[] = [];
  const walk = (node: TreeNode, inside: boolean) => {
    const here = inside || wanted.has(node.id);
    if (here && (node.type === "tracked" || node.type === "custom") && node.name === name) {
      out.push(node.id);
    }
    for (const child of node.children) walk(child, here);
  };
  walk(root, false);
  return out;
}

/** Subtree filter model: selected rows drawn black, parent-subtree context gray. */
export interface SubtreeSelection {
  selected: number[];
  context: number[];
}

export function subtreeSelection(rows: ValueRow[], contextRows: ValueRow[]): SubtreeSelection {
  const selected = rows.map((r) => r.id);
  const selectedSet = new Set(selected);
  return {
    selected,
    context: contextRows.map((r) => r.id).filter((id) => !selectedSet.has(id)),
  };
}
