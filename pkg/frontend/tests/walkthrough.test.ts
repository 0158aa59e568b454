/** Scripted session reproducing the longest-weighted-path discovery: a bar
 * plot locates the Barrier iteration, the subtree selection shows that no
 * incoming path weight reaches 5, and the grouped view reveals the
 * double-keyed edge the algorithm overlooks. */

import { describe, expect, it } from "vitest";

import { findNode } from "../src/icicle.js";
import { barToBlocks } from "../src/linking.js";
import { bar, boxes } from "../src/plots.js";
import { brush, configurePlot, initialState, selectBlock, zoom } from "../src/state.js";
import { PlotPayload, TreePayload } from "../src/types.js";
import { fixture } from "./helpers.js";

const tree = fixture<TreePayload>("lwp_tree");
const labelBar = fixture<PlotPayload>("lwp_label_bar");
const barrierWeights = fixture<{ iteration: number; plot: PlotPayload }>("lwp_barrier_weights");
const grouped = fixture<PlotPayload>("lwp_nkeys_grouped");

describe("longest-weighted-path walkthrough", () => {
  it("step 1: the node-label bar plot locates the Barrier iteration", () => {
    let view = initialState();
    view = configurePlot(view, ["label"], labelBar.signature, "bar");
    expect(labelBar.allowed).toContain("bar");

    const model = bar(labelBar.rows!);
    const barrier = model.bars.find((b) => b.key === "Barrier");
    expect(barrier).toBeDefined();

    const blocks = barToBlocks(tree.root, barrier!.ids);
    view = brush(view, barrier!.ids, blocks);
    expect(view.highlightedBlocks).toHaveLength(1);

    // the highlighted record sits in the iteration the backend reported
    const record = findNode(tree.root, view.highlightedBlocks[0])!;
    const labelRow = labelBar.rows!.find((r) => r.value === "Barrier")!;
    expect(record.id).toBe(labelRow.id);
    expect(labelRow.parent_id).toBe(barrierWeights.iteration);
    const iteration = findNode(tree.root, barrierWeights.iteration)!;
    expect(iteration.type).toBe("iteration");
  });

  it("step 2: subtree selection shows no path weight equal to 5", () => {
    let view = initialState();
    view = selectBlock(view, barrierWeights.iteration);
    view = zoom(view, barrierWeights.iteration);

    const weights = barrierWeights.plot.rows!.map((r) => r.value);
    expect(weights.length).toBeGreaterThan(0);
    expect(weights).not.toContain(5); // the weight-5 edge never shows up
    expect(Math.max(...(weights as number[]))).toBeLessThan(5);
  });

  it("step 3: the grouped view reveals the double-keyed edge", () => {
    expect(grouped.grouped).toBe(true);
    expect(grouped.allowed).toContain("small_multiples");

    const barrierGroup = grouped.groups!.find((g) => g.key === "Barrier")!;
    const keyCounts = barrierGroup.rows.map((r) => r.value);
    expect(keyCounts).toContain(2); // one predecessor edge-dict has two keys
    for (const group of grouped.groups!) {
      if (group.key !== "Barrier") {
        expect(group.rows.every((r) => r.value === 1)).toBe(true);
      }
    }

    // box stats make the outlier visible in the grouped plot
    const stats = boxes(grouped.groups!);
    const barrierBox = stats.find((s) => s.key === "Barrier")!;
    expect(barrierBox.hi).toBe(2);
  });
});
