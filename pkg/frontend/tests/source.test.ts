import { describe, expect, it } from "vitest";

import { addCustom, addExclude, addTrack, draftFromValidated, emptyDraft, highlightsForSpan } from "../src/source.js";
import { SpanPayload } from "../src/types.js";
import { fixture } from "./helpers.js";

describe("source view sync", () => {
  it("a call block highlights both call site and callee definition", () => {
    const span = fixture<SpanPayload>("fib_span_call");
    const ranges = highlightsForSpan(span);
    const kinds = ranges.map((r) => r.kind);
    expect(kinds).toContain("site");
    expect(kinds).toContain("callee");
    const callee = ranges.find((r) => r.kind === "callee")!;
    expect(callee.startLine).toBe(1);
    expect(callee.endLine).toBeGreaterThan(callee.startLine);
  });

  it("the root highlights nothing", () => {
    const ranges = highlightsForSpan({ block: 0, type: "root", primary: null, callee: null });
    expect(ranges).toHaveLength(0);
  });
});

describe("spec editing", () => {
  it("identifier selections become variable targets, others expressions", () => {
    let draft = emptyDraft();
    draft = addTrack(draft, "val", 3, "fib");
    draft = addTrack(draft, "a + b", 7);
    expect(draft.targets).toEqual([
      { name: "val", kind: "variable", scope: "fib" },
      { name: "a + b", kind: "expression", line: 7 },
    ]);
  });

  it("deduplicates targets and exclusions", () => {
    let draft = emptyDraft();
    draft = addTrack(draft, "x", 1, "");
    draft = addTrack(draft, "x", 1, "");
    draft = addExclude(draft, "numpy");
    draft = addExclude(draft, "numpy");
    expect(draft.targets).toHaveLength(1);
    expect(draft.exclusions).toEqual(["numpy"]);
  });

  it("custom expressions anchor to a tracked item", () => {
    let draft = emptyDraft();
    draft = addTrack(draft, "weight", 20, "");
    draft = addCustom(draft, "n_keys", "len(edge_keys)", "weight", "");
    expect(draft.customs[0]).toEqual({
      label: "n_keys",
      expression_text: "len(edge_keys)",
      anchor_name: "weight",
      anchor_scope: "",
    });
  });

  it("tracked spans persist across re-trace via the validated round-trip", () => {
    const validated = {
      targets: [
        { name: "val", kind: "variable", scope: "fib", span: { start_line: 3 } },
        { name: "a + b", kind: "expression", scope: "", span: { start_line: 7 } },
      ],
      customs: [],
      exclusions: ["math", "numpy", "print", "len"],
    };
    const draft = draftFromValidated(validated);
    expect(draft.targets[0]).toEqual({ name: "val", kind: "variable", scope: "fib", line: 3 });
    expect(draft.targets[1].line).toBe(7);
    expect(draft.use_default_exclusions).toBe(false); // already resolved
    expect(draft.exclusions).toContain("math");
  });
});
