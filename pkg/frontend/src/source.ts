/** Source-view synchronization and trace-spec editing model.
 *
 * Selecting a block jumps the source view to its span; call blocks also
 * highlight the callee definition. Spec editing accumulates track/exclude
 * choices from text selections until submitted.
 */

import { SpanPayload } from "./types.js";

export interface HighlightRange {
  startLine: number;
  endLine: number;
  kind: "site" | "callee";
}

export function highlightsForSpan(span: SpanPayload): HighlightRange[] {
  const out: HighlightRange[] = [];
  if (span.primary) {
    out.push({ startLine: span.primary.start_line, endLine: span.primary.end_line, kind: "site" });
  }
  if (span.callee) {
    out.push({ startLine: span.callee.start_line, endLine: span.callee.end_line, kind: "callee" });
  }
  return out;
}

export interface SpecDraft {
  targets: { name: string; kind: "variable" | "expression"; scope?: string; line?: number }[];
  customs: { label: string; expression_text: string; anchor_name: string; anchor_scope?: string }[];
  exclusions: string[];
  use_default_exclusions: boolean;
}

export function emptyDraft(): SpecDraft {
  return { targets: [], customs: [], exclusions: [], use_default_exclusions: true };
}

/** Right-click "track" on a highlighted identifier or expression. */
export function addTrack(draft: SpecDraft, text: string, line: number, scope?: string): SpecDraft {
  const isIdentifier = /^[A-Za-z_][A-Za-z0-9_]*$/.test(text.trim());
  const target = isIdentifier
    ? { name: text.trim(), kind: "variable" as const, scope }
    : { name: text.trim(), kind: "expression" as const, line };
  const exists = draft.targets.some((t) => t.name === target.name && t.scope === target.scope);
  return exists ? draft : { ...draft, targets: [...draft.targets, target] };
}

/** Right-click "exclude" on a function or library name. */
export function addExclude(draft: SpecDraft, name: string): SpecDraft {
  const trimmed = name.trim();
  return draft.exclusions.includes(trimmed)
    ? draft
    : { ...draft, exclusions: [...draft.exclusions, trimmed] };
}

export function addCustom(
  draft: SpecDraft,
  label: string,
  expression: string,
  anchorName: string,
  anchorScope?: string
): SpecDraft {
  return {
    ...draft,
    customs: [
      ...draft.customs,
      { label, expression_text: expression, anchor_name: anchorName, anchor_scope: anchorScope },
    ],
  };
}

/** Tracked spans persist across re-trace: drafts serialize straight to the
 * PUT /spec body, and the validated response round-trips back into a draft. */
export function draftFromValidated(spec: {
  targets: { name: string; kind: string; scope?: string | null; span?: { start_line: number } | null }[];
  customs: { label: string; expression_text: string; anchor_name: string; anchor_scope?: string | null }[];
  exclusions: string[];
}): SpecDraft {
  return {
    targets: spec.targets.map((t) => ({
      name: t.name,
      kind: t.kind === "expression" ? "expression" : "variable",
      scope: t.scope ?? undefined,
      line: t.span?.start_line,
    })),
    customs: spec.customs.map((c) => ({
      label: c.label,
      expression_text: c.expression_text,
      anchor_name: c.anchor_name,
      anchor_scope: c.anchor_scope ?? undefined,
    })),
    exclusions: [...spec.exclusions],
    use_default_exclusions: false,
  };
}
