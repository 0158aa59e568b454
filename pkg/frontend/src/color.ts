/** Value-to-color mapping for the generalized context tree.
 *
 * Positive values shade white (low) to purple (high); negative values white
 * (least negative) to orange (most negative). Blocks not carrying the
 * selected variable are gray. Normalization is per variable over the whole
 * trace, from the backend's aggregate stats.
 */

import { NameStats, WireValue, isNonFinite, isNumeric } from "./types.js";

export const GRAY = "rgb(204,204,204)";
export const CALL_TEAL = "rgb(141,211,199)";
export const LOOP_SHADE = "rgb(190,186,218)";
export const NONFINITE_RED = "rgb(227,74,51)";

const PURPLE: [number, number, number] = [106, 27, 154];
const ORANGE: [number, number, number] = [230, 126, 34];
const WHITE: [number, number, number] = [255, 255, 255];

function mix(a: [number, number, number], b: [number, number, number], t: number): string {
  const clamp = Math.max(0, Math.min(1, t));
  const channel = (i: number) => Math.round(a[i] + (b[i] - a[i]) * clamp);
  return `rgb(${channel(0)},${channel(1)},${channel(2)})`;
}

/** Color for one tracked value of the selected variable. */
export function valueColor(value: WireValue, stats: NameStats): string {
  if (isNonFinite(value)) return NONFINITE_RED;
  if (!isNumeric(value)) return GRAY;
  if (value >= 0) {
    const hi = Math.max(stats.max ?? 0, 0);
    return mix(WHITE, PURPLE, hi === 0 ? 0 : value / hi);
  }
  const lo = Math.min(stats.min ?? 0, 0);
  return mix(WHITE, ORANGE, lo === 0 ? 0 : value / lo);
}

/** Structural blocks keep a fixed palette; everything else is gray. */
export function blockColor(type: string): string {
  if (type === "call") return CALL_TEAL;
  if (type === "loop" || type === "iteration") return LOOP_SHADE;
  return GRAY;
}
