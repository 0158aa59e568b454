/** Plot-kind admissibility per data-type signature; mirrors the backend table.
 *
 * Ungrouped: Q -> histogram, N -> bar, QxQ -> scatter, QxQxQ... -> parallel
 * coordinates. Grouped N/Q/QxQ -> small multiples, plus box for grouped Q.
 * The plot-type switcher must never offer anything outside this mapping.
 */

export type PlotKind =
  | "histogram"
  | "bar"
  | "scatter"
  | "parallel_coordinates"
  | "small_multiples"
  | "box";

export function allowedPlots(signature: string[], grouped: boolean): PlotKind[] {
  if (signature.length === 0 || signature.includes("O")) return [];
  const sig = signature.join("x");
  if (grouped) {
    if (sig === "Q") return ["small_multiples", "box"];
    if (sig === "N" || sig === "QxQ") return ["small_multiples"];
    return [];
  }
  if (sig === "Q") return ["histogram"];
  if (sig === "N") return ["bar"];
  if (sig === "QxQ") return ["scatter"];
  if (signature.length >= 3 && signature.every((s) => s === "Q")) return ["parallel_coordinates"];
  return [];
}
