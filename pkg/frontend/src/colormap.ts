/** Perceptually uniform sequential colormap (viridis anchor points). */

const ANCHORS: [number, number, number][] = [
  [68, 1, 84],
  [71, 44, 122],
  [59, 81, 139],
  [44, 113, 142],
  [33, 144, 141],
  [39, 173, 129],
  [92, 200, 99],
  [170, 220, 50],
  [253, 231, 37],
];

/** Map t in [0, 1] (clamped) to a CSS hex color. */
export function viridis(t: number): string {
  const x = Math.min(1, Math.max(0, t)) * (ANCHORS.length - 1);
  const i = Math.min(ANCHORS.length - 2, Math.floor(x));
  const f = x - i;
  const rgb = ANCHORS[i].map((a, c) => Math.round(a + f * (ANCHORS[i + 1][c] - a)));
  return "#" + rgb.map((v) => v.toString(16).padStart(2, "0")).join("");
}

/** Distinguishable line colors for multi-trace panels. */
export const TRACE_COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];
