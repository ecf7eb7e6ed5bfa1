/** Minimal SVG assembly: elements, axes and linear coordinate scales. */

export function el(tag: string, attrs: Record<string, string | number>, body = ""): string {
  const parts = Object.entries(attrs).map(([k, v]) => `${k}="${v}"`);
  const open = `<${tag} ${parts.join(" ")}`;
  return body ? `${open}>${body}</${tag}>` : `${open}/>`;
}

export function document(width: number, height: number, body: string[]): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    el("rect", { x: 0, y: 0, width, height, fill: "white" }),
    ...body,
    "</svg>",
    "",
  ].join("\n");
}

export interface Scale {
  (value: number): number;
  domain: [number, number];
}

/** Linear map from [lo, hi] to pixel range [a, b]; degenerate domains are padded. */
export function linearScale(lo: number, hi: number, a: number, b: number): Scale {
  if (hi - lo < 1e-300) {
    lo -= 0.5;
    hi += 0.5;
  }
  const fn = ((value: number) => a + ((value - lo) / (hi - lo)) * (b - a)) as Scale;
  fn.domain = [lo, hi];
  return fn;
}

export function polyline(xs: number[], ys: number[], color: string, width = 1.5): string {
  const points = xs.map((x, i) => `${x.toFixed(2)},${ys[i].toFixed(2)}`).join(" ");
  return el("polyline", { points, fill: "none", stroke: color, "stroke-width": width });
}

export function axes(x: Scale, y: Scale, px: [number, number], py: [number, number],
                     xlabel: string, ylabel: string): string[] {
  const [x0, x1] = px;
  const [y0, y1] = py;
  const fmt = (v: number) => Number(v.toPrecision(3)).toString();
  return [
    el("line", { x1: x0, y1: y0, x2: x1, y2: y0, stroke: "black" }),
    el("line", { x1: x0, y1: y0, x2: x0, y2: y1, stroke: "black" }),
    el("text", { x: (x0 + x1) / 2, y: y0 + 32, "text-anchor": "middle", "font-size": 12 }, xlabel),
    el("text", {
      x: x0 - 40, y: (y0 + y1) / 2, "text-anchor": "middle", "font-size": 12,
      transform: `rotate(-90 ${x0 - 40} ${(y0 + y1) / 2})`,
    }, ylabel),
    el("text", { x: x0, y: y0 + 16, "text-anchor": "middle", "font-size": 10 }, fmt(x.domain[0])),
    el("text", { x: x1, y: y0 + 16, "text-anchor": "middle", "font-size": 10 }, fmt(x.domain[1])),
    el("text", { x: x0 - 6, y: y0 + 4, "text-anchor": "end", "font-size": 10 }, fmt(y.domain[0])),
    el("text", { x: x0 - 6, y: y1 + 4, "text-anchor": "end", "font-size": 10 }, fmt(y.domain[1])),
  ];
}
