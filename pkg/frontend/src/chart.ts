// SVG stacked-area chart of typology frequencies against true efficacy,
// with the two threshold markers and pinned-run overlays for comparing
// sample sizes. Values are drawn exactly as the API reported them.

import type { SeriesName } from "./types.js";

export const SERIES_ORDER: SeriesName[] = [
  "reduced",
  "inconclusive",
  "borderline",
  "adequate",
  "degenerate",
];

const SERIES_COLOR: Record<SeriesName, string> = {
  reduced: "#c0392b",
  inconclusive: "#f0c040",
  borderline: "#7d3c98",
  adequate: "#27ae60",
  degenerate: "#e67e22",
};

export interface CurveBundle {
  label: string;
  r: number[];
  series: Record<SeriesName, number[]>;
}

export interface Thresholds {
  adequacy: number;
  inferiority: number;
}

export function inconclusiveBandMass(bundle: CurveBundle): number {
  return bundle.series.inconclusive.reduce((acc, v) => acc + v, 0);
}

const NS = "http://www.w3.org/2000/svg";
const WIDTH = 640;
const HEIGHT = 320;
const PAD = { left: 42, right: 12, top: 12, bottom: 30 };

function svgElement<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(NS, tag);
  for (const [key, value] of Object.entries(attrs)) el.setAttribute(key, value);
  return el;
}

export function renderTypologyChart(
  root: HTMLElement,
  active: CurveBundle | null,
  pinned: CurveBundle[],
  thresholds: Thresholds,
): SVGSVGElement {
  root.textContent = "";
  const svg = svgElement("svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    width: String(WIDTH),
    height: String(HEIGHT),
    class: "typology-chart",
  });

  const rValues = active && active.r.length ? active.r : [];
  const xTicks = rValues.length
    ? rValues
    : [thresholds.adequacy - 0.1, thresholds.inferiority + 0.1];
  const xMin = Math.min(...xTicks, thresholds.adequacy);
  const xMax = Math.max(...xTicks, thresholds.inferiority);
  const spanX = xMax - xMin || 1;
  const plotW = WIDTH - PAD.left - PAD.right;
  const plotH = HEIGHT - PAD.top - PAD.bottom;
  const x = (r: number) => PAD.left + ((r - xMin) / spanX) * plotW;
  const y = (f: number) => PAD.top + (1 - f) * plotH;

  if (active && active.r.length) {
    const cumulative = active.r.map(() => 0);
    let maxDeviation = 0;
    for (const name of SERIES_ORDER) {
      const values = active.series[name];
      const lower = cumulative.slice();
      for (let i = 0; i < cumulative.length; i += 1) cumulative[i] += values[i];
      const upper = cumulative;
      const forward = active.r.map((r, i) => `${x(r)},${y(upper[i])}`);
      const backward = active.r
        .map((r, i) => `${x(r)},${y(lower[i])}`)
        .reverse();
      const path = svgElement("polygon", {
        points: [...forward, ...backward].join(" "),
        fill: SERIES_COLOR[name],
        "fill-opacity": "0.75",
        class: `area-${name}`,
      });
      path.dataset.total = String(values.reduce((a, v) => a + v, 0));
      svg.appendChild(path);
    }
    for (const total of cumulative) {
      maxDeviation = Math.max(maxDeviation, Math.abs(total - 1));
    }
    svg.dataset.sumMaxDeviation = String(maxDeviation);
    svg.dataset.points = String(active.r.length);
  } else {
    svg.classList.add("empty");
    svg.dataset.points = "0";
  }

  for (const bundle of pinned) {
    if (!bundle.r.length) continue;
    const line = svgElement("polyline", {
      points: bundle.r
        .map((r, i) => `${x(r)},${y(bundle.series.inconclusive[i])}`)
        .join(" "),
      fill: "none",
      stroke: "#2c3e50",
      "stroke-width": "1.6",
      "stroke-dasharray": "5,3",
      class: "pinned-inconclusive",
    });
    line.dataset.label = bundle.label;
    line.dataset.bandMass = String(inconclusiveBandMass(bundle));
    svg.appendChild(line);
  }

  const markers: Array<[string, number, string]> = [
    ["marker-adequacy", thresholds.adequacy, "4,4"],
    ["marker-inferiority", thresholds.inferiority, ""],
  ];
  for (const [cls, value, dash] of markers) {
    const line = svgElement("line", {
      x1: String(x(value)),
      x2: String(x(value)),
      y1: String(PAD.top),
      y2: String(HEIGHT - PAD.bottom),
      stroke: "#222",
      "stroke-width": "1.5",
      class: cls,
    });
    if (dash) line.setAttribute("stroke-dasharray", dash);
    line.dataset.value = String(value);
    svg.appendChild(line);
    const label = svgElement("text", {
      x: String(x(value) + 3),
      y: String(PAD.top + 12),
      "font-size": "11",
      class: `${cls}-label`,
    });
    label.textContent = cls === "marker-adequacy" ? "T_A" : "T_I";
    svg.appendChild(label);
  }

  const axis = svgElement("line", {
    x1: String(PAD.left),
    x2: String(WIDTH - PAD.right),
    y1: String(HEIGHT - PAD.bottom),
    y2: String(HEIGHT - PAD.bottom),
    stroke: "#555",
  });
  svg.appendChild(axis);
  for (const tick of [xMin, (xMin + xMax) / 2, xMax]) {
    const label = svgElement("text", {
      x: String(x(tick) - 12),
      y: String(HEIGHT - 10),
      "font-size": "11",
      class: "x-tick",
    });
    label.textContent = tick.toFixed(3);
    svg.appendChild(label);
  }

  root.appendChild(svg);
  return svg;
}
