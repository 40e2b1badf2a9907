/**
 * SVG line charts of TPR sweeps. One panel per input CSV, laid out side by
 * side; x is the sweep's grid value, y is the true positive rate on [0, 1].
 *
 * Rendering is a pure function of the parsed rows. The returned figure
 * carries, next to the SVG text, the exact (grid value, tpr) arrays that
 * were drawn, so a test can hold the chart against its CSV source without
 * scraping path data.
 */

import { SweepRow } from "./csv.js";

export interface SeriesSelector {
  kind: string;
  color: string;
}

/** Chi-square counting test in red, sign test in blue. */
export const DEFAULT_SERIES: SeriesSelector[] = [
  { kind: "ChiSqCount", color: "#d62728" },
  { kind: "SignCount", color: "#1f77b4" },
];

export interface FigureOptions {
  series?: SeriesSelector[];
  /** Height of the dashed reference line (the nominal level). */
  alpha?: number;
  /** Translucent tpr +- stderr ribbons. On unless disabled. */
  bands?: boolean;
  xLabel?: string;
  yLabel?: string;
  panelWidth?: number;
  panelHeight?: number;
}

export interface PlottedSeries {
  panel: number;
  title: string;
  kind: string;
  color: string;
  x: number[];
  y: number[];
  stderr: number[];
}

export interface Figure {
  svg: string;
  plotted: PlottedSeries[];
}

const MARGIN = { top: 34, right: 16, bottom: 44, left: 52 };

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const abs = Math.abs(v);
  if (abs >= 1000) return String(Math.round(v));
  if (abs >= 1) return String(Number(v.toPrecision(4)));
  return String(Number(v.toPrecision(3)));
}

function px(v: number): string {
  return String(Math.round(v * 100) / 100);
}

interface Scale {
  (v: number): number;
}

function linear(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const span = hi - lo;
  return (v) => outLo + ((v - lo) / span) * (outHi - outLo);
}

function clamp01(v: number): number {
  return Math.min(1, Math.max(0, v));
}

function panelTitle(rows: SweepRow[]): string {
  const first = rows[0];
  if (!first) return "";
  return `m=${first.m}, d=${first.d}`;
}

/**
 * Render one figure from one or two row sets (the 1x2 layout of the paper
 * figures; a single panel is also valid). Every selected series must be
 * present in every panel.
 */
export function renderFigure(panels: SweepRow[][], options: FigureOptions = {}): Figure {
  if (panels.length < 1 || panels.length > 2) {
    throw new Error(`expected 1 or 2 panels, got ${panels.length}`);
  }
  const series = options.series ?? DEFAULT_SERIES;
  if (series.length === 0) {
    throw new Error("empty series selection: select at least one test kind");
  }
  const alpha = options.alpha ?? 0.05;
  const bands = options.bands ?? true;
  const panelW = options.panelWidth ?? 360;
  const panelH = options.panelHeight ?? 300;
  const xLabel = options.xLabel ?? "signal strength";
  const yLabel = options.yLabel ?? "true positive rate";

  const plotted: PlottedSeries[] = [];
  for (let p = 0; p < panels.length; p++) {
    const rows = panels[p]!;
    if (rows.length === 0) {
      throw new Error(`panel ${p + 1} has no rows`);
    }
    const title = panelTitle(rows);
    for (const sel of series) {
      const hit = rows.filter((r) => r.testKind === sel.kind);
      if (hit.length === 0) {
        const have = [...new Set(rows.map((r) => r.testKind))].join(", ");
        throw new Error(
          `panel ${p + 1} ("${rows[0]!.experiment}"): missing series ${sel.kind} ` +
            `(present: ${have})`,
        );
      }
      plotted.push({
        panel: p,
        title,
        kind: sel.kind,
        color: sel.color,
        x: hit.map((r) => r.gridValue),
        y: hit.map((r) => r.tpr),
        stderr: hit.map((r) => r.stderrTpr),
      });
    }
  }

  const width = MARGIN.left + panels.length * panelW + (panels.length - 1) * 28 + MARGIN.right;
  const height = MARGIN.top + panelH + MARGIN.bottom;
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="11">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);

  for (let p = 0; p < panels.length; p++) {
    const x0 = MARGIN.left + p * (panelW + 28);
    const y0 = MARGIN.top;
    const inPanel = plotted.filter((s) => s.panel === p);
    const xs = inPanel.flatMap((s) => s.x);
    let xLo = Math.min(...xs);
    let xHi = Math.max(...xs);
    if (xLo === xHi) {
      xLo -= 0.5;
      xHi += 0.5;
    }
    const sx = linear(xLo, xHi, x0, x0 + panelW);
    const sy = linear(0, 1, y0 + panelH, y0);

    // frame and y grid
    parts.push(
      `<rect x="${px(x0)}" y="${px(y0)}" width="${panelW}" height="${panelH}" ` +
        `fill="none" stroke="#444"/>`,
    );
    for (let t = 0; t <= 4; t++) {
      const v = t / 4;
      const y = sy(v);
      if (t > 0 && t < 4) {
        parts.push(
          `<line x1="${px(x0)}" y1="${px(y)}" x2="${px(x0 + panelW)}" y2="${px(y)}" ` +
            `stroke="#ddd"/>`,
        );
      }
      parts.push(
        `<text x="${px(x0 - 6)}" y="${px(y + 3.5)}" text-anchor="end">${fmtTick(v)}</text>`,
      );
    }
    // x ticks
    for (let t = 0; t <= 4; t++) {
      const v = xLo + ((xHi - xLo) * t) / 4;
      const x = sx(v);
      parts.push(
        `<line x1="${px(x)}" y1="${px(y0 + panelH)}" x2="${px(x)}" ` +
          `y2="${px(y0 + panelH + 4)}" stroke="#444"/>`,
      );
      parts.push(
        `<text x="${px(x)}" y="${px(y0 + panelH + 16)}" text-anchor="middle">${fmtTick(v)}</text>`,
      );
    }

    // reference line at the nominal level
    parts.push(
      `<line x1="${px(x0)}" y1="${px(sy(alpha))}" x2="${px(x0 + panelW)}" ` +
        `y2="${px(sy(alpha))}" stroke="#888" stroke-dasharray="5 4"/>`,
    );

    for (const s of inPanel) {
      if (bands) {
        const upper = s.x.map((v, i) => `${px(sx(v))},${px(sy(clamp01(s.y[i]! + s.stderr[i]!)))}`);
        const lower = s.x
          .map((v, i) => `${px(sx(v))},${px(sy(clamp01(s.y[i]! - s.stderr[i]!)))}`)
          .reverse();
        parts.push(
          `<polygon points="${upper.concat(lower).join(" ")}" fill="${s.color}" ` +
            `fill-opacity="0.15" stroke="none"/>`,
        );
      }
      const pts = s.x.map((v, i) => `${px(sx(v))},${px(sy(s.y[i]!))}`).join(" ");
      parts.push(
        `<polyline points="${pts}" fill="none" stroke="${s.color}" stroke-width="1.6"/>`,
      );
    }

    parts.push(
      `<text x="${px(x0 + panelW / 2)}" y="${px(y0 - 10)}" text-anchor="middle" ` +
        `font-size="13">${inPanel[0]!.title}</text>`,
    );
    parts.push(
      `<text x="${px(x0 + panelW / 2)}" y="${px(y0 + panelH + 34)}" ` +
        `text-anchor="middle">${xLabel}</text>`,
    );
  }

  // y label and legend
  parts.push(
    `<text x="14" y="${px(MARGIN.top + panelH / 2)}" text-anchor="middle" ` +
      `transform="rotate(-90 14 ${px(MARGIN.top + panelH / 2)})">${yLabel}</text>`,
  );
  let lx = MARGIN.left + 10;
  for (const sel of series) {
    parts.push(
      `<line x1="${px(lx)}" y1="16" x2="${px(lx + 18)}" y2="16" stroke="${sel.color}" ` +
        `stroke-width="2"/>`,
    );
    parts.push(`<text x="${px(lx + 23)}" y="19">${sel.kind}</text>`);
    lx += 30 + 7 * sel.kind.length;
  }

  parts.push("</svg>");
  return { svg: parts.join("\n") + "\n", plotted };
}
