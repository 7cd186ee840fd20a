/**
 * Minimal deterministic SVG chart builder: linear/log axes, polylines,
 * error bars and a legend. No timestamps or random ids, so identical
 * inputs produce identical bytes.
 */

export interface SeriesData {
  label: string;
  x: number[];
  y: number[];
  yErr?: number[];
}

export interface Annotation {
  x: number;
  y: number;
  text: string;
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  logY?: boolean;
  series: SeriesData[];
  annotations?: Annotation[];
}

const WIDTH = 760;
const HEIGHT = 480;
const MARGIN = { top: 48, right: 24, bottom: 56, left: 76 };
const PALETTE = ['#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e', '#8c564b'];

const fmt = (v: number): string => {
  if (v === 0) return '0';
  const abs = Math.abs(v);
  if (abs >= 0.01 && abs < 10000) {
    return String(Number(v.toPrecision(4)));
  }
  return v.toExponential(1);
};

function niceTicks(lo: number, hi: number, count = 6): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step0 = span / Math.max(1, count - 1);
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  const candidates = [1, 2, 2.5, 5, 10].map((m) => m * mag);
  const step = candidates.find((s) => span / s <= count) ?? candidates[candidates.length - 1];
  const start = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= hi + 1e-12 * span; v += step) {
    ticks.push(Number(v.toPrecision(12)));
  }
  return ticks;
}

function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.floor(Math.log10(lo)); e <= Math.ceil(Math.log10(hi)); e += 1) {
    const v = Math.pow(10, e);
    if (v >= lo / 1.0001 && v <= hi * 1.0001) ticks.push(v);
  }
  return ticks.length >= 2 ? ticks : [lo, hi];
}

const esc = (s: string): string =>
  s.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;').replace(/"/g, '&quot;');

/** Render a chart spec to a standalone SVG document. */
export function renderSvg(spec: ChartSpec): string {
  if (spec.series.length === 0 || spec.series.every((s) => s.x.length === 0)) {
    throw new Error('nothing to draw: every series is empty');
  }
  const xs = spec.series.flatMap((s) => s.x);
  let ys = spec.series.flatMap((s, i) =>
    s.y.flatMap((v, j) => {
      const err = s.yErr?.[j] ?? 0;
      return Number.isFinite(err) ? [v - err, v + err] : [v];
    }),
  );
  ys = ys.filter((v) => Number.isFinite(v));
  if (spec.logY) {
    ys = ys.filter((v) => v > 0);
    if (ys.length === 0) throw new Error('log axis requires positive values');
  }
  const xLo = Math.min(...xs);
  const xHi = Math.max(...xs);
  const yLo = Math.min(...ys);
  const yHi = Math.max(...ys);

  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const padX = xHi > xLo ? 0 : 1;
  const sx = (v: number): number =>
    MARGIN.left + ((v - xLo + padX / 2) / (xHi - xLo + padX)) * plotW;

  let sy: (v: number) => number;
  let yTicks: number[];
  if (spec.logY) {
    const lLo = Math.log10(yLo);
    const lHi = Math.log10(yHi > yLo ? yHi : yLo * 10);
    sy = (v) => MARGIN.top + plotH - ((Math.log10(v) - lLo) / (lHi - lLo)) * plotH;
    yTicks = logTicks(yLo, yHi);
  } else {
    const span = yHi > yLo ? yHi - yLo : Math.abs(yLo) + 1;
    const lo = yLo - 0.05 * span;
    const hi = yHi + 0.05 * span;
    sy = (v) => MARGIN.top + plotH - ((v - lo) / (hi - lo)) * plotH;
    yTicks = niceTicks(lo, hi);
  }
  const xTicks = niceTicks(xLo, xHi + padX);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-size="16">${esc(spec.title)}</text>`,
  );

  // Axes and grid.
  const x0 = MARGIN.left;
  const y0 = MARGIN.top + plotH;
  for (const t of xTicks) {
    const px = sx(t);
    parts.push(`<line x1="${px.toFixed(2)}" y1="${MARGIN.top}" x2="${px.toFixed(2)}" y2="${y0}" stroke="#dddddd"/>`);
    parts.push(
      `<text x="${px.toFixed(2)}" y="${y0 + 18}" text-anchor="middle" font-size="11">${fmt(t)}</text>`,
    );
  }
  for (const t of yTicks) {
    const py = sy(t);
    parts.push(`<line x1="${x0}" y1="${py.toFixed(2)}" x2="${x0 + plotW}" y2="${py.toFixed(2)}" stroke="#dddddd"/>`);
    parts.push(
      `<text x="${x0 - 8}" y="${(py + 4).toFixed(2)}" text-anchor="end" font-size="11">${fmt(t)}</text>`,
    );
  }
  parts.push(`<rect x="${x0}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#333333"/>`);
  parts.push(
    `<text x="${x0 + plotW / 2}" y="${HEIGHT - 14}" text-anchor="middle" font-size="13">${esc(spec.xLabel)}</text>`,
  );
  parts.push(
    `<text x="20" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-size="13" transform="rotate(-90 20 ${MARGIN.top + plotH / 2})">${esc(spec.yLabel)}</text>`,
  );

  // Series.
  spec.series.forEach((series, si) => {
    const color = PALETTE[si % PALETTE.length];
    const pts: string[] = [];
    series.x.forEach((xv, i) => {
      const yv = series.y[i];
      if (!Number.isFinite(yv) || (spec.logY && yv <= 0)) return;
      pts.push(`${sx(xv).toFixed(2)},${sy(yv).toFixed(2)}`);
      const err = series.yErr?.[i];
      if (err !== undefined && Number.isFinite(err) && err > 0) {
        const lo = spec.logY ? Math.max(yv - err, yv * 1e-3) : yv - err;
        const hi = yv + err;
        const px = sx(xv).toFixed(2);
        parts.push(
          `<line x1="${px}" y1="${sy(lo).toFixed(2)}" x2="${px}" y2="${sy(hi).toFixed(2)}" stroke="${color}" stroke-width="1"/>`,
        );
      }
    });
    parts.push(
      `<polyline points="${pts.join(' ')}" fill="none" stroke="${color}" stroke-width="1.8"/>`,
    );
    for (const p of pts) {
      const [px, py] = p.split(',');
      parts.push(`<circle cx="${px}" cy="${py}" r="2.6" fill="${color}"/>`);
    }
  });

  // Legend.
  spec.series.forEach((series, si) => {
    const color = PALETTE[si % PALETTE.length];
    const ly = MARGIN.top + 14 + 16 * si;
    const lx = x0 + plotW - 12;
    parts.push(`<line x1="${lx - 150}" y1="${ly}" x2="${lx - 126}" y2="${ly}" stroke="${color}" stroke-width="2"/>`);
    parts.push(
      `<text x="${lx - 120}" y="${ly + 4}" font-size="11">${esc(series.label)}</text>`,
    );
  });

  for (const note of spec.annotations ?? []) {
    const px = sx(note.x);
    const py = sy(note.y);
    parts.push(`<circle cx="${px.toFixed(2)}" cy="${py.toFixed(2)}" r="5" fill="none" stroke="#000000"/>`);
    parts.push(
      `<text x="${(px + 8).toFixed(2)}" y="${(py - 8).toFixed(2)}" font-size="11">${esc(note.text)}</text>`,
    );
  }

  parts.push('</svg>');
  return parts.join('\n') + '\n';
}
