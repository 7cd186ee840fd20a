/**
 * Standalone figure renderer for afrelay metrics CSVs.
 *
 * Usage: render <kind> <csv...> -o <path>
 * Kinds: mse-vs-snr | mse-vs-alpha | ber-vs-snr | approx-compare
 *
 * Reads only the CSV contract; BER plots use a logarithmic vertical axis;
 * the surrogate-comparison plot annotates where the two surrogate curves
 * cross. Output is SVG and depends on the input bytes alone.
 */

import { readFileSync, writeFileSync } from 'node:fs';
import { parseMany, MetricSeries, SchemaError } from './csv.js';
import { renderSvg, Annotation, ChartSpec, SeriesData } from './svg.js';

export const KINDS = ['mse-vs-snr', 'mse-vs-alpha', 'ber-vs-snr', 'approx-compare'] as const;
export type Kind = (typeof KINDS)[number];

const AXIS_LABELS: Record<string, string> = {
  er_n2_db: 'second-hop SNR Er/N2 [dB]',
  sigma_e2: 'estimation noise variance',
  alpha: 'training spatial correlation',
};

function toSeries(series: MetricSeries, ber: boolean): SeriesData {
  return {
    label: series.variant,
    x: series.points.map((p) => p.value),
    y: series.points.map((p) => (ber ? p.berMean : p.mseMean)),
    yErr: series.points.map((p) => (ber ? p.berStderr : p.mseStderr)),
  };
}

/** Linear-interpolated crossings of two sampled curves. */
export function findCrossings(a: SeriesData, b: SeriesData): Annotation[] {
  const out: Annotation[] = [];
  const n = Math.min(a.x.length, b.x.length);
  for (let i = 0; i + 1 < n; i += 1) {
    if (a.x[i] !== b.x[i] || a.x[i + 1] !== b.x[i + 1]) continue;
    const d0 = a.y[i] - b.y[i];
    const d1 = a.y[i + 1] - b.y[i + 1];
    if (!Number.isFinite(d0) || !Number.isFinite(d1)) continue;
    if (d0 === 0 || d0 * d1 >= 0) continue;
    const t = d0 / (d0 - d1);
    const x = a.x[i] + t * (a.x[i + 1] - a.x[i]);
    const y = a.y[i] + t * (a.y[i + 1] - a.y[i]);
    out.push({ x, y, text: `crossover at ${x.toFixed(1)}` });
  }
  return out;
}

export function buildChart(kind: Kind, allSeries: MetricSeries[]): ChartSpec {
  if (allSeries.length === 0) {
    throw new SchemaError('no series found in the given CSVs');
  }
  const axis = allSeries[0].axis;
  const ber = kind === 'ber-vs-snr';
  const series = allSeries.map((s) => toSeries(s, ber));
  const spec: ChartSpec = {
    title: {
      'mse-vs-snr': 'Total MSE per subcarrier vs second-hop SNR',
      'mse-vs-alpha': 'Total MSE per subcarrier vs training correlation',
      'ber-vs-snr': 'Bit error rate vs second-hop SNR',
      'approx-compare': 'Surrogate comparison: high-power vs spectral vs switched',
    }[kind],
    xLabel: AXIS_LABELS[axis] ?? axis,
    yLabel: ber ? 'BER' : 'MSE / K',
    logY: ber,
    series,
  };
  if (kind === 'approx-compare' && series.length >= 2) {
    spec.annotations = findCrossings(series[0], series[1]);
  }
  return spec;
}

export function main(argv: string[]): number {
  const args = [...argv];
  let outPath: string | undefined;
  const positional: string[] = [];
  while (args.length > 0) {
    const arg = args.shift()!;
    if (arg === '-o' || arg === '--output') {
      outPath = args.shift();
    } else {
      positional.push(arg);
    }
  }
  const [kind, ...csvPaths] = positional;
  if (!kind || csvPaths.length === 0 || !outPath) {
    process.stderr.write('usage: render <kind> <csv...> -o <path>\n');
    process.stderr.write(`kinds: ${KINDS.join(' | ')}\n`);
    return 2;
  }
  if (!(KINDS as readonly string[]).includes(kind)) {
    process.stderr.write(`unknown figure kind "${kind}"; expected one of ${KINDS.join(', ')}\n`);
    return 2;
  }
  try {
    const docs = csvPaths.map((path) => ({
      text: readFileSync(path, 'utf8'),
      source: path,
    }));
    const chart = buildChart(kind as Kind, parseMany(docs));
    writeFileSync(outPath, renderSvg(chart), 'utf8');
  } catch (err) {
    process.stderr.write(`error: ${err instanceof Error ? err.message : String(err)}\n`);
    return 1;
  }
  return 0;
}

if (process.argv[1] && process.argv[1].endsWith('render.js')) {
  process.exit(main(process.argv.slice(2)));
}
