import { describe, expect, test } from 'vitest';
import { mkdtempSync, existsSync, readFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { writeFileSync } from 'node:fs';

import { parseMetricsCsv, SchemaError } from '../src/csv.js';
import { renderSvg } from '../src/svg.js';
import { buildChart, findCrossings, main } from '../src/render.js';

const HEADER = 'axis,value,mse_mean,mse_stderr,ber_mean,ber_stderr,trials,variant';

function metricsCsv(rows: string[]): string {
  return ['# afrelay-metrics v1', HEADER, ...rows].join('\n') + '\n';
}

const SNR_FIXTURE = metricsCsv([
  'er_n2_db,0.0,0.61,0.01,0.16,0.002,500,robust',
  'er_n2_db,15.0,0.21,0.005,0.02,0.001,500,robust',
  'er_n2_db,30.0,0.08,0.003,0.004,0.0004,500,robust',
  'er_n2_db,0.0,0.63,0.01,0.162,0.002,500,naive',
  'er_n2_db,15.0,0.24,0.005,0.024,0.001,500,naive',
  'er_n2_db,30.0,0.12,0.004,0.009,0.0006,500,naive',
]);

const APPROX_FIXTURE = metricsCsv([
  'er_n2_db,0.0,0.9,0.01,0.2,0.01,500,hsa',
  'er_n2_db,15.0,0.5,0.01,0.05,0.005,500,hsa',
  'er_n2_db,30.0,0.2,0.01,0.01,0.001,500,hsa',
  'er_n2_db,0.0,0.7,0.01,0.18,0.01,500,spa',
  'er_n2_db,15.0,0.52,0.01,0.055,0.005,500,spa',
  'er_n2_db,30.0,0.3,0.01,0.02,0.002,500,spa',
  'er_n2_db,0.0,0.7,0.01,0.18,0.01,500,switched',
  'er_n2_db,15.0,0.5,0.01,0.05,0.005,500,switched',
  'er_n2_db,30.0,0.2,0.01,0.01,0.001,500,switched',
]);

describe('csv parsing', () => {
  test('splits variants into sorted series', () => {
    const series = parseMetricsCsv(SNR_FIXTURE);
    expect(series.map((s) => s.variant)).toEqual(['robust', 'naive']);
    expect(series[0].points.map((p) => p.value)).toEqual([0, 15, 30]);
    expect(series[0].axis).toBe('er_n2_db');
  });

  test('rejects a missing column by name', () => {
    const bad = SNR_FIXTURE.replace(',ber_stderr', ',wrong_name');
    expect(() => parseMetricsCsv(bad)).toThrowError(/missing column "ber_stderr"/);
  });

  test('rejects a missing version line', () => {
    expect(() => parseMetricsCsv(HEADER + '\n')).toThrowError(SchemaError);
  });

  test('rejects an empty document', () => {
    expect(() => parseMetricsCsv(metricsCsv([]))).toThrowError(/no data rows/);
  });
});

describe('chart building', () => {
  test('two labelled curves with error bars', () => {
    const svg = renderSvg(buildChart('mse-vs-snr', parseMetricsCsv(SNR_FIXTURE)));
    expect(svg).toContain('<svg');
    expect(svg).toContain('robust');
    expect(svg).toContain('naive');
    expect((svg.match(/<polyline/g) ?? []).length).toBe(2);
  });

  test('alpha kind labels the correlation axis', () => {
    const fixture = metricsCsv([
      'alpha,0.0,0.10,0.004,0.01,0.001,500,robust',
      'alpha,0.2,0.11,0.004,0.012,0.001,500,robust',
      'alpha,0.4,0.12,0.004,0.014,0.001,500,robust',
      'alpha,0.0,0.11,0.004,0.011,0.001,500,naive',
      'alpha,0.2,0.12,0.004,0.013,0.001,500,naive',
      'alpha,0.4,0.14,0.004,0.016,0.001,500,naive',
    ]);
    const svg = renderSvg(buildChart('mse-vs-alpha', parseMetricsCsv(fixture)));
    expect(svg).toContain('training spatial correlation');
    expect((svg.match(/<polyline/g) ?? []).length).toBe(2);
  });

  test('ber kind uses a log axis with decade ticks', () => {
    const svg = renderSvg(buildChart('ber-vs-snr', parseMetricsCsv(SNR_FIXTURE)));
    expect(svg).toContain('0.01');
    expect(svg).toContain('0.1');
  });

  test('approx-compare annotates the crossover', () => {
    const svg = renderSvg(buildChart('approx-compare', parseMetricsCsv(APPROX_FIXTURE)));
    expect((svg.match(/<polyline/g) ?? []).length).toBe(3);
    expect(svg).toContain('crossover at');
  });

  test('crossing finder interpolates sign changes', () => {
    const a = { label: 'a', x: [0, 10], y: [1, 3] };
    const b = { label: 'b', x: [0, 10], y: [2, 2] };
    const hits = findCrossings(a, b);
    expect(hits).toHaveLength(1);
    expect(hits[0].x).toBeCloseTo(5.0);
  });

  test('identical inputs produce identical bytes', () => {
    const once = renderSvg(buildChart('mse-vs-snr', parseMetricsCsv(SNR_FIXTURE)));
    const twice = renderSvg(buildChart('mse-vs-snr', parseMetricsCsv(SNR_FIXTURE)));
    expect(once).toBe(twice);
  });
});

describe('cli', () => {
  test('renders a file and returns 0', () => {
    const dir = mkdtempSync(join(tmpdir(), 'afrelay-frontend-'));
    const csvPath = join(dir, 'metrics.csv');
    const outPath = join(dir, 'figure.svg');
    writeFileSync(csvPath, SNR_FIXTURE);
    expect(main(['mse-vs-snr', csvPath, '-o', outPath])).toBe(0);
    expect(readFileSync(outPath, 'utf8')).toContain('</svg>');
  });

  test('empty series leaves no file and returns 1', () => {
    const dir = mkdtempSync(join(tmpdir(), 'afrelay-frontend-'));
    const csvPath = join(dir, 'empty.csv');
    const outPath = join(dir, 'figure.svg');
    writeFileSync(csvPath, metricsCsv([]));
    expect(main(['mse-vs-snr', csvPath, '-o', outPath])).toBe(1);
    expect(existsSync(outPath)).toBe(false);
  });

  test('unknown kind is a usage error', () => {
    expect(main(['pie-chart', 'x.csv', '-o', 'y.svg'])).toBe(2);
  });
});
