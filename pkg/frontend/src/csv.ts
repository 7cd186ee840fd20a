/**
 * Parser for the afrelay metrics CSV contract (v1).
 *
 * Layout: a `# afrelay-metrics v1` version line, the fixed header
 * `axis,value,mse_mean,mse_stderr,ber_mean,ber_stderr,trials,variant`,
 * then one row per (axis value, variant). Rows of the same variant form
 * one series.
 */

export const CSV_VERSION_PREFIX = '# afrelay-metrics v1';

export const REQUIRED_COLUMNS = [
  'axis',
  'value',
  'mse_mean',
  'mse_stderr',
  'ber_mean',
  'ber_stderr',
  'trials',
  'variant',
] as const;

export interface MetricPoint {
  value: number;
  mseMean: number;
  mseStderr: number;
  berMean: number;
  berStderr: number;
  trials: number;
}

export interface MetricSeries {
  axis: string;
  variant: string;
  points: MetricPoint[];
}

export class SchemaError extends Error {}

/** Parse one metrics CSV document into its per-variant series. */
export function parseMetricsCsv(text: string, source = '<csv>'): MetricSeries[] {
  const lines = text
    .split(/\r?\n/)
    .map((line) => line.trim())
    .filter((line) => line.length > 0);
  if (lines.length === 0 || !lines[0].startsWith(CSV_VERSION_PREFIX)) {
    throw new SchemaError(`${source}: missing "${CSV_VERSION_PREFIX}" version line`);
  }
  if (lines.length < 2) {
    throw new SchemaError(`${source}: missing header row`);
  }
  const header = lines[1].split(',').map((cell) => cell.trim());
  const index = new Map(header.map((name, i) => [name, i]));
  for (const column of REQUIRED_COLUMNS) {
    if (!index.has(column)) {
      throw new SchemaError(`${source}: missing column "${column}"`);
    }
  }
  const rows = lines.slice(2);
  if (rows.length === 0) {
    throw new SchemaError(`${source}: no data rows`);
  }

  const byVariant = new Map<string, MetricSeries>();
  rows.forEach((row, i) => {
    const cells = row.split(',');
    if (cells.length < header.length) {
      throw new SchemaError(`${source}: row ${i + 3} has ${cells.length} cells, expected ${header.length}`);
    }
    const pick = (name: string) => cells[index.get(name)!].trim();
    const num = (name: string) => Number(pick(name));
    const axis = pick('axis');
    const variant = pick('variant');
    const point: MetricPoint = {
      value: num('value'),
      mseMean: num('mse_mean'),
      mseStderr: num('mse_stderr'),
      berMean: num('ber_mean'),
      berStderr: num('ber_stderr'),
      trials: num('trials'),
    };
    if (!Number.isFinite(point.value)) {
      throw new SchemaError(`${source}: row ${i + 3} has a non-numeric axis value`);
    }
    let series = byVariant.get(variant);
    if (series === undefined) {
      series = { axis, variant, points: [] };
      byVariant.set(variant, series);
    } else if (series.axis !== axis) {
      throw new SchemaError(`${source}: variant "${variant}" mixes axes "${series.axis}" and "${axis}"`);
    }
    series.points.push(point);
  });

  const out = [...byVariant.values()];
  for (const series of out) {
    series.points.sort((a, b) => a.value - b.value);
  }
  return out;
}

/** Parse and concatenate several CSV documents. */
export function parseMany(texts: Array<{ text: string; source: string }>): MetricSeries[] {
  const out: MetricSeries[] = [];
  for (const { text, source } of texts) {
    out.push(...parseMetricsCsv(text, source));
  }
  return out;
}
