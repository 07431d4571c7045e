// Convergence overlay: remaining load (MW) per generation, one polyline per
// plan. Pure string/SVG construction so it is testable without a browser.

export interface Series {
  name: string;
  color: string;
  points: Array<[number, number]>;
}

const PALETTE = [
  '#2563eb',
  '#dc2626',
  '#16a34a',
  '#9333ea',
  '#ea580c',
  '#0891b2',
  '#ca8a04',
  '#db2777',
];

export function seriesColor(i: number): string {
  return PALETTE[i % PALETTE.length];
}

export interface ChartOptions {
  width?: number;
  height?: number;
}

function niceTicks(lo: number, hi: number, count: number): number[] {
  if (hi <= lo) return [lo];
  const span = hi - lo;
  const raw = span / count;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const norm = raw / mag;
  const step = (norm >= 5 ? 10 : norm >= 2 ? 5 : norm >= 1 ? 2 : 1) * mag;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-9; v += step) {
    ticks.push(Math.round(v * 1e6) / 1e6);
  }
  return ticks;
}

export function renderChart(series: Series[], options: ChartOptions = {}): string {
  const width = options.width ?? 640;
  const height = options.height ?? 280;
  const margin = { top: 12, right: 16, bottom: 28, left: 56 };
  const innerW = width - margin.left - margin.right;
  const innerH = height - margin.top - margin.bottom;

  const nonEmpty = series.filter(s => s.points.length > 0);
  if (nonEmpty.length === 0) {
    return `<svg class="chart" viewBox="0 0 ${width} ${height}" role="img">` +
      `<text x="${width / 2}" y="${height / 2}" text-anchor="middle" class="chart-empty">no convergence data</text></svg>`;
  }

  let xMax = 1;
  let yMax = 0;
  for (const s of nonEmpty) {
    for (const [gen, mw] of s.points) {
      if (gen > xMax) xMax = gen;
      if (mw > yMax) yMax = mw;
    }
  }
  if (yMax <= 0) yMax = 1;

  const px = (gen: number) => margin.left + (gen / xMax) * innerW;
  const py = (mw: number) => margin.top + (1 - mw / yMax) * innerH;

  const parts: string[] = [];
  parts.push(`<svg class="chart" viewBox="0 0 ${width} ${height}" role="img">`);

  for (const tick of niceTicks(0, yMax, 4)) {
    const yy = py(tick);
    parts.push(`<line class="grid" x1="${margin.left}" y1="${yy.toFixed(1)}" x2="${width - margin.right}" y2="${yy.toFixed(1)}"/>`);
    parts.push(`<text class="tick" x="${margin.left - 6}" y="${(yy + 4).toFixed(1)}" text-anchor="end">${tick}</text>`);
  }
  for (const tick of niceTicks(0, xMax, 6)) {
    const xx = px(tick);
    parts.push(`<text class="tick" x="${xx.toFixed(1)}" y="${height - 8}" text-anchor="middle">${tick}</text>`);
  }
  parts.push(`<text class="axis-label" x="${margin.left - 44}" y="${margin.top + innerH / 2}" transform="rotate(-90 ${margin.left - 44} ${margin.top + innerH / 2})" text-anchor="middle">remaining MW</text>`);
  parts.push(`<text class="axis-label" x="${margin.left + innerW / 2}" y="${height - 20}" text-anchor="middle" dy="12">generation</text>`);

  for (const s of nonEmpty) {
    const pts = s.points
      .map(([gen, mw]) => `${px(gen).toFixed(1)},${py(mw).toFixed(1)}`)
      .join(' ');
    parts.push(`<polyline class="series" data-name="${escapeAttr(s.name)}" points="${pts}" fill="none" stroke="${s.color}" stroke-width="1.8"/>`);
  }

  parts.push('</svg>');
  return parts.join('');
}

export function renderLegend(series: Series[]): string {
  const items = series.map(
    s => `<span class="legend-item"><span class="swatch" style="background:${s.color}"></span>${escapeHtml(s.name)}</span>`,
  );
  return `<div class="legend">${items.join('')}</div>`;
}

function escapeHtml(text: string): string {
  return text.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}

function escapeAttr(text: string): string {
  return escapeHtml(text).replace(/"/g, '&quot;');
}
