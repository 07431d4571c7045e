// Schematic positions for the network view. The case format carries no
// geography, so we run a small deterministic force simulation over the
// connectivity; optional coordinate metadata wins when present.

import { seededRandom } from './scenario';
import type { CaseDocument } from './types';

export interface Point {
  x: number;
  y: number;
}

export interface LayoutOptions {
  width?: number;
  height?: number;
  iterations?: number;
  seed?: number;
}

export function layoutPositions(
  doc: CaseDocument,
  options: LayoutOptions = {},
): Map<number, Point> {
  const width = options.width ?? 800;
  const height = options.height ?? 600;
  const fromMeta = doc.meta?.coordinates;
  const positions = new Map<number, Point>();

  if (fromMeta) {
    // honor provided coordinates, rescaled into the viewport
    const coords = doc.buses.map(bus => fromMeta[String(bus.id)]);
    if (coords.every(c => Array.isArray(c) && c.length === 2)) {
      const xs = coords.map(c => c![0]);
      const ys = coords.map(c => c![1]);
      const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
      const [y0, y1] = [Math.min(...ys), Math.max(...ys)];
      const sx = (x1 - x0) || 1;
      const sy = (y1 - y0) || 1;
      doc.buses.forEach((bus, i) => {
        positions.set(bus.id, {
          x: 40 + ((coords[i]![0] - x0) / sx) * (width - 80),
          y: 40 + ((coords[i]![1] - y0) / sy) * (height - 80),
        });
      });
      return positions;
    }
  }

  const rand = seededRandom(options.seed ?? 42);
  const n = doc.buses.length;
  const index = new Map(doc.buses.map((bus, i) => [bus.id, i]));
  const x = new Float64Array(n);
  const y = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    x[i] = rand() * width;
    y[i] = rand() * height;
  }

  const edges = doc.lines
    .filter(line => line.in_service !== false)
    .map(line => [index.get(line.from)!, index.get(line.to)!]);

  const ideal = Math.sqrt((width * height) / Math.max(n, 1)) * 0.8;
  const iterations = options.iterations ?? 150;
  for (let step = 0; step < iterations; step++) {
    const fx = new Float64Array(n);
    const fy = new Float64Array(n);
    // pairwise repulsion
    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        let dx = x[i] - x[j];
        let dy = y[i] - y[j];
        let d2 = dx * dx + dy * dy;
        if (d2 < 1e-6) {
          dx = rand() - 0.5;
          dy = rand() - 0.5;
          d2 = dx * dx + dy * dy;
        }
        const f = (ideal * ideal) / d2;
        fx[i] += dx * f;
        fy[i] += dy * f;
        fx[j] -= dx * f;
        fy[j] -= dy * f;
      }
    }
    // spring attraction along lines
    for (const [i, j] of edges) {
      if (i === j) continue;
      const dx = x[i] - x[j];
      const dy = y[i] - y[j];
      const d = Math.sqrt(dx * dx + dy * dy) || 1;
      const f = (d * d) / ideal / d;
      fx[i] -= dx * f;
      fy[i] -= dy * f;
      fx[j] += dx * f;
      fy[j] += dy * f;
    }
    // cooled displacement, clamped to the viewport
    const temperature = (1 - step / iterations) * ideal * 0.5 + 1;
    for (let i = 0; i < n; i++) {
      const d = Math.sqrt(fx[i] * fx[i] + fy[i] * fy[i]) || 1;
      const scale = Math.min(d, temperature) / d;
      x[i] = Math.min(width - 20, Math.max(20, x[i] + fx[i] * scale));
      y[i] = Math.min(height - 20, Math.max(20, y[i] + fy[i] * scale));
    }
  }

  doc.buses.forEach((bus, i) => {
    positions.set(bus.id, { x: x[i], y: y[i] });
  });
  return positions;
}
