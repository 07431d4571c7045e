// One-line diagram of a case. Lines carry their loading percentage and turn
// red past 100%, outaged lines go dashed, and each load gets a badge with
// the fraction kept under the displayed plan. All numbers come straight from
// the service payloads; nothing is recomputed here.

import type { Point } from './layout';
import type { CaseDocument, SafetyPayload } from './types';

export interface NetworkState {
  doc: CaseDocument;
  positions: Map<number, Point>;
  safety: SafetyPayload | null;
  outage: number[];
  islandedLoads: number[];
  /** load id -> fraction kept; absent means untouched (1.0) */
  fractions: Map<number, number>;
}

export interface NetworkOptions {
  width?: number;
  height?: number;
}

export function renderNetwork(state: NetworkState, options: NetworkOptions = {}): string {
  const width = options.width ?? 800;
  const height = options.height ?? 600;
  const { doc, positions, safety } = state;
  const outage = new Set(state.outage);
  const islanded = new Set(state.islandedLoads);

  const loading = new Map<number, number>(safety?.line_loading_pct ?? []);
  const lineViolations = new Set((safety?.line_violations ?? []).map(([id]) => id));
  const busViolations = new Set((safety?.voltage_violations ?? []).map(([id]) => id));
  const voltage = new Map<number, number>(safety?.bus_voltage ?? []);

  const parts: string[] = [];
  parts.push(`<svg class="network" viewBox="0 0 ${width} ${height}" role="img">`);

  for (const line of doc.lines) {
    const a = positions.get(line.from);
    const b = positions.get(line.to);
    if (!a || !b) continue;
    const isOut = outage.has(line.id) || line.in_service === false;
    const pct = loading.get(line.id);
    const classes = ['branch'];
    if (isOut) classes.push('out');
    else if (lineViolations.has(line.id)) classes.push('overload');
    parts.push(
      `<line class="${classes.join(' ')}" data-line="${line.id}" ` +
        `x1="${a.x.toFixed(1)}" y1="${a.y.toFixed(1)}" x2="${b.x.toFixed(1)}" y2="${b.y.toFixed(1)}"/>`,
    );
    const mx = (a.x + b.x) / 2;
    const my = (a.y + b.y) / 2;
    if (isOut) {
      parts.push(`<text class="line-label out" x="${mx.toFixed(1)}" y="${(my - 4).toFixed(1)}">out</text>`);
    } else if (pct !== undefined) {
      const cls = lineViolations.has(line.id) ? 'line-label overload' : 'line-label';
      parts.push(
        `<text class="${cls}" data-line="${line.id}" x="${mx.toFixed(1)}" y="${(my - 4).toFixed(1)}">${Math.round(pct)}%</text>`,
      );
    }
  }

  const loadsByBus = new Map<number, typeof doc.loads>();
  for (const load of doc.loads) {
    const list = loadsByBus.get(load.bus) ?? [];
    list.push(load);
    loadsByBus.set(load.bus, list);
  }

  for (const bus of doc.buses) {
    const p = positions.get(bus.id);
    if (!p) continue;
    const classes = ['bus', bus.kind];
    if (busViolations.has(bus.id)) classes.push('violation');
    parts.push(
      `<circle class="${classes.join(' ')}" data-bus="${bus.id}" cx="${p.x.toFixed(1)}" cy="${p.y.toFixed(1)}" r="7"/>`,
    );
    const vm = voltage.get(bus.id);
    const label = vm !== undefined ? `${bus.id} · ${vm.toFixed(3)}` : `${bus.id}`;
    parts.push(`<text class="bus-label" x="${(p.x + 10).toFixed(1)}" y="${(p.y - 8).toFixed(1)}">${label}</text>`);

    const loads = loadsByBus.get(bus.id) ?? [];
    loads.forEach((load, k) => {
      const frac = islanded.has(load.id) ? 0 : state.fractions.get(load.id) ?? 1;
      const classes = ['load-badge'];
      if (islanded.has(load.id)) classes.push('islanded');
      else if (frac === 0) classes.push('dropped');
      else if (frac < 1) classes.push('shed');
      const text = islanded.has(load.id)
        ? `L${load.id} islanded`
        : `L${load.id} ${Math.round(frac * 100)}%`;
      parts.push(
        `<text class="${classes.join(' ')}" data-load="${load.id}" ` +
          `x="${(p.x + 10).toFixed(1)}" y="${(p.y + 14 + k * 14).toFixed(1)}">${text}</text>`,
      );
    });
  }

  parts.push('</svg>');
  return parts.join('');
}
