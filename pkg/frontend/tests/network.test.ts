import { describe, expect, it } from 'vitest';

import { renderNetwork, type NetworkState } from '../src/network';
import { renderChart, renderLegend } from '../src/chart';
import type { CaseDocument, SafetyPayload } from '../src/types';

const doc: CaseDocument = {
  base_mva: 100,
  buses: [
    { id: 0, kind: 'slack' },
    { id: 1, kind: 'pq' },
    { id: 2, kind: 'pq' },
  ],
  lines: [
    { id: 0, from: 0, to: 1, rating_mva: 50 },
    { id: 1, from: 1, to: 2, rating_mva: 50 },
  ],
  loads: [
    { id: 0, bus: 1, p_mw: 20, q_mvar: 6 },
    { id: 1, bus: 2, p_mw: 10, q_mvar: 3 },
  ],
};

const positions = new Map([
  [0, { x: 100, y: 100 }],
  [1, { x: 300, y: 100 }],
  [2, { x: 500, y: 100 }],
]);

function safety(over: Partial<SafetyPayload> = {}): SafetyPayload {
  return {
    safe: true,
    converged: true,
    worst_line_loading: 40,
    v_extremes: [0.99, 1.0],
    line_violations: [],
    voltage_violations: [],
    line_loading_pct: [
      [0, 40.2],
      [1, 20.1],
    ],
    bus_voltage: [
      [0, 1.0],
      [1, 0.995],
      [2, 0.99],
    ],
    iterations: 3,
    ...over,
  };
}

function state(over: Partial<NetworkState> = {}): NetworkState {
  return {
    doc,
    positions,
    safety: safety(),
    outage: [],
    islandedLoads: [],
    fractions: new Map(),
    ...over,
  };
}

describe('renderNetwork', () => {
  it('labels every in-service line with its loading', () => {
    const svg = renderNetwork(state());
    expect(svg).toContain('>40%</text>');
    expect(svg).toContain('>20%</text>');
    expect(svg).not.toContain('overload');
  });

  it('highlights overloaded lines with their percentage', () => {
    const svg = renderNetwork(
      state({
        safety: safety({
          safe: false,
          worst_line_loading: 128.4,
          line_violations: [[0, 128.4]],
          line_loading_pct: [
            [0, 128.4],
            [1, 61.0],
          ],
        }),
      }),
    );
    expect(svg).toContain('class="branch overload"');
    expect(svg).toMatch(/class="line-label overload"[^>]*>128%<\/text>/);
  });

  it('marks outaged lines and never labels them with loading', () => {
    const svg = renderNetwork(state({ outage: [1], safety: null }));
    expect(svg).toContain('class="branch out"');
    expect(svg).toContain('>out</text>');
    // loading labels carry data-line; none should exist without safety data
    expect(svg).not.toContain('line-label" data-line');
  });

  it('shows per-load fraction badges', () => {
    const svg = renderNetwork(
      state({ fractions: new Map([[0, 0.7], [1, 0]]) }),
    );
    expect(svg).toMatch(/load-badge shed[^>]*data-load="0"[^>]*>L0 70%/);
    expect(svg).toMatch(/load-badge dropped[^>]*data-load="1"[^>]*>L1 0%/);
  });

  it('marks islanded loads', () => {
    const svg = renderNetwork(state({ islandedLoads: [1], safety: null }));
    expect(svg).toMatch(/load-badge islanded[^>]*>L1 islanded/);
  });

  it('flags voltage violations on buses', () => {
    const svg = renderNetwork(
      state({ safety: safety({ voltage_violations: [[2, 0.82]] }) }),
    );
    expect(svg).toMatch(/circle class="bus pq violation" data-bus="2"/);
  });

  it('renders an intact safe case with zero highlights', () => {
    const svg = renderNetwork(state());
    expect(svg).not.toContain('violation');
    expect(svg).not.toContain('out');
    expect(svg).toMatch(/load-badge"[^>]*>L0 100%/);
  });
});

describe('renderChart', () => {
  it('draws one polyline per series', () => {
    const svg = renderChart([
      { name: 'seed 0', color: '#111', points: [[0, 40], [5, 20]] },
      { name: 'seed 1', color: '#222', points: [[0, 42], [5, 22]] },
    ]);
    expect(svg.match(/<polyline/g)).toHaveLength(2);
    expect(svg).toContain('data-name="seed 0"');
    expect(svg).toContain('remaining MW');
  });

  it('degrades gracefully with no data', () => {
    expect(renderChart([])).toContain('no convergence data');
  });

  it('renders a legend entry per series', () => {
    const html = renderLegend([
      { name: 'seed 0', color: '#111', points: [] },
      { name: 'seed 1 stage 2', color: '#222', points: [] },
    ]);
    expect(html).toContain('seed 0');
    expect(html).toContain('seed 1 stage 2');
  });
});
